#include "pref/tasks/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>

#include "pref/errors.hpp"

namespace pref::tasks {

namespace {

struct Box {
  Vec3 lo = Vec3::Constant(INFINITY);
  Vec3 hi = Vec3::Constant(-INFINITY);

  void grow(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  double squared_distance(const Vec3& p) const {
    const Vec3 d = (lo - p).cwiseMax(p - hi).cwiseMax(0.0);
    return d.squaredNorm();
  }
  bool hit(const Vec3& origin, const Vec3& inv_dir) const {
    double t0 = 0.0;
    double t1 = INFINITY;
    for (int i = 0; i < 3; ++i) {
      double a = (lo[i] - origin[i]) * inv_dir[i];
      double b = (hi[i] - origin[i]) * inv_dir[i];
      if (a > b) std::swap(a, b);
      t0 = std::max(t0, a);
      t1 = std::min(t1, b);
    }
    return t0 <= t1;
  }
};

// Closest point on triangle abc to p (Ericson, Real-Time Collision Detection 5.1.5).
Vec3 closest_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + ab * (d1 / (d1 - d3));
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + ac * (d2 / (d2 - d6));
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
  }
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

// Moller-Trumbore; true when the ray hits the triangle at t > 0.
bool ray_hits(const Vec3& origin, const Vec3& dir, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 h = dir.cross(e2);
  const double det = e1.dot(h);
  if (std::abs(det) < 1e-14) return false;
  const double inv = 1.0 / det;
  const Vec3 s = origin - a;
  const double u = inv * s.dot(h);
  if (u < 0.0 || u > 1.0) return false;
  const Vec3 q = s.cross(e1);
  const double v = inv * dir.dot(q);
  if (v < 0.0 || u + v > 1.0) return false;
  return inv * e2.dot(q) > 1e-12;
}

}  // namespace

struct MeshQuery::Tree {
  struct Node {
    Box box;
    int left = -1;
    int right = -1;
    int begin = 0;
    int end = 0;
  };

  std::vector<Vec3> a;
  std::vector<Vec3> b;
  std::vector<Vec3> c;
  std::vector<int> order;
  std::vector<Node> nodes;

  int build(int begin, int end, const std::vector<Vec3>& centroids) {
    Node node;
    node.begin = begin;
    node.end = end;
    Box centroid_box;
    for (int i = begin; i < end; ++i) {
      const int t = order[i];
      node.box.grow(a[t]);
      node.box.grow(b[t]);
      node.box.grow(c[t]);
      centroid_box.grow(centroids[t]);
    }
    const int index = static_cast<int>(nodes.size());
    nodes.push_back(node);
    if (end - begin <= 4) return index;
    int axis = 0;
    const Vec3 extent = centroid_box.hi - centroid_box.lo;
    if (extent[1] > extent[axis]) axis = 1;
    if (extent[2] > extent[axis]) axis = 2;
    const int mid = (begin + end) / 2;
    std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                     [&](int x, int y) { return centroids[x][axis] < centroids[y][axis]; });
    const int left = build(begin, mid, centroids);
    const int right = build(mid, end, centroids);
    nodes[index].left = left;
    nodes[index].right = right;
    return index;
  }
};

MeshQuery::MeshQuery(const Mesh& mesh) : tree_(std::make_unique<Tree>()), watertight_(is_watertight(mesh)) {
  if (mesh.faces.empty()) throw DomainError("mesh query needs at least one triangle");
  const auto n = static_cast<int>(mesh.vertices.size());
  std::vector<Vec3> centroids;
  for (const auto& f : mesh.faces) {
    for (int v : f) {
      if (v < 0 || v >= n) throw FormatError("face references a missing vertex", 0);
    }
    tree_->a.push_back(mesh.vertices[f[0]]);
    tree_->b.push_back(mesh.vertices[f[1]]);
    tree_->c.push_back(mesh.vertices[f[2]]);
    centroids.push_back((mesh.vertices[f[0]] + mesh.vertices[f[1]] + mesh.vertices[f[2]]) / 3.0);
  }
  tree_->order.resize(mesh.faces.size());
  std::iota(tree_->order.begin(), tree_->order.end(), 0);
  tree_->build(0, static_cast<int>(mesh.faces.size()), centroids);
}

MeshQuery::~MeshQuery() = default;
MeshQuery::MeshQuery(MeshQuery&&) noexcept = default;
MeshQuery& MeshQuery::operator=(MeshQuery&&) noexcept = default;

double MeshQuery::unsigned_distance(const Vec3& p) const {
  const Tree& t = *tree_;
  double best = INFINITY;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Tree::Node& node = t.nodes[stack.back()];
    stack.pop_back();
    if (node.box.squared_distance(p) >= best) continue;
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int f = t.order[i];
        best = std::min(best, (closest_on_triangle(p, t.a[f], t.b[f], t.c[f]) - p).squaredNorm());
      }
      continue;
    }
    const double dl = t.nodes[node.left].box.squared_distance(p);
    const double dr = t.nodes[node.right].box.squared_distance(p);
    // Visit the nearer child first.
    if (dl < dr) {
      stack.push_back(node.right);
      stack.push_back(node.left);
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  return std::sqrt(best);
}

double MeshQuery::winding_number(const Vec3& p) const {
  const Tree& t = *tree_;
  double total = 0.0;
  for (std::size_t f = 0; f < t.a.size(); ++f) {
    const Vec3 a = t.a[f] - p;
    const Vec3 b = t.b[f] - p;
    const Vec3 c = t.c[f] - p;
    const double la = a.norm();
    const double lb = b.norm();
    const double lc = c.norm();
    const double numerator = a.dot(b.cross(c));
    const double denominator = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
    total += 2.0 * std::atan2(numerator, denominator);
  }
  return total / (4.0 * std::numbers::pi);
}

namespace {

const Vec3 kRayDirections[3] = {Vec3(0.5773, 0.5774, 0.5773).normalized(), Vec3(-0.2113, 0.7887, -0.5774).normalized(),
                                Vec3(0.8165, -0.4082, -0.4083).normalized()};

}  // namespace

bool MeshQuery::ray_parity_inside(const Vec3& p) const {
  const Tree& t = *tree_;
  int votes = 0;
  for (const Vec3& dir : kRayDirections) {
    const Vec3 inv = dir.cwiseInverse();
    int crossings = 0;
    std::vector<int> stack{0};
    while (!stack.empty()) {
      const Tree::Node& node = t.nodes[stack.back()];
      stack.pop_back();
      if (!node.box.hit(p, inv)) continue;
      if (node.left < 0) {
        for (int i = node.begin; i < node.end; ++i) {
          const int f = t.order[i];
          if (ray_hits(p, dir, t.a[f], t.b[f], t.c[f])) ++crossings;
        }
        continue;
      }
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
    if (crossings % 2 == 1) ++votes;
  }
  return votes >= 2;
}

bool MeshQuery::inside(const Vec3& p) const {
  // The magnitude makes the test independent of the face orientation.
  return watertight_ ? std::abs(winding_number(p)) >= 0.5 : ray_parity_inside(p);
}

double MeshQuery::signed_distance(const Vec3& p) const {
  const double d = unsigned_distance(p);
  return inside(p) ? -d : d;
}

Mesh read_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  Mesh mesh;
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    const std::size_t line_offset = offset;
    offset += line.size() + 1;
    std::istringstream tokens(line);
    std::string tag;
    if (!(tokens >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 v;
      if (!(tokens >> v[0] >> v[1] >> v[2])) throw FormatError("malformed vertex in '" + path.string() + "'", line_offset);
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> polygon;
      std::string item;
      while (tokens >> item) {
        const std::string head = item.substr(0, item.find('/'));
        int index = 0;
        try {
          std::size_t used = 0;
          index = std::stoi(head, &used);
          if (used != head.size()) throw std::invalid_argument(head);
        } catch (const std::logic_error&) {
          throw FormatError("malformed face index '" + item + "' in '" + path.string() + "'", line_offset);
        }
        const int count = static_cast<int>(mesh.vertices.size());
        const int resolved = index > 0 ? index - 1 : count + index;
        if (index == 0 || resolved < 0 || resolved >= count) {
          throw FormatError("face index out of range in '" + path.string() + "'", line_offset);
        }
        polygon.push_back(resolved);
      }
      if (polygon.size() < 3) throw FormatError("face with fewer than 3 vertices in '" + path.string() + "'", line_offset);
      for (std::size_t i = 1; i + 1 < polygon.size(); ++i) mesh.faces.push_back({polygon[0], polygon[i], polygon[i + 1]});
    }
  }
  return mesh;
}

void write_obj(const std::filesystem::path& path, const Mesh& mesh) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.precision(std::numeric_limits<double>::max_digits10);
  for (const Vec3& v : mesh.vertices) out << "v " << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
  for (const auto& f : mesh.faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Mesh icosphere(double radius, int subdivisions, const Vec3& center) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  Mesh mesh;
  mesh.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                   {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  mesh.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (Vec3& v : mesh.vertices) v.normalize();
  for (int level = 0; level < subdivisions; ++level) {
    std::map<std::pair<int, int>, int> midpoints;
    const auto midpoint = [&](int i, int j) {
      const auto key = std::minmax(i, j);
      const auto it = midpoints.find(key);
      if (it != midpoints.end()) return it->second;
      mesh.vertices.push_back((mesh.vertices[i] + mesh.vertices[j]).normalized());
      const int index = static_cast<int>(mesh.vertices.size()) - 1;
      midpoints.emplace(key, index);
      return index;
    };
    std::vector<std::array<int, 3>> faces;
    for (const auto& f : mesh.faces) {
      const int ab = midpoint(f[0], f[1]);
      const int bc = midpoint(f[1], f[2]);
      const int ca = midpoint(f[2], f[0]);
      faces.push_back({f[0], ab, ca});
      faces.push_back({f[1], bc, ab});
      faces.push_back({f[2], ca, bc});
      faces.push_back({ab, bc, ca});
    }
    mesh.faces = std::move(faces);
  }
  if (signed_volume(mesh) < 0.0) {
    for (auto& f : mesh.faces) std::swap(f[1], f[2]);
  }
  for (Vec3& v : mesh.vertices) v = center + radius * v;
  return mesh;
}

bool is_watertight(const Mesh& mesh) {
  if (mesh.faces.empty()) return false;
  std::map<std::pair<int, int>, int> directed;
  for (const auto& f : mesh.faces) {
    for (int i = 0; i < 3; ++i) {
      if (f[i] == f[(i + 1) % 3]) return false;
      if (++directed[{f[i], f[(i + 1) % 3]}] > 1) return false;
    }
  }
  for (const auto& [edge, count] : directed) {
    if (!directed.count({edge.second, edge.first})) return false;
  }
  return true;
}

double signed_volume(const Mesh& mesh) {
  double volume = 0.0;
  for (const auto& f : mesh.faces) {
    volume += mesh.vertices[f[0]].dot(mesh.vertices[f[1]].cross(mesh.vertices[f[2]]));
  }
  return volume / 6.0;
}

double surface_area(const Mesh& mesh) {
  double area = 0.0;
  for (const auto& f : mesh.faces) {
    area += 0.5 * (mesh.vertices[f[1]] - mesh.vertices[f[0]]).cross(mesh.vertices[f[2]] - mesh.vertices[f[0]]).norm();
  }
  return area;
}

Mesh normalize_mesh(const Mesh& mesh, double extent) {
  if (mesh.vertices.empty()) return mesh;
  Box box;
  for (const Vec3& v : mesh.vertices) box.grow(v);
  const Vec3 center = 0.5 * (box.lo + box.hi);
  const double side = (box.hi - box.lo).maxCoeff();
  const double scale = side > 0.0 ? 2.0 * extent / side : 1.0;
  Mesh out = mesh;
  for (Vec3& v : out.vertices) v = (v - center) * scale;
  return out;
}

std::vector<Vec3> sample_surface(const Mesh& mesh, int count, Rng& rng) {
  if (mesh.faces.empty()) throw DomainError("cannot sample an empty mesh");
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& f : mesh.faces) {
    total += 0.5 * (mesh.vertices[f[1]] - mesh.vertices[f[0]]).cross(mesh.vertices[f[2]] - mesh.vertices[f[0]]).norm();
    cumulative.push_back(total);
  }
  std::vector<Vec3> points;
  points.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double pick = rng.uniform() * total;
    const auto face = std::min<std::size_t>(
        static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin()),
        mesh.faces.size() - 1);
    const auto& f = mesh.faces[face];
    const double r1 = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    points.push_back((1.0 - r1) * mesh.vertices[f[0]] + r1 * (1.0 - r2) * mesh.vertices[f[1]] +
                     r1 * r2 * mesh.vertices[f[2]]);
  }
  return points;
}

}  // namespace pref::tasks
