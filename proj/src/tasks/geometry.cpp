#include "pref/tasks/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "../core/parallel.hpp"
#include "mc_tables.hpp"
#include "pref/errors.hpp"

namespace pref::tasks {

namespace {

constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
constexpr int kEdge[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                              {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

Matrix lattice_points(int res, bool cell_centers) {
  const std::size_t total = static_cast<std::size_t>(res) * res * res;
  Matrix points(static_cast<Eigen::Index>(total), 3);
  const auto coord = [&](int i) {
    return cell_centers ? -1.0 + (i + 0.5) * 2.0 / res : -1.0 + i * 2.0 / (res - 1);
  };
  Eigen::Index row = 0;
  for (int i = 0; i < res; ++i) {
    for (int j = 0; j < res; ++j) {
      for (int k = 0; k < res; ++k, ++row) points.row(row) << coord(i), coord(j), coord(k);
    }
  }
  return points;
}

}  // namespace

Mesh marching_cubes(const FieldSampler& field, int res) {
  if (res < 2) throw DomainError("marching cubes needs res >= 2");
  const Matrix points = lattice_points(res, false);
  const Vector values = field(points);
  if (values.size() != points.rows()) throw DimensionError("field sampler returned the wrong number of values");
  if (!values.allFinite()) throw NumericError("field sampler returned non-finite values");

  const auto index = [res](int i, int j, int k) {
    return (static_cast<std::size_t>(i) * res + j) * res + k;
  };
  // Vertex id per lattice edge, keyed by its lower endpoint and direction.
  std::vector<int> edge_vertex(values.size() * 3, -1);
  Mesh mesh;

  for (int i = 0; i + 1 < res; ++i) {
    for (int j = 0; j + 1 < res; ++j) {
      for (int k = 0; k + 1 < res; ++k) {
        int cube = 0;
        double v[8];
        std::size_t id[8];
        for (int c = 0; c < 8; ++c) {
          id[c] = index(i + kCorner[c][0], j + kCorner[c][1], k + kCorner[c][2]);
          v[c] = values(static_cast<Eigen::Index>(id[c]));
          if (v[c] < 0.0) cube |= 1 << c;
        }
        const int edges = mc_tables::kEdgeTable[cube];
        if (edges == 0) continue;
        int vertex[12];
        for (int e = 0; e < 12; ++e) {
          if (!(edges & (1 << e))) continue;
          int c0 = kEdge[e][0];
          int c1 = kEdge[e][1];
          if (id[c0] > id[c1]) std::swap(c0, c1);
          int direction = 0;
          while (kCorner[c1][direction] == kCorner[c0][direction]) ++direction;
          int& slot = edge_vertex[id[c0] * 3 + direction];
          if (slot < 0) {
            const double t = v[c0] / (v[c0] - v[c1]);
            const Vec3 p0 = points.row(static_cast<Eigen::Index>(id[c0])).transpose();
            const Vec3 p1 = points.row(static_cast<Eigen::Index>(id[c1])).transpose();
            mesh.vertices.push_back(p0 + t * (p1 - p0));
            slot = static_cast<int>(mesh.vertices.size()) - 1;
          }
          vertex[e] = slot;
        }
        const int* tri = mc_tables::kTriTable[cube];
        for (int t = 0; tri[t] != -1; t += 3) {
          // Table winding faces the negative side; reverse it to face outward.
          mesh.faces.push_back({vertex[tri[t]], vertex[tri[t + 2]], vertex[tri[t + 1]]});
        }
      }
    }
  }
  return mesh;
}

std::vector<bool> occupancy(const FieldSampler& field, int res) {
  if (res < 1) throw DomainError("occupancy lattice needs res >= 1");
  const Vector values = field(lattice_points(res, true));
  std::vector<bool> inside(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) inside[i] = values(i) < 0.0;
  return inside;
}

double iou(const std::vector<bool>& a, const std::vector<bool>& b) {
  if (a.size() != b.size()) throw DimensionError("iou: occupancy sizes differ");
  std::size_t both = 0;
  std::size_t either = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    both += a[i] && b[i];
    either += a[i] || b[i];
  }
  return either == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(either);
}

double iou(const FieldSampler& a, const FieldSampler& b, int res) { return iou(occupancy(a, res), occupancy(b, res)); }

double chamfer_distance(const std::vector<Vec3>& a, const std::vector<Vec3>& b, int threads) {
  if (a.empty() || b.empty()) throw DomainError("Chamfer distance is undefined for an empty point set");
  const auto directed = [threads](const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
    const int workers = detail::worker_count(from.size(), threads);
    std::vector<double> partial(workers, 0.0);
    detail::parallel_chunks(from.size(), threads, [&](std::size_t begin, std::size_t end, int worker) {
      double sum = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (const Vec3& q : to) best = std::min(best, (from[i] - q).squaredNorm());
        sum += std::sqrt(best);
      }
      partial[worker] = sum;
    });
    double total = 0.0;
    for (double p : partial) total += p;
    return total / static_cast<double>(from.size());
  };
  return 0.5 * (directed(a, b) + directed(b, a));
}

double chamfer_distance(const Mesh& a, const Mesh& b, int samples, Rng& rng, int threads) {
  if (a.empty() || b.empty()) throw DomainError("Chamfer distance is undefined for an empty mesh");
  const std::vector<Vec3> pa = sample_surface(a, samples, rng);
  const std::vector<Vec3> pb = sample_surface(b, samples, rng);
  return chamfer_distance(pa, pb, threads);
}

}  // namespace pref::tasks
