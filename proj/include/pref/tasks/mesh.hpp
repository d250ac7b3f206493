#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "pref/random.hpp"

namespace pref::tasks {

using Vec3 = Eigen::Vector3d;

struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;

  bool empty() const { return faces.empty(); }
};

// Wavefront OBJ: `v x y z` and `f a b c ...` records (polygons are fanned,
// `a/b/c` index forms and negative indices are accepted). Throws IoError /
// FormatError.
Mesh read_obj(const std::filesystem::path& path);
void write_obj(const std::filesystem::path& path, const Mesh& mesh);

// Subdivided icosahedron projected onto a sphere, outward-facing triangles.
Mesh icosphere(double radius, int subdivisions, const Vec3& center = Vec3::Zero());

// Every undirected edge is shared by exactly two faces that traverse it in
// opposite directions.
bool is_watertight(const Mesh& mesh);

// Signed enclosed volume; positive for outward-facing triangles.
double signed_volume(const Mesh& mesh);
double surface_area(const Mesh& mesh);

// Uniformly scales and translates the mesh so its bounding box is centered
// at the origin with the longest side spanning [-extent, extent].
Mesh normalize_mesh(const Mesh& mesh, double extent = 0.9);

// Area-weighted uniform samples on the surface.
std::vector<Vec3> sample_surface(const Mesh& mesh, int count, Rng& rng);

// Point queries against a fixed triangle mesh, accelerated by a bounding
// volume hierarchy.
class MeshQuery {
 public:
  explicit MeshQuery(const Mesh& mesh);
  ~MeshQuery();
  MeshQuery(MeshQuery&&) noexcept;
  MeshQuery& operator=(MeshQuery&&) noexcept;

  bool watertight() const { return watertight_; }

  double unsigned_distance(const Vec3& p) const;
  // Generalized winding number (solid angle sum / 4 pi).
  double winding_number(const Vec3& p) const;
  // Odd count of crossings along a fixed ray direction.
  bool ray_parity_inside(const Vec3& p) const;
  // |winding number| >= 0.5 on watertight meshes; otherwise the majority of
  // three ray-parity votes.
  bool inside(const Vec3& p) const;
  // Negative inside.
  double signed_distance(const Vec3& p) const;

 private:
  struct Tree;
  std::unique_ptr<Tree> tree_;
  bool watertight_;
};

}  // namespace pref::tasks
