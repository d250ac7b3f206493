#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "pref/errors.hpp"
#include "pref/tasks/mesh.hpp"
#include "pref/tasks/sdf.hpp"

using namespace pref;
using namespace pref::tasks;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("pref_mesh_test_" + name);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

// Unit cube [0, 1]^3 as quads with slash-separated indices.
const char* kCubeObj = R"(# cube
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
v 1 1 1
v 0 1 1
vn 0 0 1
f 1/1/1 4/1/1 3/1/1 2/1/1
f 5 6 7 8
f 1 2 6 5
f 2 3 7 6
f 3 4 8 7
f -8 -4 -1 -5
)";

}  // namespace

TEST(Obj, ParsesPolygonsIndexFormsAndNegativeIndices) {
  const auto path = temp_path("cube.obj");
  write_text(path, kCubeObj);
  const Mesh cube = read_obj(path);
  EXPECT_EQ(cube.vertices.size(), 8u);
  EXPECT_EQ(cube.faces.size(), 12u);
  EXPECT_TRUE(is_watertight(cube));
  EXPECT_NEAR(signed_volume(cube), 1.0, 1e-12);
  EXPECT_NEAR(surface_area(cube), 6.0, 1e-12);
  std::filesystem::remove(path);
}

TEST(Obj, WriteReadRoundTrip) {
  const Mesh sphere = icosphere(0.5, 1);
  const auto path = temp_path("sphere.obj");
  write_obj(path, sphere);
  const Mesh back = read_obj(path);
  ASSERT_EQ(back.vertices.size(), sphere.vertices.size());
  EXPECT_EQ(back.faces, sphere.faces);
  for (std::size_t i = 0; i < back.vertices.size(); ++i) {
    EXPECT_EQ(back.vertices[i], sphere.vertices[i]);
  }
  std::filesystem::remove(path);
}

TEST(Obj, ErrorsAreTyped) {
  EXPECT_THROW(read_obj(temp_path("missing.obj")), IoError);
  const auto path = temp_path("bad.obj");
  write_text(path, "v 0 0 0\nv 1 0 0\nf 1 2 9\n");
  EXPECT_THROW(read_obj(path), FormatError);
  write_text(path, "v 0 zero 0\n");
  EXPECT_THROW(read_obj(path), FormatError);
  std::filesystem::remove(path);
}

TEST(Icosphere, IsWatertightOutwardAndNearlyRound) {
  const Mesh s = icosphere(0.5, 3);
  EXPECT_EQ(s.faces.size(), 20u * 64);
  EXPECT_TRUE(is_watertight(s));
  const double exact = 4.0 / 3.0 * std::numbers::pi * 0.125;
  EXPECT_GT(signed_volume(s), 0.0);
  EXPECT_NEAR(signed_volume(s), exact, 0.02 * exact);
  for (const Vec3& v : s.vertices) EXPECT_NEAR(v.norm(), 0.5, 1e-12);
}

TEST(Mesh, FlippedFacesAreNotWatertightWhenMixed) {
  Mesh s = icosphere(0.5, 1);
  std::swap(s.faces[0][1], s.faces[0][2]);
  EXPECT_FALSE(is_watertight(s));
  s.faces.pop_back();
  EXPECT_FALSE(is_watertight(s));
}

TEST(Mesh, NormalizeFitsTheLongestSide) {
  Mesh m;
  m.vertices = {Vec3(1, 1, 1), Vec3(5, 2, 1), Vec3(3, 3, 2)};
  m.faces = {{0, 1, 2}};
  const Mesh n = normalize_mesh(m);
  Vec3 lo = n.vertices[0];
  Vec3 hi = n.vertices[0];
  for (const Vec3& v : n.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  EXPECT_NEAR(lo.x(), -0.9, 1e-12);
  EXPECT_NEAR(hi.x(), 0.9, 1e-12);
  EXPECT_NEAR(lo.y() + hi.y(), 0.0, 1e-12);
}

TEST(MeshQuery, DistancesAndInsideMatchTheAnalyticSphere) {
  const Mesh s = icosphere(0.5, 4);
  const MeshQuery q(s);
  EXPECT_TRUE(q.watertight());
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const Vec3 p(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    const double exact = p.norm() - 0.5;
    if (std::abs(exact) < 0.01) continue;
    // Chord sag of the tessellation is below 0.003 at this subdivision level.
    EXPECT_NEAR(q.signed_distance(p), exact, 3e-3);
    EXPECT_EQ(q.inside(p), exact < 0);
    EXPECT_EQ(q.ray_parity_inside(p), exact < 0);
  }
  EXPECT_NEAR(q.winding_number(Vec3::Zero()), 1.0, 1e-9);
  EXPECT_NEAR(q.winding_number(Vec3(0.9, 0.1, 0)), 0.0, 1e-9);
}

TEST(MeshQuery, InsideIsIndependentOfOrientation) {
  Mesh s = icosphere(0.5, 2);
  for (auto& f : s.faces) std::swap(f[1], f[2]);
  const MeshQuery q(s);
  EXPECT_NEAR(q.winding_number(Vec3::Zero()), -1.0, 1e-9);
  EXPECT_TRUE(q.inside(Vec3::Zero()));
  EXPECT_LT(q.signed_distance(Vec3::Zero()), 0.0);
}

TEST(SdfSample, SplitsFourThreeOne) {
  const SphereShape sphere(0.5);
  Rng rng(4);
  const SdfSampleSet s = sdf_sample(sphere, 800, rng);
  int counts[3] = {0, 0, 0};
  for (SampleKind k : s.kinds) ++counts[static_cast<int>(k)];
  EXPECT_EQ(counts[0], 400);
  EXPECT_EQ(counts[1], 300);
  EXPECT_EQ(counts[2], 100);
  for (Eigen::Index i = 0; i < s.points.rows(); ++i) {
    const Vec3 p = s.points.row(i).transpose();
    EXPECT_NEAR(s.sdf(i), p.norm() - 0.5, 1e-12);
    if (s.kinds[i] == SampleKind::Surface) EXPECT_EQ(s.sdf(i), 0.0);
    if (s.kinds[i] == SampleKind::Uniform) EXPECT_LE(p.cwiseAbs().maxCoeff(), 1.0);
  }
}

TEST(SdfSample, MeshSurfaceSamplesLieOnTheSurface) {
  const MeshShape shape(icosphere(0.5, 3));
  Rng rng(5);
  const SdfSampleSet s = sdf_sample(shape, 400, rng);
  for (Eigen::Index i = 0; i < s.points.rows(); ++i) {
    if (s.kinds[i] != SampleKind::Surface) continue;
    EXPECT_LE(std::abs(shape.signed_distance(s.points.row(i).transpose())), 1e-3);
  }
  EXPECT_NEAR(shape.signed_distance(Vec3::Zero()), -0.5, 5e-3);
}

TEST(Mesh, SurfaceSamplingIsAreaWeighted) {
  // Two triangles, the second four times the area of the first.
  Mesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 5), Vec3(2, 0, 5), Vec3(0, 2, 5)};
  m.faces = {{0, 1, 2}, {3, 4, 5}};
  Rng rng(6);
  const auto pts = sample_surface(m, 10000, rng);
  int high = 0;
  for (const Vec3& p : pts) high += p.z() > 2.5;
  EXPECT_NEAR(high / 10000.0, 0.8, 0.02);
}
