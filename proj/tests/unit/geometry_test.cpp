#include <gtest/gtest.h>

#include <cmath>

#include "pref/errors.hpp"
#include "pref/tasks/geometry.hpp"

using namespace pref;
using namespace pref::tasks;

namespace {

FieldSampler sphere_field(double radius) {
  return [radius](const Matrix& p) -> Vector { return p.rowwise().norm().array() - radius; };
}

}  // namespace

TEST(MarchingCubes, ConstantFieldGivesAnEmptyMesh) {
  const FieldSampler positive = [](const Matrix& p) -> Vector { return Vector::Constant(p.rows(), 1.0); };
  EXPECT_TRUE(marching_cubes(positive, 16).empty());
  const FieldSampler negative = [](const Matrix& p) -> Vector { return Vector::Constant(p.rows(), -1.0); };
  EXPECT_TRUE(marching_cubes(negative, 16).empty());
  EXPECT_THROW(marching_cubes(positive, 1), DomainError);
}

TEST(MarchingCubes, PlaneIsRecoveredExactly) {
  const FieldSampler plane = [](const Matrix& p) -> Vector { return p.col(0) - Vector::Constant(p.rows(), 0.1); };
  const Mesh m = marching_cubes(plane, 20);
  ASSERT_FALSE(m.empty());
  for (const Vec3& v : m.vertices) EXPECT_NEAR(v.x(), 0.1, 1e-6);
  // Faces point towards positive values (+x).
  for (const auto& f : m.faces) {
    const Vec3 n = (m.vertices[f[1]] - m.vertices[f[0]]).cross(m.vertices[f[2]] - m.vertices[f[0]]);
    EXPECT_GT(n.x(), 0.0);
  }
}

TEST(MarchingCubes, SphereIsWatertightCloseAndOutward) {
  const Mesh m = marching_cubes(sphere_field(0.5), 64);
  EXPECT_TRUE(is_watertight(m));
  double maxdev = 0.0;
  for (const Vec3& v : m.vertices) maxdev = std::max(maxdev, std::abs(v.norm() - 0.5));
  EXPECT_LE(maxdev, 2.0 / 64);
  const double exact = 4.0 / 3.0 * M_PI * 0.125;
  EXPECT_GT(signed_volume(m), 0.0);
  EXPECT_NEAR(signed_volume(m), exact, 0.01 * exact);
}

TEST(Iou, IdenticalDisjointAndNestedSpheres) {
  EXPECT_DOUBLE_EQ(iou(sphere_field(0.5), sphere_field(0.5), 32), 1.0);
  const FieldSampler shifted = [](const Matrix& p) -> Vector {
    return (p.rowwise() - Eigen::RowVector3d(0.7, 0, 0)).rowwise().norm().array() - 0.2;
  };
  const FieldSampler other = [](const Matrix& p) -> Vector {
    return (p.rowwise() - Eigen::RowVector3d(-0.7, 0, 0)).rowwise().norm().array() - 0.2;
  };
  EXPECT_DOUBLE_EQ(iou(shifted, other, 32), 0.0);
  // Volume ratio (0.45 / 0.5)^3.
  EXPECT_NEAR(iou(sphere_field(0.45), sphere_field(0.5), 128), 0.729, 0.01);
  const FieldSampler empty = [](const Matrix& p) -> Vector { return Vector::Ones(p.rows()); };
  EXPECT_DOUBLE_EQ(iou(empty, empty, 8), 1.0);
}

TEST(Iou, MaskOverloadAgrees) {
  const auto a = occupancy(sphere_field(0.5), 24);
  const auto b = occupancy(sphere_field(0.3), 24);
  EXPECT_DOUBLE_EQ(iou(a, b), iou(sphere_field(0.5), sphere_field(0.3), 24));
  EXPECT_THROW(iou(a, std::vector<bool>(3)), DimensionError);
}

TEST(Chamfer, ConcentricSpheresAreTheirRadialGapApart) {
  const Mesh a = icosphere(0.5, 4);
  const Mesh b = icosphere(0.45, 4);
  Rng rng(1);
  EXPECT_NEAR(chamfer_distance(a, b, 4000, rng, 2), 0.05, 0.004);
  // Independent sample sets of one surface are about half a sample spacing apart.
  EXPECT_LT(chamfer_distance(a, a, 4000, rng), 0.02);
}

TEST(Chamfer, PointSetsAndSymmetry) {
  const std::vector<Vec3> a{Vec3(0, 0, 0), Vec3(1, 0, 0)};
  const std::vector<Vec3> b{Vec3(0, 0, 0)};
  // a -> b: mean(0, 1) = 0.5; b -> a: 0. Average 0.25.
  EXPECT_DOUBLE_EQ(chamfer_distance(a, b), 0.25);
  EXPECT_DOUBLE_EQ(chamfer_distance(b, a), 0.25);
}

TEST(Chamfer, EmptyMeshIsADomainError) {
  Rng rng(2);
  EXPECT_THROW(chamfer_distance(Mesh{}, icosphere(0.5, 1), 10, rng), DomainError);
  EXPECT_THROW(chamfer_distance(std::vector<Vec3>{}, std::vector<Vec3>{Vec3::Zero()}), DomainError);
}
