#include <gtest/gtest.h>

#include <cmath>

#include "pref/errors.hpp"
#include "pref/tasks/dense_grid.hpp"
#include "pref/verify/oracles.hpp"

using namespace pref;
using tasks::DenseGrid;

namespace {

double phasor_parameters(const FrequencyLayout& layout, int channels) {
  double total = 0.0;
  for (int a = 0; a < layout.dims(); ++a) total += 2.0 * channels * static_cast<double>(layout.factor_size(a));
  return total;
}

}  // namespace

TEST(DenseGrid, MatchedResolutionIsTheClosestParameterCount) {
  struct Case {
    int dims, n, d, k;
  };
  for (const Case c : {Case{2, 32, 5, 8}, Case{2, 128, 7, 8}, Case{3, 128, 6, 16}, Case{3, 16, 3, 8}}) {
    const auto layout = FrequencyLayout::uniform(c.dims, c.n, c.d);
    const int m = tasks::matched_grid_resolution(layout, c.k);
    const double target = phasor_parameters(layout, c.k);
    const auto count = [&](int r) { return std::pow(r, c.dims) * c.k; };
    EXPECT_LE(std::abs(count(m) - target), std::abs(count(m + 1) - target));
    EXPECT_LE(std::abs(count(m) - target), std::abs(count(m - 1) - target));
    // Coarse lattices cannot always land within 5%.
    if (m >= 20) EXPECT_LT(std::abs(count(m) - target) / target, 0.05) << c.dims << " " << c.n << " " << c.d;
  }
}

TEST(DenseGrid, InterpolatesNodesExactlyAndLinearlyBetween) {
  DenseGrid grid(2, {4, 5}, 2);
  grid.randomize(1.0, 3);
  const auto v = grid.values();
  Matrix x(1, 2);
  x << 1.0 / 4, 3.0 / 5;
  const std::size_t node = 1 * 5 + 3;
  Matrix f = grid.evaluate(x);
  EXPECT_NEAR(f(0, 0), v[node * 2], 1e-15);
  EXPECT_NEAR(f(0, 1), v[node * 2 + 1], 1e-15);
  // Halfway along axis 1 between nodes (1, 3) and (1, 4).
  x << 1.0 / 4, 3.5 / 5;
  f = grid.evaluate(x);
  EXPECT_NEAR(f(0, 0), 0.5 * (v[(1 * 5 + 3) * 2] + v[(1 * 5 + 4) * 2]), 1e-14);
}

TEST(DenseGrid, IsPeriodic) {
  DenseGrid grid(3, {3, 4, 5}, 2);
  grid.randomize(1.0, 4);
  Rng rng(5);
  const Matrix x = verify::random_coords(20, 3, rng);
  const Matrix shifted = (x.array() + 1.0).matrix();
  EXPECT_LT((grid.evaluate(x) - grid.evaluate(shifted)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DenseGrid, BackpropIsTheAdjointOfEvaluate) {
  DenseGrid grid(2, {6, 7}, 3);
  grid.randomize(1.0, 6);
  Rng rng(7);
  const Matrix x = verify::random_coords(25, 2, rng);
  Matrix upstream(25, 3);
  for (Eigen::Index i = 0; i < upstream.size(); ++i) upstream.data()[i] = rng.normal();
  std::vector<double> grad(grid.parameter_count(), 0.0);
  grid.backprop(x, upstream, grad);

  // The map is linear in the values, so a finite difference is exact up to rounding.
  const double h = 1e-6;
  for (std::size_t i = 0; i < grad.size(); i += 7) {
    const double orig = grid.mutable_values()[i];
    grid.mutable_values()[i] = orig + h;
    const double plus = (grid.evaluate(x).array() * upstream.array()).sum();
    grid.mutable_values()[i] = orig - h;
    const double minus = (grid.evaluate(x).array() * upstream.array()).sum();
    grid.mutable_values()[i] = orig;
    EXPECT_NEAR(grad[i], (plus - minus) / (2 * h), 1e-7);
  }
}

TEST(DenseGrid, RandomizeIsSeededAndFloatExact) {
  DenseGrid a(2, {8, 8}, 2);
  DenseGrid b(2, {8, 8}, 2);
  a.randomize(0.1, 1);
  b.randomize(0.1, 1);
  EXPECT_TRUE(a == b);
  for (double v : a.values()) EXPECT_EQ(v, static_cast<double>(static_cast<float>(v)));
}

TEST(DenseGrid, RejectsBadShapes) {
  EXPECT_THROW(DenseGrid(2, {1, 4}, 2), LayoutError);
  EXPECT_THROW(DenseGrid(2, {4}, 2), LayoutError);
  EXPECT_THROW(DenseGrid(2, {4, 4}, 0), DomainError);
  DenseGrid grid(2, {4, 4}, 2);
  EXPECT_THROW(grid.evaluate(Matrix::Zero(1, 3)), DimensionError);
  std::vector<double> small(3);
  EXPECT_THROW(grid.backprop(Matrix::Zero(1, 2), Matrix::Zero(1, 2), small), DimensionError);
}
