#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "pref/errors.hpp"
#include "pref/transform.hpp"
#include "pref/verify/oracles.hpp"

using namespace pref;

namespace {

constexpr double kPi = std::numbers::pi;

PhasorVolume cosine_x() {
  // Unit coefficient at (u=1, v=0) in the factor whose reduced axis is y.
  PhasorVolume v = new_volume(FrequencyLayout::uniform(2, 8, 3), 1);
  v.set_coefficient(1, 0, {1, 0, 0}, Complex(1.0, 0.0));
  return v;
}

Matrix row(std::initializer_list<double> values) {
  Matrix m(1, static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) m(0, i++) = v;
  return m;
}

}  // namespace

TEST(EvalExact, SingleCoefficientIsCosine) {
  const PhasorVolume v = cosine_x();
  EXPECT_NEAR(eval_exact(v, row({0.25, 0.6}))(0, 0), 0.0, 1e-7);
  EXPECT_NEAR(eval_exact(v, row({0.0, 0.3}))(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(eval_exact(v, row({0.1, 0.9}))(0, 0), std::cos(2 * kPi * 0.1), 1e-14);
}

TEST(EvalExact, MatchesDenseSpectrumOracleOnTheGrid) {
  Rng rng(1);
  const auto layout = FrequencyLayout::uniform(2, 8, 3);
  const PhasorVolume v = verify::random_volume(layout, 2, rng);
  Matrix coords(64, 2);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) coords.row(i * 8 + j) << i / 8.0, j / 8.0;
  }
  EXPECT_LT(verify::relative_error(eval_exact(v, coords), verify::dense_spectrum_eval(v, coords)), 1e-5);
  // Off the grid the merged spectrum still agrees: both are the same trigonometric polynomial.
  const Matrix off = verify::random_coords(64, 2, rng);
  EXPECT_LT(verify::relative_error(eval_exact(v, off), verify::dense_spectrum_eval(v, off)), 1e-12);
}

TEST(EvalExact, RejectsWrongCoordinateWidth) {
  const PhasorVolume v = new_volume(FrequencyLayout::uniform(2, 8, 3), 1);
  EXPECT_THROW(eval_exact(v, Matrix::Zero(3, 3)), DimensionError);
  EXPECT_THROW(eval_fast(v, Matrix::Zero(3, 1)), DimensionError);
}

TEST(EvalExact, CoordinatesWrapPeriodically) {
  Rng rng(2);
  const PhasorVolume v = verify::random_volume(FrequencyLayout::uniform(2, 8, 3), 1, rng);
  const Matrix x = verify::random_coords(16, 2, rng);
  Matrix shifted = x.array() + 3.0;
  shifted.col(1).array() -= 5.0;
  EXPECT_LT(verify::relative_error(eval_exact(v, shifted), eval_exact(v, x)), 1e-12);
  EXPECT_LT(verify::relative_error(eval_fast(v, shifted), eval_fast(v, x)), 1e-12);
}

TEST(EvalFast, AgreesWithExactOnLatticeForAllSizes) {
  Rng rng(3);
  for (int dims : {2, 3}) {
    for (int n : {8, 16, 32}) {
      for (int d : {2, 3, 4}) {
        if (dims == 3 && n == 32) continue;  // keeps the brute-force oracle cheap
        if (2 * (1 << (d - 2)) >= n) continue;
        for (int k : {1, 8}) {
          const auto layout = FrequencyLayout::uniform(dims, n, d);
          const PhasorVolume v = verify::random_volume(layout, k, rng);
          const Matrix coords = verify::lattice_coords(layout, 40, rng);
          EXPECT_LT(verify::relative_error(eval_fast(v, coords), eval_exact(v, coords)), 1e-5)
              << "dims " << dims << " N " << n << " D " << d << " k " << k;
        }
      }
    }
  }
}

TEST(EvalFast, ReducedAxisIsExactOffLattice) {
  // Only the non-reduced coordinates are interpolated; moving along the
  // reduced axis of a single-factor volume costs nothing.
  Rng rng(4);
  const auto layout = FrequencyLayout::uniform(2, 16, 4);
  const PhasorVolume v = verify::random_single_factor(layout, 2, 0, rng);
  Matrix coords = verify::lattice_coords(layout, 50, rng);
  for (Eigen::Index i = 0; i < coords.rows(); ++i) coords(i, 0) = rng.uniform();
  EXPECT_LT(verify::relative_error(eval_fast(v, coords), eval_exact(v, coords)), 1e-12);
}

TEST(EvalFast, OffLatticeErrorShrinksQuadratically) {
  Rng rng(5);
  std::vector<double> errors;
  const int band = 2;
  for (int n : {16, 32, 64}) {
    Rng field_rng(99);
    const auto layout = FrequencyLayout::uniform(2, n, 3);
    const PhasorVolume v = verify::random_band_limited(layout, 1, band, field_rng);
    Rng coord_rng(7);
    const Matrix coords = verify::random_coords(1000, 2, coord_rng);
    errors.push_back((eval_fast(v, coords) - eval_exact(v, coords)).cwiseAbs().maxCoeff());
  }
  for (int i = 0; i + 1 < 3; ++i) {
    const double ratio = errors[i] / errors[i + 1];
    EXPECT_GT(ratio, 3.0);
    EXPECT_LT(ratio, 5.0);
  }
}

TEST(EvalFast, BatchPermutationAndPartitionInvariance) {
  Rng rng(6);
  const PhasorVolume v = verify::random_volume(FrequencyLayout::uniform(3, 8, 3), 3, rng);
  const Matrix coords = verify::random_coords(97, 3, rng);
  const Matrix full = eval_fast(v, coords, 1);
  std::vector<Eigen::Index> perm(coords.rows());
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.index(i)]);
  Matrix shuffled(coords.rows(), 3);
  for (Eigen::Index i = 0; i < coords.rows(); ++i) shuffled.row(i) = coords.row(perm[i]);
  const Matrix out = eval_fast(v, shuffled, 3);
  for (Eigen::Index i = 0; i < coords.rows(); ++i) EXPECT_EQ(out.row(i), full.row(perm[i]));
  const Matrix head = eval_fast(v, coords.topRows(40));
  const Matrix tail = eval_fast(v, coords.bottomRows(57));
  EXPECT_EQ(head, full.topRows(40));
  EXPECT_EQ(tail, full.bottomRows(57));
}

TEST(FieldEvaluator, RebuildsOnlyAfterWrites) {
  Rng rng(7);
  PhasorVolume v = verify::random_volume(FrequencyLayout::uniform(2, 8, 3), 1, rng);
  FieldEvaluator ev;
  const Matrix coords = verify::random_coords(10, 2, rng);
  const Matrix a = ev.evaluate(v, coords);
  ev.evaluate(v, coords);
  EXPECT_EQ(ev.rebuild_count(), 1);
  v.set_coefficient(0, 0, {1, 2, 0}, Complex(2.0, -1.0));
  const Matrix b = ev.evaluate(v, coords);
  EXPECT_EQ(ev.rebuild_count(), 2);
  EXPECT_LT(verify::relative_error(b, eval_fast(v, coords)), 1e-15);
  EXPECT_GT((a - b).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Derivative, ConstantVolumeHasZeroDerivative) {
  PhasorVolume v = new_volume(FrequencyLayout::uniform(2, 8, 3), 1);
  v.set_coefficient(0, 0, {0, 0, 0}, Complex(3.0, 0.0));
  Rng rng(8);
  const Matrix coords = verify::random_coords(20, 2, rng);
  for (int axis = 0; axis < 2; ++axis) {
    for (int order = 1; order <= 2; ++order) {
      EXPECT_EQ(eval_derivative(v, coords, axis, order).cwiseAbs().maxCoeff(), 0.0);
    }
  }
}

TEST(Derivative, CosineFirstDerivative) {
  const PhasorVolume v = cosine_x();
  EXPECT_NEAR(eval_derivative(v, row({0.25, 0.4}), 0, 1, Evaluation::Exact)(0, 0), -2 * kPi, 1e-5);
  EXPECT_NEAR(eval_derivative(v, row({0.25, 0.375}), 0, 1)(0, 0), -2 * kPi, 1e-5);
}

TEST(Derivative, MatchesFiniteDifferences) {
  Rng rng(9);
  const auto layout = FrequencyLayout::uniform(2, 16, 3);
  const PhasorVolume v = verify::random_volume(layout, 2, rng);
  const Matrix coords = verify::random_coords(200, 2, rng);
  const verify::Field field = [&](const Matrix& x) { return eval_exact(v, x); };
  for (int axis = 0; axis < 2; ++axis) {
    const Matrix d1 = eval_derivative(v, coords, axis, 1, Evaluation::Exact);
    EXPECT_LT(verify::relative_error(d1, verify::central_difference(field, coords, axis, 1, 1e-4)), 1e-4);
    const Matrix d2 = eval_derivative(v, coords, axis, 2, Evaluation::Exact);
    EXPECT_LT(verify::relative_error(d2, verify::central_difference(field, coords, axis, 2, 1e-3)), 1e-3);
  }
}

TEST(Derivative, RejectsBadArguments) {
  const PhasorVolume v = new_volume(FrequencyLayout::uniform(2, 8, 3), 1);
  EXPECT_THROW(eval_derivative(v, Matrix::Zero(1, 2), 0, 3), DomainError);
  EXPECT_THROW(eval_derivative(v, Matrix::Zero(1, 2), 2, 1), DimensionError);
}

TEST(Energy, ZeroVolume) {
  const PhasorVolume v = new_volume(FrequencyLayout::uniform(2, 8, 3), 1);
  EXPECT_EQ(spectral_energy(v), 0.0);
  EXPECT_EQ(spatial_energy(v, 16), 0.0);
}

TEST(Energy, CosineHasHalfUnitEnergy) {
  const PhasorVolume v = cosine_x();
  EXPECT_NEAR(spectral_energy(v), 0.5, 1e-15);
  EXPECT_NEAR(spatial_energy(v, 32), 0.5, 1e-12);
}

TEST(Energy, ParsevalHoldsPerFactor) {
  Rng rng(10);
  for (int dims : {2, 3}) {
    const auto layout = FrequencyLayout::uniform(dims, 8, 3);
    for (int a = 0; a < dims; ++a) {
      const PhasorVolume v = verify::random_single_factor(layout, 2, a, rng);
      const double spectral = factor_spectral_energy(v, a);
      EXPECT_NEAR(spatial_energy(v, 32) / spectral, 1.0, 1e-4);
      EXPECT_NEAR(spectral_energy(v) / spectral, 1.0, 1e-12);
    }
  }
}

TEST(Energy, MergedSpectrumMatchesQuadratureForFullVolumes) {
  Rng rng(11);
  const PhasorVolume v = verify::random_volume(FrequencyLayout::uniform(2, 16, 4), 3, rng);
  EXPECT_NEAR(spatial_energy(v, 64) / spectral_energy(v), 1.0, 1e-10);
  EXPECT_THROW(spatial_energy(v, 8), DomainError);
}

TEST(DenseField, MatchesExactEvaluationOnItsLattice) {
  Rng rng(12);
  const PhasorVolume v = verify::random_volume(FrequencyLayout::uniform(2, 8, 3), 2, rng);
  const SampleGrid grid = dense_field(v, 16);
  Matrix coords(256, 2);
  for (int i = 0; i < 16; ++i) {
    for (int j = 0; j < 16; ++j) coords.row(i * 16 + j) << i / 16.0, j / 16.0;
  }
  const Matrix exact = eval_exact(v, coords);
  double diff = 0.0;
  for (int c = 0; c < 2; ++c) {
    for (int p = 0; p < 256; ++p) diff = std::max(diff, std::abs(grid.values[c * 256 + p] - exact(p, c)));
  }
  EXPECT_LT(diff, 1e-12);
}
