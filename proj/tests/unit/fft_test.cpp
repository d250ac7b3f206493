#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "pref/fft.hpp"
#include "pref/random.hpp"

using namespace pref;

namespace {

// Direct O(n^2) transform along one axis of a row-major array.
std::vector<Complex> naive(const std::vector<Complex>& x, const std::vector<int>& shape, int axis, double sign) {
  std::size_t inner = 1;
  for (std::size_t a = axis + 1; a < shape.size(); ++a) inner *= shape[a];
  std::size_t outer = 1;
  for (int a = 0; a < axis; ++a) outer *= shape[a];
  const int n = shape[axis];
  std::vector<Complex> out(x.size());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      for (int m = 0; m < n; ++m) {
        Complex acc = 0.0;
        for (int i = 0; i < n; ++i) {
          const double phase = sign * 2.0 * std::numbers::pi * i * m / n;
          acc += x[(o * n + i) * inner + in] * Complex(std::cos(phase), std::sin(phase));
        }
        out[(o * n + m) * inner + in] = acc;
      }
    }
  }
  return out;
}

std::vector<Complex> random_values(std::size_t size, Rng& rng) {
  std::vector<Complex> x(size);
  for (auto& z : x) z = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
  return x;
}

double max_diff(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST(Fft, MatchesDirectSumOnEveryAxis) {
  Rng rng(1);
  const std::vector<std::vector<int>> shapes{{8}, {4, 6}, {3, 5, 8}, {16, 2, 7}};
  for (const auto& shape : shapes) {
    std::size_t size = 1;
    for (int s : shape) size *= s;
    for (int axis = 0; axis < static_cast<int>(shape.size()); ++axis) {
      const auto x = random_values(size, rng);
      auto inv = x;
      fft::inverse_axis(inv, shape, axis);
      EXPECT_LT(max_diff(inv, naive(x, shape, axis, +1.0)), 1e-12);
      auto fwd = x;
      fft::forward_axis(fwd, shape, axis);
      EXPECT_LT(max_diff(fwd, naive(x, shape, axis, -1.0)), 1e-12);
    }
  }
}

TEST(Fft, RoundTripScalesByLength) {
  Rng rng(2);
  const std::vector<int> shape{6, 10};
  const auto x = random_values(60, rng);
  auto y = x;
  fft::forward_axis(y, shape, 1);
  fft::inverse_axis(y, shape, 1);
  for (auto& z : y) z /= 10.0;
  EXPECT_LT(max_diff(x, y), 1e-13);
}

TEST(Fft, ImpulseGivesPureExponential) {
  std::vector<Complex> x(8, 0.0);
  x[1] = 1.0;
  const std::vector<int> shape{8};
  fft::inverse_axis(x, shape, 0);
  for (int m = 0; m < 8; ++m) {
    EXPECT_NEAR(x[m].real(), std::cos(2 * std::numbers::pi * m / 8), 1e-15);
    EXPECT_NEAR(x[m].imag(), std::sin(2 * std::numbers::pi * m / 8), 1e-15);
  }
}
