#include "pref/tasks/dense_grid.hpp"

#include <cmath>

#include "pref/errors.hpp"
#include "pref/random.hpp"

namespace pref::tasks {

namespace {

struct Corners {
  int count = 1;
  std::size_t node[8]{};
  double weight[8]{};
};

double wrap_unit(double x) {
  const double w = x - std::floor(x);
  return w >= 1.0 ? 0.0 : w;
}

Corners corners(const std::vector<int>& resolution, const double* coords) {
  Corners c;
  c.node[0] = 0;
  c.weight[0] = 1.0;
  for (std::size_t axis = 0; axis < resolution.size(); ++axis) {
    const int m = resolution[axis];
    const double t = wrap_unit(coords[axis]) * m;
    const double base = std::floor(t);
    const double frac = t - base;
    const int i0 = static_cast<int>(base) % m;
    const int i1 = (i0 + 1) % m;
    for (int k = c.count - 1; k >= 0; --k) {
      c.node[2 * k + 1] = c.node[k] * m + i1;
      c.weight[2 * k + 1] = c.weight[k] * frac;
      c.node[2 * k] = c.node[k] * m + i0;
      c.weight[2 * k] = c.weight[k] * (1.0 - frac);
    }
    c.count *= 2;
  }
  return c;
}

}  // namespace

DenseGrid::DenseGrid(int dims, std::vector<int> resolution, int channels)
    : dims_(dims), resolution_(std::move(resolution)), channels_(channels) {
  if (dims_ < 2 || dims_ > 3) throw LayoutError("dense grid supports 2 or 3 dimensions");
  if (static_cast<int>(resolution_.size()) != dims_) throw LayoutError("dense grid resolution count mismatch");
  for (int m : resolution_) {
    if (m < 2) throw LayoutError("dense grid resolution must be at least 2");
  }
  if (channels_ < 1) throw DomainError("dense grid needs at least one channel");
  values_.assign(nodes() * channels_, 0.0);
}

void DenseGrid::randomize(double stddev, std::uint64_t seed) {
  Rng rng(seed);
  for (double& v : values_) v = round_to_float(stddev * rng.normal());
}

std::size_t DenseGrid::nodes() const {
  std::size_t total = 1;
  for (int m : resolution_) total *= static_cast<std::size_t>(m);
  return total;
}

Matrix DenseGrid::evaluate(const Matrix& coords) const {
  if (coords.cols() != dims_) throw DimensionError("dense grid: coordinate width mismatch");
  Matrix out = Matrix::Zero(coords.rows(), channels_);
  for (Eigen::Index b = 0; b < coords.rows(); ++b) {
    const Corners c = corners(resolution_, coords.row(b).data());
    double* row = out.row(b).data();
    for (int i = 0; i < c.count; ++i) {
      const double* v = values_.data() + c.node[i] * channels_;
      const double w = c.weight[i];
      for (int ch = 0; ch < channels_; ++ch) row[ch] += w * v[ch];
    }
  }
  return out;
}

void DenseGrid::backprop(const Matrix& coords, const Matrix& grad_features, std::span<double> grad) const {
  if (coords.cols() != dims_) throw DimensionError("dense grid: coordinate width mismatch");
  if (grad_features.rows() != coords.rows() || grad_features.cols() != channels_) {
    throw DimensionError("dense grid: feature gradient shape mismatch");
  }
  if (grad.size() != values_.size()) throw DimensionError("dense grid: gradient buffer size mismatch");
  for (Eigen::Index b = 0; b < coords.rows(); ++b) {
    const Corners c = corners(resolution_, coords.row(b).data());
    const double* g = grad_features.row(b).data();
    for (int i = 0; i < c.count; ++i) {
      double* out = grad.data() + c.node[i] * channels_;
      const double w = c.weight[i];
      for (int ch = 0; ch < channels_; ++ch) out[ch] += w * g[ch];
    }
  }
}

int matched_grid_resolution(const FrequencyLayout& layout, int channels) {
  double phasor = 0.0;
  for (int a = 0; a < layout.dims(); ++a) phasor += 2.0 * channels * static_cast<double>(layout.factor_size(a));
  const double per_channel = phasor / channels;
  int best = 2;
  double best_gap = INFINITY;
  const int guess = static_cast<int>(std::round(std::pow(per_channel, 1.0 / layout.dims())));
  for (int m = std::max(2, guess - 2); m <= guess + 2; ++m) {
    const double gap = std::abs(std::pow(m, layout.dims()) - per_channel);
    if (gap < best_gap) {
      best_gap = gap;
      best = m;
    }
  }
  return best;
}

}  // namespace pref::tasks
