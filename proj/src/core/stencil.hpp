#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "pref/layout.hpp"

namespace pref::detail {

// Periodic wrap into [0, 1).
inline double wrap_unit(double x) {
  double w = x - std::floor(x);
  return w >= 1.0 ? 0.0 : w;
}

// Multilinear interpolation stencil over the non-reduced axes of one factor.
// Lattice points are flattened row-major over the non-reduced axes taken in
// increasing axis order.
struct Stencil {
  int corners = 1;
  std::array<std::size_t, 4> lattice{};
  std::array<double, 4> weight{};
};

inline Stencil make_stencil(const FrequencyLayout& layout, int factor, const double* wrapped) {
  Stencil st;
  st.lattice[0] = 0;
  st.weight[0] = 1.0;
  for (int axis = 0; axis < layout.dims(); ++axis) {
    if (axis == factor) continue;
    const int n = layout.resolution(axis);
    const double t = wrapped[axis] * n;
    const double base = std::floor(t);
    const double frac = t - base;
    const int i0 = static_cast<int>(base) % n;
    const int i1 = (i0 + 1) % n;
    for (int c = st.corners - 1; c >= 0; --c) {
      st.lattice[2 * c + 1] = st.lattice[c] * n + i1;
      st.weight[2 * c + 1] = st.weight[c] * frac;
      st.lattice[2 * c] = st.lattice[c] * n + i0;
      st.weight[2 * c] = st.weight[c] * (1.0 - frac);
    }
    st.corners *= 2;
  }
  return st;
}

// Number of lattice points over the non-reduced axes of `factor`.
inline std::size_t lattice_size(const FrequencyLayout& layout, int factor) {
  std::size_t total = 1;
  for (int axis = 0; axis < layout.dims(); ++axis) {
    if (axis != factor) total *= static_cast<std::size_t>(layout.resolution(axis));
  }
  return total;
}

}  // namespace pref::detail
