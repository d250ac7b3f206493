#include "pref/fft.hpp"

#include <fftw3.h>

#include <mutex>

#include "pref/errors.hpp"

namespace pref::fft {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void conjugate(std::span<Complex> data) {
  for (Complex& z : data) z = std::conj(z);
}

}  // namespace

void inverse_axis(std::span<Complex> data, std::span<const int> shape, int axis) {
  if (axis < 0 || axis >= static_cast<int>(shape.size())) {
    throw DimensionError("transform axis out of range");
  }
  std::size_t total = 1;
  for (int e : shape) {
    if (e < 1) throw DimensionError("transform extents must be positive");
    total *= static_cast<std::size_t>(e);
  }
  if (total != data.size()) throw DimensionError("transform shape does not match data");

  const std::ptrdiff_t n = shape[axis];
  if (n == 1) return;
  std::ptrdiff_t inner = 1;
  for (std::size_t a = axis + 1; a < shape.size(); ++a) inner *= shape[a];
  const std::ptrdiff_t outer = static_cast<std::ptrdiff_t>(total) / (inner * n);

  fftw_iodim64 dim{n, inner, inner};
  fftw_iodim64 loops[2] = {{outer, n * inner, n * inner}, {inner, 1, 1}};
  auto* buffer = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    // ESTIMATE + UNALIGNED keeps the algorithm choice independent of timing
    // and buffer addresses, so results are reproducible bit for bit.
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_guru64_dft(1, &dim, 2, loops, buffer, buffer, FFTW_BACKWARD,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  if (plan == nullptr) throw NumericError("FFTW could not create a plan");
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plan);
}

void forward_axis(std::span<Complex> data, std::span<const int> shape, int axis) {
  conjugate(data);
  inverse_axis(data, shape, axis);
  conjugate(data);
}

}  // namespace pref::fft
