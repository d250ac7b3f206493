#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pref::verify {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;  // measured quantities, deterministic for a fixed seed
  double seconds = 0.0;
};

// eval_fast vs eval_exact at lattice coordinates on 50 random volumes, the
// dense-spectrum oracle against eval_exact, and the h^2 off-lattice error rate.
CheckResult check_transform_agreement(std::uint64_t seed);

// Analytic first/second derivatives vs central differences of eval_exact.
CheckResult check_derivatives(std::uint64_t seed);

// Per-factor spectral vs spatial energy, and regularizer axis terms vs the
// quadrature of the analytic derivative energy.
CheckResult check_parseval(std::uint64_t seed);

// Finite-difference checks of MLP, coefficient and regularizer gradients plus
// the adjoint dot-product test.
CheckResult check_gradients(std::uint64_t seed);

// Second derivative along a reduced axis vs the dense-grid baseline.
CheckResult check_derivative_contrast(std::uint64_t seed);

// gaussian_filter identity, semigroup and high-band decay.
CheckResult check_filtering(std::uint64_t seed);

std::vector<CheckResult> run_selftest(std::uint64_t seed = 7);

}  // namespace pref::verify
