#include "pref/verify/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

#include "pref/diff.hpp"
#include "pref/mlp.hpp"
#include "pref/tasks/dense_grid.hpp"
#include "pref/train.hpp"
#include "pref/transform.hpp"
#include "pref/verify/oracles.hpp"

namespace pref::verify {

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

CheckResult timed(const std::string& name, const std::function<bool(std::string&)>& body) {
  const auto start = std::chrono::steady_clock::now();
  CheckResult result;
  result.name = name;
  result.passed = body(result.detail);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

// Copies a volume's coefficients into a larger layout with the same reduced
// size, matching coefficients by frequency vector.
PhasorVolume embed(const PhasorVolume& source, const FrequencyLayout& target) {
  PhasorVolume out(target, source.channels());
  const FrequencyLayout& src = source.layout();
  for (int a = 0; a < src.dims(); ++a) {
    const Extents ext = src.factor_extents(a);
    for (int c = 0; c < source.channels(); ++c) {
      for (int i0 = 0; i0 < ext[0]; ++i0) {
        for (int i1 = 0; i1 < ext[1]; ++i1) {
          for (int i2 = 0; i2 < ext[2]; ++i2) {
            const Complex value = source.coefficient(a, c, {i0, i1, i2});
            if (value == Complex(0.0, 0.0)) continue;
            const auto freq = src.frequency(a, {i0, i1, i2});
            Extents pos{0, 0, 0};
            for (int axis = 0; axis < src.dims(); ++axis) {
              if (axis == a) {
                pos[axis] = (axis == 0 ? i0 : axis == 1 ? i1 : i2);
              } else {
                const int n = target.resolution(axis);
                pos[axis] = ((freq[axis] % n) + n) % n;
              }
            }
            out.set_coefficient(a, c, pos, value);
          }
        }
      }
    }
  }
  return out;
}

// Worst per-entry error |a - b| / max(|b|, floor * max|b|).
double gradient_error(const std::vector<double>& analytic, const std::vector<double>& numeric,
                      double floor = 1e-3) {
  double scale = 0.0;
  for (double v : numeric) scale = std::max(scale, std::abs(v));
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom = std::max({std::abs(numeric[i]), floor * scale, 1e-300});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
  }
  return worst;
}

// Central differences of a scalar function over every entry of `params`.
std::vector<double> numeric_gradient(std::span<double> params, const std::function<double()>& f,
                                     double h, const std::function<void()>& touched = {}) {
  std::vector<double> out(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    if (touched) touched();
    const double up = f();
    params[i] = saved - h;
    if (touched) touched();
    const double down = f();
    params[i] = saved;
    if (touched) touched();
    out[i] = (up - down) / (2.0 * h);
  }
  return out;
}

std::span<double> doubles(std::span<Complex> values) {
  return {reinterpret_cast<double*>(values.data()), values.size() * 2};
}

std::vector<double> packed(const VolumeGradient& g) {
  std::vector<double> out;
  out.reserve(g.size() * 2);
  for (const Complex& z : g) {
    out.push_back(z.real());
    out.push_back(z.imag());
  }
  return out;
}

}  // namespace

CheckResult check_transform_agreement(std::uint64_t seed) {
  return timed("transform-agreement", [seed](std::string& detail) {
    Rng rng(seed);
    struct Combo {
      int n, N, D, k;
    };
    std::vector<Combo> combos;
    for (int n : {2, 3}) {
      for (int N : {8, 16, 32}) {
        for (int D : {2, 3, 4}) {
          if (2 * reduced_frequency(D - 1) >= N) continue;
          for (int k : {1, 8}) combos.push_back({n, N, D, k});
        }
      }
    }
    double lattice_err = 0.0;
    double oracle_err = 0.0;
    for (int i = 0; i < 50; ++i) {
      const Combo& c = combos[i % combos.size()];
      const FrequencyLayout layout = FrequencyLayout::uniform(c.n, c.N, c.D);
      const PhasorVolume volume = random_volume(layout, c.k, rng);
      const Matrix coords = lattice_coords(layout, 24, rng);
      const Matrix exact = eval_exact(volume, coords);
      lattice_err = std::max(lattice_err, relative_error(eval_fast(volume, coords), exact));
      if (i < 12) oracle_err = std::max(oracle_err, relative_error(exact, dense_spectrum_eval(volume, coords)));
    }

    // Off-lattice interpolation error of one fixed band-limited field.
    const PhasorVolume base = random_band_limited(FrequencyLayout::uniform(2, 16, 3), 2, 3, rng);
    const Matrix coords = random_coords(1000, 2, rng);
    std::vector<double> errors;
    for (int N : {16, 32, 64}) {
      const PhasorVolume volume = embed(base, FrequencyLayout::uniform(2, N, 3));
      errors.push_back(relative_error(eval_fast(volume, coords), eval_exact(volume, coords)));
    }
    const double ratio1 = errors[0] / errors[1];
    const double ratio2 = errors[1] / errors[2];

    detail = "lattice rel err " + sci(lattice_err) + ", dense oracle rel err " + sci(oracle_err) +
             ", off-lattice err N=16/32/64 " + sci(errors[0]) + "/" + sci(errors[1]) + "/" + sci(errors[2]) +
             " (ratios " + sci(ratio1) + ", " + sci(ratio2) + ")";
    return lattice_err <= 1e-5 && oracle_err <= 1e-5 && ratio1 >= 3.0 && ratio2 >= 3.0 && ratio1 <= 5.0 &&
           ratio2 <= 5.0;
  });
}

CheckResult check_derivatives(std::uint64_t seed) {
  return timed("derivatives", [seed](std::string& detail) {
    Rng rng(seed + 1);
    double first = 0.0;
    double second = 0.0;
    double fast_lattice = 0.0;
    const FrequencyLayout layouts[] = {FrequencyLayout::uniform(2, 16, 4), FrequencyLayout::uniform(3, 16, 3)};
    for (const FrequencyLayout& layout : layouts) {
      const PhasorVolume volume = random_volume(layout, 2, rng);
      const Matrix coords = random_coords(layout.dims() == 2 ? 200 : 100, layout.dims(), rng);
      const Field field = [&](const Matrix& x) { return eval_exact(volume, x); };
      const Matrix lattice = lattice_coords(layout, 32, rng);
      for (int axis = 0; axis < layout.dims(); ++axis) {
        first = std::max(first, relative_error(eval_derivative(volume, coords, axis, 1, Evaluation::Exact),
                                               central_difference(field, coords, axis, 1, 1e-4)));
        second = std::max(second, relative_error(eval_derivative(volume, coords, axis, 2, Evaluation::Exact),
                                                 central_difference(field, coords, axis, 2, 1e-4)));
        for (int order : {1, 2}) {
          fast_lattice = std::max(
              fast_lattice, relative_error(eval_derivative(volume, lattice, axis, order, Evaluation::Fast),
                                           eval_derivative(volume, lattice, axis, order, Evaluation::Exact)));
        }
      }
    }
    detail = "first-order rel err " + sci(first) + ", second-order rel err " + sci(second) +
             ", fast-vs-exact on lattice " + sci(fast_lattice);
    return first <= 1e-4 && second <= 1e-3 && fast_lattice <= 1e-5;
  });
}

CheckResult check_parseval(std::uint64_t seed) {
  return timed("parseval-energy", [seed](std::string& detail) {
    Rng rng(seed + 2);
    double energy_err = 0.0;
    double tv_err = 0.0;
    double real_tv_err = 0.0;
    const FrequencyLayout layouts[] = {FrequencyLayout::uniform(2, 16, 4), FrequencyLayout::uniform(3, 8, 3)};
    for (const FrequencyLayout& layout : layouts) {
      const int grid = 4 * layout.resolution(0);
      for (int a = 0; a < layout.dims(); ++a) {
        const PhasorVolume volume = random_single_factor(layout, 2, a, rng);
        const double spectral = factor_spectral_energy(volume, a);
        const double spatial = spatial_energy(volume, grid);
        energy_err = std::max(energy_err, std::abs(spectral - spatial) / spatial);

        const RegularizerValue reg = parseval_reg(volume);
        for (int axis = 0; axis < layout.dims(); ++axis) {
          const PhasorVolume derived = derivative_volume(volume, axis, 1);
          const std::vector<Complex> g = dense_complex_field(derived, grid);
          double integral = 0.0;
          for (const Complex& z : g) integral += std::norm(z);
          integral /= static_cast<double>(g.size() / volume.channels());
          const double quadrature = std::sqrt(integral);
          tv_err = std::max(tv_err, std::abs(quadrature - reg.axis_terms[axis]) / reg.axis_terms[axis]);
          if (axis == a) {
            // Along the reduced axis no stored frequency has a stored partner
            // with nonzero derivative, so the real field carries half the energy.
            const double real_energy = spatial_energy(derived, grid);
            real_tv_err = std::max(
                real_tv_err, std::abs(std::sqrt(2.0 * real_energy) - reg.axis_terms[axis]) / reg.axis_terms[axis]);
          }
        }
      }
    }
    detail = "per-factor energy rel err " + sci(energy_err) + ", regularizer vs derivative quadrature " +
             sci(tv_err) + " (real field, reduced axis " + sci(real_tv_err) + ")";
    return energy_err <= 1e-4 && tv_err <= 1e-3 && real_tv_err <= 1e-3;
  });
}

CheckResult check_gradients(std::uint64_t seed) {
  return timed("gradient-integrity", [seed](std::string& detail) {
    Rng rng(seed + 3);
    constexpr double h = 1e-4;

    // MLP parameters, for each activation mix used by the tasks.
    double mlp_err = 0.0;
    const std::pair<Activation, Activation> mixes[] = {{Activation::Relu, Activation::Identity},
                                                       {Activation::Relu, Activation::Sigmoid},
                                                       {Activation::Softplus, Activation::Softplus}};
    for (const auto& [hidden, output] : mixes) {
      const int widths[] = {5, 16, 16, 3};
      MlpParams mlp = MlpParams::create(widths, hidden, output, rng);
      const Matrix input = random_coords(6, 5, rng).array() * 2.0 - 1.0;
      const Matrix weights = random_coords(6, 3, rng);
      const auto objective = [&] { return forward(mlp, input).first.cwiseProduct(weights).sum(); };
      auto [out, tape] = forward(mlp, input);
      const auto [grad, grad_in] = backward(mlp, tape, weights);
      for (std::size_t l = 0; l < mlp.depth(); ++l) {
        Layer& layer = mlp.mutable_layer(l);
        std::vector<double> analytic(grad.weights[l].data(), grad.weights[l].data() + grad.weights[l].size());
        mlp_err = std::max(mlp_err, gradient_error(analytic, numeric_gradient({layer.weight.data(),
                                                                                static_cast<std::size_t>(layer.weight.size())},
                                                                               objective, h)));
        analytic.assign(grad.biases[l].data(), grad.biases[l].data() + grad.biases[l].size());
        mlp_err = std::max(mlp_err, gradient_error(analytic, numeric_gradient({layer.bias.data(),
                                                                                static_cast<std::size_t>(layer.bias.size())},
                                                                               objective, h)));
      }
      Matrix probe = input;
      std::vector<double> analytic(grad_in.data(), grad_in.data() + grad_in.size());
      const auto input_objective = [&] { return forward(mlp, probe).first.cwiseProduct(weights).sum(); };
      mlp_err = std::max(mlp_err, gradient_error(analytic, numeric_gradient({probe.data(),
                                                                              static_cast<std::size_t>(probe.size())},
                                                                             input_objective, h)));
    }

    // Phasor coefficients through eval_fast with loss sum f^2, and the regularizer.
    double coef_err = 0.0;
    double reg_err = 0.0;
    double adjoint_err = 0.0;
    const FrequencyLayout layouts[] = {FrequencyLayout::uniform(2, 8, 3), FrequencyLayout::uniform(3, 8, 2)};
    for (const FrequencyLayout& layout : layouts) {
      PhasorVolume volume = random_volume(layout, 2, rng);
      const Matrix coords = random_coords(16, layout.dims(), rng);
      const Matrix f = eval_fast(volume, coords);
      const std::vector<double> analytic = packed(backprop_to_volume(volume, coords, 2.0 * f));
      std::span<double> params = doubles(volume.mutable_coefficients());
      const auto loss_fn = [&] { return eval_fast(volume, coords).squaredNorm(); };
      coef_err = std::max(coef_err, gradient_error(analytic, numeric_gradient(params, loss_fn, h,
                                                                              [&] { volume.touch(); })));

      const std::vector<double> reg_grad = packed(parseval_reg(volume).grad);
      reg_err = std::max(reg_err, gradient_error(reg_grad, numeric_gradient(params, [&] { return parseval_reg(volume).value; },
                                                                            h, [&] { volume.touch(); })));

      // <g, J delta> = <J^T g, delta>; eval_fast is linear in the coefficients.
      const PhasorVolume delta = random_volume(layout, 2, rng);
      const Matrix g = random_coords(16, 2, rng).array() - 0.5;
      const double lhs = g.cwiseProduct(eval_fast(delta, coords)).sum();
      const VolumeGradient jt = backprop_to_volume(delta, coords, g);
      double rhs = 0.0;
      const auto d = delta.coefficients();
      for (std::size_t i = 0; i < jt.size(); ++i) rhs += jt[i].real() * d[i].real() + jt[i].imag() * d[i].imag();
      adjoint_err = std::max(adjoint_err, std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300));
    }
    detail = "mlp fd rel err " + sci(mlp_err) + ", coefficient fd rel err " + sci(coef_err) +
             ", regularizer fd rel err " + sci(reg_err) + ", adjoint rel err " + sci(adjoint_err);
    return mlp_err <= 1e-4 && coef_err <= 1e-4 && reg_err <= 1e-4 && adjoint_err <= 1e-6;
  });
}

CheckResult check_derivative_contrast(std::uint64_t seed) {
  return timed("derivative-contrast", [seed](std::string& detail) {
    Rng rng(seed + 4);
    constexpr double h = 1e-4;
    const FrequencyLayout layout = FrequencyLayout::uniform(2, 16, 4);
    const PhasorVolume volume = random_single_factor(layout, 1, 0, rng);
    const Matrix coords = random_coords(200, 2, rng);
    const Matrix analytic = eval_derivative(volume, coords, 0, 2, Evaluation::Fast);
    const Field fast = [&](const Matrix& x) { return eval_fast(volume, x); };
    const double pref_err = relative_error(analytic, central_difference(fast, coords, 0, 2, h));
    const double pref_mag = analytic.cwiseAbs().maxCoeff();

    // Dense grid: samples strictly inside cells along axis 0.
    tasks::DenseGrid grid(2, {16, 16}, 1);
    for (double& v : grid.mutable_values()) v = rng.uniform(-1.0, 1.0);
    Matrix inside(200, 2);
    for (int s = 0; s < 200; ++s) {
      const int cell = static_cast<int>(rng.index(16));
      inside(s, 0) = (cell + rng.uniform(0.01, 0.99)) / 16.0;
      inside(s, 1) = rng.uniform();
    }
    const Field dense = [&](const Matrix& x) { return grid.evaluate(x); };
    const double grid_mag = central_difference(dense, inside, 0, 2, h).cwiseAbs().maxCoeff();
    Matrix seam(1, 2);
    seam << 5.0 / 16.0, 0.3;
    const double seam_mag = std::abs(central_difference(dense, seam, 0, 2, h)(0, 0));

    detail = "pref |f''| max " + sci(pref_mag) + " with fd rel err " + sci(pref_err) + ", dense grid |f''| between nodes " +
             sci(grid_mag) + " (at a node " + sci(seam_mag) + ")";
    return pref_mag > 1.0 && pref_err <= 1e-3 && grid_mag <= 1e-6;
  });
}

CheckResult check_filtering(std::uint64_t seed) {
  return timed("filtering", [seed](std::string& detail) {
    Rng rng(seed + 5);
    const FrequencyLayout layout = FrequencyLayout::uniform(2, 16, 4);
    const PhasorVolume volume = random_volume(layout, 2, rng);
    const bool identity = gaussian_filter(volume, 0.0) == volume;

    double semigroup = 0.0;
    const double scale = std::sqrt(coefficient_energy(volume));
    for (const auto& [s1, s2] : {std::pair{0.5, 1.0}, std::pair{1.0, 2.0}, std::pair{2.0, 4.0}, std::pair{3.0, 0.7}}) {
      const PhasorVolume twice = gaussian_filter(gaussian_filter(volume, s1), s2);
      const PhasorVolume once = gaussian_filter(volume, std::hypot(s1, s2));
      for (std::size_t i = 0; i < once.coefficients().size(); ++i) {
        semigroup = std::max(semigroup, std::abs(twice.coefficients()[i] - once.coefficients()[i]) / scale);
      }
    }

    const int cutoff = layout.resolution(0) / 4;
    std::vector<double> energies{high_band_energy(volume, cutoff)};
    for (double sigma : {0.5, 1.0, 2.0, 4.0}) energies.push_back(high_band_energy(gaussian_filter(volume, sigma), cutoff));
    bool decreasing = true;
    for (std::size_t i = 1; i < energies.size(); ++i) decreasing = decreasing && energies[i] < energies[i - 1];

    detail = std::string("sigma=0 identity ") + (identity ? "exact" : "BROKEN") + ", semigroup err " + sci(semigroup) +
             ", high-band energy";
    for (double e : energies) detail += " " + sci(e);
    return identity && semigroup <= 1e-6 && decreasing;
  });
}

std::vector<CheckResult> run_selftest(std::uint64_t seed) {
  return {check_transform_agreement(seed), check_derivatives(seed), check_parseval(seed),
          check_gradients(seed),           check_derivative_contrast(seed), check_filtering(seed)};
}

}  // namespace pref::verify
