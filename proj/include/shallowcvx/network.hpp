#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "shallowcvx/csv.hpp"
#include "shallowcvx/epigraph.hpp"
#include "shallowcvx/error.hpp"
#include "shallowcvx/geometry.hpp"
#include "shallowcvx/kernel.hpp"
#include "shallowcvx/rng.hpp"

namespace scx::network {

// Family of maps f_beta : R^d -> R^s over a compact parameter box, with a
// uniform-in-input modulus bound on beta -> f_beta(x). Inputs are clipped to
// [input_lower, input_upper] before evaluation so the modulus bound holds.
//
// loss_subgrad returns the gradient of beta -> |y - f_beta(x)|^2 given the
// residual y - f_beta(x); at kinks it must return the symmetric average of
// the one-sided gradients (the builtins are smooth in beta everywhere).
struct ParametricFamily {
  std::string name;
  int param_dim = 0;   // p
  int input_dim = 0;   // d
  int output_dim = 0;  // s
  epigraph::ParamBox domain;
  std::vector<double> input_lower, input_upper;
  std::function<void(std::span<const double>, std::span<const double>, std::span<double>)> eval;
  std::function<void(std::span<const double>, std::span<const double>, std::span<const double>,
                     std::span<double>)>
      loss_subgrad;
  double lipschitz_beta = 0.0;

  std::vector<double> eval_vec(std::span<const double> beta, std::span<const double> x) const {
    std::vector<double> out(static_cast<std::size_t>(output_dim));
    eval(beta, x, out);
    return out;
  }

  void clip_input(std::span<const double> x, std::span<double> clipped) const {
    for (std::size_t k = 0; k < clipped.size(); ++k) {
      clipped[k] = std::clamp(x[k], input_lower[k], input_upper[k]);
    }
  }
};

// Per-unit parameter stack; index i + N holds the parameters of unit i.
using UnitParams = std::vector<std::vector<double>>;

inline ParametricFamily builtin_family(const std::string& name, int input_dim = 1) {
  if (input_dim < 1) throw InvalidArgument("input dimension must be >= 1");
  const auto d = static_cast<std::size_t>(input_dim);

  if (name == "affine") {
    // f_beta(x) = beta . clip(x); p = d, s = 1.
    ParametricFamily fam{
        name,
        input_dim,
        input_dim,
        1,
        epigraph::ParamBox(std::vector<double>(d, -2.0), std::vector<double>(d, 2.0), 0.2),
        std::vector<double>(d, -1.25),
        std::vector<double>(d, 1.25),
        {},
        {},
        0.0};
    fam.eval = [fam_lo = fam.input_lower, fam_hi = fam.input_upper](
                   std::span<const double> beta, std::span<const double> x, std::span<double> out) {
      double acc = 0.0;
      for (std::size_t k = 0; k < beta.size(); ++k) {
        acc += beta[k] * std::clamp(x[k], fam_lo[k], fam_hi[k]);
      }
      out[0] = acc;
    };
    fam.loss_subgrad = [fam_lo = fam.input_lower, fam_hi = fam.input_upper](
                           std::span<const double> beta, std::span<const double> x,
                           std::span<const double> residual, std::span<double> grad) {
      (void)beta;
      for (std::size_t k = 0; k < grad.size(); ++k) {
        grad[k] = -2.0 * residual[0] * std::clamp(x[k], fam_lo[k], fam_hi[k]);
      }
    };
    fam.lipschitz_beta = 1.25 * std::sqrt(static_cast<double>(input_dim));
    return fam;
  }

  if (name == "sin_feature") {
    // f_beta(x) = sin(beta . phi(x)) with phi mapping the input box onto
    // [-1, 1]^d; nonconvex in beta, uniformly Lipschitz. p = d, s = 1.
    ParametricFamily fam{
        name,
        input_dim,
        input_dim,
        1,
        epigraph::ParamBox(std::vector<double>(d, -3.141592653589793),
                           std::vector<double>(d, 3.141592653589793), 0.1),
        std::vector<double>(d, -1.0),
        std::vector<double>(d, 1.0),
        {},
        {},
        0.0};
    auto feature = [lo = fam.input_lower, hi = fam.input_upper](std::span<const double> x,
                                                                std::size_t k) {
      const double c = std::clamp(x[k], lo[k], hi[k]);
      return 2.0 * (c - lo[k]) / (hi[k] - lo[k]) - 1.0;
    };
    fam.eval = [feature](std::span<const double> beta, std::span<const double> x,
                         std::span<double> out) {
      double acc = 0.0;
      for (std::size_t k = 0; k < beta.size(); ++k) acc += beta[k] * feature(x, k);
      out[0] = std::sin(acc);
    };
    fam.loss_subgrad = [feature](std::span<const double> beta, std::span<const double> x,
                                 std::span<const double> residual, std::span<double> grad) {
      double acc = 0.0;
      for (std::size_t k = 0; k < beta.size(); ++k) acc += beta[k] * feature(x, k);
      const double dcos = std::cos(acc);
      for (std::size_t k = 0; k < grad.size(); ++k) {
        grad[k] = -2.0 * residual[0] * dcos * feature(x, k);
      }
    };
    fam.lipschitz_beta = std::sqrt(static_cast<double>(input_dim));
    return fam;
  }

  if (name == "tanh_neuron") {
    // f_{(c, w, b)}(x) = c * tanh(w . clip(x) + b); p = d + 2, s = 1.
    // Parameter layout: (c, w_1..w_d, b).
    std::vector<double> lo(d + 2, -2.0), hi(d + 2, 2.0);
    lo.back() = -1.0;
    hi.back() = 1.0;
    ParametricFamily fam{name,
                         input_dim + 2,
                         input_dim,
                         1,
                         epigraph::ParamBox(lo, hi, 0.25),
                         std::vector<double>(d, -1.0),
                         std::vector<double>(d, 1.0),
                         {},
                         {},
                         0.0};
    fam.eval = [flo = fam.input_lower, fhi = fam.input_upper](
                   std::span<const double> beta, std::span<const double> x, std::span<double> out) {
      const std::size_t dd = beta.size() - 2;
      double u = beta[beta.size() - 1];
      for (std::size_t k = 0; k < dd; ++k) u += beta[k + 1] * std::clamp(x[k], flo[k], fhi[k]);
      out[0] = beta[0] * std::tanh(u);
    };
    fam.loss_subgrad = [flo = fam.input_lower, fhi = fam.input_upper](
                           std::span<const double> beta, std::span<const double> x,
                           std::span<const double> residual, std::span<double> grad) {
      const std::size_t dd = beta.size() - 2;
      double u = beta[beta.size() - 1];
      for (std::size_t k = 0; k < dd; ++k) u += beta[k + 1] * std::clamp(x[k], flo[k], fhi[k]);
      const double t = std::tanh(u);
      const double sech2 = 1.0 - t * t;
      const double scale = -2.0 * residual[0];
      grad[0] = scale * t;
      for (std::size_t k = 0; k < dd; ++k) {
        grad[k + 1] = scale * beta[0] * sech2 * std::clamp(x[k], flo[k], fhi[k]);
      }
      grad[beta.size() - 1] = scale * beta[0] * sech2;
    };
    // |grad_beta f|^2 <= tanh^2 + c^2 sech^4 (|x|^2 + 1) with |c| <= 2, |x| <= sqrt(d)
    fam.lipschitz_beta = std::sqrt(1.0 + 4.0 * (static_cast<double>(input_dim) + 1.0));
    return fam;
  }

  throw UnknownFamily(name);
}

struct NoiseSpec {
  enum class Kind { gaussian, uniform } kind = Kind::gaussian;
  double level = 0.0;  // sigma for gaussian, half-range a for uniform(+-a)
};

// Data-generating configuration. Shared-truth mode (beta_star) is the
// default; per_unit_beta, when nonempty, assigns each unit its own truth.
struct DataConfig {
  ParametricFamily family;
  std::vector<double> beta_star;
  std::vector<std::vector<double>> per_unit_beta;  // size 2N+1 when used
  NoiseSpec noise;
  std::uint64_t seed = 0;
  // Input law: uniform on [input_lower, input_upper] of the family unless
  // overridden here (degenerate boxes with lower == upper are allowed).
  std::vector<double> input_lower, input_upper;

  std::span<const double> truth_for_unit(int i, int half_width) const {
    if (per_unit_beta.empty()) return beta_star;
    return per_unit_beta[static_cast<std::size_t>(i + half_width)];
  }
};

inline void validate(const DataConfig& cfg, int half_width) {
  if (cfg.noise.level < 0.0) throw InvalidArgument("noise level must be >= 0");
  if (cfg.per_unit_beta.empty()) {
    if (static_cast<int>(cfg.beta_star.size()) != cfg.family.param_dim) {
      throw InvalidArgument("beta_star dimension does not match the family");
    }
    if (!cfg.family.domain.contains(cfg.beta_star)) {
      throw InvalidArgument("beta_star lies outside the parameter box");
    }
  } else {
    if (static_cast<int>(cfg.per_unit_beta.size()) != 2 * half_width + 1) {
      throw InvalidArgument("per-unit truth list must have 2N+1 entries");
    }
    for (const auto& b : cfg.per_unit_beta) {
      if (static_cast<int>(b.size()) != cfg.family.param_dim || !cfg.family.domain.contains(b)) {
        throw InvalidArgument("per-unit truth outside the parameter box");
      }
    }
  }
}

// Shared input, per-unit outputs and retained noises:
// y(i, n) = f_{beta_i}(x(n)) + xi(i, n), exactly as generated.
struct SampleBatch {
  ParametricFamily family;
  int half_width = 0;
  int n_samples = 0;
  std::vector<double> inputs;   // n_samples x d
  std::vector<double> outputs;  // (2N+1) x n_samples x s, unit-major
  std::vector<double> noises;   // same layout

  int units() const noexcept { return 2 * half_width + 1; }

  std::span<const double> x(int n) const {
    const auto d = static_cast<std::size_t>(family.input_dim);
    return {inputs.data() + static_cast<std::size_t>(n) * d, d};
  }
  std::span<const double> y(int i, int n) const {
    return unit_slice(outputs, i, n);
  }
  std::span<const double> xi(int i, int n) const {
    return unit_slice(noises, i, n);
  }

private:
  std::span<const double> unit_slice(const std::vector<double>& store, int i, int n) const {
    const auto s = static_cast<std::size_t>(family.output_dim);
    const auto row = static_cast<std::size_t>(i + half_width) * static_cast<std::size_t>(n_samples) +
                     static_cast<std::size_t>(n);
    return {store.data() + row * s, s};
  }
};

namespace detail {

inline double draw_noise(Rng& rng, const NoiseSpec& spec) {
  switch (spec.kind) {
    case NoiseSpec::Kind::gaussian:
      return spec.level * rng.gaussian();
    case NoiseSpec::Kind::uniform:
      return spec.level * (2.0 * rng.uniform01() - 1.0);
  }
  return 0.0;
}

}  // namespace detail

// Inputs are drawn from substream 0 of the master seed; unit i draws its
// noise from substream interleave_index(i), so generation is reproducible
// and independent of unit evaluation order.
inline SampleBatch generate_batch(const DataConfig& cfg, int half_width, int n_samples) {
  if (half_width < 0 || n_samples < 1) throw InvalidArgument("need half_width >= 0, n_samples >= 1");
  validate(cfg, half_width);
  const auto& fam = cfg.family;
  const auto d = static_cast<std::size_t>(fam.input_dim);
  const auto s = static_cast<std::size_t>(fam.output_dim);

  SampleBatch batch{fam, half_width, n_samples, {}, {}, {}};
  batch.inputs.resize(static_cast<std::size_t>(n_samples) * d);
  const std::size_t unit_block = static_cast<std::size_t>(n_samples) * s;
  batch.outputs.resize(static_cast<std::size_t>(2 * half_width + 1) * unit_block);
  batch.noises.resize(batch.outputs.size());

  const std::vector<double>& in_lo = cfg.input_lower.empty() ? fam.input_lower : cfg.input_lower;
  const std::vector<double>& in_hi = cfg.input_upper.empty() ? fam.input_upper : cfg.input_upper;

  Rng xs(derive_stream_seed(cfg.seed, 0));
  for (int n = 0; n < n_samples; ++n) {
    for (std::size_t k = 0; k < d; ++k) {
      batch.inputs[static_cast<std::size_t>(n) * d + k] = xs.uniform(in_lo[k], in_hi[k]);
    }
  }

  std::vector<double> fx(s);
  for (int i = -half_width; i <= half_width; ++i) {
    Rng unit_rng(derive_stream_seed(cfg.seed, static_cast<std::uint64_t>(geometry::interleave_index(i))));
    const auto truth = cfg.truth_for_unit(i, half_width);
    const std::size_t base = static_cast<std::size_t>(i + half_width) * unit_block;
    for (int n = 0; n < n_samples; ++n) {
      fam.eval(truth, batch.x(n), fx);
      for (std::size_t k = 0; k < s; ++k) {
        const double noise = detail::draw_noise(unit_rng, cfg.noise);
        batch.noises[base + static_cast<std::size_t>(n) * s + k] = noise;
        batch.outputs[base + static_cast<std::size_t>(n) * s + k] = fx[k] + noise;
      }
    }
  }
  return batch;
}

// Kernel-weighted sum with a fixed accumulation order (outside-in by |i|,
// negative before positive, center last) shared by every weighted aggregate
// in the library, so separable minimization reproduces joint sums bit-exactly.
template <class TermFn>
double weighted_sum_outside_in(const kernel::KernelWeights& kw, TermFn&& term) {
  double acc = 0.0;
  for (int j = kw.half_width; j >= 1; --j) {
    acc += kw.weight(j) * term(-j);
    acc += kw.weight(j) * term(j);
  }
  acc += kw.weight(0) * term(0);
  return acc;
}

inline void check_unit_params(const ParametricFamily& fam, const UnitParams& b) {
  for (std::size_t u = 0; u < b.size(); ++u) {
    if (static_cast<int>(b[u].size()) != fam.param_dim || !fam.domain.contains(b[u])) {
      throw ParameterOutOfDomain(static_cast<int>(u) - (static_cast<int>(b.size()) - 1) / 2);
    }
  }
}

// Network output: sum_i K(i) f_{beta_i}(x).
inline std::vector<double> wide_output(const ParametricFamily& fam, const UnitParams& b,
                                       double alpha, std::span<const double> x) {
  if (b.empty() || b.size() % 2 == 0) throw InvalidArgument("unit stack must have odd size 2N+1");
  check_unit_params(fam, b);
  const int half_width = (static_cast<int>(b.size()) - 1) / 2;
  const kernel::KernelWeights kw = kernel::kernel_weights(alpha, half_width);
  std::vector<double> out(static_cast<std::size_t>(fam.output_dim));
  std::vector<double> fx(out.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = weighted_sum_outside_in(kw, [&](int i) {
      fam.eval(b[static_cast<std::size_t>(i + half_width)], x, fx);
      return fx[k];
    });
  }
  return out;
}

// Kernel-weighted per-unit squared residuals at sample n:
// sum_i K(i) |y(i, n) - f_{beta_i}(x(n))|^2. Separable across units.
inline double phi_loss(const UnitParams& b, double alpha, const SampleBatch& batch, int n) {
  if (n < 0 || n >= batch.n_samples) throw IndexOutOfRange(n, batch.n_samples);
  if (static_cast<int>(b.size()) != batch.units()) {
    throw InvalidArgument("unit stack size does not match the batch width");
  }
  check_unit_params(batch.family, b);
  const kernel::KernelWeights kw = kernel::kernel_weights(alpha, batch.half_width);
  std::vector<double> fx(static_cast<std::size_t>(batch.family.output_dim));
  return weighted_sum_outside_in(kw, [&](int i) {
    batch.family.eval(b[static_cast<std::size_t>(i + batch.half_width)], batch.x(n), fx);
    const auto y = batch.y(i, n);
    double term = 0.0;
    for (std::size_t k = 0; k < fx.size(); ++k) {
      const double r = y[k] - fx[k];
      term += r * r;
    }
    return term;
  });
}

// Mean-square error of the aggregated network output: residuals are
// kernel-aggregated before squaring, unlike phi_loss.
inline double lms_risk_estimate(const UnitParams& b, double alpha, const SampleBatch& batch) {
  if (batch.n_samples < 1) throw InvalidArgument("batch must be nonempty");
  if (static_cast<int>(b.size()) != batch.units()) {
    throw InvalidArgument("unit stack size does not match the batch width");
  }
  check_unit_params(batch.family, b);
  const kernel::KernelWeights kw = kernel::kernel_weights(alpha, batch.half_width);
  const auto s = static_cast<std::size_t>(batch.family.output_dim);
  std::vector<double> fx(s);
  double acc = 0.0;
  for (int n = 0; n < batch.n_samples; ++n) {
    double norm_sq = 0.0;
    for (std::size_t k = 0; k < s; ++k) {
      const double agg = weighted_sum_outside_in(kw, [&](int i) {
        batch.family.eval(b[static_cast<std::size_t>(i + batch.half_width)], batch.x(n), fx);
        return batch.y(i, n)[k] - fx[k];
      });
      norm_sq += agg * agg;
    }
    acc += norm_sq;
  }
  return acc / static_cast<double>(batch.n_samples);
}

// Row per (n, i): n, i, x_1..x_d, y_1..y_s, xi_1..xi_s.
inline void write_batch_csv(std::ostream& out, const SampleBatch& batch) {
  out << "n,i";
  for (int k = 1; k <= batch.family.input_dim; ++k) out << ",x_" << k;
  for (int k = 1; k <= batch.family.output_dim; ++k) out << ",y_" << k;
  for (int k = 1; k <= batch.family.output_dim; ++k) out << ",xi_" << k;
  out << "\n";
  for (int n = 0; n < batch.n_samples; ++n) {
    for (int i = -batch.half_width; i <= batch.half_width; ++i) {
      out << n << ',' << i;
      for (double v : batch.x(n)) out << ',' << csv::format_double(v);
      for (double v : batch.y(i, n)) out << ',' << csv::format_double(v);
      for (double v : batch.xi(i, n)) out << ',' << csv::format_double(v);
      out << "\n";
    }
  }
}

}  // namespace scx::network
