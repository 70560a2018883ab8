#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "shallowcvx/csv.hpp"
#include "shallowcvx/error.hpp"
#include "shallowcvx/minimize.hpp"
#include "shallowcvx/network.hpp"
#include "shallowcvx/rng.hpp"

namespace scx::sgd {

// Step sizes a(n) = a0 / (n+1)^gamma. Valid exponents are gamma in (0.5, 1]:
// the step sum diverges (p-series, p <= 1) while the squared-step sum
// converges (p-series, p > 1). Both certificates are recorded.
struct StepSchedule {
  double a0 = 0.0;
  double gamma = 0.0;
  bool sum_diverges = false;
  bool sum_sq_converges = false;

  double at(std::int64_t n) const { return a0 / std::pow(static_cast<double>(n + 1), gamma); }
};

inline StepSchedule make_schedule(double a0, double gamma) {
  if (!(a0 > 0.0)) throw InvalidArgument("initial step must be positive");
  if (!(gamma > 0.5) || !(gamma <= 1.0)) throw NotRobbinsMonro(gamma);
  return {a0, gamma, /*sum_diverges=*/gamma <= 1.0, /*sum_sq_converges=*/2.0 * gamma > 1.0};
}

enum class SgdMode {
  single_beta,  // one parameter vector against noiseless shared-truth residuals
  full_stack,   // all 2N+1 unit parameters against the noisy aggregate error
};

struct SgdTrajectory {
  int param_dim = 0;
  StepSchedule schedule;
  std::uint64_t seed = 0;
  std::vector<double> iterates;       // (steps + 1) x p; row n is beta(n)
  std::vector<double> losses;         // per step, evaluated at beta(n)
  std::vector<double> grad_sq_norms;  // per step, evaluated at beta(n)
  std::int64_t projection_count = 0;

  std::int64_t steps() const noexcept { return static_cast<std::int64_t>(losses.size()); }
  std::span<const double> beta(std::int64_t n) const {
    const auto p = static_cast<std::size_t>(param_dim);
    return {iterates.data() + static_cast<std::size_t>(n) * p, p};
  }
};

// Subgradient descent over the parameter box with projection after every
// step and a fresh input draw per step.
//
// single_beta follows the width-limit objective: the kernel aggregate of the
// unit noises vanishes in that limit, so the per-step residual is the
// noiseless f_{beta*}(x) - f_beta(x). full_stack keeps the finite width:
// every unit parameter descends the aggregate squared error
// |sum_i K(i)(y_i - f_{beta_i}(x))|^2 with per-unit noisy targets; recorded
// iterates are the kernel-weighted average of the stack.
inline SgdTrajectory sgd_run(const network::DataConfig& cfg, double alpha, int half_width,
                             const StepSchedule& schedule, std::int64_t steps, SgdMode mode,
                             std::vector<double> init = {}) {
  if (steps < 1) throw InvalidArgument("need at least one step");
  if (!(schedule.a0 > 0.0)) throw InvalidArgument("schedule has no positive initial step");
  network::validate(cfg, mode == SgdMode::full_stack ? half_width : 0);
  const auto& fam = cfg.family;
  const auto p = static_cast<std::size_t>(fam.param_dim);
  const auto s = static_cast<std::size_t>(fam.output_dim);

  if (init.empty()) {
    init.resize(p);
    for (std::size_t k = 0; k < p; ++k) {
      init[k] = 0.5 * (fam.domain.lower()[k] + fam.domain.upper()[k]);
    }
  }
  if (init.size() != p || !fam.domain.contains(init)) {
    throw InvalidArgument("initial point must lie in the parameter box");
  }

  const std::vector<double>& in_lo = cfg.input_lower.empty() ? fam.input_lower : cfg.input_lower;
  const std::vector<double>& in_hi = cfg.input_upper.empty() ? fam.input_upper : cfg.input_upper;

  SgdTrajectory traj;
  traj.param_dim = fam.param_dim;
  traj.schedule = schedule;
  traj.seed = cfg.seed;
  traj.losses.reserve(static_cast<std::size_t>(steps));
  traj.grad_sq_norms.reserve(static_cast<std::size_t>(steps));
  traj.iterates.reserve((static_cast<std::size_t>(steps) + 1) * p);

  Rng xs(derive_stream_seed(cfg.seed, 0));
  const int units = mode == SgdMode::full_stack ? 2 * half_width + 1 : 1;
  std::vector<Rng> unit_rng;
  if (mode == SgdMode::full_stack) {
    unit_rng.reserve(static_cast<std::size_t>(units));
    for (int i = -half_width; i <= half_width; ++i) {
      unit_rng.emplace_back(
          derive_stream_seed(cfg.seed, static_cast<std::uint64_t>(geometry::interleave_index(i))));
    }
  }
  const kernel::KernelWeights kw = mode == SgdMode::full_stack
                                       ? kernel::kernel_weights(alpha, half_width)
                                       : kernel::kernel_weights(alpha, 0);

  network::UnitParams stack(static_cast<std::size_t>(units), init);
  std::vector<double> x(static_cast<std::size_t>(fam.input_dim));
  std::vector<double> fx(s), truth_fx(s), residual(s);
  std::vector<double> grad(p), unit_grad(p);
  std::vector<double> mean_beta(p);

  auto record_iterate = [&]() {
    std::fill(mean_beta.begin(), mean_beta.end(), 0.0);
    if (mode == SgdMode::single_beta) {
      mean_beta = stack[0];
    } else {
      for (std::size_t k = 0; k < p; ++k) {
        mean_beta[k] = network::weighted_sum_outside_in(
            kw, [&](int i) { return stack[static_cast<std::size_t>(i + half_width)][k]; });
      }
    }
    traj.iterates.insert(traj.iterates.end(), mean_beta.begin(), mean_beta.end());
  };
  record_iterate();

  for (std::int64_t n = 0; n < steps; ++n) {
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = xs.uniform(in_lo[k], in_hi[k]);
    const double a_n = schedule.at(n);
    double loss = 0.0;
    double grad_sq = 0.0;

    if (mode == SgdMode::single_beta) {
      fam.eval(cfg.beta_star, x, truth_fx);
      fam.eval(stack[0], x, fx);
      for (std::size_t k = 0; k < s; ++k) {
        residual[k] = truth_fx[k] - fx[k];
        loss += residual[k] * residual[k];
      }
      fam.loss_subgrad(stack[0], x, residual, grad);
      for (double g : grad) grad_sq += g * g;
      for (std::size_t k = 0; k < p; ++k) stack[0][k] -= a_n * grad[k];
    } else {
      // Aggregate residual, then per-unit chain-rule steps scaled by K(i).
      std::vector<double> agg(s, 0.0);
      std::vector<std::vector<double>> unit_residuals(static_cast<std::size_t>(units),
                                                      std::vector<double>(s));
      for (int i = -half_width; i <= half_width; ++i) {
        const auto u = static_cast<std::size_t>(i + half_width);
        const auto truth = cfg.truth_for_unit(i, half_width);
        fam.eval(truth, x, truth_fx);
        fam.eval(stack[u], x, fx);
        for (std::size_t k = 0; k < s; ++k) {
          const double noise = network::detail::draw_noise(unit_rng[u], cfg.noise);
          unit_residuals[u][k] = truth_fx[k] + noise - fx[k];
        }
      }
      for (std::size_t k = 0; k < s; ++k) {
        agg[k] = network::weighted_sum_outside_in(
            kw, [&](int i) { return unit_residuals[static_cast<std::size_t>(i + half_width)][k]; });
        loss += agg[k] * agg[k];
      }
      for (int i = -half_width; i <= half_width; ++i) {
        const auto u = static_cast<std::size_t>(i + half_width);
        fam.loss_subgrad(stack[u], x, agg, unit_grad);
        const double w = kw.weight(i);
        for (std::size_t k = 0; k < p; ++k) {
          const double g = w * unit_grad[k];
          grad_sq += g * g;
          stack[u][k] -= a_n * g;
        }
      }
    }

    if (!std::isfinite(loss) || !std::isfinite(grad_sq)) throw NonFiniteIterate(n);
    traj.losses.push_back(loss);
    traj.grad_sq_norms.push_back(grad_sq);

    bool projected = false;
    for (auto& beta : stack) {
      for (std::size_t k = 0; k < p; ++k) {
        const double clamped = std::clamp(beta[k], fam.domain.lower()[k], fam.domain.upper()[k]);
        if (clamped != beta[k]) projected = true;
        if (!std::isfinite(clamped)) throw NonFiniteIterate(n);
        beta[k] = clamped;
      }
    }
    if (projected) ++traj.projection_count;
    record_iterate();
  }
  return traj;
}

struct DescentReport {
  std::int64_t windows = 0;
  double pass_fraction = 0.0;
  double fitted_c = 0.0;  // 95th percentile of the per-window quadratic-term ratios
};

// Windowed check of the expected one-step descent relation: with seed-averaged
// E[F] and E[|grad|^2] over non-overlapping windows [kw, (k+1)w),
//   E[F_end] <= E[F_start] - sum a(j) E[|grad|^2](j) + C sum a(j)^2
// where C is fitted as the 95th percentile of the per-window ratios.
inline DescentReport descent_inequality_check(const std::vector<SgdTrajectory>& trajs,
                                              std::int64_t window) {
  if (trajs.size() < 20) throw InsufficientTrajectories(trajs.size(), 20);
  if (window < 1) throw InvalidArgument("window must be >= 1");
  const std::int64_t steps = trajs.front().steps();
  for (const auto& t : trajs) {
    if (t.steps() != steps) throw InvalidArgument("trajectories must have equal length");
  }
  const std::int64_t windows = steps / window;
  if (windows < 1) throw InvalidArgument("window longer than the trajectories");

  auto mean_loss = [&](std::int64_t n) {
    double acc = 0.0;
    for (const auto& t : trajs) acc += t.losses[static_cast<std::size_t>(n)];
    return acc / static_cast<double>(trajs.size());
  };
  auto mean_grad_sq = [&](std::int64_t n) {
    double acc = 0.0;
    for (const auto& t : trajs) acc += t.grad_sq_norms[static_cast<std::size_t>(n)];
    return acc / static_cast<double>(trajs.size());
  };

  std::vector<double> lhs(static_cast<std::size_t>(windows));
  std::vector<double> step_sq(static_cast<std::size_t>(windows));
  std::vector<double> ratios;
  for (std::int64_t w = 0; w < windows; ++w) {
    const std::int64_t start = w * window;
    const std::int64_t end = std::min(steps - 1, (w + 1) * window);
    double descent = 0.0, sq = 0.0;
    for (std::int64_t j = start; j < end; ++j) {
      const double a = trajs.front().schedule.at(j);
      descent += a * mean_grad_sq(j);
      sq += a * a;
    }
    lhs[static_cast<std::size_t>(w)] = mean_loss(end) - mean_loss(start) + descent;
    step_sq[static_cast<std::size_t>(w)] = sq;
    if (sq > 0.0) ratios.push_back(std::max(0.0, lhs[static_cast<std::size_t>(w)]) / sq);
  }

  DescentReport report;
  report.windows = windows;
  if (!ratios.empty()) {
    std::sort(ratios.begin(), ratios.end());
    const auto idx = static_cast<std::size_t>(
        std::min<double>(static_cast<double>(ratios.size()) - 1.0,
                         std::floor(0.95 * static_cast<double>(ratios.size()))));
    report.fitted_c = ratios[idx];
  }
  const double slack = 1e-12 * (1.0 + std::abs(mean_loss(0)));
  std::int64_t pass = 0;
  for (std::int64_t w = 0; w < windows; ++w) {
    if (lhs[static_cast<std::size_t>(w)] <=
        report.fitted_c * step_sq[static_cast<std::size_t>(w)] + slack) {
      ++pass;
    }
  }
  report.pass_fraction = static_cast<double>(pass) / static_cast<double>(windows);
  return report;
}

enum class DecayStatus { ok, already_stationary };

struct DecayReport {
  DecayStatus status = DecayStatus::ok;
  double slope = 0.0;             // log moving-average grad vs log n
  double final_to_initial = 0.0;  // terminal / initial moving average
};

inline constexpr std::int64_t kDecayWindow = 100;

inline DecayReport gradient_decay_report(const SgdTrajectory& traj) {
  const std::int64_t steps = traj.steps();
  if (steps < kDecayWindow) throw InvalidArgument("trajectory must have at least 100 steps");

  std::vector<double> ma;
  double acc = 0.0;
  for (std::int64_t n = 0; n < steps; ++n) {
    acc += traj.grad_sq_norms[static_cast<std::size_t>(n)];
    if (n >= kDecayWindow) acc -= traj.grad_sq_norms[static_cast<std::size_t>(n - kDecayWindow)];
    if (n >= kDecayWindow - 1) ma.push_back(acc / static_cast<double>(kDecayWindow));
  }

  DecayReport report;
  if (ma.front() <= 0.0) {
    report.status = DecayStatus::already_stationary;
    return report;
  }
  report.final_to_initial = ma.back() / ma.front();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t count = 0;
  for (std::size_t j = 0; j < ma.size(); ++j) {
    if (ma[j] <= 0.0) continue;
    const double lx = std::log(static_cast<double>(j + kDecayWindow));
    const double ly = std::log(ma[j]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++count;
  }
  if (count >= 2) {
    const double k = static_cast<double>(count);
    report.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  }
  return report;
}

struct DistanceSeries {
  std::vector<double> distances;  // per recorded iterate
  double final_window_fraction = 0.0;  // share of the last 10% below epsilon
};

inline DistanceSeries distance_to_argmin_series(const SgdTrajectory& traj,
                                                const minimize::ArgminSet& target,
                                                double epsilon) {
  if (target.minimizers.empty()) throw EmptyArgmin();
  DistanceSeries out;
  const std::int64_t rows = traj.steps() + 1;
  out.distances.reserve(static_cast<std::size_t>(rows));
  for (std::int64_t n = 0; n < rows; ++n) {
    out.distances.push_back(minimize::argmin_set_distance(traj.beta(n), target));
  }
  const auto tail = static_cast<std::size_t>(
      std::max<std::int64_t>(1, rows / 10));
  std::size_t hits = 0;
  for (std::size_t j = out.distances.size() - tail; j < out.distances.size(); ++j) {
    if (out.distances[j] < epsilon) ++hits;
  }
  out.final_window_fraction = static_cast<double>(hits) / static_cast<double>(tail);
  return out;
}

// Rows n = 0..steps-1: the iterate the step's records were evaluated at.
inline void write_trajectory_csv(std::ostream& out, const SgdTrajectory& traj) {
  out << "n,a_n";
  for (int k = 1; k <= traj.param_dim; ++k) out << ",beta_" << k;
  out << ",F_n,grad_sq_norm\n";
  for (std::int64_t n = 0; n < traj.steps(); ++n) {
    out << n << ',' << csv::format_double(traj.schedule.at(n));
    for (double b : traj.beta(n)) out << ',' << csv::format_double(b);
    out << ',' << csv::format_double(traj.losses[static_cast<std::size_t>(n)]) << ','
        << csv::format_double(traj.grad_sq_norms[static_cast<std::size_t>(n)]) << "\n";
  }
}

// Reference normal-equations fit for the affine family on one unit's data;
// shares no code with the descent path.
inline std::vector<double> affine_least_squares(const network::SampleBatch& batch,
                                                int unit_index = 0) {
  const auto& fam = batch.family;
  if (fam.name != "affine") throw InvalidArgument("least-squares fit is defined for affine only");
  const auto p = static_cast<std::size_t>(fam.param_dim);
  std::vector<double> xtx(p * p, 0.0), xty(p, 0.0), clipped(p);
  for (int n = 0; n < batch.n_samples; ++n) {
    fam.clip_input(batch.x(n), clipped);
    const double y = batch.y(unit_index, n)[0];
    for (std::size_t a = 0; a < p; ++a) {
      xty[a] += clipped[a] * y;
      for (std::size_t b = 0; b < p; ++b) xtx[a * p + b] += clipped[a] * clipped[b];
    }
  }
  // Gaussian elimination with partial pivoting.
  std::vector<double> beta(p, 0.0);
  for (std::size_t col = 0; col < p; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < p; ++r) {
      if (std::abs(xtx[r * p + col]) > std::abs(xtx[pivot * p + col])) pivot = r;
    }
    if (std::abs(xtx[pivot * p + col]) < 1e-300) throw ComputeError("singular normal equations");
    if (pivot != col) {
      for (std::size_t c = 0; c < p; ++c) std::swap(xtx[col * p + c], xtx[pivot * p + c]);
      std::swap(xty[col], xty[pivot]);
    }
    for (std::size_t r = col + 1; r < p; ++r) {
      const double f = xtx[r * p + col] / xtx[col * p + col];
      for (std::size_t c = col; c < p; ++c) xtx[r * p + c] -= f * xtx[col * p + c];
      xty[r] -= f * xty[col];
    }
  }
  for (std::size_t col = p; col-- > 0;) {
    double acc = xty[col];
    for (std::size_t c = col + 1; c < p; ++c) acc -= xtx[col * p + c] * beta[c];
    beta[col] = acc / xtx[col * p + col];
  }
  return beta;
}

}  // namespace scx::sgd
