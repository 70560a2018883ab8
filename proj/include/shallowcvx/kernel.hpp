#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "shallowcvx/error.hpp"

namespace scx::kernel {

// Normalized two-sided geometric weights w(i) = C_N * alpha^|i| over
// i in {-N, ..., N}. The normalizer is computed by direct summation in
// ascending magnitude order; closed forms exist but are kept for
// cross-checks only.
struct KernelWeights {
  double alpha = 0.0;
  int half_width = 0;               // N
  double normalizer = 0.0;          // C_N
  std::vector<double> weights;      // size 2N+1, index i + N

  double weight(int i) const {
    const int n = half_width;
    if (i < -n || i > n) throw IndexOutOfRange(i, 2 * static_cast<std::int64_t>(n) + 1);
    return weights[static_cast<std::size_t>(i + n)];
  }
};

inline void require_alpha(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw AlphaOutOfRange(alpha);
}

inline KernelWeights kernel_weights(double alpha, int half_width) {
  require_alpha(alpha);
  if (half_width < 0) throw InvalidArgument("kernel half width must be >= 0");
  // 1 + 2 * sum_{j=1..N} alpha^j, smallest terms first.
  double tail = 0.0;
  for (int j = half_width; j >= 1; --j) tail += std::pow(alpha, j);
  const double total = 1.0 + 2.0 * tail;
  KernelWeights kw;
  kw.alpha = alpha;
  kw.half_width = half_width;
  kw.normalizer = 1.0 / total;
  kw.weights.resize(static_cast<std::size_t>(2 * half_width + 1));
  for (int i = -half_width; i <= half_width; ++i) {
    kw.weights[static_cast<std::size_t>(i + half_width)] = kw.normalizer * std::pow(alpha, std::abs(i));
  }
  return kw;
}

// Normalizer of the two-sided infinite kernel: C(alpha) = (1-alpha)/(1+alpha).
inline double infinite_normalizer(double alpha) {
  require_alpha(alpha);
  return (1.0 - alpha) / (1.0 + alpha);
}

// Mass of the infinite kernel beyond |i| = N: 2 C(alpha) alpha^{N+1} / (1-alpha).
inline double infinite_tail_mass(double alpha, int half_width) {
  require_alpha(alpha);
  return 2.0 * std::pow(alpha, half_width + 1) / (1.0 + alpha);
}

// Smallest N whose discarded infinite-kernel tail mass is below tol.
inline int infinite_tail_cutoff(double alpha, double tol) {
  require_alpha(alpha);
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  int n = 0;
  const double target = tol * (1.0 + alpha) / 2.0;
  if (target < 1.0) {
    n = std::max(0, static_cast<int>(std::ceil(std::log(target) / std::log(alpha))) - 1);
  }
  while (infinite_tail_mass(alpha, n) >= tol) ++n;
  while (n > 0 && infinite_tail_mass(alpha, n - 1) < tol) --n;
  return n;
}

// A bounded function of a two-sided integer index. `bound` is a declared
// sup-norm; evaluations are checked against it.
struct TwoSidedSequence {
  std::function<double(std::int64_t)> generator;
  double bound = 0.0;

  double at(std::int64_t i) const {
    const double v = generator(i);
    if (std::abs(v) > bound + 1e-12 * std::max(1.0, bound)) {
      throw Error("sequence value " + std::to_string(v) + " exceeds declared bound " +
                  std::to_string(bound));
    }
    return v;
  }
};

// Symmetric window average over i in {-N, ..., N}.
inline double cesaro_mean(const TwoSidedSequence& s, std::int64_t window) {
  if (window < 0) throw InvalidArgument("window must be >= 0");
  double acc = 0.0;
  for (std::int64_t j = window; j >= 1; --j) acc += s.at(-j) + s.at(j);
  acc += s.at(0);
  return acc / static_cast<double>(2 * window + 1);
}

// Infinite-kernel mean with certified truncation: the cutoff is chosen so the
// discarded mass times the sequence bound stays below tol.
inline double abel_kernel_mean(const TwoSidedSequence& s, double alpha, double tol) {
  require_alpha(alpha);
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  if (s.bound == 0.0) return 0.0;
  const int cutoff = infinite_tail_cutoff(alpha, tol / s.bound);
  const double c = infinite_normalizer(alpha);
  double acc = 0.0;
  for (int j = cutoff; j >= 1; --j) acc += c * std::pow(alpha, j) * (s.at(-j) + s.at(j));
  acc += c * s.at(0);
  return acc;
}

struct TauberianRow {
  double alpha;
  double gap;  // |abel mean - window-average estimate of the limit|
};

struct TauberianReport {
  std::vector<TauberianRow> rows;  // sorted by alpha ascending
  double cesaro_value = 0.0;
  bool nonincreasing = false;      // gaps nonincreasing as alpha rises (1e-6 jitter)
};

inline constexpr double kAbelTruncationTol = 1e-9;

// Agreement between the kernel mean and the window average, per alpha.
// Requires the window average to have numerically settled.
inline TauberianReport tauberian_gap(const TwoSidedSequence& s, std::vector<double> alphas,
                                     std::int64_t cesaro_window) {
  if (alphas.empty()) throw InvalidArgument("need at least one alpha");
  if (cesaro_window < 2) throw InvalidArgument("cesaro window must be >= 2");
  const double full = cesaro_mean(s, cesaro_window);
  const double half = cesaro_mean(s, cesaro_window / 2);
  if (std::abs(full - half) >= 1e-4) throw CesaroNotConverged(half, full);

  std::sort(alphas.begin(), alphas.end());
  TauberianReport report;
  report.cesaro_value = full;
  for (double alpha : alphas) {
    const double abel = abel_kernel_mean(s, alpha, kAbelTruncationTol);
    report.rows.push_back({alpha, std::abs(abel - full)});
  }
  report.nonincreasing = true;
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    if (report.rows[i].gap > report.rows[i - 1].gap + 1e-6) report.nonincreasing = false;
  }
  return report;
}

// Upper bound on sup over bounded sequences of the finite-vs-infinite kernel
// mean discrepancy: bound * (sum_{|i|<=N} |K_N - K_inf| + tail mass).
inline double finite_width_uniformity_gap(const TwoSidedSequence& s, double alpha, int half_width) {
  const KernelWeights kw = kernel_weights(alpha, half_width);
  const double c = infinite_normalizer(alpha);
  double diff = 0.0;
  for (int j = half_width; j >= 1; --j) {
    diff += 2.0 * std::abs(kw.weight(j) - c * std::pow(alpha, j));
  }
  diff += std::abs(kw.weight(0) - c);
  return s.bound * (diff + infinite_tail_mass(alpha, half_width));
}

}  // namespace scx::kernel
