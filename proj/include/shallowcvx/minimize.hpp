#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "shallowcvx/csv.hpp"
#include "shallowcvx/epigraph.hpp"
#include "shallowcvx/error.hpp"
#include "shallowcvx/kernel.hpp"
#include "shallowcvx/network.hpp"

namespace scx::minimize {

// Grid nodes within value_tol of the exact grid minimum, in row-major
// (lexicographic) node order. Ties are kept, not broken.
struct ArgminSet {
  std::vector<std::vector<double>> minimizers;
  double min_value = 0.0;
  double value_tol = 0.0;
};

inline ArgminSet grid_argmin(const epigraph::SampledFunction& sf, double value_tol) {
  epigraph::validate(sf);
  if (value_tol < 0.0) throw InvalidArgument("value tolerance must be >= 0");
  ArgminSet out;
  out.value_tol = value_tol;
  out.min_value = *std::min_element(sf.values.begin(), sf.values.end());
  for (std::size_t i = 0; i < sf.values.size(); ++i) {
    if (sf.values[i] <= out.min_value + value_tol) out.minimizers.push_back(sf.domain.node(i));
  }
  return out;
}

inline double argmin_set_distance(std::span<const double> point, const ArgminSet& target) {
  if (target.minimizers.empty()) throw EmptyArgmin();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& m : target.minimizers) {
    if (m.size() != point.size()) throw DimensionMismatch(static_cast<int>(m.size()),
                                                          static_cast<int>(point.size()));
    double d = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) d += (point[k] - m[k]) * (point[k] - m[k]);
    best = std::min(best, d);
  }
  return std::sqrt(best);
}

struct PerUnitArgmin {
  network::UnitParams minimizers;    // beta-hat per unit, index i + N
  std::vector<double> unit_minima;   // per-unit minimum squared residual
  double min_phi = 0.0;              // kernel-weighted sum of unit minima
};

// Exploits separability of the kernel-weighted loss: each unit's squared
// residual is minimized over the grid independently (ties to the
// lexicographically smallest node, i.e. the first in row-major order), and
// min_phi accumulates the per-unit minima with the shared weighted-sum order
// so it reproduces a joint product-space search bit-exactly.
inline PerUnitArgmin per_unit_argmin(const network::SampleBatch& batch, double alpha,
                                     int half_width, int sample_index,
                                     const epigraph::ParamBox& grid) {
  if (half_width != batch.half_width) throw InvalidArgument("half width does not match batch");
  if (sample_index < 0 || sample_index >= batch.n_samples) {
    throw IndexOutOfRange(sample_index, batch.n_samples);
  }
  const auto& fam = batch.family;
  if (grid.p() != fam.param_dim) throw DimensionMismatch(grid.p(), fam.param_dim);

  // f_beta(x_n) does not depend on the unit: tabulate once.
  const std::size_t nodes = grid.node_count();
  const auto s = static_cast<std::size_t>(fam.output_dim);
  std::vector<double> fx(nodes * s);
  for (std::size_t g = 0; g < nodes; ++g) {
    const auto beta = grid.node(g);
    fam.eval(beta, batch.x(sample_index), {fx.data() + g * s, s});
  }

  PerUnitArgmin out;
  const int units = batch.units();
  out.minimizers.resize(static_cast<std::size_t>(units));
  out.unit_minima.resize(static_cast<std::size_t>(units));
  for (int i = -half_width; i <= half_width; ++i) {
    const auto y = batch.y(i, sample_index);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_node = 0;
    for (std::size_t g = 0; g < nodes; ++g) {
      double loss = 0.0;
      for (std::size_t k = 0; k < s; ++k) {
        const double r = y[k] - fx[g * s + k];
        loss += r * r;
      }
      if (loss < best) {
        best = loss;
        best_node = g;
      }
    }
    out.unit_minima[static_cast<std::size_t>(i + half_width)] = best;
    out.minimizers[static_cast<std::size_t>(i + half_width)] = grid.node(best_node);
  }

  const kernel::KernelWeights kw = kernel::kernel_weights(alpha, half_width);
  out.min_phi = network::weighted_sum_outside_in(
      kw, [&](int i) { return out.unit_minima[static_cast<std::size_t>(i + half_width)]; });
  return out;
}

struct SweepRow {
  double alpha = 0.0;
  int half_width = 0;
  std::uint64_t seed = 0;
  double min_phi = 0.0;
  double mean_per_unit_min = 0.0;  // Cesaro mean of the per-unit minima
  double minorant_min = 0.0;       // min of the convex minorant of the mean loss landscape
  double argmin_distance = 0.0;    // weighted-average beta-hat to the minorant argmin set
};

struct SweepReport {
  std::vector<SweepRow> rows;  // sorted by (alpha, half_width, seed)
  std::string family;
  std::string grid_desc;
  std::string noise_desc;
};

namespace detail {

inline SweepRow sweep_cell(const network::DataConfig& base, double alpha, int half_width,
                           std::uint64_t seed, const epigraph::ParamBox& grid) {
  network::DataConfig cfg = base;
  cfg.seed = seed;
  const network::SampleBatch batch = network::generate_batch(cfg, half_width, 1);
  const PerUnitArgmin pu = per_unit_argmin(batch, alpha, half_width, 0, grid);

  const int units = batch.units();
  double cesaro = 0.0;
  for (int j = half_width; j >= 1; --j) {
    cesaro += pu.unit_minima[static_cast<std::size_t>(half_width - j)] +
              pu.unit_minima[static_cast<std::size_t>(half_width + j)];
  }
  cesaro += pu.unit_minima[static_cast<std::size_t>(half_width)];
  cesaro /= static_cast<double>(units);

  // Mean-over-units loss landscape on the grid, then its convex minorant.
  const auto& fam = batch.family;
  const std::size_t nodes = grid.node_count();
  const auto s = static_cast<std::size_t>(fam.output_dim);
  epigraph::SampledFunction landscape{grid, std::vector<double>(nodes, 0.0)};
  std::vector<double> fx(s);
  for (std::size_t g = 0; g < nodes; ++g) {
    const auto beta = grid.node(g);
    fam.eval(beta, batch.x(0), fx);
    double acc = 0.0;
    for (int i = -half_width; i <= half_width; ++i) {
      const auto y = batch.y(i, 0);
      double loss = 0.0;
      for (std::size_t k = 0; k < s; ++k) {
        const double r = y[k] - fx[k];
        loss += r * r;
      }
      acc += loss;
    }
    landscape.values[g] = acc / static_cast<double>(units);
  }
  const epigraph::SampledFunction minorant = epigraph::convex_minorant(landscape);
  const ArgminSet minorant_argmin =
      grid_argmin(minorant, grid.grid_step() * fam.lipschitz_beta);

  // Kernel-weighted average of the per-unit minimizers.
  const kernel::KernelWeights kw = kernel::kernel_weights(alpha, half_width);
  std::vector<double> avg(static_cast<std::size_t>(fam.param_dim), 0.0);
  for (std::size_t k = 0; k < avg.size(); ++k) {
    avg[k] = network::weighted_sum_outside_in(
        kw, [&](int i) { return pu.minimizers[static_cast<std::size_t>(i + half_width)][k]; });
  }

  SweepRow row;
  row.alpha = alpha;
  row.half_width = half_width;
  row.seed = seed;
  row.min_phi = pu.min_phi;
  row.mean_per_unit_min = cesaro;
  row.minorant_min = minorant_argmin.min_value;
  row.argmin_distance = argmin_set_distance(avg, minorant_argmin);
  if (!std::isfinite(row.min_phi) || !std::isfinite(row.mean_per_unit_min) ||
      !std::isfinite(row.minorant_min) || !std::isfinite(row.argmin_distance)) {
    throw ComputeError("non-finite sweep cell at alpha=" + std::to_string(alpha) +
                       " N=" + std::to_string(half_width) + " seed=" + std::to_string(seed));
  }
  return row;
}

}  // namespace detail

// One row per (alpha, N, seed) cell over the full requested grid, rows in
// sorted cell order. Cells are independent pure jobs; `threads` caps the
// parallelism and never affects the result.
inline SweepReport theorem_sweep(const network::DataConfig& cfg, std::vector<double> alphas,
                                 std::vector<int> widths, std::vector<std::uint64_t> seeds,
                                 const epigraph::ParamBox& grid, int threads = 1) {
  if (alphas.empty() || widths.empty() || seeds.empty()) {
    throw InvalidArgument("sweep needs at least one alpha, width and seed");
  }
  for (double a : alphas) kernel::require_alpha(a);
  for (int w : widths) {
    if (w < 0) throw InvalidArgument("width must be >= 0");
  }
  if (threads < 1) throw InvalidArgument("threads must be >= 1");
  std::sort(alphas.begin(), alphas.end());
  std::sort(widths.begin(), widths.end());
  std::sort(seeds.begin(), seeds.end());

  struct Cell {
    double alpha;
    int width;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (double a : alphas) {
    for (int w : widths) {
      for (std::uint64_t s : seeds) cells.push_back({a, w, s});
    }
  }

  SweepReport report;
  report.family = cfg.family.name;
  report.grid_desc = std::to_string(grid.node_count()) + " nodes, step " +
                     csv::format_double(grid.grid_step());
  report.noise_desc =
      (cfg.noise.kind == network::NoiseSpec::Kind::gaussian ? "gaussian " : "uniform ") +
      csv::format_double(cfg.noise.level);
  report.rows.resize(cells.size());

  if (threads == 1) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      report.rows[c] = detail::sweep_cell(cfg, cells[c].alpha, cells[c].width, cells[c].seed, grid);
    }
    return report;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::future<void>> workers;
  const int pool = std::min<int>(threads, static_cast<int>(cells.size()));
  for (int t = 0; t < pool; ++t) {
    workers.push_back(std::async(std::launch::async, [&]() {
      for (;;) {
        const std::size_t c = next.fetch_add(1);
        if (c >= cells.size()) return;
        report.rows[c] =
            detail::sweep_cell(cfg, cells[c].alpha, cells[c].width, cells[c].seed, grid);
      }
    }));
  }
  for (auto& w : workers) w.get();
  return report;
}

inline void write_sweep_csv(std::ostream& out, const SweepReport& report) {
  out << "alpha,N,seed,min_phi,mean_per_unit_min,minorant_min,argmin_distance\n";
  for (const auto& r : report.rows) {
    out << csv::format_double(r.alpha) << ',' << r.half_width << ',' << r.seed << ','
        << csv::format_double(r.min_phi) << ',' << csv::format_double(r.mean_per_unit_min) << ','
        << csv::format_double(r.minorant_min) << ',' << csv::format_double(r.argmin_distance)
        << "\n";
  }
}

}  // namespace scx::minimize
