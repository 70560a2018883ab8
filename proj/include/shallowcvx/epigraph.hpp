#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shallowcvx/error.hpp"
#include "shallowcvx/geometry.hpp"
#include "shallowcvx/rng.hpp"

namespace scx::epigraph {

inline constexpr double kValueCap = 1e12;
inline constexpr std::size_t kMaxNodesPerAxis = 10001;

// Compact rectangular parameter box with a uniform sampling grid. Nodes are
// lower + k * grid_step per axis; the last node may fall short of `upper`
// when the span is not a multiple of the step. Flat node indices are
// row-major with the last axis fastest.
class ParamBox {
public:
  ParamBox(std::vector<double> lower, std::vector<double> upper, double grid_step)
      : lower_(std::move(lower)), upper_(std::move(upper)), step_(grid_step) {
    if (lower_.empty() || lower_.size() != upper_.size()) {
      throw InvalidArgument("box bounds must be nonempty and of equal dimension");
    }
    if (!(grid_step > 0.0) || !std::isfinite(grid_step)) {
      throw InvalidArgument("grid step must be a positive real");
    }
    shape_.resize(lower_.size());
    for (std::size_t a = 0; a < lower_.size(); ++a) {
      if (!(lower_[a] < upper_[a])) throw InvalidArgument("box must satisfy lower < upper");
      const double span = (upper_[a] - lower_[a]) / step_;
      if (span > static_cast<double>(kMaxNodesPerAxis - 1)) {
        throw InvalidArgument("more than 1e4 grid cells on one axis");
      }
      shape_[a] = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
    }
  }

  int p() const noexcept { return static_cast<int>(lower_.size()); }
  double grid_step() const noexcept { return step_; }
  const std::vector<double>& lower() const noexcept { return lower_; }
  const std::vector<double>& upper() const noexcept { return upper_; }
  const std::vector<std::size_t>& shape() const noexcept { return shape_; }

  std::size_t node_count() const noexcept {
    std::size_t n = 1;
    for (std::size_t s : shape_) n *= s;
    return n;
  }

  std::vector<std::size_t> multi_index(std::size_t flat) const {
    std::vector<std::size_t> idx(shape_.size());
    for (std::size_t a = shape_.size(); a-- > 0;) {
      idx[a] = flat % shape_[a];
      flat /= shape_[a];
    }
    return idx;
  }

  std::vector<double> node(std::size_t flat) const {
    const auto idx = multi_index(flat);
    std::vector<double> x(shape_.size());
    for (std::size_t a = 0; a < shape_.size(); ++a) {
      x[a] = lower_[a] + static_cast<double>(idx[a]) * step_;
    }
    return x;
  }

  bool contains(std::span<const double> x, double slack = 1e-12) const {
    if (x.size() != lower_.size()) return false;
    for (std::size_t a = 0; a < lower_.size(); ++a) {
      if (x[a] < lower_[a] - slack || x[a] > upper_[a] + slack) return false;
    }
    return true;
  }

  ParamBox with_step(double step) const { return ParamBox(lower_, upper_, step); }

private:
  std::vector<double> lower_, upper_;
  double step_;
  std::vector<std::size_t> shape_;
};

struct SampledFunction {
  ParamBox domain;
  std::vector<double> values;  // one per grid node, row-major
};

inline void validate(const SampledFunction& sf) {
  if (sf.values.size() != sf.domain.node_count()) {
    throw InvalidArgument("value count does not match grid node count");
  }
  for (std::size_t i = 0; i < sf.values.size(); ++i) {
    if (!std::isfinite(sf.values[i]) || std::abs(sf.values[i]) >= kValueCap) {
      throw NonFiniteValue(i);
    }
  }
}

inline SampledFunction sample_function(const std::function<double(std::span<const double>)>& f,
                                       const ParamBox& domain) {
  SampledFunction sf{domain, {}};
  sf.values.reserve(domain.node_count());
  for (std::size_t i = 0; i < domain.node_count(); ++i) {
    const auto x = domain.node(i);
    const double v = f(x);
    if (!std::isfinite(v) || std::abs(v) >= kValueCap) throw NonFiniteValue(i);
    sf.values.push_back(v);
  }
  return sf;
}

inline double max_value(const SampledFunction& sf) {
  return *std::max_element(sf.values.begin(), sf.values.end());
}
inline double min_value(const SampledFunction& sf) {
  return *std::min_element(sf.values.begin(), sf.values.end());
}

// Scale-aware default cap: max q + (max q - min q + 1). Any cap works as long
// as all compared sets share it.
inline double default_cap(const SampledFunction& sf) {
  return max_value(sf) + (max_value(sf) - min_value(sf) + 1.0);
}

// Point-cloud sampling of {(beta, y) : q(beta) <= y <= M} over the grid.
// Each grid node contributes a column of y-values: the arithmetic delta-grid
// of [q(beta), M] including both endpoints.
struct TruncatedEpigraph {
  SampledFunction source;
  double cap = 0.0;
  double delta = 0.0;
  geometry::PointCloud cloud;
};

inline TruncatedEpigraph truncated_epigraph(const SampledFunction& sf, double cap, double delta) {
  validate(sf);
  if (!(delta > 0.0)) throw InvalidArgument("delta must be positive");
  const double top = max_value(sf);
  if (!(cap >= top + 1e-9)) throw CapTooLow(cap, top);

  const double est =
      static_cast<double>(sf.values.size()) * ((cap - min_value(sf)) / delta + 2.0);
  if (est > 2e7) throw CapacityExceeded(est, 2e7);

  const int dim = sf.domain.p() + 1;
  geometry::PointCloud cloud(dim, 0.0);
  std::vector<double> pt(static_cast<std::size_t>(dim));
  const double fuzz = 1e-12 * std::max(1.0, std::abs(cap));
  for (std::size_t i = 0; i < sf.values.size(); ++i) {
    const auto beta = sf.domain.node(i);
    std::copy(beta.begin(), beta.end(), pt.begin());
    const double q = sf.values[i];
    for (std::int64_t k = 0;; ++k) {
      const double y = q + static_cast<double>(k) * delta;
      if (y >= cap - fuzz) break;
      pt.back() = y;
      cloud.add(pt);
    }
    pt.back() = cap;
    cloud.add(pt);
  }
  return {sf, cap, delta, std::move(cloud)};
}

namespace detail {

// Lower hull of a 1-D graph, evaluated back onto the grid by piecewise-linear
// interpolation between hull vertices. Exact at hull vertices.
inline std::vector<double> lower_envelope_1d(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n <= 2) return values;
  std::vector<std::size_t> hull;
  for (std::size_t i = 0; i < n; ++i) {
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2], b = hull[hull.size() - 1];
      // cross of (b - a) x (i - a) in (index, value) coordinates
      const double cross = static_cast<double>(b - a) * (values[i] - values[a]) -
                           (values[b] - values[a]) * static_cast<double>(i - a);
      if (cross <= 0.0) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(i);
  }
  std::vector<double> out(n);
  for (std::size_t s = 0; s + 1 < hull.size(); ++s) {
    const std::size_t a = hull[s], b = hull[s + 1];
    for (std::size_t i = a; i <= b; ++i) {
      const double t = static_cast<double>(i - a) / static_cast<double>(b - a);
      out[i] = values[a] + t * (values[b] - values[a]);
    }
  }
  out[hull.front()] = values[hull.front()];
  out.back() = values.back();
  for (std::size_t i = 0; i < n; ++i) out[i] = std::min(out[i], values[i]);
  return out;
}

}  // namespace detail

// Largest convex grid function dominated pointwise by sf. p = 1 uses a
// monotone-chain lower hull; p = 2 uses the lower facets of the 3-D hull of
// the graph points (vertical faces excluded by unit-normal z < -1e-12) and
// evaluates their maximal supporting plane at each node.
inline SampledFunction convex_minorant(const SampledFunction& sf) {
  validate(sf);
  const int p = sf.domain.p();
  if (p > 2) throw UnsupportedDimension(p, "convex minorant supports parameter dims 1-2");

  SampledFunction out{sf.domain, sf.values};
  if (p == 1) {
    out.values = detail::lower_envelope_1d(sf.values);
    return out;
  }

  const std::size_t nx = sf.domain.shape()[0];
  const std::size_t ny = sf.domain.shape()[1];
  if (nx == 1 || ny == 1) {
    out.values = detail::lower_envelope_1d(sf.values);
    return out;
  }

  geometry::PointCloud graph(3, 0.0);
  for (std::size_t i = 0; i < sf.values.size(); ++i) {
    const auto x = sf.domain.node(i);
    graph.add({x[0], x[1], sf.values[i]});
  }
  const auto h3 = geometry::detail::incremental_hull_3d(graph);
  if (h3.degenerate) return out;  // affine data: already convex

  struct Plane {
    double a, b, c;  // z = a x + b y + c
  };
  std::vector<Plane> lower;
  for (const auto& f : h3.faces) {
    if (f.normal[2] < -1e-12) {
      lower.push_back({-f.normal[0] / f.normal[2], -f.normal[1] / f.normal[2],
                       f.offset / f.normal[2]});
    }
  }
  if (lower.empty()) return out;

  // A convex piecewise-linear surface equals the max of its facet planes.
  for (std::size_t i = 0; i < sf.values.size(); ++i) {
    const auto x = sf.domain.node(i);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& pl : lower) best = std::max(best, pl.a * x[0] + pl.b * x[1] + pl.c);
    out.values[i] = std::min(best, sf.values[i]);
  }
  return out;
}

inline double nonconvexity_gap(const SampledFunction& sf) {
  const SampledFunction minorant = convex_minorant(sf);
  double gap = 0.0;
  for (std::size_t i = 0; i < sf.values.size(); ++i) {
    gap = std::max(gap, sf.values[i] - minorant.values[i]);
  }
  return gap;
}

struct CorollaryReport {
  double distance = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// Hausdorff distance between a delta-net of the solid hull of the truncated
// epigraph and the truncated epigraph of the convex minorant. Both sets are
// finite delta-resolution stand-ins for the same continuum set, so the pass
// tolerance is 3 * (delta + grid_step).
inline CorollaryReport verify_corollary(const SampledFunction& sf, double cap, double delta) {
  if (sf.domain.p() != 1) {
    throw UnsupportedDimension(sf.domain.p(), "corollary verification runs on 1-D functions");
  }
  const TruncatedEpigraph epi = truncated_epigraph(sf, cap, delta);
  const geometry::Hull hull = geometry::convex_hull(epi.cloud);
  const geometry::PointCloud hull_net = geometry::hull_dense_sample(hull, delta);
  const SampledFunction minorant = convex_minorant(sf);
  const TruncatedEpigraph target = truncated_epigraph(minorant, cap, delta);

  CorollaryReport report;
  report.distance = geometry::hausdorff(hull_net, target.cloud);
  report.tolerance = 3.0 * (delta + sf.domain.grid_step());
  report.pass = report.distance <= report.tolerance;
  return report;
}

struct RatePoint {
  int n;
  double dh;
};

struct RateReport {
  std::vector<RatePoint> table;
  bool slope_applicable = false;  // false when no distance exceeded the fit floor
  double slope = 0.0;
  std::size_t usable_points = 0;
};

// Distances d_H(minkowski_average(cloud, n), target) for n = 1..n_max with a
// log-log slope fitted over the points above the 2*delta resolution floor.
inline RateReport minkowski_rate(const geometry::PointCloud& cloud,
                                 const geometry::PointCloud& target, int n_max, double delta) {
  if (n_max < 1 || n_max > 8) throw InvalidArgument("n_max must lie in [1, 8]");
  RateReport report;
  for (int n = 1; n <= n_max; ++n) {
    const geometry::PointCloud avg = geometry::minkowski_average(cloud, n);
    report.table.push_back({n, geometry::hausdorff(avg, target)});
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& row : report.table) {
    if (row.dh > 2.0 * delta) {
      const double lx = std::log(static_cast<double>(row.n));
      const double ly = std::log(row.dh);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++report.usable_points;
    }
  }
  if (report.usable_points == 0) {
    report.slope_applicable = false;
    return report;
  }
  if (report.usable_points < 3) throw DegenerateFit(report.usable_points);
  const double k = static_cast<double>(report.usable_points);
  report.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  report.slope_applicable = true;
  return report;
}

// Convexification rate experiment: Minkowski powers of the truncated
// epigraph (snapped at delta/10 to keep the enumeration bounded) against the
// truncated epigraph of the convex minorant.
inline RateReport convexification_rate(const SampledFunction& sf, double cap, double delta,
                                       int n_max) {
  const TruncatedEpigraph epi = truncated_epigraph(sf, cap, delta);
  const geometry::PointCloud snapped = epi.cloud.resnapped(delta / 10.0);
  const SampledFunction minorant = convex_minorant(sf);
  const TruncatedEpigraph target = truncated_epigraph(minorant, cap, delta);
  return minkowski_rate(snapped, target.cloud, n_max, delta);
}

// Seeded 1-D test functions: smooth base (affine + quadratic + sinusoid)
// plus up to two kinks. Lipschitz constant stays below ~7 on [-1.5, 1.5].
inline std::function<double(double)> random_piecewise_smooth(std::uint64_t seed) {
  Rng rng(seed);
  const double c0 = rng.uniform(-1.0, 1.0);
  const double c1 = rng.uniform(-1.0, 1.0);
  const double c2 = rng.uniform(-0.5, 0.5);
  const double amp = rng.uniform(0.0, 0.8);
  const double freq = rng.uniform(1.0, 3.0);
  const double phase = rng.uniform(0.0, 6.283185307179586);
  const double kink1_w = rng.uniform(0.0, 1.0);
  const double kink1_x = rng.uniform(-1.2, 1.2);
  const double kink2_w = rng.uniform(0.0, 1.0);
  const double kink2_x = rng.uniform(-1.2, 1.2);
  return [=](double x) {
    return c0 + c1 * x + c2 * x * x + amp * std::sin(freq * x + phase) +
           kink1_w * std::abs(x - kink1_x) + kink2_w * std::max(0.0, x - kink2_x);
  };
}

}  // namespace scx::epigraph
