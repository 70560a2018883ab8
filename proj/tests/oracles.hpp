// Test-only reference implementations. Each oracle recomputes a quantity by
// a route independent of the library code it checks.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "shallowcvx/geometry.hpp"
#include "shallowcvx/network.hpp"

namespace oracles {

// Full m^n tuple enumeration of the n-fold Minkowski average (the library
// enumerates combinations instead).
inline scx::geometry::PointCloud minkowski_average_tuples(const scx::geometry::PointCloud& a,
                                                          int n) {
  const std::size_t m = a.size();
  const int dim = a.dim();
  scx::geometry::PointCloud out(dim, a.snap());
  std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
  std::vector<double> buf(static_cast<std::size_t>(dim));
  for (;;) {
    std::fill(buf.begin(), buf.end(), 0.0);
    for (int t = 0; t < n; ++t) {
      const auto p = a.point(idx[static_cast<std::size_t>(t)]);
      for (int k = 0; k < dim; ++k) buf[static_cast<std::size_t>(k)] += p[static_cast<std::size_t>(k)];
    }
    for (int k = 0; k < dim; ++k) buf[static_cast<std::size_t>(k)] /= static_cast<double>(n);
    out.add(buf);
    int pos = n - 1;
    while (pos >= 0) {
      if (++idx[static_cast<std::size_t>(pos)] < m) break;
      idx[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return out;
}

// Sorted copy of a cloud's points for set comparisons.
inline std::vector<std::vector<double>> sorted_points(const scx::geometry::PointCloud& a) {
  std::vector<std::vector<double>> pts;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto p = a.point(i);
    pts.emplace_back(p.begin(), p.end());
  }
  std::sort(pts.begin(), pts.end());
  return pts;
}

inline bool same_point_set(const scx::geometry::PointCloud& a, const scx::geometry::PointCloud& b,
                           double tol = 0.0) {
  const auto pa = sorted_points(a);
  const auto pb = sorted_points(b);
  if (pa.size() != pb.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    for (std::size_t k = 0; k < pa[i].size(); ++k) {
      if (std::abs(pa[i][k] - pb[i][k]) > tol) return false;
    }
  }
  return true;
}

// 1-D convex envelope at one node by brute force: the minimum over all chord
// values of node pairs spanning it.
inline double lower_envelope_node_1d(const std::vector<double>& values, std::size_t j) {
  double best = values[j];
  for (std::size_t a = 0; a <= j; ++a) {
    for (std::size_t b = j; b < values.size(); ++b) {
      if (a == b) continue;
      const double t = static_cast<double>(j - a) / static_cast<double>(b - a);
      best = std::min(best, values[a] + t * (values[b] - values[a]));
    }
  }
  return best;
}

// 2-D convex envelope at one grid node by brute force over vertex triples
// (plus pairs and the node itself, covering degenerate combinations).
inline double lower_envelope_node_2d(const std::vector<std::array<double, 2>>& xy,
                                     const std::vector<double>& values, std::size_t target) {
  const double px = xy[target][0], py = xy[target][1];
  double best = values[target];
  const std::size_t n = xy.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // segment combination
      const double dx = xy[j][0] - xy[i][0], dy = xy[j][1] - xy[i][1];
      const double len2 = dx * dx + dy * dy;
      if (len2 > 0.0) {
        const double t = ((px - xy[i][0]) * dx + (py - xy[i][1]) * dy) / len2;
        if (t >= -1e-12 && t <= 1.0 + 1e-12) {
          const double qx = xy[i][0] + t * dx, qy = xy[i][1] + t * dy;
          if (std::abs(qx - px) < 1e-9 && std::abs(qy - py) < 1e-9) {
            best = std::min(best, values[i] + t * (values[j] - values[i]));
          }
        }
      }
      for (std::size_t k = j + 1; k < n; ++k) {
        const double d1x = xy[j][0] - xy[i][0], d1y = xy[j][1] - xy[i][1];
        const double d2x = xy[k][0] - xy[i][0], d2y = xy[k][1] - xy[i][1];
        const double det = d1x * d2y - d1y * d2x;
        if (std::abs(det) < 1e-12) continue;
        const double rx = px - xy[i][0], ry = py - xy[i][1];
        const double s = (rx * d2y - ry * d2x) / det;
        const double t = (d1x * ry - d1y * rx) / det;
        if (s >= -1e-12 && t >= -1e-12 && s + t <= 1.0 + 1e-12) {
          best = std::min(best, values[i] + s * (values[j] - values[i]) + t * (values[k] - values[i]));
        }
      }
    }
  }
  return best;
}

// Closed-form infinite kernel mean of the even/odd indicator:
// (1 + alpha^2) / (1 + alpha)^2.
inline double even_odd_kernel_mean(double alpha) {
  return (1.0 + alpha * alpha) / ((1.0 + alpha) * (1.0 + alpha));
}

// Closed-form finite normalizer (the library sums directly).
inline double closed_form_normalizer(double alpha, int n) {
  return (1.0 - alpha) / (1.0 + alpha - 2.0 * std::pow(alpha, n + 1));
}

// Joint product-space minimum of the kernel-weighted loss by exhaustive
// enumeration of all grid tuples; feasible only for tiny instances.
struct JointArgmin {
  scx::network::UnitParams minimizers;
  double min_phi = std::numeric_limits<double>::infinity();
};

inline JointArgmin joint_bruteforce_argmin(const scx::network::SampleBatch& batch, double alpha,
                                           int sample_index, const scx::epigraph::ParamBox& grid) {
  const std::size_t nodes = grid.node_count();
  const int units = batch.units();
  std::vector<std::size_t> idx(static_cast<std::size_t>(units), 0);
  JointArgmin out;
  scx::network::UnitParams stack(static_cast<std::size_t>(units));
  for (;;) {
    for (int u = 0; u < units; ++u) {
      stack[static_cast<std::size_t>(u)] = grid.node(idx[static_cast<std::size_t>(u)]);
    }
    const double phi = scx::network::phi_loss(stack, alpha, batch, sample_index);
    if (phi < out.min_phi) {
      out.min_phi = phi;
      out.minimizers = stack;
    }
    int pos = units - 1;
    while (pos >= 0) {
      if (++idx[static_cast<std::size_t>(pos)] < nodes) break;
      idx[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return out;
}

}  // namespace oracles
