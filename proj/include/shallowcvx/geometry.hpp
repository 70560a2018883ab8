#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <span>
#include <unordered_set>
#include <variant>
#include <vector>

#include "shallowcvx/error.hpp"
#include "shallowcvx/rng.hpp"

namespace scx::geometry {

inline constexpr int kMaxDim = 8;
inline constexpr double kExactEnumerationCap = 1e7;
inline constexpr double kOrientationTol = 1e-12;   // 2-D collinearity
inline constexpr double kHullSlack = 1e-9;         // inside-or-on tolerance

// Finite point set with optional snapping: coordinates are rounded to
// multiples of `snap` and duplicates (exact duplicates when snap == 0) are
// dropped. Insertion order of the surviving points is preserved.
class PointCloud {
public:
  explicit PointCloud(int dim, double snap = 0.0) : dim_(dim), snap_(snap) {
    if (dim < 1 || dim > kMaxDim) {
      throw UnsupportedDimension(dim, "point cloud dimension must be in [1, 8]");
    }
    if (snap < 0.0 || !std::isfinite(snap)) {
      throw InvalidArgument("snap pitch must be a finite nonnegative real");
    }
  }

  int dim() const noexcept { return dim_; }
  double snap() const noexcept { return snap_; }
  std::size_t size() const noexcept { return coords_.size() / static_cast<std::size_t>(dim_); }
  bool empty() const noexcept { return coords_.empty(); }

  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  const std::vector<double>& coords() const noexcept { return coords_; }

  // Adds a point, snapping and deduplicating. Returns true if it was new.
  bool add(std::span<const double> p) {
    if (static_cast<int>(p.size()) != dim_) throw DimensionMismatch(static_cast<int>(p.size()), dim_);
    Key k{};
    std::array<double, kMaxDim> snapped{};
    for (int a = 0; a < dim_; ++a) {
      double x = p[static_cast<std::size_t>(a)];
      if (!std::isfinite(x)) throw NonFiniteValue(size());
      if (snap_ > 0.0) {
        const double cells = x / snap_;
        if (std::abs(cells) > 4.5e18) throw Error("coordinate too large for snap pitch");
        const std::int64_t c = std::llround(cells);
        k[static_cast<std::size_t>(a)] = c;
        x = static_cast<double>(c) * snap_;
      } else {
        if (x == 0.0) x = 0.0;  // collapse -0.0
        k[static_cast<std::size_t>(a)] = std::bit_cast<std::int64_t>(x);
      }
      snapped[static_cast<std::size_t>(a)] = x;
    }
    if (!seen_.insert(k).second) return false;
    coords_.insert(coords_.end(), snapped.begin(), snapped.begin() + dim_);
    return true;
  }

  bool add(std::initializer_list<double> p) {
    return add(std::span<const double>(p.begin(), p.size()));
  }

  // Copy with a different snap pitch (points re-snapped and re-deduplicated).
  PointCloud resnapped(double new_snap) const {
    PointCloud out(dim_, new_snap);
    for (std::size_t i = 0; i < size(); ++i) out.add(point(i));
    return out;
  }

private:
  using Key = std::array<std::int64_t, kMaxDim>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      std::uint64_t h = 0xcbf29ce484222325ULL;
      for (std::int64_t v : k) {
        h ^= static_cast<std::uint64_t>(v);
        h *= 0x100000001b3ULL;
      }
      return static_cast<std::size_t>(h);
    }
  };

  int dim_;
  double snap_;
  std::vector<double> coords_;
  std::unordered_set<Key, KeyHash> seen_;
};

// Convex hull: extreme points only, counterclockwise when dim == 2.
struct Hull {
  int dim;
  PointCloud vertices;
};

// Convex combination certificate: at most dim + 1 vertices, weights sum to 1.
struct WeightedVertices {
  std::vector<std::vector<double>> vertices;
  std::vector<double> weights;
};

struct ExactMode {};
struct MonteCarloMode {
  std::int64_t samples;
  std::uint64_t seed;
};
using MinkowskiMode = std::variant<ExactMode, MonteCarloMode>;

namespace detail {

inline void require_nonempty(const PointCloud& a) {
  if (a.empty()) throw InvalidArgument("point cloud must be nonempty");
}

inline double dist_sq(std::span<const double> p, std::span<const double> q) {
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double d = p[k] - q[k];
    s += d * d;
  }
  return s;
}

inline double cross2(std::span<const double> o, std::span<const double> a,
                     std::span<const double> b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Distance from p to segment [a, b] in any dimension.
inline double point_segment_distance(std::span<const double> p, std::span<const double> a,
                                     std::span<const double> b) {
  double ab2 = 0.0, ap_ab = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double d = b[k] - a[k];
    ab2 += d * d;
    ap_ab += (p[k] - a[k]) * d;
  }
  double t = ab2 > 0.0 ? ap_ab / ab2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double d = p[k] - (a[k] + t * (b[k] - a[k]));
    s += d * d;
  }
  return std::sqrt(s);
}

// --- incremental 3-D hull -------------------------------------------------

struct Face3 {
  std::array<std::size_t, 3> v;   // counterclockwise seen from outside
  std::array<double, 3> normal;   // unit outward normal
  double offset;                  // normal . x == offset on the face plane
};

struct Hull3 {
  std::vector<Face3> faces;
  bool degenerate = false;        // all points collinear or coplanar
  // Degenerate support: plane through the points (valid when degenerate).
  std::array<double, 3> plane_normal{0, 0, 0};
  double plane_offset = 0.0;
};

inline std::array<double, 3> cross3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline std::array<double, 3> sub3(std::span<const double> a, std::span<const double> b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

inline double norm3(const std::array<double, 3>& a) {
  return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
}

inline Hull3 incremental_hull_3d(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  double scale = 1.0;
  for (double c : cloud.coords()) scale = std::max(scale, std::abs(c));
  const double eps = kHullSlack * scale;

  Hull3 out;
  auto pt = [&](std::size_t i) { return cloud.point(i); };

  // Seed tetrahedron: spread-out, affinely independent points.
  std::size_t i0 = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (std::lexicographical_compare(pt(i).begin(), pt(i).end(), pt(i0).begin(), pt(i0).end()))
      i0 = i;
  }
  std::size_t i1 = i0;
  double best = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = dist_sq(pt(i), pt(i0));
    if (d > best) {
      best = d;
      i1 = i;
    }
  }
  if (best <= eps * eps) {
    out.degenerate = true;
    out.plane_normal = {0, 0, 1};
    out.plane_offset = pt(i0)[2];
    return out;
  }
  const auto d01 = sub3(pt(i1), pt(i0));
  std::size_t i2 = i0;
  best = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = norm3(cross3(d01, sub3(pt(i), pt(i0))));
    if (a > best) {
      best = a;
      i2 = i;
    }
  }
  if (best <= eps * norm3(d01)) {
    out.degenerate = true;  // collinear
    out.plane_normal = {0, 0, 1};
    out.plane_offset = pt(i0)[2];
    return out;
  }
  auto nrm = cross3(d01, sub3(pt(i2), pt(i0)));
  const double nn = norm3(nrm);
  nrm = {nrm[0] / nn, nrm[1] / nn, nrm[2] / nn};
  std::size_t i3 = i0;
  best = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto d = sub3(pt(i), pt(i0));
    const double h = std::abs(d[0] * nrm[0] + d[1] * nrm[1] + d[2] * nrm[2]);
    if (h > best) {
      best = h;
      i3 = i;
    }
  }
  if (best <= eps) {
    out.degenerate = true;  // coplanar
    out.plane_normal = nrm;
    out.plane_offset = nrm[0] * pt(i0)[0] + nrm[1] * pt(i0)[1] + nrm[2] * pt(i0)[2];
    return out;
  }

  std::array<double, 3> centroid{};
  for (std::size_t i : {i0, i1, i2, i3}) {
    for (int k = 0; k < 3; ++k) centroid[static_cast<std::size_t>(k)] += pt(i)[static_cast<std::size_t>(k)] / 4.0;
  }

  auto make_face = [&](std::size_t a, std::size_t b, std::size_t c) {
    Face3 f{{a, b, c}, {0, 0, 0}, 0.0};
    auto nv = cross3(sub3(pt(b), pt(a)), sub3(pt(c), pt(a)));
    const double len = norm3(nv);
    nv = {nv[0] / len, nv[1] / len, nv[2] / len};
    double off = nv[0] * pt(a)[0] + nv[1] * pt(a)[1] + nv[2] * pt(a)[2];
    const double cside = nv[0] * centroid[0] + nv[1] * centroid[1] + nv[2] * centroid[2] - off;
    if (cside > 0.0) {  // flip so the interior is on the negative side
      std::swap(f.v[1], f.v[2]);
      nv = {-nv[0], -nv[1], -nv[2]};
      off = -off;
    }
    f.normal = nv;
    f.offset = off;
    return f;
  };

  std::vector<Face3> faces;
  faces.push_back(make_face(i0, i1, i2));
  faces.push_back(make_face(i0, i1, i3));
  faces.push_back(make_face(i0, i2, i3));
  faces.push_back(make_face(i1, i2, i3));

  auto visible = [&](const Face3& f, std::size_t i) {
    const auto p = pt(i);
    return f.normal[0] * p[0] + f.normal[1] * p[1] + f.normal[2] * p[2] - f.offset > eps;
  };

  for (std::size_t i = 0; i < n; ++i) {
    if (i == i0 || i == i1 || i == i2 || i == i3) continue;
    std::vector<std::size_t> vis;
    for (std::size_t fi = 0; fi < faces.size(); ++fi) {
      if (visible(faces[fi], i)) vis.push_back(fi);
    }
    if (vis.empty()) continue;

    // Horizon: directed edges of visible faces whose undirected pair occurs once.
    std::vector<std::array<std::size_t, 2>> edges;
    for (std::size_t fi : vis) {
      const auto& v = faces[fi].v;
      edges.push_back({v[0], v[1]});
      edges.push_back({v[1], v[2]});
      edges.push_back({v[2], v[0]});
    }
    std::vector<std::array<std::size_t, 2>> horizon;
    for (const auto& e : edges) {
      bool paired = false;
      for (const auto& o : edges) {
        if (o[0] == e[1] && o[1] == e[0]) {
          paired = true;
          break;
        }
      }
      if (!paired) horizon.push_back(e);
    }

    std::vector<Face3> next;
    next.reserve(faces.size());
    for (std::size_t fi = 0; fi < faces.size(); ++fi) {
      if (std::find(vis.begin(), vis.end(), fi) == vis.end()) next.push_back(faces[fi]);
    }
    for (const auto& e : horizon) {
      next.push_back(make_face(e[0], e[1], i));
    }
    faces = std::move(next);
  }

  out.faces = std::move(faces);
  return out;
}

// Largest signed distance of p outside any supporting face/edge; <= 0 inside.
inline double hull_margin_3d(const Hull3& h, const PointCloud& cloud, std::span<const double> p) {
  double margin = -std::numeric_limits<double>::infinity();
  (void)cloud;
  for (const auto& f : h.faces) {
    margin = std::max(margin, f.normal[0] * p[0] + f.normal[1] * p[1] + f.normal[2] * p[2] - f.offset);
  }
  return margin;
}

}  // namespace detail

// Bijection from two-sided unit indices to positive stream ids:
// 0 -> 1, 1 -> 2, -1 -> 3, 2 -> 4, -2 -> 5, ...
inline std::int64_t interleave_index(std::int64_t i) noexcept {
  return i > 0 ? 2 * i : 2 * (-i) + 1;
}

// Average of all n-fold sums of points of `a` (the n-th Minkowski power,
// rescaled by 1/n). Exact mode enumerates every combination; the enumeration
// gate is |a|^n <= 1e7. Monte Carlo mode draws seeded index tuples and yields
// an under-approximation of the true set.
inline PointCloud minkowski_average(const PointCloud& a, int n,
                                    const MinkowskiMode& mode = ExactMode{}) {
  detail::require_nonempty(a);
  if (n < 1) throw InvalidArgument("minkowski power must be >= 1");
  const std::size_t m = a.size();
  const int dim = a.dim();
  PointCloud out(dim, a.snap());
  std::array<double, kMaxDim> buf{};

  if (std::holds_alternative<ExactMode>(mode)) {
    const double tuples = std::pow(static_cast<double>(m), static_cast<double>(n));
    if (tuples > kExactEnumerationCap) throw CapacityExceeded(tuples, kExactEnumerationCap);
    // Sums are permutation-invariant, so nondecreasing index tuples
    // (combinations with repetition) cover the same set with less work than
    // full tuple enumeration.
    std::vector<double> partial(static_cast<std::size_t>(n + 1) * static_cast<std::size_t>(dim), 0.0);
    auto emit = [&](const auto& self, int level, std::size_t start) -> void {
      const std::size_t base = static_cast<std::size_t>(level) * static_cast<std::size_t>(dim);
      if (level == n) {
        for (int k = 0; k < dim; ++k) {
          buf[static_cast<std::size_t>(k)] = partial[base + static_cast<std::size_t>(k)] / static_cast<double>(n);
        }
        out.add(std::span<const double>(buf.data(), static_cast<std::size_t>(dim)));
        return;
      }
      for (std::size_t j = start; j < m; ++j) {
        const auto p = a.point(j);
        for (int k = 0; k < dim; ++k) {
          partial[base + static_cast<std::size_t>(dim) + static_cast<std::size_t>(k)] =
              partial[base + static_cast<std::size_t>(k)] + p[static_cast<std::size_t>(k)];
        }
        self(self, level + 1, j);
      }
    };
    emit(emit, 0, 0);
    return out;
  }

  const auto& mc = std::get<MonteCarloMode>(mode);
  if (mc.samples < 1) throw InvalidArgument("monte carlo mode requires samples >= 1");
  Rng rng(mc.seed);
  for (std::int64_t s = 0; s < mc.samples; ++s) {
    buf.fill(0.0);
    for (int t = 0; t < n; ++t) {
      const auto p = a.point(rng.below(m));
      for (int k = 0; k < dim; ++k) buf[static_cast<std::size_t>(k)] += p[static_cast<std::size_t>(k)];
    }
    for (int k = 0; k < dim; ++k) buf[static_cast<std::size_t>(k)] /= static_cast<double>(n);
    out.add(std::span<const double>(buf.data(), static_cast<std::size_t>(dim)));
  }
  return out;
}

inline Hull convex_hull(const PointCloud& a) {
  detail::require_nonempty(a);
  const int dim = a.dim();
  if (dim > 3) throw UnsupportedDimension(dim, "convex hull supports dimensions 1-3");

  if (dim == 1) {
    double lo = a.point(0)[0], hi = lo;
    for (std::size_t i = 1; i < a.size(); ++i) {
      lo = std::min(lo, a.point(i)[0]);
      hi = std::max(hi, a.point(i)[0]);
    }
    PointCloud v(1);
    v.add({lo});
    if (hi > lo) v.add({hi});
    return {1, std::move(v)};
  }

  if (dim == 2) {
    std::vector<std::size_t> order(a.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
      const auto p = a.point(i), q = a.point(j);
      if (p[0] != q[0]) return p[0] < q[0];
      return p[1] < q[1];
    });
    order.erase(std::unique(order.begin(), order.end(),
                            [&](std::size_t i, std::size_t j) {
                              const auto p = a.point(i), q = a.point(j);
                              return p[0] == q[0] && p[1] == q[1];
                            }),
                order.end());

    // Monotone chain; only strict turns survive, so collinear points drop out.
    auto build = [&](auto begin, auto end) {
      std::vector<std::size_t> h;
      for (auto it = begin; it != end; ++it) {
        while (h.size() >= 2 &&
               detail::cross2(a.point(h[h.size() - 2]), a.point(h[h.size() - 1]), a.point(*it)) <=
                   kOrientationTol) {
          h.pop_back();
        }
        h.push_back(*it);
      }
      return h;
    };
    auto lower = build(order.begin(), order.end());
    auto upper = build(order.rbegin(), order.rend());

    PointCloud v(2);
    if (order.size() == 1) {
      v.add(a.point(order[0]));
      return {2, std::move(v)};
    }
    for (std::size_t i = 0; i + 1 < lower.size(); ++i) v.add(a.point(lower[i]));
    for (std::size_t i = 0; i + 1 < upper.size(); ++i) v.add(a.point(upper[i]));
    if (v.empty()) v.add(a.point(order[0]));
    return {2, std::move(v)};
  }

  // dim == 3
  const auto h3 = detail::incremental_hull_3d(a);
  if (h3.degenerate) {
    // Planar/collinear cloud: hull via projection onto the spanning plane.
    const auto n0 = a.point(0);
    std::array<double, 3> e1{0, 0, 0}, e2{0, 0, 0};
    double e1len = 0.0;
    for (std::size_t i = 1; i < a.size() && e1len <= 1e-30; ++i) {
      e1 = detail::sub3(a.point(i), n0);
      e1len = detail::norm3(e1);
    }
    PointCloud v(3);
    if (e1len <= 1e-30) {
      v.add(n0);
      return {3, std::move(v)};
    }
    for (auto& c : e1) c /= e1len;
    e2 = detail::cross3(h3.plane_normal, e1);
    PointCloud proj(2);
    std::vector<std::size_t> back;
    std::vector<std::array<double, 2>> uv(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto d = detail::sub3(a.point(i), n0);
      uv[i] = {d[0] * e1[0] + d[1] * e1[1] + d[2] * e1[2],
               d[0] * e2[0] + d[1] * e2[1] + d[2] * e2[2]};
    }
    PointCloud flat(2);
    for (const auto& q : uv) flat.add({q[0], q[1]});
    const Hull planar = convex_hull(flat);
    for (std::size_t i = 0; i < planar.vertices.size(); ++i) {
      const auto q = planar.vertices.point(i);
      // match back to an original point
      for (std::size_t j = 0; j < a.size(); ++j) {
        if (uv[j][0] == q[0] && uv[j][1] == q[1]) {
          v.add(a.point(j));
          break;
        }
      }
    }
    return {3, std::move(v)};
  }
  std::vector<std::size_t> vids;
  for (const auto& f : h3.faces) vids.insert(vids.end(), f.v.begin(), f.v.end());
  std::sort(vids.begin(), vids.end());
  vids.erase(std::unique(vids.begin(), vids.end()), vids.end());
  // Deterministic order: lexicographic by coordinates.
  std::sort(vids.begin(), vids.end(), [&](std::size_t i, std::size_t j) {
    const auto p = a.point(i), q = a.point(j);
    return std::lexicographical_compare(p.begin(), p.end(), q.begin(), q.end());
  });
  PointCloud v(3);
  for (std::size_t i : vids) v.add(a.point(i));
  return {3, std::move(v)};
}

namespace detail {

// Evenly spaced samples of segment [a, b] at spacing <= delta, endpoints kept.
inline void sample_segment(PointCloud& out, std::span<const double> a, std::span<const double> b,
                           double delta) {
  const double len = std::sqrt(dist_sq(a, b));
  const auto m = static_cast<std::size_t>(std::max(1.0, std::ceil(len / delta - 1e-12)));
  std::array<double, kMaxDim> buf{};
  for (std::size_t k = 0; k <= m; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(m);
    for (std::size_t c = 0; c < a.size(); ++c) buf[c] = a[c] + t * (b[c] - a[c]);
    out.add(std::span<const double>(buf.data(), a.size()));
  }
}

inline double longest_edge(std::initializer_list<std::span<const double>> pts) {
  double best = 0.0;
  const auto* data = pts.begin();
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) best = std::max(best, dist_sq(data[i], data[j]));
  }
  return std::sqrt(best);
}

}  // namespace detail

// A delta-net of the solid hull: every point of the hull lies within delta of
// some sample. dim 1 uses an arithmetic grid; dim 2 a barycentric grid over a
// fan triangulation from the first vertex; dim 3 a fan tetrahedralization,
// gated at 1e7 samples. Output is deduplicated at pitch delta/10 (which keeps
// the net within delta: grid resolution <= 0.58*delta plus <= 0.08*delta of
// snap displacement).
inline PointCloud hull_dense_sample(const Hull& h, double delta) {
  if (delta <= 0.0 || !std::isfinite(delta)) throw InvalidArgument("delta must be positive");
  const auto& v = h.vertices;
  detail::require_nonempty(v);
  // 0- and 1-dimensional nets are already duplicate-free; only solid fans
  // need the dedup pitch.
  const double pitch = (h.dim == 1 || v.size() <= 2) ? 0.0 : delta / 10.0;
  PointCloud out(h.dim, pitch);

  if (v.size() == 1) {
    out.add(v.point(0));
    return out;
  }
  if (h.dim == 1 || v.size() == 2) {
    double span = 0.0;
    std::size_t lo = 0, hi = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      for (std::size_t j = i + 1; j < v.size(); ++j) {
        const double d = detail::dist_sq(v.point(i), v.point(j));
        if (d > span) {
          span = d;
          lo = i;
          hi = j;
        }
      }
    }
    detail::sample_segment(out, v.point(lo), v.point(hi), delta);
    return out;
  }

  if (h.dim == 2) {
    const auto v0 = v.point(0);
    std::array<double, kMaxDim> buf{};
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      const auto va = v.point(i), vb = v.point(i + 1);
      const double e = detail::longest_edge({v0, va, vb});
      const auto m = static_cast<std::size_t>(std::max(1.0, std::ceil(e / delta)));
      for (std::size_t s = 0; s <= m; ++s) {
        for (std::size_t t = 0; t + s <= m; ++t) {
          const double ls = static_cast<double>(s) / static_cast<double>(m);
          const double lt = static_cast<double>(t) / static_cast<double>(m);
          for (int c = 0; c < 2; ++c) {
            const auto ci = static_cast<std::size_t>(c);
            buf[ci] = v0[ci] + ls * (va[ci] - v0[ci]) + lt * (vb[ci] - v0[ci]);
          }
          out.add(std::span<const double>(buf.data(), 2));
        }
      }
    }
    return out;
  }

  // dim == 3: fan of tetrahedra from vertex 0 over hull faces.
  PointCloud interior(3);
  for (std::size_t i = 0; i < v.size(); ++i) interior.add(v.point(i));
  const auto h3 = detail::incremental_hull_3d(interior);
  if (h3.degenerate) {
    // planar solid: triangulate in-plane via the 2-D path on a projected hull
    throw UnsupportedDimension(3, "degenerate 3-D hull sampling not supported");
  }
  const auto v0 = interior.point(0);
  // capacity estimate before generating anything
  double estimated = 0.0;
  for (const auto& f : h3.faces) {
    if (f.v[0] == 0 || f.v[1] == 0 || f.v[2] == 0) continue;
    const double e = detail::longest_edge(
        {v0, interior.point(f.v[0]), interior.point(f.v[1]), interior.point(f.v[2])});
    const double m = std::max(1.0, std::ceil(e / delta));
    estimated += (m + 1) * (m + 2) * (m + 3) / 6.0;
  }
  if (estimated > kExactEnumerationCap) {
    throw UnsupportedDimension(3, "delta-net would need " + std::to_string(estimated) +
                                      " samples (cap 1e7)");
  }
  std::array<double, kMaxDim> buf{};
  for (const auto& f : h3.faces) {
    if (f.v[0] == 0 || f.v[1] == 0 || f.v[2] == 0) continue;
    const std::array<std::span<const double>, 4> corners = {
        v0, interior.point(f.v[0]), interior.point(f.v[1]), interior.point(f.v[2])};
    const double e = detail::longest_edge({corners[0], corners[1], corners[2], corners[3]});
    const auto m = static_cast<std::size_t>(std::max(1.0, std::ceil(e / delta)));
    for (std::size_t a = 0; a <= m; ++a) {
      for (std::size_t b = 0; a + b <= m; ++b) {
        for (std::size_t c = 0; a + b + c <= m; ++c) {
          const std::size_t d = m - a - b - c;
          const std::array<double, 4> lam = {
              static_cast<double>(a) / static_cast<double>(m),
              static_cast<double>(b) / static_cast<double>(m),
              static_cast<double>(c) / static_cast<double>(m),
              static_cast<double>(d) / static_cast<double>(m)};
          for (int k = 0; k < 3; ++k) {
            const auto ki = static_cast<std::size_t>(k);
            buf[ki] = lam[0] * corners[0][ki] + lam[1] * corners[1][ki] +
                      lam[2] * corners[2][ki] + lam[3] * corners[3][ki];
          }
          out.add(std::span<const double>(buf.data(), 3));
        }
      }
    }
  }
  return out;
}

// Symmetric Hausdorff distance between finite point sets, exact for the
// points given. Callers comparing against continua add the net resolution.
inline double hausdorff(const PointCloud& a, const PointCloud& b) {
  detail::require_nonempty(a);
  detail::require_nonempty(b);
  if (a.dim() != b.dim()) throw DimensionMismatch(a.dim(), b.dim());

  auto directed = [](const PointCloud& from, const PointCloud& to) {
    double worst = 0.0;
    for (std::size_t i = 0; i < from.size(); ++i) {
      const auto p = from.point(i);
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < to.size(); ++j) {
        const double d = detail::dist_sq(p, to.point(j));
        if (d < best) {
          best = d;
          if (best <= worst) break;  // cannot raise the running max
        }
      }
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::sqrt(std::max(directed(a, b), directed(b, a)));
}

namespace detail {

// Signed outside margin of p w.r.t. a 2-D hull (<= 0 when inside or on).
inline double hull_margin_2d(const Hull& h, std::span<const double> p) {
  const auto& v = h.vertices;
  if (v.size() == 1) return std::sqrt(dist_sq(p, v.point(0)));
  if (v.size() == 2) return point_segment_distance(p, v.point(0), v.point(1));
  double margin = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto a = v.point(i), b = v.point((i + 1) % v.size());
    const double ex = b[0] - a[0], ey = b[1] - a[1];
    const double len = std::hypot(ex, ey);
    if (len == 0.0) continue;
    // CCW polygon: outward normal of edge (a, b) is (ey, -ex)/len.
    margin = std::max(margin, ((p[0] - a[0]) * ey - (p[1] - a[1]) * ex) / len);
  }
  return margin;
}

}  // namespace detail

// Writes p as a convex combination of at most dim + 1 hull vertices.
// dim 2 walks the fan triangulation and solves barycentric coordinates.
inline WeightedVertices caratheodory_decompose(const Hull& h, std::span<const double> p) {
  const auto& v = h.vertices;
  detail::require_nonempty(v);
  if (h.dim > 2) throw UnsupportedDimension(h.dim, "caratheodory decomposition supports dims 1-2");
  if (static_cast<int>(p.size()) != h.dim) throw DimensionMismatch(static_cast<int>(p.size()), h.dim);

  auto vertex_vec = [&](std::size_t i) {
    const auto q = v.point(i);
    return std::vector<double>(q.begin(), q.end());
  };

  // p coincides with a vertex.
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::sqrt(detail::dist_sq(p, v.point(i))) <= 1e-12) {
      return {{vertex_vec(i)}, {1.0}};
    }
  }

  if (h.dim == 1 || v.size() <= 2) {
    if (v.size() == 1) {
      const double d = std::sqrt(detail::dist_sq(p, v.point(0)));
      if (d > kHullSlack) throw PointOutsideHull(d);
      return {{vertex_vec(0)}, {1.0}};
    }
    const auto a = v.point(0), b = v.point(1);
    const double d = detail::point_segment_distance(p, a, b);
    if (d > kHullSlack) throw PointOutsideHull(d);
    double ab2 = 0.0, ap_ab = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      ab2 += (b[k] - a[k]) * (b[k] - a[k]);
      ap_ab += (p[k] - a[k]) * (b[k] - a[k]);
    }
    const double t = std::clamp(ab2 > 0.0 ? ap_ab / ab2 : 0.0, 0.0, 1.0);
    return {{vertex_vec(0), vertex_vec(1)}, {1.0 - t, t}};
  }

  const double margin = detail::hull_margin_2d(h, p);
  if (margin > kHullSlack) throw PointOutsideHull(margin);

  // Fan triangles (v0, vi, vi+1); keep the best barycentric fit as a guard
  // against points sitting on the 1e-9 boundary fuzz.
  const auto v0 = v.point(0);
  double best_low = -std::numeric_limits<double>::infinity();
  std::array<double, 3> best_lam{};
  std::size_t best_i = 1;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    const auto va = v.point(i), vb = v.point(i + 1);
    const double d1x = va[0] - v0[0], d1y = va[1] - v0[1];
    const double d2x = vb[0] - v0[0], d2y = vb[1] - v0[1];
    const double det = d1x * d2y - d1y * d2x;
    if (std::abs(det) < 1e-30) continue;
    const double rx = p[0] - v0[0], ry = p[1] - v0[1];
    const double s = (rx * d2y - ry * d2x) / det;
    const double t = (d1x * ry - d1y * rx) / det;
    const double low = std::min({s, t, 1.0 - s - t});
    if (low > best_low) {
      best_low = low;
      best_lam = {1.0 - s - t, s, t};
      best_i = i;
    }
    if (low >= 0.0) break;  // properly inside this triangle
  }
  if (best_low < -1e-7) throw PointOutsideHull(std::max(margin, -best_low));

  std::array<double, 3> lam = best_lam;
  for (auto& l : lam) l = std::max(l, 0.0);
  const double sum = lam[0] + lam[1] + lam[2];
  for (auto& l : lam) l /= sum;

  WeightedVertices out;
  const std::array<std::size_t, 3> ids = {0, best_i, best_i + 1};
  for (int k = 0; k < 3; ++k) {
    const auto ki = static_cast<std::size_t>(k);
    if (lam[ki] <= 0.0 && k > 0) continue;  // drop zero weights, keep at least one entry
    out.vertices.push_back(vertex_vec(ids[ki]));
    out.weights.push_back(lam[ki]);
  }
  return out;
}

// Length-`horizon` vertex index sequence whose running vertex average tracks
// the weighted target: at each step the vertex with the largest remaining
// quota deficit is chosen, ties to the lowest index. The terminal average is
// within (dim * max vertex norm) / horizon of the target.
inline std::vector<std::size_t> frequency_schedule(const WeightedVertices& w, std::int64_t horizon) {
  const std::size_t k = w.vertices.size();
  if (k == 0) throw InvalidArgument("empty weighted vertex set");
  if (horizon < static_cast<std::int64_t>(k)) {
    throw InvalidArgument("horizon must be at least the number of vertices");
  }
  std::vector<std::size_t> seq;
  seq.reserve(static_cast<std::size_t>(horizon));
  std::vector<double> count(k, 0.0);
  for (std::int64_t t = 1; t <= horizon; ++t) {
    std::size_t pick = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j) {
      const double deficit = w.weights[j] * static_cast<double>(t) - count[j];
      if (deficit > best) {
        best = deficit;
        pick = j;
      }
    }
    count[pick] += 1.0;
    seq.push_back(pick);
  }
  return seq;
}

}  // namespace scx::geometry
