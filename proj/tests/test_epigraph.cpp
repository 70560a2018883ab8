#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "shallowcvx/epigraph.hpp"
#include "shallowcvx/geometry.hpp"
#include "shallowcvx/rng.hpp"

using namespace scx;
using epigraph::ParamBox;
using epigraph::SampledFunction;

namespace {

double double_well(double x) { return (x * x - 1.0) * (x * x - 1.0); }

SampledFunction sample_1d(const std::function<double(double)>& f, double lo, double hi,
                          double step) {
  return epigraph::sample_function([&](std::span<const double> x) { return f(x[0]); },
                                   ParamBox({lo}, {hi}, step));
}

bool cloud_contains(const geometry::PointCloud& c, std::vector<double> p, double tol = 1e-12) {
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto q = c.point(i);
    bool match = true;
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (std::abs(q[k] - p[k]) > tol) match = false;
    }
    if (match) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("grid sampling tabulates node values in row-major order", "[epigraph]") {
  const auto sq = sample_1d([](double x) { return x * x; }, -1.0, 1.0, 0.5);
  CHECK(sq.values == std::vector<double>{1.0, 0.25, 0.0, 0.25, 1.0});

  const auto constant = sample_1d([](double) { return 2.5; }, 0.0, 1.0, 0.25);
  for (double v : constant.values) CHECK(v == 2.5);

  // quartic on a 5-node grid; expectations recomputed from first principles:
  // (1.5^2-1)^2 = 1.5625, (0.75^2-1)^2 = 0.4375^2 = 0.19140625, (0-1)^2 = 1
  const auto dw = sample_1d(double_well, -1.5, 1.5, 0.75);
  REQUIRE(dw.values.size() == 5);
  CHECK(dw.values[0] == Catch::Approx(1.5625));
  CHECK(dw.values[1] == Catch::Approx(0.19140625));
  CHECK(dw.values[2] == Catch::Approx(1.0));
  CHECK(dw.values[3] == Catch::Approx(0.19140625));
  CHECK(dw.values[4] == Catch::Approx(1.5625));
}

TEST_CASE("non-finite samples are rejected with the node", "[epigraph]") {
  REQUIRE_THROWS_AS(sample_1d([](double x) { return 1.0 / x; }, -1.0, 1.0, 0.5), NonFiniteValue);
  try {
    sample_1d([](double x) { return 1.0 / x; }, -1.0, 1.0, 0.5);
  } catch (const NonFiniteValue& e) {
    CHECK(e.node_index() == 2);
  }
}

TEST_CASE("row-major ordering on a 2-D grid has the last axis fastest", "[epigraph]") {
  const ParamBox box({0.0, 0.0}, {1.0, 1.0}, 0.5);
  REQUIRE(box.node_count() == 9);
  CHECK(box.node(0) == std::vector<double>{0.0, 0.0});
  CHECK(box.node(1) == std::vector<double>{0.0, 0.5});
  CHECK(box.node(3) == std::vector<double>{0.5, 0.0});
}

TEST_CASE("truncated epigraph of a single column", "[epigraph]") {
  const SampledFunction sf{ParamBox({0.0}, {0.5}, 1.0), {0.0}};
  const auto epi = epigraph::truncated_epigraph(sf, 1.0, 0.5);
  CHECK(epi.cloud.size() == 3);
  CHECK(cloud_contains(epi.cloud, {0.0, 0.0}));
  CHECK(cloud_contains(epi.cloud, {0.0, 0.5}));
  CHECK(cloud_contains(epi.cloud, {0.0, 1.0}));
}

TEST_CASE("truncated epigraph columns respect the construction invariants", "[epigraph]") {
  const auto sq = sample_1d([](double x) { return x * x; }, -1.0, 1.0, 1.0);
  const auto epi = epigraph::truncated_epigraph(sq, 2.0, 1.0);
  // columns over x in {-1, 0, 1} from q(x) to 2
  CHECK(epi.cloud.size() == 7);
  for (std::size_t i = 0; i < sq.values.size(); ++i) {
    const double x = sq.domain.node(i)[0];
    CHECK(cloud_contains(epi.cloud, {x, sq.values[i]}));
    CHECK(cloud_contains(epi.cloud, {x, 2.0}));
  }
  for (std::size_t i = 0; i < epi.cloud.size(); ++i) {
    const auto p = epi.cloud.point(i);
    const double q = p[0] * p[0];
    CHECK(p[1] >= q - 1.0 - 1e-12);  // interpolated bound with delta slack
    CHECK(p[1] <= 2.0 + 1e-12);
  }

  // default margin keeps the cap above the sampled maximum
  const auto dw = sample_1d(double_well, -1.5, 1.5, 0.25);
  const double cap = epigraph::default_cap(dw);
  CHECK(cap >= epigraph::max_value(dw) + 1.0);
  CHECK_NOTHROW(epigraph::truncated_epigraph(dw, cap, 0.25));
}

TEST_CASE("cap below the sampled maximum is rejected", "[epigraph]") {
  const auto sq = sample_1d([](double x) { return x * x; }, -1.0, 1.0, 0.5);
  REQUIRE_THROWS_AS(epigraph::truncated_epigraph(sq, 0.5, 0.1), CapTooLow);
  try {
    epigraph::truncated_epigraph(sq, 0.5, 0.1);
  } catch (const CapTooLow& e) {
    CHECK(e.max_value() == Catch::Approx(1.0));
  }
}

TEST_CASE("convex functions are their own minorant", "[epigraph]") {
  const auto sq = sample_1d([](double x) { return x * x; }, -1.0, 1.0, 0.01);
  const auto minorant = epigraph::convex_minorant(sq);
  for (std::size_t i = 0; i < sq.values.size(); ++i) {
    CHECK(std::abs(minorant.values[i] - sq.values[i]) <= 1e-9);
  }
}

TEST_CASE("double-well minorant flattens the well", "[epigraph]") {
  const auto dw = sample_1d(double_well, -1.5, 1.5, 0.01);
  const auto minorant = epigraph::convex_minorant(dw);
  auto value_at = [&](double x) {
    const auto idx = static_cast<std::size_t>(std::llround((x + 1.5) / 0.01));
    return minorant.values[idx];
  };
  CHECK(std::abs(value_at(0.0)) < 1e-3);
  CHECK(value_at(1.25) == Catch::Approx(0.31640625).margin(1e-3));
  CHECK(value_at(-1.25) == Catch::Approx(0.31640625).margin(1e-3));

  // brute-force chord oracle at a handful of nodes
  for (std::size_t j : {0UL, 50UL, 150UL, 200UL, 275UL, 300UL}) {
    CHECK(minorant.values[j] ==
          Catch::Approx(oracles::lower_envelope_node_1d(dw.values, j)).margin(1e-9));
  }
}

TEST_CASE("concave functions get the chord through the endpoints", "[epigraph]") {
  const auto neg_abs = sample_1d([](double x) { return -std::abs(x); }, -1.0, 1.0, 0.01);
  const auto minorant = epigraph::convex_minorant(neg_abs);
  for (double v : minorant.values) CHECK(v == Catch::Approx(-1.0).margin(1e-9));
}

TEST_CASE("minorant properties: idempotence, domination, scaling, translation", "[epigraph]") {
  Rng rng(201);
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = epigraph::random_piecewise_smooth(rng.next_u64());
    const auto sf = sample_1d(f, -1.5, 1.5, 0.05);
    const auto m1 = epigraph::convex_minorant(sf);

    const auto m2 = epigraph::convex_minorant(m1);
    for (std::size_t i = 0; i < m1.values.size(); ++i) {
      REQUIRE(std::abs(m2.values[i] - m1.values[i]) <= 1e-9);   // idempotent
      REQUIRE(m1.values[i] <= sf.values[i] + 1e-12);            // dominated
    }

    // positive scaling commutes
    const double c = rng.uniform(0.5, 3.0);
    SampledFunction scaled = sf;
    for (auto& v : scaled.values) v *= c;
    const auto mc = epigraph::convex_minorant(scaled);
    for (std::size_t i = 0; i < m1.values.size(); ++i) {
      REQUIRE(mc.values[i] == Catch::Approx(c * m1.values[i]).margin(1e-9 * (1.0 + std::abs(m1.values[i]))));
    }

    // adding an affine grid function shifts the minorant by exactly it
    const double a0 = rng.uniform(-1.0, 1.0), a1 = rng.uniform(-1.0, 1.0);
    SampledFunction shifted = sf;
    for (std::size_t i = 0; i < shifted.values.size(); ++i) {
      shifted.values[i] += a0 + a1 * sf.domain.node(i)[0];
    }
    const auto ms = epigraph::convex_minorant(shifted);
    for (std::size_t i = 0; i < m1.values.size(); ++i) {
      const double affine = a0 + a1 * sf.domain.node(i)[0];
      REQUIRE(ms.values[i] == Catch::Approx(m1.values[i] + affine).margin(1e-9));
    }
  }
}

TEST_CASE("minorant equals the function iff discretely convex", "[epigraph]") {
  const auto dw = sample_1d(double_well, -1.5, 1.5, 0.05);
  const auto minorant = epigraph::convex_minorant(dw);
  bool convex = true;
  for (std::size_t i = 1; i + 1 < dw.values.size(); ++i) {
    if (dw.values[i - 1] - 2.0 * dw.values[i] + dw.values[i + 1] < -1e-9) convex = false;
  }
  CHECK_FALSE(convex);
  double gap = 0.0;
  for (std::size_t i = 0; i < dw.values.size(); ++i) gap = std::max(gap, dw.values[i] - minorant.values[i]);
  CHECK(gap > 0.1);
}

TEST_CASE("two-parameter minorant via the lower hull facets", "[epigraph]") {
  // separable instance: (x^2-1)^2 + y^2; its envelope is the 1-D envelope
  // of the quartic plus y^2, which pins exact node values
  const ParamBox box({-1.5, -1.5}, {1.5, 1.5}, 0.25);
  const auto sf = epigraph::sample_function(
      [](std::span<const double> x) { return double_well(x[0]) + x[1] * x[1]; }, box);
  const auto minorant = epigraph::convex_minorant(sf);

  const auto node_index = [&](double x, double y) {
    const auto ix = static_cast<std::size_t>(std::llround((x + 1.5) / 0.25));
    const auto iy = static_cast<std::size_t>(std::llround((y + 1.5) / 0.25));
    return ix * box.shape()[1] + iy;
  };
  CHECK(minorant.values[node_index(0.0, 0.0)] == Catch::Approx(0.0).margin(1e-9));
  CHECK(minorant.values[node_index(1.25, 0.5)] == Catch::Approx(0.56640625).margin(1e-9));
  CHECK(minorant.values[node_index(-1.25, -0.5)] == Catch::Approx(0.56640625).margin(1e-9));

  // dominated and convex along every grid line
  const std::size_t nx = box.shape()[0], ny = box.shape()[1];
  for (std::size_t i = 0; i < sf.values.size(); ++i) {
    REQUIRE(minorant.values[i] <= sf.values[i] + 1e-12);
  }
  for (std::size_t r = 0; r < nx; ++r) {
    for (std::size_t c = 1; c + 1 < ny; ++c) {
      const double second = minorant.values[r * ny + c - 1] - 2.0 * minorant.values[r * ny + c] +
                            minorant.values[r * ny + c + 1];
      REQUIRE(second >= -1e-9);
    }
  }
  for (std::size_t c = 0; c < ny; ++c) {
    for (std::size_t r = 1; r + 1 < nx; ++r) {
      const double second = minorant.values[(r - 1) * ny + c] - 2.0 * minorant.values[r * ny + c] +
                            minorant.values[(r + 1) * ny + c];
      REQUIRE(second >= -1e-9);
    }
  }

  // idempotent in two dimensions as well
  const auto again = epigraph::convex_minorant(minorant);
  for (std::size_t i = 0; i < minorant.values.size(); ++i) {
    REQUIRE(std::abs(again.values[i] - minorant.values[i]) <= 1e-9);
  }
}

TEST_CASE("two-parameter minorant matches the brute-force envelope", "[epigraph]") {
  const ParamBox box({-1.5, -1.5}, {1.5, 1.5}, 0.375);  // coarse 9x9 grid
  const auto sf = epigraph::sample_function(
      [](std::span<const double> x) {
        return double_well(x[0]) + 0.5 * std::sin(2.0 * x[1]) + 0.3 * x[1] * x[1];
      },
      box);
  const auto minorant = epigraph::convex_minorant(sf);

  std::vector<std::array<double, 2>> xy;
  for (std::size_t i = 0; i < sf.values.size(); ++i) {
    const auto n = box.node(i);
    xy.push_back({n[0], n[1]});
  }
  for (std::size_t i = 0; i < sf.values.size(); ++i) {
    const double oracle = oracles::lower_envelope_node_2d(xy, sf.values, i);
    REQUIRE(minorant.values[i] == Catch::Approx(oracle).margin(1e-9));
  }
}

TEST_CASE("affine data in two parameters is its own minorant", "[epigraph]") {
  const ParamBox box({0.0, 0.0}, {1.0, 1.0}, 0.25);
  const auto sf = epigraph::sample_function(
      [](std::span<const double> x) { return 2.0 * x[0] - 3.0 * x[1] + 0.5; }, box);
  const auto minorant = epigraph::convex_minorant(sf);
  for (std::size_t i = 0; i < sf.values.size(); ++i) {
    CHECK(minorant.values[i] == Catch::Approx(sf.values[i]).margin(1e-9));
  }
}

TEST_CASE("unsupported minorant dimensions are rejected", "[epigraph]") {
  const ParamBox box({0, 0, 0}, {1, 1, 1}, 0.5);
  const auto sf = epigraph::sample_function(
      [](std::span<const double> x) { return x[0] + x[1] + x[2]; }, box);
  CHECK_THROWS_AS(epigraph::convex_minorant(sf), UnsupportedDimension);
}

TEST_CASE("nonconvexity gap examples", "[epigraph]") {
  const auto sq = sample_1d([](double x) { return x * x; }, -1.0, 1.0, 0.01);
  CHECK(epigraph::nonconvexity_gap(sq) <= 1e-9);

  const auto dw = sample_1d(double_well, -1.5, 1.5, 0.01);
  CHECK(epigraph::nonconvexity_gap(dw) == Catch::Approx(1.0).margin(2e-3));

  const auto neg_abs = sample_1d([](double x) { return -std::abs(x); }, -1.0, 1.0, 0.01);
  CHECK(epigraph::nonconvexity_gap(neg_abs) == Catch::Approx(1.0).margin(2e-2));
}

TEST_CASE("corollary verification on canonical functions", "[epigraph]") {
  const auto sq = sample_1d([](double x) { return x * x; }, -1.0, 1.0, 0.05);
  const auto convex_report = epigraph::verify_corollary(sq, epigraph::default_cap(sq), 0.05);
  CHECK(convex_report.pass);

  const auto dw = sample_1d(double_well, -1.5, 1.5, 0.05);
  const auto report = epigraph::verify_corollary(dw, 2.0, 0.05);
  CHECK(report.tolerance == Catch::Approx(0.3));
  CHECK(report.pass);

  // single-node domain: both sets are the same vertical segment
  const SampledFunction point{ParamBox({0.0}, {0.5}, 1.0), {0.3}};
  const auto degenerate = epigraph::verify_corollary(point, 1.3, 0.1);
  CHECK(degenerate.distance <= 0.1);
  CHECK(degenerate.pass);
}

TEST_CASE("corollary verification on seeded piecewise-smooth functions", "[epigraph]") {
  for (std::uint64_t seed = 500; seed < 505; ++seed) {
    const auto f = epigraph::random_piecewise_smooth(seed);
    const auto sf = sample_1d(f, -1.5, 1.5, 0.1);
    const auto report = epigraph::verify_corollary(sf, epigraph::default_cap(sf), 0.1);
    INFO("seed " << seed << " distance " << report.distance << " tol " << report.tolerance);
    REQUIRE(report.pass);
  }
}

TEST_CASE("convexification rate on an already convex function", "[epigraph]") {
  const auto sq = sample_1d([](double x) { return x * x; }, -1.0, 1.0, 0.25);
  const auto report = epigraph::convexification_rate(sq, 2.0, 0.5, 3);
  CHECK_FALSE(report.slope_applicable);
  CHECK(report.usable_points == 0);
  for (const auto& row : report.table) CHECK(row.dh <= 2.0 * 0.5);
}

TEST_CASE("segment cloud shrinks at slope -1", "[epigraph]") {
  geometry::PointCloud cloud(2);
  cloud.add({0.0, 0.0});
  cloud.add({1.0, 0.0});
  const double delta = 1e-3;
  const auto target = geometry::hull_dense_sample(geometry::convex_hull(cloud), delta);
  const auto report = epigraph::minkowski_rate(cloud, target, 8, delta);
  REQUIRE(report.slope_applicable);
  CHECK(report.slope == Catch::Approx(-1.0).margin(0.05));
  for (const auto& row : report.table) {
    CHECK(row.dh == Catch::Approx(0.5 / row.n).margin(delta));
  }
}

TEST_CASE("double-well convexification rate decays and cross-checks", "[epigraph]") {
  const auto dw = sample_1d(double_well, -1.5, 1.5, 0.375);  // 9 nodes
  const double delta = 0.1;
  const auto report = epigraph::convexification_rate(dw, 2.0, delta, 3);
  REQUIRE(report.table.size() == 3);
  for (std::size_t i = 1; i < report.table.size(); ++i) {
    CHECK(report.table[i].dh <= report.table[i - 1].dh + 2.0 * delta);
  }
  REQUIRE(report.slope_applicable);
  CHECK(report.slope <= -0.8);

  // exhaustive tuple-enumeration oracle reproduces the distances at n = 2, 3
  const auto epi = epigraph::truncated_epigraph(dw, 2.0, delta);
  const auto snapped = epi.cloud.resnapped(delta / 10.0);
  const auto minorant = epigraph::convex_minorant(dw);
  const auto target = epigraph::truncated_epigraph(minorant, 2.0, delta);
  for (int n : {2, 3}) {
    const auto oracle_avg = oracles::minkowski_average_tuples(snapped, n);
    const double oracle_dh = geometry::hausdorff(oracle_avg, target.cloud);
    CHECK(report.table[static_cast<std::size_t>(n - 1)].dh ==
          Catch::Approx(oracle_dh).margin(1e-12));
  }
}

TEST_CASE("coarse-delta rate table is monotone with no usable points", "[epigraph]") {
  const auto dw = sample_1d(double_well, -1.5, 1.5, 0.375);
  const auto report = epigraph::convexification_rate(dw, 2.0, 1.0, 5);
  REQUIRE(report.table.size() == 5);
  CHECK_FALSE(report.slope_applicable);
  for (std::size_t i = 1; i < report.table.size(); ++i) {
    CHECK(report.table[i].dh <= report.table[i - 1].dh + 2.0);
  }
}

TEST_CASE("one or two usable points is a degenerate fit", "[epigraph]") {
  const auto dw = sample_1d(double_well, -1.5, 1.5, 0.375);
  CHECK_THROWS_AS(epigraph::convexification_rate(dw, 2.0, 0.3, 3), DegenerateFit);
}
