// scx: experiment runner for the shallowcvx library. One subcommand per
// verified claim; every run writes a provenance-stamped CSV and prints a
// one-line summary. Exit codes: 0 success, 1 validation error, 2
// computational error.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <limits>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "shallowcvx/shallowcvx.hpp"
#include "shallowcvx/config.hpp"

namespace {

using scx::csv::format_double;

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(scx::config::trim(item));
  return parts;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw scx::InvalidArgument("expected a real number, got '" + s + "'");
  }
  if (used != s.size()) throw scx::InvalidArgument("expected a real number, got '" + s + "'");
  return v;
}

std::int64_t parse_int(const std::string& s) {
  std::size_t used = 0;
  std::int64_t v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw scx::InvalidArgument("expected an integer, got '" + s + "'");
  }
  if (used != s.size()) throw scx::InvalidArgument("expected an integer, got '" + s + "'");
  return v;
}

std::uint64_t parse_uint(const std::string& s) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    throw scx::InvalidArgument("expected a nonnegative integer, got '" + s + "'");
  }
  if (used != s.size()) throw scx::InvalidArgument("expected a nonnegative integer, got '" + s + "'");
  return v;
}

// Bookkeeping shared by command-line flags and config-file keys: who was set
// explicitly, how to apply a config value, and how to echo the resolved value
// into CSV provenance.
class OptionTable {
public:
  void add(CLI::App* cmd, const std::string& name, double* target, const std::string& desc) {
    auto* opt = cmd->add_option("--" + name, *target, desc);
    items_.push_back({name, opt, [target](const std::string& v) { *target = parse_double(v); },
                      [target]() { return format_double(*target); }});
  }
  void add(CLI::App* cmd, const std::string& name, int* target, const std::string& desc) {
    auto* opt = cmd->add_option("--" + name, *target, desc);
    items_.push_back({name, opt,
                      [target](const std::string& v) { *target = static_cast<int>(parse_int(v)); },
                      [target]() { return std::to_string(*target); }});
  }
  void add(CLI::App* cmd, const std::string& name, std::int64_t* target, const std::string& desc) {
    auto* opt = cmd->add_option("--" + name, *target, desc);
    items_.push_back({name, opt, [target](const std::string& v) { *target = parse_int(v); },
                      [target]() { return std::to_string(*target); }});
  }
  void add(CLI::App* cmd, const std::string& name, std::uint64_t* target, const std::string& desc) {
    auto* opt = cmd->add_option("--" + name, *target, desc);
    items_.push_back({name, opt, [target](const std::string& v) { *target = parse_uint(v); },
                      [target]() { return std::to_string(*target); }});
  }
  void add(CLI::App* cmd, const std::string& name, std::string* target, const std::string& desc) {
    auto* opt = cmd->add_option("--" + name, *target, desc);
    items_.push_back({name, opt, [target](const std::string& v) { *target = v; },
                      [target]() { return *target; }});
  }
  void add(CLI::App* cmd, const std::string& name, std::vector<double>* target,
           const std::string& desc) {
    auto* opt = cmd->add_option("--" + name, *target, desc)->delimiter(',');
    items_.push_back({name, opt,
                      [target](const std::string& v) {
                        target->clear();
                        for (const auto& part : split_commas(v)) target->push_back(parse_double(part));
                      },
                      [target]() {
                        std::string s;
                        for (std::size_t i = 0; i < target->size(); ++i) {
                          if (i) s += ',';
                          s += format_double((*target)[i]);
                        }
                        return s;
                      }});
  }
  void add(CLI::App* cmd, const std::string& name, std::vector<int>* target,
           const std::string& desc) {
    auto* opt = cmd->add_option("--" + name, *target, desc)->delimiter(',');
    items_.push_back({name, opt,
                      [target](const std::string& v) {
                        target->clear();
                        for (const auto& part : split_commas(v)) {
                          target->push_back(static_cast<int>(parse_int(part)));
                        }
                      },
                      [target]() {
                        std::string s;
                        for (std::size_t i = 0; i < target->size(); ++i) {
                          if (i) s += ',';
                          s += std::to_string((*target)[i]);
                        }
                        return s;
                      }});
  }
  void add(CLI::App* cmd, const std::string& name, std::vector<std::uint64_t>* target,
           const std::string& desc) {
    auto* opt = cmd->add_option("--" + name, *target, desc)->delimiter(',');
    items_.push_back({name, opt,
                      [target](const std::string& v) {
                        target->clear();
                        for (const auto& part : split_commas(v)) target->push_back(parse_uint(part));
                      },
                      [target]() {
                        std::string s;
                        for (std::size_t i = 0; i < target->size(); ++i) {
                          if (i) s += ',';
                          s += std::to_string((*target)[i]);
                        }
                        return s;
                      }});
  }

  // Flags given on the command line win over config-file values.
  void apply_config(const std::vector<scx::config::Entry>& entries) {
    for (const auto& e : entries) {
      bool known = false;
      for (auto& item : items_) {
        if (item.name == e.key) {
          known = true;
          if (item.opt->count() == 0) {
            try {
              item.apply(e.value);
            } catch (const scx::InvalidArgument& err) {
              throw scx::ParseError(e.line, err.what());
            }
          }
          break;
        }
      }
      if (!known) throw scx::UnknownKey(e.key);
    }
  }

  std::vector<std::pair<std::string, std::string>> resolved() const {
    std::vector<std::pair<std::string, std::string>> kv;
    for (const auto& item : items_) kv.emplace_back(item.name, item.render());
    std::sort(kv.begin(), kv.end());
    return kv;
  }

private:
  struct Item {
    std::string name;
    CLI::Option* opt;
    std::function<void(const std::string&)> apply;
    std::function<std::string()> render;
  };
  std::vector<Item> items_;
};

struct NamedFunction {
  double lo = 0.0;
  double hi = 0.0;
  std::function<double(double)> f;
};

NamedFunction lookup_function(const std::string& name) {
  if (name == "double_well") {
    return {-1.5, 1.5, [](double x) { return (x * x - 1.0) * (x * x - 1.0); }};
  }
  if (name == "quadratic") return {-1.0, 1.0, [](double x) { return x * x; }};
  if (name == "neg_abs") return {-1.0, 1.0, [](double x) { return -std::abs(x); }};
  throw scx::InvalidArgument("unknown function '" + name +
                             "' (expected double_well, quadratic or neg_abs)");
}

scx::epigraph::SampledFunction sample_named(const NamedFunction& nf, double grid_step) {
  const scx::epigraph::ParamBox box({nf.lo}, {nf.hi}, grid_step);
  return scx::epigraph::sample_function([&](std::span<const double> x) { return nf.f(x[0]); },
                                        box);
}

void require(bool cond, const std::string& message) {
  if (!cond) throw scx::InvalidArgument(message);
}

struct OutputFile {
  std::ofstream stream;
  explicit OutputFile(const std::string& path) : stream(path, std::ios::binary) {
    if (!stream) throw scx::ComputeError("cannot open output file '" + path + "'");
  }
};

void write_header(std::ostream& out, const std::string& subcommand, const OptionTable& table) {
  scx::csv::write_provenance(out, std::string("scx ") + scx::kVersion + " " + subcommand,
                             table.resolved());
}

scx::network::DataConfig make_data_config(const std::string& family_name,
                                          const std::vector<double>& beta_star,
                                          const std::string& noise_kind, double noise_level,
                                          std::uint64_t seed) {
  scx::network::DataConfig cfg{scx::network::builtin_family(family_name),
                               beta_star,
                               {},
                               {},
                               seed,
                               {},
                               {}};
  if (cfg.beta_star.empty()) {
    cfg.beta_star.assign(static_cast<std::size_t>(cfg.family.param_dim), 0.0);
    if (family_name == "affine") {
      cfg.beta_star.assign(static_cast<std::size_t>(cfg.family.param_dim), 1.0);
    } else if (family_name == "sin_feature") {
      cfg.beta_star.assign(static_cast<std::size_t>(cfg.family.param_dim), 0.7853981633974483);
    } else if (family_name == "tanh_neuron") {
      cfg.beta_star.front() = 1.0;
      for (std::size_t k = 1; k + 1 < cfg.beta_star.size(); ++k) cfg.beta_star[k] = 1.0;
    }
  }
  if (noise_kind == "gaussian") {
    cfg.noise = {scx::network::NoiseSpec::Kind::gaussian, noise_level};
  } else if (noise_kind == "uniform") {
    cfg.noise = {scx::network::NoiseSpec::Kind::uniform, noise_level};
  } else {
    throw scx::InvalidArgument("unknown noise kind '" + noise_kind + "'");
  }
  return cfg;
}

// ---------------------------------------------------------------------------

struct KernelWeightsCmd {
  double alpha = 0.5;
  int width = 1;
  std::string out = "kernel_weights.csv";
  OptionTable table;

  void bind(CLI::App* cmd) {
    table.add(cmd, "alpha", &alpha, "geometric decay in (0,1)");
    table.add(cmd, "width", &width, "kernel half width N >= 0");
    table.add(cmd, "out", &out, "output CSV path");
  }
  void validate() const {
    scx::kernel::require_alpha(alpha);
    require(width >= 0, "width must be >= 0");
  }
  int run() {
    const auto kw = scx::kernel::kernel_weights(alpha, width);
    double sum = 0.0;
    for (int j = width; j >= 1; --j) sum += kw.weight(-j) + kw.weight(j);
    sum += kw.weight(0);
    OutputFile file(out);
    write_header(file.stream, "kernel-weights", table);
    file.stream << "i,weight\n";
    for (int i = -width; i <= width; ++i) {
      file.stream << i << ',' << format_double(kw.weight(i)) << "\n";
    }
    const bool pass = std::abs(sum - 1.0) <= 1e-12;
    std::cout << "kernel-weights: " << (pass ? "PASS" : "FAIL")
              << " |sum-1|=" << format_double(std::abs(sum - 1.0)) << " N=" << width
              << " alpha=" << format_double(alpha) << " -> " << out << "\n";
    return pass ? 0 : 2;
  }
};

struct TauberCmd {
  std::vector<double> alphas = {0.5, 0.9, 0.99};
  std::string sequence = "even_odd";
  double const_value = 1.0;
  std::int64_t n_cesaro = 100000;
  std::string out = "tauber.csv";
  OptionTable table;

  void bind(CLI::App* cmd) {
    table.add(cmd, "alphas", &alphas, "comma-separated alpha ladder");
    table.add(cmd, "sequence", &sequence, "even_odd | period3 | constant");
    table.add(cmd, "const-value", &const_value, "value of the constant sequence");
    table.add(cmd, "n-cesaro", &n_cesaro, "window for the Cesaro limit estimate");
    table.add(cmd, "out", &out, "output CSV path");
  }
  void validate() const {
    require(!alphas.empty(), "need at least one alpha");
    for (double a : alphas) scx::kernel::require_alpha(a);
    require(n_cesaro >= 2, "n-cesaro must be >= 2");
    require(sequence == "even_odd" || sequence == "period3" || sequence == "constant",
            "sequence must be even_odd, period3 or constant");
  }
  int run() {
    scx::kernel::TwoSidedSequence seq;
    if (sequence == "even_odd") {
      seq = {[](std::int64_t i) { return i % 2 == 0 ? 1.0 : 0.0; }, 1.0};
    } else if (sequence == "period3") {
      seq = {[](std::int64_t i) { return ((i % 3) + 3) % 3 == 0 ? 1.0 : 0.0; }, 1.0};
    } else {
      const double c = const_value;
      seq = {[c](std::int64_t) { return c; }, std::abs(c)};
    }
    const auto report = scx::kernel::tauberian_gap(seq, alphas, n_cesaro);
    OutputFile file(out);
    write_header(file.stream, "tauber", table);
    file.stream << "alpha,gap\n";
    for (const auto& row : report.rows) {
      file.stream << format_double(row.alpha) << ',' << format_double(row.gap) << "\n";
    }
    std::cout << "tauber: " << (report.nonincreasing ? "PASS" : "FAIL")
              << " gaps nonincreasing, gap(alpha=" << format_double(report.rows.back().alpha)
              << ")=" << format_double(report.rows.back().gap) << " -> " << out << "\n";
    return report.nonincreasing ? 0 : 2;
  }
};

struct MinkowskiRateCmd {
  std::string function = "segment";
  int n_max = 8;
  double grid_step = 0.375;
  double delta = 1e-3;
  double cap = 0.0;  // 0 = scale-aware default margin
  std::string out = "minkowski_rate.csv";
  OptionTable table;

  void bind(CLI::App* cmd) {
    table.add(cmd, "function", &function, "segment | double_well | quadratic | neg_abs");
    table.add(cmd, "n-max", &n_max, "largest Minkowski power (1-8)");
    table.add(cmd, "grid-step", &grid_step, "parameter grid step");
    table.add(cmd, "delta", &delta, "epigraph net resolution");
    table.add(cmd, "cap", &cap, "epigraph cap (0 = automatic margin)");
    table.add(cmd, "out", &out, "output CSV path");
  }
  void validate() const {
    require(n_max >= 1 && n_max <= 8, "n-max must lie in [1, 8]");
    require(delta > 0.0, "delta must be positive");
    require(grid_step > 0.0, "grid-step must be positive");
    if (function != "segment") lookup_function(function);
  }
  int run() {
    scx::epigraph::RateReport report;
    if (function == "segment") {
      scx::geometry::PointCloud cloud(2);
      cloud.add({0.0, 0.0});
      cloud.add({1.0, 0.0});
      const auto hull = scx::geometry::convex_hull(cloud);
      const auto target = scx::geometry::hull_dense_sample(hull, delta);
      report = scx::epigraph::minkowski_rate(cloud, target, n_max, delta);
    } else {
      const auto sf = sample_named(lookup_function(function), grid_step);
      const double m = cap > 0.0 ? cap : scx::epigraph::default_cap(sf);
      report = scx::epigraph::convexification_rate(sf, m, delta, n_max);
    }
    bool nonincreasing = true;
    for (std::size_t i = 1; i < report.table.size(); ++i) {
      if (report.table[i].dh > report.table[i - 1].dh + 2.0 * delta) nonincreasing = false;
    }
    OutputFile file(out);
    write_header(file.stream, "minkowski-rate", table);
    file.stream << "n,d_H\n";
    for (const auto& row : report.table) {
      file.stream << row.n << ',' << format_double(row.dh) << "\n";
    }
    std::cout << "minkowski-rate: " << (nonincreasing ? "PASS" : "FAIL") << " nonincreasing, slope="
              << (report.slope_applicable ? format_double(report.slope) : std::string("n/a"))
              << " -> " << out << "\n";
    return nonincreasing ? 0 : 2;
  }
};

struct MinorantCmd {
  std::string function = "double_well";
  double grid_step = 0.01;
  std::string out = "minorant.csv";
  OptionTable table;

  void bind(CLI::App* cmd) {
    table.add(cmd, "function", &function, "double_well | quadratic | neg_abs");
    table.add(cmd, "grid-step", &grid_step, "parameter grid step");
    table.add(cmd, "out", &out, "output CSV path");
  }
  void validate() const {
    require(grid_step > 0.0, "grid-step must be positive");
    lookup_function(function);
  }
  int run() {
    const auto sf = sample_named(lookup_function(function), grid_step);
    const auto minorant = scx::epigraph::convex_minorant(sf);
    const double gap = scx::epigraph::nonconvexity_gap(sf);
    bool valid = true;
    for (std::size_t i = 0; i < sf.values.size(); ++i) {
      if (minorant.values[i] > sf.values[i] + 1e-9) valid = false;
    }
    for (std::size_t i = 1; i + 1 < minorant.values.size(); ++i) {
      const double second =
          minorant.values[i - 1] - 2.0 * minorant.values[i] + minorant.values[i + 1];
      if (second < -1e-9) valid = false;
    }
    OutputFile file(out);
    write_header(file.stream, "minorant", table);
    file.stream << "x,q,q_star\n";
    for (std::size_t i = 0; i < sf.values.size(); ++i) {
      file.stream << format_double(sf.domain.node(i)[0]) << ',' << format_double(sf.values[i])
                  << ',' << format_double(minorant.values[i]) << "\n";
    }
    std::cout << "minorant: " << (valid ? "PASS" : "FAIL")
              << " dominated+convex, nonconvexity_gap=" << format_double(gap) << " -> " << out
              << "\n";
    return valid ? 0 : 2;
  }
};

struct VerifyCorollaryCmd {
  std::string function = "double_well";
  double grid_step = 0.05;
  double delta = 0.05;
  double cap = 0.0;
  int suite = 0;  // 0 = single named function; > 0 = seeded random suite
  std::uint64_t seed = 20240601;
  int threads = 1;
  std::string out = "verify_corollary.csv";
  OptionTable table;

  void bind(CLI::App* cmd) {
    table.add(cmd, "function", &function, "double_well | quadratic | neg_abs");
    table.add(cmd, "grid-step", &grid_step, "parameter grid step");
    table.add(cmd, "delta", &delta, "epigraph net resolution");
    table.add(cmd, "cap", &cap, "epigraph cap (0 = automatic margin)");
    table.add(cmd, "suite", &suite, "number of seeded random functions (0 = named function)");
    table.add(cmd, "seed", &seed, "suite seed");
    table.add(cmd, "threads", &threads, "parallelism cap for the suite");
    table.add(cmd, "out", &out, "output CSV path");
  }
  void validate() const {
    require(grid_step > 0.0, "grid-step must be positive");
    require(delta > 0.0, "delta must be positive");
    require(suite >= 0, "suite must be >= 0");
    require(threads >= 1, "threads must be >= 1");
    if (suite == 0) lookup_function(function);
  }
  int run() {
    struct Row {
      std::string id;
      scx::epigraph::CorollaryReport report;
    };
    std::vector<Row> rows;
    if (suite == 0) {
      const auto sf = sample_named(lookup_function(function), grid_step);
      const double m = cap > 0.0 ? cap : scx::epigraph::default_cap(sf);
      rows.push_back({function, scx::epigraph::verify_corollary(sf, m, delta)});
    } else {
      rows.resize(static_cast<std::size_t>(suite));
      std::atomic<int> next{0};
      auto worker = [&]() {
        for (;;) {
          const int k = next.fetch_add(1);
          if (k >= suite) return;
          const auto f = scx::epigraph::random_piecewise_smooth(seed + static_cast<std::uint64_t>(k));
          const scx::epigraph::ParamBox box({-1.5}, {1.5}, grid_step);
          const auto sf = scx::epigraph::sample_function(
              [&](std::span<const double> x) { return f(x[0]); }, box);
          const double m = cap > 0.0 ? cap : scx::epigraph::default_cap(sf);
          rows[static_cast<std::size_t>(k)] = {"seed_" + std::to_string(seed + static_cast<std::uint64_t>(k)),
                                               scx::epigraph::verify_corollary(sf, m, delta)};
        }
      };
      std::vector<std::future<void>> pool;
      for (int t = 0; t < std::min(threads, suite); ++t) {
        pool.push_back(std::async(std::launch::async, worker));
      }
      for (auto& w : pool) w.get();
    }
    int passed = 0;
    double max_distance = 0.0;
    for (const auto& r : rows) {
      passed += r.report.pass ? 1 : 0;
      max_distance = std::max(max_distance, r.report.distance);
    }
    OutputFile file(out);
    write_header(file.stream, "verify-corollary", table);
    file.stream << "id,distance,tolerance,pass\n";
    for (const auto& r : rows) {
      file.stream << r.id << ',' << format_double(r.report.distance) << ','
                  << format_double(r.report.tolerance) << ',' << (r.report.pass ? 1 : 0) << "\n";
    }
    const bool all = passed == static_cast<int>(rows.size());
    std::cout << "verify-corollary: " << (all ? "PASS" : "FAIL") << " " << passed << "/"
              << rows.size() << " max_distance=" << format_double(max_distance) << " -> " << out
              << "\n";
    return all ? 0 : 2;
  }
};

struct PhiArgminSweepCmd {
  std::string family = "affine";
  std::vector<double> alphas = {0.5, 0.9, 0.99};
  std::vector<int> widths;  // empty = certified cutoffs of the alphas
  double cutoff_tol = 1e-6;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string noise = "gaussian";
  double sigma = 0.1;
  std::vector<double> beta_star;
  double grid_step = 0.2;
  int threads = 1;
  std::string out = "phi_argmin_sweep.csv";
  OptionTable table;

  void bind(CLI::App* cmd) {
    table.add(cmd, "family", &family, "affine | sin_feature | tanh_neuron");
    table.add(cmd, "alphas", &alphas, "comma-separated alpha ladder");
    table.add(cmd, "widths", &widths, "half widths N (empty = certified cutoffs)");
    table.add(cmd, "cutoff-tol", &cutoff_tol, "tail tolerance for derived widths");
    table.add(cmd, "seeds", &seeds, "comma-separated seeds");
    table.add(cmd, "noise", &noise, "gaussian | uniform");
    table.add(cmd, "sigma", &sigma, "noise level");
    table.add(cmd, "beta-star", &beta_star, "shared truth (empty = family default)");
    table.add(cmd, "grid-step", &grid_step, "parameter grid step");
    table.add(cmd, "threads", &threads, "parallelism cap");
    table.add(cmd, "out", &out, "output CSV path");
  }
  void validate() const {
    require(!alphas.empty(), "need at least one alpha");
    for (double a : alphas) scx::kernel::require_alpha(a);
    for (int w : widths) require(w >= 0, "widths must be >= 0");
    require(!seeds.empty(), "need at least one seed");
    require(sigma >= 0.0, "sigma must be >= 0");
    require(cutoff_tol > 0.0, "cutoff-tol must be positive");
    require(grid_step > 0.0, "grid-step must be positive");
    require(threads >= 1, "threads must be >= 1");
    scx::network::builtin_family(family);
  }
  int run() {
    auto cfg = make_data_config(family, beta_star, noise, sigma, 0);
    std::vector<int> use_widths = widths;
    if (use_widths.empty()) {
      for (double a : alphas) use_widths.push_back(scx::kernel::infinite_tail_cutoff(a, cutoff_tol));
      std::sort(use_widths.begin(), use_widths.end());
      use_widths.erase(std::unique(use_widths.begin(), use_widths.end()), use_widths.end());
    }
    const auto grid = cfg.family.domain.with_step(grid_step);
    const auto report = scx::minimize::theorem_sweep(cfg, alphas, use_widths, seeds, grid, threads);

    // Seed-averaged |min_phi - mean_per_unit_min| per alpha at the largest N.
    const int top = *std::max_element(use_widths.begin(), use_widths.end());
    std::map<double, std::pair<double, int>> gap_by_alpha;
    for (const auto& row : report.rows) {
      if (row.half_width != top) continue;
      auto& cell = gap_by_alpha[row.alpha];
      cell.first += std::abs(row.min_phi - row.mean_per_unit_min);
      cell.second += 1;
    }
    bool decreasing = gap_by_alpha.size() >= 2;
    double prev = std::numeric_limits<double>::infinity();
    std::string gaps;
    for (const auto& [a, cell] : gap_by_alpha) {
      const double mean_gap = cell.first / cell.second;
      if (mean_gap >= prev) decreasing = false;
      prev = mean_gap;
      if (!gaps.empty()) gaps += " > ";
      gaps += format_double(mean_gap);
    }

    OutputFile file(out);
    write_header(file.stream, "phi-argmin-sweep", table);
    scx::minimize::write_sweep_csv(file.stream, report);
    std::cout << "phi-argmin-sweep: " << (decreasing ? "PASS" : "FAIL")
              << " gap decreasing at N=" << top << ": " << gaps << " -> " << out << "\n";
    return decreasing ? 0 : 2;
  }
};

struct SgdTrainCmd {
  std::string family = "affine";
  std::string mode = "single";
  double alpha = 0.9;
  int width = 0;
  double a0 = 0.5;
  double gamma = 1.0;
  std::int64_t steps = 10000;
  std::uint64_t seed = 7;
  std::string noise = "gaussian";
  double sigma = 0.1;
  std::vector<double> beta_star;
  std::vector<double> init;
  std::string out = "sgd_train.csv";
  OptionTable table;

  void bind(CLI::App* cmd) {
    table.add(cmd, "family", &family, "affine | sin_feature | tanh_neuron");
    table.add(cmd, "mode", &mode, "single | full");
    table.add(cmd, "alpha", &alpha, "kernel decay (full mode)");
    table.add(cmd, "width", &width, "kernel half width N (full mode)");
    table.add(cmd, "a0", &a0, "initial step size");
    table.add(cmd, "gamma", &gamma, "step exponent in (0.5, 1]");
    table.add(cmd, "steps", &steps, "number of descent steps");
    table.add(cmd, "seed", &seed, "master seed");
    table.add(cmd, "noise", &noise, "gaussian | uniform");
    table.add(cmd, "sigma", &sigma, "noise level");
    table.add(cmd, "beta-star", &beta_star, "shared truth (empty = family default)");
    table.add(cmd, "init", &init, "initial point (empty = box center)");
    table.add(cmd, "out", &out, "output CSV path");
  }
  void validate() const {
    require(mode == "single" || mode == "full", "mode must be single or full");
    scx::kernel::require_alpha(alpha);
    require(width >= 0, "width must be >= 0");
    require(a0 > 0.0, "a0 must be positive");
    require(gamma > 0.5 && gamma <= 1.0, "gamma must lie in (0.5, 1]");
    require(steps >= 1, "steps must be >= 1");
    require(sigma >= 0.0, "sigma must be >= 0");
    scx::network::builtin_family(family);
  }
  int run() {
    auto cfg = make_data_config(family, beta_star, noise, sigma, seed);
    const auto schedule = scx::sgd::make_schedule(a0, gamma);
    const auto traj = scx::sgd::sgd_run(
        cfg, alpha, width, schedule, steps,
        mode == "single" ? scx::sgd::SgdMode::single_beta : scx::sgd::SgdMode::full_stack, init);
    OutputFile file(out);
    write_header(file.stream, "sgd-train", table);
    scx::sgd::write_trajectory_csv(file.stream, traj);
    std::string beta_end;
    for (double b : traj.beta(traj.steps())) {
      if (!beta_end.empty()) beta_end += ',';
      beta_end += format_double(b);
    }
    std::cout << "sgd-train: PASS finite, beta_end=(" << beta_end
              << ") final_loss=" << format_double(traj.losses.back())
              << " projections=" << traj.projection_count << " -> " << out << "\n";
    return 0;
  }
};

struct SgdSuiteCmd {
  std::string family = "affine";
  int num_seeds = 20;
  std::uint64_t seed = 1;
  double a0 = 0.5;
  double gamma = 1.0;
  std::int64_t steps = 10000;
  std::string noise = "gaussian";
  double sigma = 0.1;
  std::int64_t window = 500;
  double epsilon = 0.1;
  std::uint64_t holdout_seed = 1234567;
  std::int64_t holdout_samples = 100000;
  int threads = 1;
  std::string out = "sgd_suite.csv";
  OptionTable table;

  void bind(CLI::App* cmd) {
    table.add(cmd, "family", &family, "affine only for the closed-form reference fit");
    table.add(cmd, "num-seeds", &num_seeds, "number of trajectories");
    table.add(cmd, "seed", &seed, "base seed (trajectory k uses seed + k)");
    table.add(cmd, "a0", &a0, "initial step size");
    table.add(cmd, "gamma", &gamma, "step exponent in (0.5, 1]");
    table.add(cmd, "steps", &steps, "steps per trajectory");
    table.add(cmd, "noise", &noise, "gaussian | uniform");
    table.add(cmd, "sigma", &sigma, "noise level");
    table.add(cmd, "window", &window, "descent-check window length");
    table.add(cmd, "epsilon", &epsilon, "distance threshold for the final window");
    table.add(cmd, "holdout-seed", &holdout_seed, "seed of the reference-fit batch");
    table.add(cmd, "holdout-samples", &holdout_samples, "size of the reference-fit batch");
    table.add(cmd, "threads", &threads, "parallelism cap");
    table.add(cmd, "out", &out, "output CSV path");
  }
  void validate() const {
    require(family == "affine", "sgd-suite requires the affine family");
    require(num_seeds >= 20, "num-seeds must be >= 20 for the descent check");
    require(a0 > 0.0, "a0 must be positive");
    require(gamma > 0.5 && gamma <= 1.0, "gamma must lie in (0.5, 1]");
    require(steps >= 100, "steps must be >= 100");
    require(sigma >= 0.0, "sigma must be >= 0");
    require(window >= 1 && window <= steps, "window must lie in [1, steps]");
    require(epsilon > 0.0, "epsilon must be positive");
    require(holdout_samples >= 1, "holdout-samples must be >= 1");
    require(threads >= 1, "threads must be >= 1");
  }
  int run() {
    const auto schedule = scx::sgd::make_schedule(a0, gamma);
    auto holdout_cfg = make_data_config(family, {}, noise, sigma, holdout_seed);
    const auto holdout =
        scx::network::generate_batch(holdout_cfg, 0, static_cast<int>(holdout_samples));
    const auto beta_ls = scx::sgd::affine_least_squares(holdout);
    scx::minimize::ArgminSet ls_target{{beta_ls}, 0.0, 0.0};

    std::vector<scx::sgd::SgdTrajectory> trajs(static_cast<std::size_t>(num_seeds));
    std::atomic<int> next{0};
    auto worker = [&]() {
      for (;;) {
        const int k = next.fetch_add(1);
        if (k >= num_seeds) return;
        auto cfg = make_data_config(family, {}, noise, sigma, seed + static_cast<std::uint64_t>(k));
        trajs[static_cast<std::size_t>(k)] = scx::sgd::sgd_run(
            cfg, 0.9, 0, schedule, steps, scx::sgd::SgdMode::single_beta);
      }
    };
    std::vector<std::future<void>> pool;
    for (int t = 0; t < std::min(threads, num_seeds); ++t) {
      pool.push_back(std::async(std::launch::async, worker));
    }
    for (auto& w : pool) w.get();

    int close_count = 0, decay_count = 0;
    struct Row {
      std::uint64_t seed;
      double ls_distance, grad_ratio, final_fraction, final_loss;
      std::vector<double> beta_end;
    };
    std::vector<Row> rows;
    for (int k = 0; k < num_seeds; ++k) {
      const auto& t = trajs[static_cast<std::size_t>(k)];
      const auto end = t.beta(t.steps());
      const double dist = scx::minimize::argmin_set_distance(end, ls_target);
      const auto decay = scx::sgd::gradient_decay_report(t);
      const auto series = scx::sgd::distance_to_argmin_series(t, ls_target, epsilon);
      const double ratio = decay.status == scx::sgd::DecayStatus::already_stationary
                               ? 0.0
                               : decay.final_to_initial;
      if (dist < 0.05) ++close_count;
      if (ratio < 0.1) ++decay_count;
      rows.push_back({seed + static_cast<std::uint64_t>(k), dist, ratio,
                      series.final_window_fraction, t.losses.back(),
                      std::vector<double>(end.begin(), end.end())});
    }
    const auto descent = scx::sgd::descent_inequality_check(trajs, window);

    OutputFile file(out);
    write_header(file.stream, "sgd-suite", table);
    file.stream << "seed";
    for (std::size_t k = 1; k <= rows.front().beta_end.size(); ++k) file.stream << ",beta_" << k;
    file.stream << ",final_loss,ls_distance,grad_ratio,final_window_fraction\n";
    for (const auto& r : rows) {
      file.stream << r.seed;
      for (double b : r.beta_end) file.stream << ',' << format_double(b);
      file.stream << ',' << format_double(r.final_loss) << ',' << format_double(r.ls_distance)
                  << ',' << format_double(r.grad_ratio) << ','
                  << format_double(r.final_fraction) << "\n";
    }
    const bool pass = close_count * 10 >= num_seeds * 9 && decay_count * 10 >= num_seeds * 9 &&
                      descent.pass_fraction >= 0.9;
    std::cout << "sgd-suite: " << (pass ? "PASS" : "FAIL") << " close=" << close_count << "/"
              << num_seeds << " decay=" << decay_count << "/" << num_seeds
              << " descent_fraction=" << format_double(descent.pass_fraction) << " -> " << out
              << "\n";
    return pass ? 0 : 2;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shallowcvx experiment runner"};
  app.require_subcommand(1);

  std::string config_path;

  KernelWeightsCmd kernel_cmd;
  TauberCmd tauber_cmd;
  MinkowskiRateCmd rate_cmd;
  MinorantCmd minorant_cmd;
  VerifyCorollaryCmd corollary_cmd;
  PhiArgminSweepCmd sweep_cmd;
  SgdTrainCmd train_cmd;
  SgdSuiteCmd suite_cmd;

  struct Binding {
    CLI::App* cmd;
    OptionTable* table;
    std::function<void()> validate;
    std::function<int()> run;
  };
  std::vector<Binding> bindings;

  auto bind = [&](const std::string& name, const std::string& desc, auto& holder) {
    CLI::App* cmd = app.add_subcommand(name, desc);
    cmd->add_option("--config", config_path, "key = value config file (flags win)");
    holder.bind(cmd);
    bindings.push_back({cmd, &holder.table, [&holder]() { holder.validate(); },
                        [&holder]() { return holder.run(); }});
  };

  bind("kernel-weights", "normalized geometric last-layer weights", kernel_cmd);
  bind("tauber", "Cesaro vs kernel-mean agreement along an alpha ladder", tauber_cmd);
  bind("minkowski-rate", "Hausdorff decay of Minkowski averages", rate_cmd);
  bind("minorant", "convex minorant of a sampled function", minorant_cmd);
  bind("verify-corollary", "hull of the truncated epigraph vs minorant epigraph", corollary_cmd);
  bind("phi-argmin-sweep", "separable argmin sweep over (alpha, N, seed)", sweep_cmd);
  bind("sgd-train", "one projected subgradient descent trajectory", train_cmd);
  bind("sgd-suite", "seeded descent suite with reference-fit diagnostics", suite_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  Binding* active = nullptr;
  for (auto& b : bindings) {
    if (b.cmd->parsed()) active = &b;
  }
  if (active == nullptr) return 1;

  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw scx::InvalidArgument("config file '" + config_path + "' not readable");
      active->table->apply_config(scx::config::parse_config(in));
    }
    active->validate();
    return active->run();
  } catch (const scx::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n" << active->cmd->help() << std::flush;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
