#include "covapprox/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <set>

#include "covapprox/baseline.hpp"
#include "covapprox/ellipsoid_body.hpp"
#include "covapprox/slab_body.hpp"
#include "covapprox/verifier.hpp"
#include "covapprox/version.hpp"

namespace covapprox {
namespace {

using nlohmann::json;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "experiment",  "distribution", "d",          "u",           "marginal",
      "marginal_p",  "cov",          "cov_diag",   "mixing",      "mixing_diag",
      "q_norm",      "L_norm",       "N",          "n",           "m",
      "eta",         "delta",        "lambda",     "p",           "alpha",
      "beta",        "directions",   "trials",     "seeds",       "seed",
      "out",         "format",       "exec",       "body",        "mode",
      "export_network", "storage",   "candidates", "m0_trials",   "m0_directions",
      "m_values",    "kd_pairs",     "eta_values", "eps_list",    "alpha_trials",
      "m_scale",     "n_scale",
  };
  return keys;
}

template <typename T>
std::optional<T> opt_get(const json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return opt_get<T>(j, key).value_or(fallback);
}

int require_int(const std::optional<int>& v, const char* name) {
  if (!v) throw ConfigError(std::string("missing required config field '") + name + "'");
  return *v;
}

double require_double(const std::optional<double>& v, const char* name) {
  if (!v) throw ConfigError(std::string("missing required config field '") + name + "'");
  return *v;
}

SymMatrix matrix_from_json(const json& j, int d, const char* what) {
  if (!j.is_array() || static_cast<int>(j.size()) != d) {
    throw ConfigError(std::string(what) + ": expected a " + std::to_string(d) + "x" +
                      std::to_string(d) + " array of arrays");
  }
  std::vector<double> entries;
  entries.reserve(static_cast<size_t>(d) * d);
  for (const auto& row : j) {
    if (!row.is_array() || static_cast<int>(row.size()) != d) {
      throw ConfigError(std::string(what) + ": ragged matrix");
    }
    for (const auto& v : row) entries.push_back(v.get<double>());
  }
  try {
    return SymMatrix::from_entries(d, entries);
  } catch (const std::exception& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

MarginalSpec marginal_from_name(const std::string& name, double p) {
  if (name == "standard_gaussian") return MarginalSpec::standard_gaussian();
  if (name == "rademacher") return MarginalSpec::rademacher();
  if (name == "centered_exponential") return MarginalSpec::centered_exponential();
  if (name == "student_like") return MarginalSpec::student_like(p);
  throw ConfigError("unknown marginal '" + name + "'");
}

int ceil_int(double x) { return static_cast<int>(std::ceil(x)); }

int slab_sample_count(int d, double eta) {
  return ceil_int(2.0 * d * std::log(2.0 / eta) / (eta * eta));
}

json flat_certify_row(const ApproximationReport& rep) {
  json row;
  row["min_ratio"] = rep.min_ratio;
  row["max_ratio"] = rep.max_ratio;
  row["implied_eta_inner"] = rep.implied_eta_inner;
  row["implied_eta_outer"] =
      std::isinf(rep.implied_eta_outer) ? json("inf") : json(rep.implied_eta_outer);
  row["infinite_radials"] = rep.infinite_radial_count;
  return row;
}

struct Gate {
  std::string name;
  bool pass;
};

void store_gates(ReportFile& report, const std::vector<Gate>& gates) {
  json g = json::object();
  for (const auto& gate : gates) g[gate.name] = gate.pass;
  report.aggregates["gates"] = g;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

ReportFile new_report(const ExperimentConfig& cfg) {
  ReportFile rep;
  rep.config_echo = cfg.raw;
  rep.config_echo.erase("out");  // I/O routing, not experiment content
  rep.library_version = kLibraryVersion;
  return rep;
}

bool distribution_configured(const ExperimentConfig& cfg) { return cfg.raw.contains("distribution"); }

// ---------------------------------------------------------------------------
// slab experiments

ReportFile exp_slab_gaussian(const ExperimentConfig& cfg) {
  const int d = require_int(cfg.d > 0 ? std::optional<int>(cfg.d) : std::nullopt, "d");
  const double eta = require_double(cfg.eta, "eta");
  if (!(eta > 0.0 && eta < 0.5)) throw ConfigError("slab experiments require 0 < eta < 1/2");
  const int m = cfg.m.value_or(1);
  const int n = cfg.n.value_or(slab_sample_count(d, eta));
  const int directions = cfg.directions.value_or(10000);
  const int seeds = cfg.seeds.value_or(20);
  const Exec exec = exec_of(cfg);

  const DistributionSpec spec =
      distribution_configured(cfg) ? make_distribution(cfg) : DistributionSpec::standard_gaussian(d);
  const SymMatrix t = spec.covariance();

  ReportFile report = new_report(cfg);
  int pass_seeds = 0;
  for (int s = 0; s < seeds; ++s) {
    RngStream root(cfg.seed, static_cast<std::uint64_t>(s));
    const auto samples =
        sample_batch(spec, static_cast<std::int64_t>(n) * m, root.derive(0), exec);
    const SlabBody body = build_slab_body(samples, SmoothedMode{m, eta});
    const ApproximationReport rep = certify_approximation(
        [&](const Vector& dir) { return radial(body, dir); }, t, directions, root.derive(1), exec);
    const bool pass =
        rep.min_ratio >= 0.95 && rep.max_ratio <= 1.5 && rep.infinite_radial_count == 0;
    pass_seeds += pass ? 1 : 0;
    json row = flat_certify_row(rep);
    row["seed_index"] = s;
    row["n"] = body.count();
    row["theta"] = body.threshold();
    row["k"] = body.required_count();
    row["pass"] = pass;
    report.rows.push_back(std::move(row));
  }
  const int required = ceil_int(0.9 * seeds);
  report.aggregates["pass_seeds"] = pass_seeds;
  report.aggregates["required_pass_seeds"] = required;
  report.aggregates["thresholds"] = {{"min_ratio", 0.95}, {"max_ratio", 1.5}};
  store_gates(report, {{"seed_pass_rate", pass_seeds >= required}});
  report.csv_columns = {"seed_index", "n",         "theta",           "k",
                        "min_ratio",  "max_ratio", "infinite_radials", "pass"};
  return report;
}

ReportFile exp_zigzag_sphere(const ExperimentConfig& cfg) {
  const int d = require_int(cfg.d > 0 ? std::optional<int>(cfg.d) : std::nullopt, "d");
  const double eta = require_double(cfg.eta, "eta");
  if (!(eta > 0.0 && eta < 0.5)) throw ConfigError("slab experiments require 0 < eta < 1/2");
  if (distribution_configured(cfg) && cfg.distribution != "uniform_sphere") {
    throw ConfigError("zigzag_sphere runs on the uniform sphere distribution");
  }
  const int n = cfg.n.value_or(static_cast<int>(
      cfg.N.value_or(slab_sample_count(d, eta))));
  const int directions = cfg.directions.value_or(10000);
  const int seeds = cfg.seeds.value_or(20);
  const std::int64_t alpha_trials = cfg.alpha_trials.value_or(1000000);
  const Exec exec = exec_of(cfg);

  const DistributionSpec spec = DistributionSpec::uniform_sphere(d);
  const SymMatrix t = spec.covariance();
  const L2DirectionSampler sampler(t);

  ReportFile report = new_report(cfg);
  int pass_seeds = 0;
  for (int s = 0; s < seeds; ++s) {
    RngStream root(cfg.seed, static_cast<std::uint64_t>(s));
    // alpha_d: Monte Carlo median of |<Z,v>| on a fixed L2-sphere direction
    // (any direction is representative by rotation invariance).
    RngStream vstream = root.derive(3);
    const Vector v0 = sampler.draw(vstream);
    const double alpha_d =
        estimate_abs_quantile(spec, v0, 1, 0.5, alpha_trials, root.derive(2), exec);

    const auto samples = sample_batch(spec, n, root.derive(0), exec);
    // The zig-zag body counts "at least n/2" directions at threshold alpha_d:
    // the general mode with beta = 1/2 and eta = 0.
    const SlabBody body = build_slab_body(samples, GeneralMode{alpha_d, 0.5, 0.0});
    const ApproximationReport rep = certify_approximation(
        [&](const Vector& dir) { return radial(body, dir); }, t, directions, root.derive(1), exec);
    const bool pass =
        rep.min_ratio >= 0.9 && rep.max_ratio <= 1.6 && rep.infinite_radial_count == 0;
    pass_seeds += pass ? 1 : 0;
    json row = flat_certify_row(rep);
    row["seed_index"] = s;
    row["n"] = body.count();
    row["alpha_d"] = alpha_d;
    row["k"] = body.required_count();
    row["pass"] = pass;
    report.rows.push_back(std::move(row));
  }
  const int required = ceil_int(0.9 * seeds);
  report.aggregates["pass_seeds"] = pass_seeds;
  report.aggregates["required_pass_seeds"] = required;
  report.aggregates["thresholds"] = {{"min_ratio", 0.9}, {"max_ratio", 1.6}};
  store_gates(report, {{"seed_pass_rate", pass_seeds >= required}});
  report.csv_columns = {"seed_index", "n",         "alpha_d",          "k",
                        "min_ratio",  "max_ratio", "infinite_radials", "pass"};
  return report;
}

ReportFile exp_slab_sharp(const ExperimentConfig& cfg) {
  const int d = require_int(cfg.d > 0 ? std::optional<int>(cfg.d) : std::nullopt, "d");
  const double eta = require_double(cfg.eta, "eta");
  if (!(eta > 0.0 && eta < 0.5)) throw ConfigError("slab experiments require 0 < eta < 1/2");
  const int m = cfg.m.value_or(1);
  const int n = cfg.n.value_or(slab_sample_count(d, eta));
  const int directions = cfg.directions.value_or(10000);
  const int seeds = cfg.seeds.value_or(5);
  const Exec exec = exec_of(cfg);

  const DistributionSpec spec =
      distribution_configured(cfg) ? make_distribution(cfg) : DistributionSpec::standard_gaussian(d);
  const SymMatrix t = spec.covariance();

  ReportFile report = new_report(cfg);
  for (int s = 0; s < seeds; ++s) {
    RngStream root(cfg.seed, static_cast<std::uint64_t>(s));
    const auto samples =
        sample_batch(spec, static_cast<std::int64_t>(n) * m, root.derive(0), exec);
    BlockAverageResult blocks = block_average(samples, m);
    SharpMode mode{eta, std::nullopt};
    if (cfg.alpha) mode.alpha = *cfg.alpha;
    const SlabBody body = build_slab_body(blocks.blocks, mode);
    const ApproximationReport rep = certify_approximation(
        [&](const Vector& dir) { return radial(body, dir); }, t, directions, root.derive(1), exec);
    json row = flat_certify_row(rep);
    row["seed_index"] = s;
    row["n"] = body.count();
    row["theta"] = body.threshold();
    row["k"] = body.required_count();
    report.rows.push_back(std::move(row));
  }
  report.csv_columns = {"seed_index", "n", "theta", "k", "min_ratio", "max_ratio",
                        "infinite_radials"};
  return report;
}

ReportFile exp_isomorphic_smallball(const ExperimentConfig& cfg) {
  const int d = require_int(cfg.d > 0 ? std::optional<int>(cfg.d) : std::nullopt, "d");
  const double lambda = cfg.lambda.value_or(0.5);
  const double delta = cfg.delta.value_or(0.2);
  if (!(lambda > 0.0)) throw ConfigError("isomorphic_smallball requires lambda > 0");
  if (!(delta > 0.0 && delta < 4.0)) throw ConfigError("isomorphic_smallball requires 0 < delta < 4");
  const int n_default = ceil_int(2.0 * std::max(d / delta * std::log(1.0 / (delta * lambda)),
                                                d / (lambda * lambda)));
  const int n = static_cast<int>(cfg.N.value_or(n_default));
  const int directions = cfg.directions.value_or(2000);
  const int seeds = cfg.seeds.value_or(5);
  const Exec exec = exec_of(cfg);

  // Default: a product body with heavy polynomial tails; it has a small-ball
  // constant but no useful L4-L2 equivalence, the isomorphic regime.
  DistributionSpec spec = distribution_configured(cfg)
                              ? make_distribution(cfg)
                              : DistributionSpec::mixed_product(MarginalSpec::student_like(2.5),
                                                                SymMatrix::identity(d));
  const SymMatrix t = spec.covariance();

  ReportFile report = new_report(cfg);
  for (int s = 0; s < seeds; ++s) {
    RngStream root(cfg.seed, static_cast<std::uint64_t>(s));
    const auto samples = sample_batch(spec, n, root.derive(0), exec);
    const SlabBody body = build_slab_body(samples, IsomorphicMode{lambda, delta});
    const ApproximationReport rep = certify_approximation(
        [&](const Vector& dir) { return radial(body, dir); }, t, directions, root.derive(1), exec);
    json row = flat_certify_row(rep);
    row["seed_index"] = s;
    row["n"] = body.count();
    row["theta"] = body.threshold();
    row["k"] = body.required_count();
    row["ratio_spread"] = rep.max_ratio / rep.min_ratio;
    report.rows.push_back(std::move(row));
  }
  report.aggregates["isomorphic_note"] =
      "constant-factor approximation: expect ratios near c*lambda*sqrt(delta)..1";
  report.csv_columns = {"seed_index", "n", "theta", "k", "min_ratio", "max_ratio", "ratio_spread",
                        "infinite_radials"};
  return report;
}

// ---------------------------------------------------------------------------
// ellipsoid experiments

ReportFile exp_ellipsoid_l4(const ExperimentConfig& cfg) {
  const int d = require_int(cfg.d > 0 ? std::optional<int>(cfg.d) : std::nullopt, "d");
  const double eta = require_double(cfg.eta, "eta");
  if (!(eta > 0.0 && eta < 0.25)) throw ConfigError("ellipsoid experiments require 0 < eta < 1/4");
  const int directions = cfg.directions.value_or(10000);
  const int seeds = cfg.seeds.value_or(20);
  const Exec exec = exec_of(cfg);

  DistributionSpec spec = distribution_configured(cfg)
                              ? make_distribution(cfg)
                              : DistributionSpec::mixed_product(MarginalSpec::rademacher(),
                                                                SymMatrix::identity(d));
  const SymMatrix t = spec.covariance();

  ReportFile report = new_report(cfg);

  int m;
  if (cfg.m) {
    m = *cfg.m;
    report.aggregates["m_source"] = "config";
  } else {
    std::vector<int> candidates;
    if (cfg.candidates) {
      candidates = *cfg.candidates;
    } else {
      for (int c = 256; c <= 65536; c *= 2) candidates.push_back(c);
    }
    const int m0_trials = cfg.m0_trials.value_or(3000);
    const int m0_directions = cfg.m0_directions.value_or(32);
    RngStream m0_rng(cfg.seed, 1u << 20);
    const M0Estimate est =
        estimate_m0(spec, eta, candidates, m0_trials, m0_directions, m0_rng, exec, true);
    report.aggregates["m0_estimate"] = to_json(est);
    if (!est.attained) {
      report.aggregates["error"] = "m0 not attained on the candidate grid";
      store_gates(report, {{"m0_attained", false}, {"seed_pass_rate", false}});
      return report;
    }
    m = est.m0;
    report.aggregates["m_source"] = "estimate_m0";
  }

  const int n = cfg.n.value_or(ceil_int(4.0 * d * std::log(m / eta)));
  const bool gram = cfg.storage == "gram" ||
                    (cfg.storage == "auto" && static_cast<std::int64_t>(m) * d >= 32768);
  if (cfg.storage != "auto" && cfg.storage != "gram" && cfg.storage != "raw") {
    throw ConfigError("storage must be auto|raw|gram");
  }
  const double max_gate = 1.0 + 5.0 * eta;

  int pass_seeds = 0;
  for (int s = 0; s < seeds; ++s) {
    RngStream root(cfg.seed, static_cast<std::uint64_t>(s));
    EllipsoidBody body =
        gram ? build_ellipsoid_body_gram(spec, n, m, eta, root.derive(0), exec)
             : build_ellipsoid_body(
                   sample_batch(spec, static_cast<std::int64_t>(n) * m, root.derive(0), exec), m,
                   eta);
    const ApproximationReport rep = certify_approximation(
        [&](const Vector& dir) { return radial(body, dir); }, t, directions, root.derive(1), exec);
    const bool pass =
        rep.min_ratio >= 0.95 && rep.max_ratio <= max_gate && rep.infinite_radial_count == 0;
    pass_seeds += pass ? 1 : 0;
    json row = flat_certify_row(rep);
    row["seed_index"] = s;
    row["m"] = m;
    row["n"] = body.block_count();
    row["k"] = body.required_count();
    row["storage"] = body.stores_gram() ? "gram" : "raw";
    row["pass"] = pass;
    report.rows.push_back(std::move(row));
  }
  const int required = ceil_int(0.9 * seeds);
  report.aggregates["m"] = m;
  report.aggregates["n"] = n;
  report.aggregates["pass_seeds"] = pass_seeds;
  report.aggregates["required_pass_seeds"] = required;
  report.aggregates["thresholds"] = {{"min_ratio", 0.95}, {"max_ratio", max_gate}};
  store_gates(report, {{"seed_pass_rate", pass_seeds >= required}});
  report.csv_columns = {"seed_index", "m",         "n",                "k",    "storage",
                        "min_ratio",  "max_ratio", "infinite_radials", "pass"};
  return report;
}

ReportFile exp_m0_sweep(const ExperimentConfig& cfg) {
  const int d = require_int(cfg.d > 0 ? std::optional<int>(cfg.d) : std::nullopt, "d");
  const std::vector<double> etas = cfg.eta_values.value_or(std::vector<double>{0.4, 0.2, 0.1});
  for (double e : etas) {
    if (!(e > 0.0)) throw ConfigError("m0_sweep: eta values must be positive");
  }
  std::vector<int> candidates;
  if (cfg.candidates) {
    candidates = *cfg.candidates;
  } else {
    for (int c = 64; c <= 65536; c *= 2) candidates.push_back(c);
  }
  const int trials = cfg.trials.value_or(3000);
  const int directions = cfg.directions.value_or(16);
  const Exec exec = exec_of(cfg);

  DistributionSpec spec = distribution_configured(cfg)
                              ? make_distribution(cfg)
                              : DistributionSpec::mixed_product(MarginalSpec::rademacher(),
                                                                SymMatrix::identity(d));

  ReportFile report = new_report(cfg);
  // One shared stream: directions and trial samples coincide across eta
  // values, so the sweep is coupled and the m0 trend is not grid-jitter.
  RngStream rng(cfg.seed, 0);
  json m0s = json::object();
  for (double eta : etas) {
    const M0Estimate est = estimate_m0(spec, eta, candidates, trials, directions, rng, exec, true);
    for (const auto& [m, prob] : est.failure_probabilities) {
      report.rows.push_back(
          {{"eta", eta}, {"m", m}, {"failure_probability", prob}, {"margin", eta / 10.0}});
    }
    m0s[std::to_string(eta)] = est.attained ? json(est.m0) : json("not attained");
  }
  report.aggregates["m0"] = m0s;
  report.aggregates["trials"] = trials;
  report.aggregates["directions"] = directions;
  report.csv_columns = {"eta", "m", "failure_probability", "margin"};
  return report;
}

// ---------------------------------------------------------------------------
// baseline counterexample

ReportFile exp_baseline_failure(const ExperimentConfig& cfg) {
  const int d = cfg.d > 0 ? cfg.d : 200;
  const int n_samples = static_cast<int>(cfg.N.value_or(400));
  const double delta = cfg.delta.value_or(0.1);
  if (!(delta > 0.0 && delta < 0.25)) throw ConfigError("baseline_failure requires 0 < delta < 1/4");
  const int trials = cfg.trials.value_or(500);
  const double lambda = cfg.lambda.value_or(1.0);
  const int directions = cfg.directions.value_or(1000);
  const double p = cfg.p.value_or(4.0);
  if (cfg.raw.contains("u")) {
    throw ConfigError("baseline_failure derives u from (N, d, delta); do not set it");
  }
  const Exec exec = exec_of(cfg);

  const double u = std::sqrt(n_samples / (4.0 * d * delta));
  const double event_threshold = std::sqrt(d / (4.0 * delta * n_samples));
  const DistributionSpec spec = DistributionSpec::heavy_tail_xu(d, u);
  const SymMatrix t = spec.covariance();
  const SymMatrix root_inv = psd_pow(t, -0.5);

  std::vector<json> rows(static_cast<size_t>(trials));
  for_each_index(exec, trials, [&](std::int64_t trial) {
    RngStream root(cfg.seed, static_cast<std::uint64_t>(trial));
    const auto samples = sample_batch(spec, n_samples, root.derive(0), Exec::serial);

    double max_norm_x = 0.0;
    for (const auto& x : samples) max_norm_x = std::max(max_norm_x, dot(x, x));
    max_norm_x /= n_samples;
    const bool event = max_norm_x >= event_threshold;

    // Exact extremal radial ratios of the empirical ellipsoid against B:
    // the ratio field over S is 1/sqrt(w^T T_hat_Y w), so its range is set by
    // the spectrum of the isotropized empirical covariance.
    std::vector<Vector> iso(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) iso[i] = root_inv.apply(samples[i]);
    const EmpiricalEllipsoid emp_y = empirical_covariance(iso);
    const SpectralDecomposition dec = sym_eig(emp_y.t_hat);
    const double lmax = dec.eigenvalues.front();
    const double lmin = dec.eigenvalues.back();
    const double emp_min_ratio = 1.0 / std::sqrt(lmax);
    const double emp_max_ratio = lmin > 0.0 ? 1.0 / std::sqrt(lmin)
                                            : std::numeric_limits<double>::infinity();

    double max_norm_y = 0.0;
    for (const auto& y : iso) max_norm_y = std::max(max_norm_y, dot(y, y));
    max_norm_y /= n_samples;
    double dev = 0.0;
    for (double l : dec.eigenvalues) dev = std::max(dev, std::abs(1.0 - l));
    const double ratio_dn = static_cast<double>(d) / n_samples;
    const double lg = std::log(std::exp(1.0) * n_samples / static_cast<double>(d));
    const double moment_term = std::pow(ratio_dn, 1.0 - 2.0 / p) * lg * lg * lg * lg;
    const double truncation_term = std::pow(ratio_dn, 1.0 - 2.0 / std::min(4.0, p));

    // The slab competitor on the same data.
    const SlabBody slab = build_slab_body(samples, IsomorphicMode{lambda, delta});
    const ApproximationReport slab_rep = certify_approximation(
        [&](const Vector& dir) { return radial(slab, dir); }, t, directions, root.derive(1),
        Exec::serial);

    json row;
    row["trial"] = static_cast<int>(trial);
    row["event"] = event;
    row["max_norm_over_N"] = max_norm_x;
    row["event_threshold"] = event_threshold;
    row["emp_lambda_min"] = lmin;
    row["emp_lambda_max"] = lmax;
    row["emp_min_ratio"] = emp_min_ratio;
    row["emp_max_ratio"] = emp_max_ratio;
    row["emp_ratio_spread"] = emp_max_ratio / emp_min_ratio;
    row["slab_min_ratio"] = slab_rep.min_ratio;
    row["slab_max_ratio"] = slab_rep.max_ratio;
    row["slab_ratio_spread"] = slab_rep.max_ratio / slab_rep.min_ratio;
    row["deviation"] = dev;
    row["max_norm_term"] = max_norm_y;
    row["moment_term"] = moment_term;
    row["truncation_term"] = truncation_term;
    rows[static_cast<size_t>(trial)] = std::move(row);
  });

  ReportFile report = new_report(cfg);
  int events = 0;
  std::vector<double> emp_spreads, slab_spreads;
  for (auto& row : rows) {
    if (row.at("event").get<bool>()) {
      ++events;
      emp_spreads.push_back(row.at("emp_ratio_spread").get<double>());
      slab_spreads.push_back(row.at("slab_ratio_spread").get<double>());
    }
    report.rows.push_back(std::move(row));
  }
  const double freq = static_cast<double>(events) / trials;
  const double freq_gate = delta - 3.0 * std::sqrt(delta * (1.0 - delta) / trials);
  const double emp_median = median_of(emp_spreads);
  const double slab_median = median_of(slab_spreads);
  report.aggregates["u"] = u;
  report.aggregates["event_frequency"] = freq;
  report.aggregates["frequency_gate"] = freq_gate;
  report.aggregates["event_trials"] = events;
  report.aggregates["emp_median_ratio_spread_on_event"] = emp_median;
  report.aggregates["slab_median_ratio_spread_on_event"] = slab_median;
  store_gates(report, {{"event_frequency", freq >= freq_gate},
                       {"empirical_breaks", events > 0 && emp_median >= 1.5},
                       {"slab_stays_tight", events > 0 && slab_median <= 1.5}});
  report.csv_columns = {"trial",          "event",          "max_norm_over_N",
                        "event_threshold", "emp_lambda_min", "emp_lambda_max",
                        "emp_min_ratio",  "emp_max_ratio",  "emp_ratio_spread",
                        "slab_min_ratio", "slab_max_ratio", "slab_ratio_spread",
                        "deviation",      "max_norm_term",  "moment_term",
                        "truncation_term"};
  return report;
}

// ---------------------------------------------------------------------------
// estimator experiments

ReportFile exp_psi_decay(const ExperimentConfig& cfg) {
  const std::vector<int> ms = cfg.m_values.value_or(std::vector<int>{1, 4, 16, 64});
  const std::int64_t trials = cfg.trials.value_or(1000000);
  const Exec exec = exec_of(cfg);
  const MarginalSpec marginal =
      marginal_from_name(cfg.raw.contains("marginal") ? cfg.marginal : "centered_exponential",
                         cfg.marginal_p);

  ReportFile report = new_report(cfg);
  std::vector<double> psis;
  for (size_t i = 0; i < ms.size(); ++i) {
    RngStream rng(cfg.seed, static_cast<std::uint64_t>(i));
    const double psi = estimate_psi(marginal, ms[i], trials, rng, exec);
    psis.push_back(psi);
    json row = {{"m", ms[i]}, {"psi", psi}};
    if (i > 0) row["ratio_to_previous"] = psi / psis[i - 1];
    report.rows.push_back(std::move(row));
  }
  report.aggregates["marginal"] = marginal.name();
  report.aggregates["trials"] = trials;
  report.csv_columns = {"m", "psi", "ratio_to_previous"};
  return report;
}

ReportFile exp_rademacher_bound(const ExperimentConfig& cfg) {
  std::vector<std::pair<int, int>> pairs =
      cfg.kd_pairs.value_or(std::vector<std::pair<int, int>>{{1, 1}, {5, 5}, {10, 20}, {50, 50}});
  const int trials = cfg.trials.value_or(2000);
  const Exec exec = exec_of(cfg);

  ReportFile report = new_report(cfg);
  bool all_pass = true;
  int row_index = 0;
  for (const auto& [k, dd] : pairs) {
    for (const std::string dist : {"gaussian", "heavy_tail_xu"}) {
      const DistributionSpec spec = dist == "gaussian"
                                        ? DistributionSpec::standard_gaussian(dd)
                                        : DistributionSpec::heavy_tail_xu(dd, std::max(1.0, cfg.u));
      RngStream rng(cfg.seed, static_cast<std::uint64_t>(row_index));
      const MeanStderr stats = rademacher_sup_stats(spec, k, trials, rng, exec);
      const double bound = std::sqrt(static_cast<double>(k) * dd);
      const bool pass = stats.mean <= bound + 3.0 * stats.stderr_of_mean;
      all_pass = all_pass && pass;
      report.rows.push_back({{"distribution", dist},
                             {"k", k},
                             {"d", dd},
                             {"estimate", stats.mean},
                             {"stderr", stats.stderr_of_mean},
                             {"bound", bound},
                             {"pass", pass}});
      ++row_index;
    }
  }
  store_gates(report, {{"all_bounds_hold", all_pass}});
  report.csv_columns = {"distribution", "k", "d", "estimate", "stderr", "bound", "pass"};
  return report;
}

ReportFile exp_sample_size_sweep(const ExperimentConfig& cfg) {
  const int d = cfg.d > 0 ? cfg.d : 12;
  const std::vector<double> etas =
      cfg.eta_values.value_or(std::vector<double>{0.4, 0.3, 0.2, 0.15, 0.1});
  for (double e : etas) {
    if (!(e > 0.0 && e < 0.5)) throw ConfigError("slab experiments require 0 < eta < 1/2");
  }
  const int seeds = cfg.seeds.value_or(3);
  const int directions = cfg.directions.value_or(2000);
  const double m_scale = cfg.m_scale.value_or(1.0);
  const double n_scale = cfg.n_scale.value_or(2.0);
  const Exec exec = exec_of(cfg);

  DistributionSpec spec = distribution_configured(cfg)
                              ? make_distribution(cfg)
                              : DistributionSpec::mixed_product(MarginalSpec::centered_exponential(),
                                                                SymMatrix::identity(d));
  const SymMatrix t = spec.covariance();

  ReportFile report = new_report(cfg);
  int stream_index = 0;
  for (double eta : etas) {
    // Heavy-tailed route: blocks of m ~ eta^-2 gaussianize the marginals, so
    // N = n m ~ d eta^-4 log(2/eta); the m = 1 column is the nice-vector
    // budget N ~ d eta^-2 log(2/eta) for comparison.
    const int m = std::max(1, ceil_int(m_scale / (eta * eta)));
    const int n = ceil_int(n_scale * d * std::log(2.0 / eta) / (eta * eta));
    for (int s = 0; s < seeds; ++s) {
      RngStream root(cfg.seed, static_cast<std::uint64_t>(stream_index++));
      const auto samples =
          sample_batch(spec, static_cast<std::int64_t>(n) * m, root.derive(0), exec);
      const SlabBody body = build_slab_body(samples, SmoothedMode{m, eta});
      const ApproximationReport rep = certify_approximation(
          [&](const Vector& dir) { return radial(body, dir); }, t, directions, root.derive(1),
          exec);
      json row = flat_certify_row(rep);
      row["eta"] = eta;
      row["seed_index"] = s;
      row["m"] = m;
      row["n"] = n;
      row["N"] = static_cast<std::int64_t>(n) * m;
      row["N_nice_vector"] = n;
      report.rows.push_back(std::move(row));
    }
  }
  report.csv_columns = {"eta", "seed_index", "m",         "n",
                        "N",   "N_nice_vector", "min_ratio", "max_ratio"};
  return report;
}

using ExperimentFn = ReportFile (*)(const ExperimentConfig&);

const std::map<std::string, ExperimentFn>& registry() {
  static const std::map<std::string, ExperimentFn> reg = {
      {"slab_gaussian", exp_slab_gaussian},
      {"zigzag_sphere", exp_zigzag_sphere},
      {"slab_sharp", exp_slab_sharp},
      {"isomorphic_smallball", exp_isomorphic_smallball},
      {"ellipsoid_l4", exp_ellipsoid_l4},
      {"m0_sweep", exp_m0_sweep},
      {"baseline_failure", exp_baseline_failure},
      {"psi_decay", exp_psi_decay},
      {"rademacher_bound", exp_rademacher_bound},
      {"sample_size_sweep", exp_sample_size_sweep},
  };
  return reg;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known_keys().count(it.key())) throw ConfigError("unknown config field '" + it.key() + "'");
  }
  ExperimentConfig cfg;
  cfg.raw = j;
  cfg.experiment = get_or<std::string>(j, "experiment", "");
  cfg.distribution = get_or<std::string>(j, "distribution", "gaussian");
  cfg.d = get_or<int>(j, "d", 0);
  cfg.u = get_or<double>(j, "u", 1.0);
  cfg.marginal = get_or<std::string>(j, "marginal", "standard_gaussian");
  cfg.marginal_p = get_or<double>(j, "marginal_p", 3.0);
  if (j.contains("cov")) cfg.cov = j.at("cov");
  cfg.cov_diag = opt_get<std::vector<double>>(j, "cov_diag");
  if (j.contains("mixing")) cfg.mixing = j.at("mixing");
  cfg.mixing_diag = opt_get<std::vector<double>>(j, "mixing_diag");
  cfg.q_norm = opt_get<double>(j, "q_norm");
  cfg.L_norm = opt_get<double>(j, "L_norm");
  cfg.N = opt_get<std::int64_t>(j, "N");
  cfg.n = opt_get<int>(j, "n");
  cfg.m = opt_get<int>(j, "m");
  cfg.eta = opt_get<double>(j, "eta");
  cfg.delta = opt_get<double>(j, "delta");
  cfg.lambda = opt_get<double>(j, "lambda");
  cfg.p = opt_get<double>(j, "p");
  cfg.alpha = opt_get<double>(j, "alpha");
  cfg.beta = opt_get<double>(j, "beta");
  cfg.directions = opt_get<int>(j, "directions");
  cfg.trials = opt_get<int>(j, "trials");
  cfg.seeds = opt_get<int>(j, "seeds");
  cfg.seed = get_or<std::uint64_t>(j, "seed", 1);
  cfg.out = get_or<std::string>(j, "out", "");
  cfg.format = get_or<std::string>(j, "format", "json");
  cfg.exec = get_or<std::string>(j, "exec", "parallel");
  cfg.body = get_or<std::string>(j, "body", "");
  cfg.mode = get_or<std::string>(j, "mode", "");
  cfg.export_network = get_or<bool>(j, "export_network", false);
  cfg.storage = get_or<std::string>(j, "storage", "auto");
  cfg.candidates = opt_get<std::vector<int>>(j, "candidates");
  cfg.m0_trials = opt_get<int>(j, "m0_trials");
  cfg.m0_directions = opt_get<int>(j, "m0_directions");
  cfg.m_values = opt_get<std::vector<int>>(j, "m_values");
  if (j.contains("kd_pairs")) {
    std::vector<std::pair<int, int>> pairs;
    for (const auto& e : j.at("kd_pairs")) {
      if (!e.is_array() || e.size() != 2) throw ConfigError("kd_pairs: expected [[k,d],...]");
      pairs.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    cfg.kd_pairs = std::move(pairs);
  }
  cfg.eta_values = opt_get<std::vector<double>>(j, "eta_values");
  cfg.eps_list = opt_get<std::vector<double>>(j, "eps_list");
  cfg.alpha_trials = opt_get<std::int64_t>(j, "alpha_trials");
  cfg.m_scale = opt_get<double>(j, "m_scale");
  cfg.n_scale = opt_get<double>(j, "n_scale");
  if (cfg.format != "json" && cfg.format != "csv") {
    throw ConfigError("format must be json or csv");
  }
  if (cfg.exec != "serial" && cfg.exec != "parallel") {
    throw ConfigError("exec must be serial or parallel");
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return from_json(j);
}

DistributionSpec make_distribution(const ExperimentConfig& cfg) {
  if (cfg.d < 1) throw ConfigError("missing required config field 'd'");
  DistributionSpec spec = [&] {
    if (cfg.distribution == "gaussian") {
      SymMatrix cov = SymMatrix::identity(cfg.d);
      if (cfg.cov) {
        cov = matrix_from_json(*cfg.cov, cfg.d, "cov");
      } else if (cfg.cov_diag) {
        if (static_cast<int>(cfg.cov_diag->size()) != cfg.d) throw ConfigError("cov_diag length != d");
        cov = SymMatrix::diagonal(*cfg.cov_diag);
      }
      try {
        return DistributionSpec::gaussian(std::move(cov));
      } catch (const std::exception& e) {
        throw ConfigError(std::string("gaussian: ") + e.what());
      }
    }
    if (cfg.distribution == "uniform_sphere") return DistributionSpec::uniform_sphere(cfg.d);
    if (cfg.distribution == "heavy_tail_xu") {
      try {
        return DistributionSpec::heavy_tail_xu(cfg.d, cfg.u);
      } catch (const std::exception& e) {
        throw ConfigError(std::string("heavy_tail_xu: ") + e.what());
      }
    }
    if (cfg.distribution == "mixed_product") {
      SymMatrix mixing = SymMatrix::identity(cfg.d);
      if (cfg.mixing) {
        mixing = matrix_from_json(*cfg.mixing, cfg.d, "mixing");
      } else if (cfg.mixing_diag) {
        if (static_cast<int>(cfg.mixing_diag->size()) != cfg.d) {
          throw ConfigError("mixing_diag length != d");
        }
        mixing = SymMatrix::diagonal(*cfg.mixing_diag);
      }
      try {
        return DistributionSpec::mixed_product(marginal_from_name(cfg.marginal, cfg.marginal_p),
                                               std::move(mixing));
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        throw ConfigError(std::string("mixed_product: ") + e.what());
      }
    }
    throw ConfigError("unknown distribution '" + cfg.distribution + "'");
  }();
  if (cfg.q_norm && cfg.L_norm) spec.with_norm_equivalence(*cfg.q_norm, *cfg.L_norm);
  return spec;
}

Exec exec_of(const ExperimentConfig& cfg) {
  return cfg.exec == "serial" ? Exec::serial : default_exec();
}

std::vector<std::string> experiment_names() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : registry()) names.push_back(name);
  return names;
}

ReportFile run_experiment(const ExperimentConfig& cfg) {
  const auto it = registry().find(cfg.experiment);
  if (it == registry().end()) {
    std::string msg = "unknown experiment '" + cfg.experiment + "'; registered:";
    for (const auto& name : experiment_names()) msg += " " + name;
    throw ConfigError(msg);
  }
  const auto start = std::chrono::steady_clock::now();
  ReportFile report = it->second(cfg);
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

// ---------------------------------------------------------------------------
// subcommand pipelines

namespace {

SlabMode slab_mode_from_config(const ExperimentConfig& cfg) {
  if (cfg.mode == "smoothed") {
    return SmoothedMode{cfg.m.value_or(1), require_double(cfg.eta, "eta")};
  }
  if (cfg.mode == "sharp") {
    SharpMode mode{require_double(cfg.eta, "eta"), std::nullopt};
    if (cfg.alpha) mode.alpha = *cfg.alpha;
    return mode;
  }
  if (cfg.mode == "isomorphic") {
    return IsomorphicMode{require_double(cfg.lambda, "lambda"), require_double(cfg.delta, "delta")};
  }
  if (cfg.mode == "general") {
    return GeneralMode{require_double(cfg.alpha, "alpha"), require_double(cfg.beta, "beta"),
                       cfg.eta.value_or(0.0)};
  }
  throw ConfigError("mode must be smoothed|sharp|isomorphic|general");
}

json slab_summary(const SlabBody& body) {
  return {{"type", "slab"},       {"mode", mode_name(body.mode())},
          {"n", body.count()},    {"d", body.dim()},
          {"theta", body.threshold()}, {"k", body.required_count()},
          {"dropped", body.dropped()}};
}

json ellipsoid_summary(const EllipsoidBody& body) {
  return {{"type", "ellipsoid"},      {"n", body.block_count()},  {"m", body.block_size()},
          {"d", body.dim()},          {"level", body.level()},    {"k", body.required_count()},
          {"storage", body.stores_gram() ? "gram" : "raw"},       {"dropped", body.dropped()}};
}

}  // namespace

ReportFile run_build(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const DistributionSpec spec = make_distribution(cfg);
  const std::int64_t n_samples = cfg.N.value_or(0);
  if (n_samples < 1) throw ConfigError("build requires N >= 1");
  const Exec exec = exec_of(cfg);
  RngStream root(cfg.seed, 0);
  const auto samples = sample_batch(spec, n_samples, root.derive(0), exec);

  ReportFile report = new_report(cfg);
  if (cfg.body == "slab" || cfg.body.empty()) {
    const SlabBody body = build_slab_body(samples, slab_mode_from_config(cfg));
    report.aggregates["body"] = slab_summary(body);
    if (cfg.export_network) report.aggregates["network"] = to_json(export_threshold_network(body));
  } else if (cfg.body == "ellipsoid") {
    const EllipsoidBody body = build_ellipsoid_body(samples, require_int(cfg.m, "m"),
                                                    require_double(cfg.eta, "eta"));
    report.aggregates["body"] = ellipsoid_summary(body);
  } else if (cfg.body == "empirical") {
    const EmpiricalEllipsoid emp = empirical_covariance(samples);
    json t_hat = json::array();
    for (int i = 0; i < emp.t_hat.dim(); ++i) {
      json row = json::array();
      for (int j = 0; j < emp.t_hat.dim(); ++j) row.push_back(emp.t_hat(i, j));
      t_hat.push_back(std::move(row));
    }
    report.aggregates["body"] = {{"type", "empirical"}, {"N", emp.sample_count}, {"t_hat", t_hat}};
  } else {
    throw ConfigError("body must be slab|ellipsoid|empirical");
  }
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

ReportFile run_certify(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const DistributionSpec spec = make_distribution(cfg);
  const SymMatrix t = spec.covariance();
  const std::int64_t n_samples = cfg.N.value_or(0);
  if (n_samples < 1) throw ConfigError("certify requires N >= 1");
  const int directions = cfg.directions.value_or(10000);
  const Exec exec = exec_of(cfg);
  RngStream root(cfg.seed, 0);
  const auto samples = sample_batch(spec, n_samples, root.derive(0), exec);

  ReportFile report = new_report(cfg);
  RadialFn fn;
  std::unique_ptr<SlabBody> slab_store;
  std::unique_ptr<EllipsoidBody> ell_store;
  std::unique_ptr<EmpiricalEllipsoid> emp_store;
  if (cfg.body == "slab" || cfg.body.empty()) {
    slab_store = std::make_unique<SlabBody>(build_slab_body(samples, slab_mode_from_config(cfg)));
    report.aggregates["body"] = slab_summary(*slab_store);
    const SlabBody* b = slab_store.get();
    fn = [b](const Vector& u) { return radial(*b, u); };
  } else if (cfg.body == "ellipsoid") {
    ell_store = std::make_unique<EllipsoidBody>(build_ellipsoid_body(
        samples, require_int(cfg.m, "m"), require_double(cfg.eta, "eta")));
    report.aggregates["body"] = ellipsoid_summary(*ell_store);
    const EllipsoidBody* b = ell_store.get();
    fn = [b](const Vector& u) { return radial(*b, u); };
  } else if (cfg.body == "empirical") {
    emp_store = std::make_unique<EmpiricalEllipsoid>(empirical_covariance(samples));
    report.aggregates["body"] = {{"type", "empirical"}, {"N", emp_store->sample_count}};
    const EmpiricalEllipsoid* b = emp_store.get();
    fn = [b](const Vector& u) { return radial_empirical(*b, u); };
  } else {
    throw ConfigError("body must be slab|ellipsoid|empirical");
  }
  const ApproximationReport rep = certify_approximation(fn, t, directions, root.derive(1), exec);
  report.aggregates["certification"] = to_json(rep);
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

ReportFile run_estimate_m0(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const DistributionSpec spec = make_distribution(cfg);
  const double eta = require_double(cfg.eta, "eta");
  std::vector<int> candidates;
  if (cfg.candidates) {
    candidates = *cfg.candidates;
  } else {
    for (int c = 1; c <= 4096; c *= 2) candidates.push_back(c);
  }
  const int trials = cfg.m0_trials.value_or(cfg.trials.value_or(3000));
  const int directions = cfg.m0_directions.value_or(64);
  RngStream rng(cfg.seed, 0);
  const M0Estimate est =
      estimate_m0(spec, eta, candidates, trials, directions, rng, exec_of(cfg), false);

  ReportFile report = new_report(cfg);
  for (const auto& [m, prob] : est.failure_probabilities) {
    report.rows.push_back({{"m", m}, {"failure_probability", prob}});
  }
  report.aggregates["m0_estimate"] = to_json(est);
  report.csv_columns = {"m", "failure_probability"};
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

ReportFile run_baseline(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const DistributionSpec spec = make_distribution(cfg);
  const SymMatrix t = spec.covariance();
  const std::int64_t n_samples = cfg.N.value_or(0);
  if (n_samples < 1) throw ConfigError("baseline requires N >= 1");
  const double p = cfg.p.value_or(4.0);
  const int seeds = cfg.seeds.value_or(1);
  const Exec exec = exec_of(cfg);

  ReportFile report = new_report(cfg);
  for (int s = 0; s < seeds; ++s) {
    RngStream root(cfg.seed, static_cast<std::uint64_t>(s));
    const auto samples = sample_batch(spec, n_samples, root.derive(0), exec);
    const DeviationDiagnostics diag = tikhomirov_bound_terms(samples, t, p);
    report.rows.push_back({{"seed", s},
                           {"d", spec.dim()},
                           {"N", n_samples},
                           {"p", p},
                           {"deviation", diag.operator_deviation},
                           {"max_norm_term", diag.max_norm_term},
                           {"moment_term", diag.moment_term},
                           {"truncation_term", diag.truncation_term}});
  }
  report.csv_columns = {"seed",          "d",           "N",          "p",
                        "deviation",     "max_norm_term", "moment_term", "truncation_term"};
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

bool gates_pass(const ReportFile& report) {
  if (!report.aggregates.contains("gates")) return true;
  for (const auto& [name, pass] : report.aggregates.at("gates").items()) {
    (void)name;
    if (!pass.get<bool>()) return false;
  }
  return true;
}

}  // namespace covapprox
