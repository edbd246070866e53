#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "covapprox/distributions.hpp"
#include "covapprox/report.hpp"

namespace covapprox {

// Raised for malformed configs / unknown experiments; the CLI maps it to
// exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Flat key-value experiment configuration (JSON dialect). Unknown keys are
// rejected at parse time; every experiment validates its own parameter
// ranges before doing any work.
struct ExperimentConfig {
  nlohmann::json raw = nlohmann::json::object();

  std::string experiment;

  // distribution
  std::string distribution = "gaussian";
  int d = 0;
  double u = 1.0;
  std::string marginal = "standard_gaussian";
  double marginal_p = 3.0;
  std::optional<nlohmann::json> cov;           // full matrix, array of arrays
  std::optional<std::vector<double>> cov_diag;
  std::optional<nlohmann::json> mixing;
  std::optional<std::vector<double>> mixing_diag;
  std::optional<double> q_norm, L_norm;

  // shared numeric parameters
  std::optional<std::int64_t> N;
  std::optional<int> n;
  std::optional<int> m;
  std::optional<double> eta, delta, lambda, p, alpha, beta;
  std::optional<int> directions, trials, seeds;
  std::uint64_t seed = 1;

  // harness
  std::string out;
  std::string format = "json";
  std::string exec = "parallel";

  // build/certify subcommands
  std::string body;  // "slab" | "ellipsoid" | "empirical"
  std::string mode;  // "smoothed" | "sharp" | "isomorphic" | "general"
  bool export_network = false;

  // experiment-specific
  std::string storage = "auto";  // ellipsoid blocks: auto | raw | gram
  std::optional<std::vector<int>> candidates;
  std::optional<int> m0_trials, m0_directions;
  std::optional<std::vector<int>> m_values;
  std::optional<std::vector<std::pair<int, int>>> kd_pairs;
  std::optional<std::vector<double>> eta_values, eps_list;
  std::optional<std::int64_t> alpha_trials;
  std::optional<double> m_scale, n_scale;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::string& path);
};

DistributionSpec make_distribution(const ExperimentConfig& cfg);
Exec exec_of(const ExperimentConfig& cfg);

std::vector<std::string> experiment_names();

// Executes the named experiment pipeline (sample -> build -> certify or
// diagnose -> aggregate). The report body is fully determined by the config.
ReportFile run_experiment(const ExperimentConfig& cfg);

// CLI subcommand pipelines.
ReportFile run_build(const ExperimentConfig& cfg);
ReportFile run_certify(const ExperimentConfig& cfg);
ReportFile run_estimate_m0(const ExperimentConfig& cfg);
ReportFile run_baseline(const ExperimentConfig& cfg);

// True when every gate recorded in the report's aggregates passed (reports
// without gates pass vacuously). The CLI's --assert maps false to exit code 3.
bool gates_pass(const ReportFile& report);

}  // namespace covapprox
