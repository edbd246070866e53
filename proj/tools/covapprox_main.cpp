// Command-line harness: reproducible experiment runs, body construction and
// certification, with reports written as JSON or CSV. Progress goes to
// stderr; data only to the report file.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "covapprox/experiments.hpp"
#include "covapprox/report.hpp"
#include "covapprox/version.hpp"

namespace {

struct CliOverrides {
  std::string config_path;
  std::string experiment;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  std::string format;
  int directions = 0;
  int trials = 0;
  bool assert_gates = false;
  bool serial = false;
};

covapprox::ExperimentConfig load_config(const CliOverrides& cli) {
  nlohmann::json j = nlohmann::json::object();
  if (!cli.config_path.empty()) {
    j = covapprox::ExperimentConfig::from_file(cli.config_path).raw;
  }
  if (!cli.experiment.empty()) j["experiment"] = cli.experiment;
  if (cli.seed_set) j["seed"] = cli.seed;
  if (!cli.out.empty()) j["out"] = cli.out;
  if (!cli.format.empty()) j["format"] = cli.format;
  if (cli.directions > 0) j["directions"] = cli.directions;
  if (cli.trials > 0) j["trials"] = cli.trials;
  if (cli.serial) j["exec"] = "serial";
  return covapprox::ExperimentConfig::from_json(j);
}

int finish(const covapprox::ExperimentConfig& cfg, const covapprox::ReportFile& report,
           const std::string& default_name, bool assert_gates) {
  const std::string path =
      cfg.out.empty() ? default_name + "." + cfg.format : cfg.out;
  covapprox::write_report(report, covapprox::parse_report_format(cfg.format), path);
  std::fprintf(stderr, "report written to %s (%.2fs)\n", path.c_str(),
               report.wall_clock_seconds);
  if (assert_gates && !covapprox::gates_pass(report)) {
    std::fprintf(stderr, "acceptance thresholds failed\n");
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"covapprox: data-driven covariance ellipsoid approximations"};
  app.set_version_flag("--version", covapprox::kLibraryVersion);
  app.require_subcommand(1);

  CliOverrides cli;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", cli.config_path, "JSON config file");
    sub->add_option("--seed", cli.seed, "master seed override")
        ->each([&cli](const std::string&) { cli.seed_set = true; });
    sub->add_option("--out", cli.out, "report output path");
    sub->add_option("--format", cli.format, "report format: json|csv");
    sub->add_option("--directions", cli.directions, "direction count override");
    sub->add_option("--trials", cli.trials, "trial count override");
    sub->add_flag("--assert", cli.assert_gates, "exit 3 when report gates fail");
    sub->add_flag("--serial", cli.serial, "run the serial reference kernels");
  };

  CLI::App* experiment = app.add_subcommand("experiment", "run a named experiment");
  experiment->add_option("name", cli.experiment, "registered experiment name")->required();
  add_common(experiment);
  CLI::App* build = app.add_subcommand("build", "build a body and write its description");
  add_common(build);
  CLI::App* certify = app.add_subcommand("certify", "build a body and certify it against B");
  add_common(certify);
  CLI::App* m0 = app.add_subcommand("estimate-m0", "estimate the block size m0(eta)");
  add_common(m0);
  CLI::App* baseline = app.add_subcommand("baseline", "empirical-covariance deviation diagnostics");
  add_common(baseline);

  CLI11_PARSE(app, argc, argv);

  try {
    const covapprox::ExperimentConfig cfg = load_config(cli);
    if (experiment->parsed()) {
      return finish(cfg, covapprox::run_experiment(cfg), cfg.experiment, cli.assert_gates);
    }
    if (build->parsed()) {
      return finish(cfg, covapprox::run_build(cfg), "build", cli.assert_gates);
    }
    if (certify->parsed()) {
      return finish(cfg, covapprox::run_certify(cfg), "certify", cli.assert_gates);
    }
    if (m0->parsed()) {
      return finish(cfg, covapprox::run_estimate_m0(cfg), "estimate_m0", cli.assert_gates);
    }
    if (baseline->parsed()) {
      return finish(cfg, covapprox::run_baseline(cfg), "baseline", cli.assert_gates);
    }
  } catch (const covapprox::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
