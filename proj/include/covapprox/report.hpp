#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "covapprox/baseline.hpp"
#include "covapprox/ellipsoid_body.hpp"
#include "covapprox/slab_body.hpp"
#include "covapprox/verifier.hpp"

namespace covapprox {

enum class ReportFormat { json, csv };

ReportFormat parse_report_format(const std::string& name);

// One experiment run. The serialized body is a pure function of the config
// and seed: the wall clock goes to a sidecar file, never into the body, so
// re-runs produce byte-identical report files.
struct ReportFile {
  nlohmann::json config_echo = nlohmann::json::object();
  nlohmann::json rows = nlohmann::json::array();
  nlohmann::json aggregates = nlohmann::json::object();
  std::vector<std::string> csv_columns;  // header order; derived from rows when empty
  std::string library_version;
  double wall_clock_seconds = 0.0;
};

std::string report_body_json(const ReportFile& report);
std::string report_body_csv(const ReportFile& report);

// Writes the deterministic body to `path` and the wall clock to
// `path + ".meta.json"`.
void write_report(const ReportFile& report, ReportFormat format, const std::string& path);

nlohmann::json to_json(const ApproximationReport& rep);
nlohmann::json to_json(const ConditionReport& rep);
nlohmann::json to_json(const M0Estimate& est);
nlohmann::json to_json(const DeviationDiagnostics& diag);
nlohmann::json to_json(const ThresholdNetwork& net);
ThresholdNetwork threshold_network_from_json(const nlohmann::json& j);

}  // namespace covapprox
