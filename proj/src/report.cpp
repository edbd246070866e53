#include "covapprox/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "covapprox/version.hpp"

namespace covapprox {

ReportFormat parse_report_format(const std::string& name) {
  if (name == "json") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  throw std::invalid_argument("unknown report format '" + name + "' (expected json or csv)");
}

std::string report_body_json(const ReportFile& report) {
  nlohmann::json body;
  body["config"] = report.config_echo;
  body["rows"] = report.rows;
  body["aggregates"] = report.aggregates;
  body["library_version"] =
      report.library_version.empty() ? kLibraryVersion : report.library_version;
  return body.dump(2) + "\n";
}

namespace {

std::string csv_cell(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number_float()) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    return buf;
  }
  if (v.is_null()) return "";
  return v.dump();
}

}  // namespace

std::string report_body_csv(const ReportFile& report) {
  std::vector<std::string> cols = report.csv_columns;
  if (cols.empty() && !report.rows.empty()) {
    for (auto it = report.rows.front().begin(); it != report.rows.front().end(); ++it) {
      cols.push_back(it.key());  // nlohmann objects iterate in sorted key order
    }
  }
  std::string out;
  for (size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i];
  }
  out += '\n';
  for (const auto& row : report.rows) {
    for (size_t i = 0; i < cols.size(); ++i) {
      if (i) out += ',';
      if (row.contains(cols[i])) out += csv_cell(row.at(cols[i]));
    }
    out += '\n';
  }
  return out;
}

void write_report(const ReportFile& report, ReportFormat format, const std::string& path) {
  const std::string body =
      format == ReportFormat::json ? report_body_json(report) : report_body_csv(report);
  {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_report: cannot open " + path);
    f << body;
    if (!f) throw std::runtime_error("write_report: write failed for " + path);
  }
  nlohmann::json meta;
  meta["wall_clock_seconds"] = report.wall_clock_seconds;
  std::ofstream mf(path + ".meta.json", std::ios::binary);
  if (!mf) throw std::runtime_error("write_report: cannot open " + path + ".meta.json");
  mf << meta.dump(2) << "\n";
}

nlohmann::json to_json(const ApproximationReport& rep) {
  nlohmann::json j;
  j["direction_count"] = rep.direction_count;
  j["min_ratio"] = rep.min_ratio;
  j["max_ratio"] = rep.max_ratio;
  j["implied_eta_inner"] = rep.implied_eta_inner;
  j["implied_eta_outer"] =
      std::isinf(rep.implied_eta_outer) ? nlohmann::json("inf") : nlohmann::json(rep.implied_eta_outer);
  j["infinite_radial_count"] = rep.infinite_radial_count;
  j["seed"] = rep.seed;
  j["stream"] = rep.stream;
  nlohmann::json offs = nlohmann::json::array();
  for (const auto& o : rep.worst_offenders) {
    offs.push_back({{"ratio", o.ratio}, {"direction", o.direction}});
  }
  j["worst_offenders"] = offs;
  return j;
}

nlohmann::json to_json(const ConditionReport& rep) {
  nlohmann::json j;
  j["alpha"] = rep.alpha;
  j["block_size"] = rep.block_size;
  j["directions"] = rep.directions;
  j["trials"] = rep.trials;
  j["beta_mean"] = rep.beta_mean;
  j["beta_min"] = rep.beta_min;
  j["beta_max"] = rep.beta_max;
  j["condition1_deviation"] = rep.condition1_deviation;
  // Interval convention: masses are two-sided, Pr(|<Z,v>| in [alpha-eps, alpha]).
  nlohmann::json masses = nlohmann::json::array();
  for (const auto& [eps, mass] : rep.condition2_min_mass) {
    masses.push_back({{"eps", eps}, {"min_mass", mass}});
  }
  j["condition2_min_mass"] = masses;
  j["mass_convention"] = "two_sided_abs_interval";
  j["gamma_hat"] = rep.gamma_hat;
  return j;
}

nlohmann::json to_json(const M0Estimate& est) {
  nlohmann::json j;
  j["eta"] = est.eta;
  j["attained"] = est.attained;
  if (est.attained) {
    j["m0"] = est.m0;
  } else {
    j["m0"] = "not attained";
  }
  nlohmann::json table = nlohmann::json::array();
  for (const auto& [m, prob] : est.failure_probabilities) {
    table.push_back({{"m", m}, {"failure_probability", prob}});
  }
  j["failure_probabilities"] = table;
  j["trials"] = est.trials;
  j["directions"] = est.directions;
  return j;
}

nlohmann::json to_json(const DeviationDiagnostics& diag) {
  nlohmann::json j;
  j["operator_deviation"] = diag.operator_deviation;
  j["max_norm_term"] = diag.max_norm_term;
  j["moment_term"] = diag.moment_term;
  j["truncation_term"] = diag.truncation_term;
  j["p"] = diag.p;
  return j;
}

nlohmann::json to_json(const ThresholdNetwork& net) {
  nlohmann::json units = nlohmann::json::array();
  for (const auto& u : net.units) {
    units.push_back({{"weight", u.weight}, {"bias", u.bias}, {"sign", u.sign}});
  }
  return {{"units", units}, {"threshold", net.threshold}};
}

ThresholdNetwork threshold_network_from_json(const nlohmann::json& j) {
  ThresholdNetwork net;
  net.threshold = j.at("threshold").get<int>();
  for (const auto& u : j.at("units")) {
    ThresholdUnit unit;
    unit.weight = u.at("weight").get<Vector>();
    unit.bias = u.at("bias").get<double>();
    unit.sign = u.at("sign").get<int>();
    net.units.push_back(std::move(unit));
  }
  return net;
}

}  // namespace covapprox
