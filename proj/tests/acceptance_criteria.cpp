// Acceptance suite: one test case per criterion, each printing a single
// PASS/FAIL verdict line with the measured quantities. Thresholds are pinned
// here, in code; the experiment configs below are the desk-scale runs the
// criteria name. Run everything:   ./acceptance_criteria
// or one criterion via ctest:      ctest -R acceptance_criterion_04
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "covapprox/ellipsoid_body.hpp"
#include "covapprox/experiments.hpp"
#include "covapprox/numeric.hpp"
#include "covapprox/report.hpp"
#include "covapprox/slab_body.hpp"
#include "covapprox/verifier.hpp"
#include "test_util.hpp"

using namespace covapprox;
using namespace covapprox::testutil;
using nlohmann::json;

namespace {

constexpr std::uint64_t kMasterSeed = 1;

class Stopwatch {
 public:
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void verdict(int criterion, bool pass, double seconds, const std::string& detail) {
  std::printf("criterion %02d: %s  [%.1fs]  %s\n", criterion, pass ? "PASS" : "FAIL", seconds,
              detail.c_str());
  std::fflush(stdout);
}

int count_passing_seeds(const json& rows, double min_gate, double max_gate) {
  int pass = 0;
  for (const auto& row : rows) {
    if (row.at("min_ratio").get<double>() >= min_gate &&
        row.at("max_ratio").get<double>() <= max_gate &&
        row.at("infinite_radials").get<int>() == 0) {
      ++pass;
    }
  }
  return pass;
}

std::string ratio_range(const json& rows) {
  double lo = 1e300, hi = 0.0;
  for (const auto& row : rows) {
    lo = std::min(lo, row.at("min_ratio").get<double>());
    hi = std::max(hi, row.at("max_ratio").get<double>());
  }
  char buf[80];
  std::snprintf(buf, sizeof buf, "ratios in [%.4f, %.4f]", lo, hi);
  return buf;
}

}  // namespace

TEST_CASE("criterion 01: closed-form radial equals the bisection oracle") {
  Stopwatch timer;
  RngStream rng(kMasterSeed, 900);
  double worst = 0.0;
  int checked = 0;

  for (int rep = 0; rep < 50; ++rep) {
    // random slab body, d <= 20, n <= 200
    const int d = 2 + static_cast<int>(rng.next_u64() % 19);
    const int n = 5 + static_cast<int>(rng.next_u64() % 196);
    std::vector<Vector> dirs;
    for (int j = 0; j < n; ++j) {
      Vector z = random_vector(rng, d);
      const double nz = norm2(z);
      for (double& x : z) x /= nz;
      dirs.push_back(std::move(z));
    }
    const double theta = 0.3 + 2.7 * rng.next_double();
    const int k = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n));
    const SlabBody body(std::move(dirs), theta, k, GeneralMode{theta, 1.0, 0.0});
    for (int t = 0; t < 20; ++t) {
      Vector u = random_vector(rng, d);
      const double nu = norm2(u);
      for (double& x : u) x /= nu;
      const double closed = radial(body, u);
      const auto oracle =
          brute_force_radial([&](const Vector& v) { return contains(body, v); }, u, 1e3);
      if (std::isinf(closed) || closed > 1e3) {
        CHECK(oracle.unbounded);
        continue;
      }
      worst = std::max(worst, std::abs(oracle.value - closed) / std::max(1.0, closed));
      ++checked;
    }
  }

  for (int rep = 0; rep < 50; ++rep) {
    // random ellipsoid body, d <= 20, n <= 200 blocks
    const int d = 2 + static_cast<int>(rng.next_u64() % 19);
    const int n = 10 + static_cast<int>(rng.next_u64() % 191);
    const int m = 1 + static_cast<int>(rng.next_u64() % 4);
    std::vector<double> flat(static_cast<size_t>(n) * m * d);
    rng.fill_normal(flat.data(), static_cast<int>(flat.size()));
    const EllipsoidBody body = EllipsoidBody::from_raw(
        std::move(flat), n, m, d, 0.2, static_cast<int>(std::ceil(0.9 * n)));
    for (int t = 0; t < 20; ++t) {
      Vector u = random_vector(rng, d);
      const double nu = norm2(u);
      for (double& x : u) x /= nu;
      const double closed = radial(body, u);
      const auto oracle =
          brute_force_radial([&](const Vector& v) { return contains(body, v); }, u, 1e3);
      if (std::isinf(closed) || closed > 1e3) {
        CHECK(oracle.unbounded);
        continue;
      }
      worst = std::max(worst, std::abs(oracle.value - closed) / std::max(1.0, closed));
      ++checked;
    }
  }

  const double secs = timer.elapsed();
  const bool pass = worst <= 1e-9 && checked > 1800 && secs < 10.0;
  char detail[120];
  std::snprintf(detail, sizeof detail, "%d comparisons, worst relative gap %.2e", checked, worst);
  verdict(1, pass, secs, detail);
  CHECK(worst <= 1e-9);
  CHECK(secs < 10.0);
}

TEST_CASE("criterion 02: smoothed slab body on the gaussian (Kh body)") {
  Stopwatch timer;
  const ExperimentConfig cfg = ExperimentConfig::from_json(
      {{"experiment", "slab_gaussian"}, {"d", 16}, {"eta", 0.1}, {"seeds", 20},
       {"directions", 10000}, {"seed", kMasterSeed}});
  const ReportFile report = run_experiment(cfg);
  const int pass_seeds = count_passing_seeds(report.rows, 0.95, 1.5);
  const double secs = timer.elapsed();
  const bool pass = pass_seeds >= 18 && secs < 120.0;
  char detail[160];
  std::snprintf(detail, sizeof detail, "%d/20 seeds inside [0.95, 1.5], %s", pass_seeds,
                ratio_range(report.rows).c_str());
  verdict(2, pass, secs, detail);
  CHECK(pass_seeds >= 18);
  CHECK(secs < 120.0);
}

TEST_CASE("criterion 03: zig-zag body on the uniform sphere") {
  Stopwatch timer;
  const ExperimentConfig cfg = ExperimentConfig::from_json(
      {{"experiment", "zigzag_sphere"}, {"d", 20}, {"eta", 0.2}, {"seeds", 20},
       {"directions", 10000}, {"alpha_trials", 1000000}, {"seed", kMasterSeed}});
  const ReportFile report = run_experiment(cfg);
  const int pass_seeds = count_passing_seeds(report.rows, 0.9, 1.6);
  const double secs = timer.elapsed();
  const bool pass = pass_seeds >= 18 && secs < 120.0;
  char detail[160];
  std::snprintf(detail, sizeof detail, "%d/20 seeds inside [0.9, 1.6], %s", pass_seeds,
                ratio_range(report.rows).c_str());
  verdict(3, pass, secs, detail);
  CHECK(pass_seeds >= 18);
  CHECK(secs < 120.0);
}

TEST_CASE("criterion 04: ellipsoid body under L4-L2 equivalence") {
  Stopwatch timer;
  const double eta = 0.2;
  const ExperimentConfig cfg = ExperimentConfig::from_json(
      {{"experiment", "ellipsoid_l4"}, {"d", 16}, {"eta", eta}, {"seeds", 20},
       {"directions", 10000}, {"seed", kMasterSeed}});
  const ReportFile report = run_experiment(cfg);
  const int pass_seeds = count_passing_seeds(report.rows, 0.95, 1.0 + 5.0 * eta);
  const double secs = timer.elapsed();
  const bool pass = pass_seeds >= 18 && secs < 180.0;
  char detail[200];
  std::snprintf(detail, sizeof detail, "m=%d n=%d, %d/20 seeds inside [0.95, %.1f], %s",
                report.aggregates.at("m").get<int>(), report.aggregates.at("n").get<int>(),
                pass_seeds, 1.0 + 5.0 * eta, ratio_range(report.rows).c_str());
  verdict(4, pass, secs, detail);
  CHECK(pass_seeds >= 18);
  CHECK(secs < 180.0);
}

TEST_CASE("criterion 05: heavy-tailed counterexample breaks the empirical ellipsoid") {
  Stopwatch timer;
  const ExperimentConfig cfg = ExperimentConfig::from_json(
      {{"experiment", "baseline_failure"}, {"d", 200}, {"N", 400}, {"delta", 0.1},
       {"trials", 500}, {"lambda", 1.0}, {"directions", 1000}, {"seed", kMasterSeed}});
  const ReportFile report = run_experiment(cfg);
  const auto& agg = report.aggregates;
  const double freq = agg.at("event_frequency").get<double>();
  const double freq_gate = 0.1 - 3.0 * std::sqrt(0.1 * 0.9 / 500.0);
  const double emp_median = agg.at("emp_median_ratio_spread_on_event").get<double>();
  const double slab_median = agg.at("slab_median_ratio_spread_on_event").get<double>();
  const double secs = timer.elapsed();
  const bool pass =
      freq >= freq_gate && emp_median >= 1.5 && slab_median <= 1.5 && secs < 120.0;
  char detail[200];
  std::snprintf(detail, sizeof detail,
                "event freq %.3f (gate %.3f); ratio spread on events: empirical %.2f, slab %.3f",
                freq, freq_gate, emp_median, slab_median);
  verdict(5, pass, secs, detail);
  CHECK(freq >= freq_gate);
  CHECK(emp_median >= 1.5);
  CHECK(slab_median <= 1.5);
  CHECK(secs < 120.0);
}

TEST_CASE("criterion 06: X_u moments match the closed forms") {
  Stopwatch timer;
  bool pass = true;
  std::string detail;
  for (auto [d, u] : {std::pair{100, 1.0}, std::pair{200, 2.0}}) {
    const DistributionSpec spec = DistributionSpec::heavy_tail_xu(d, u);
    const RngStream rng(kMasterSeed, static_cast<std::uint64_t>(d));
    const std::int64_t n = 1000000;
    double s2 = 0, s4 = 0, sq2 = 0, sq4 = 0;
    Vector x(static_cast<size_t>(d));
    for (std::int64_t i = 0; i < n; ++i) {
      RngStream child = rng.derive(static_cast<std::uint64_t>(i));
      spec.sample_into(child, x.data());
      for (double z : x) {
        const double z2 = z * z;
        const double z4 = z2 * z2;
        s2 += z2;
        s4 += z4;
        sq2 += z2 * z2;
        sq4 += z4 * z4;
      }
    }
    const double cnt = static_cast<double>(n) * d;
    const double m2 = s2 / cnt;
    const double m4 = s4 / cnt;
    const double se2 = std::sqrt((sq2 / cnt - m2 * m2) / cnt);
    const double q = 1.0 / (u * u * d * d);
    const double want2 = 1.0 / (u * d) + 1.0 - q;
    const bool ok2 = std::abs(m2 - want2) <= 3.0 * se2;
    const bool ok4 = m4 <= 2.05;
    (void)sq4;
    pass = pass && ok2 && ok4;
    char buf[120];
    std::snprintf(buf, sizeof buf, "(d=%d,u=%.0f): Ez2 off by %.2f se, Ez4=%.4f; ", d, u,
                  std::abs(m2 - want2) / se2, m4);
    detail += buf;
    CHECK(ok2);
    CHECK(ok4);
  }
  const double secs = timer.elapsed();
  pass = pass && secs < 30.0;
  verdict(6, pass, secs, detail);
  CHECK(secs < 30.0);
}

TEST_CASE("criterion 07: rademacher sup bounded by sqrt(kd)") {
  Stopwatch timer;
  bool pass = true;
  double worst_margin = -1e300;
  for (auto [k, d] : {std::pair{1, 1}, std::pair{5, 5}, std::pair{10, 20}, std::pair{50, 50}}) {
    for (bool xu : {false, true}) {
      const DistributionSpec spec =
          xu ? DistributionSpec::heavy_tail_xu(d, 1.0) : DistributionSpec::standard_gaussian(d);
      const RngStream rng(kMasterSeed, static_cast<std::uint64_t>(1000 + 2 * k + d + xu));
      const MeanStderr st = rademacher_sup_stats(spec, k, 2000, rng);
      const double bound = std::sqrt(static_cast<double>(k) * d) + 3.0 * st.stderr_of_mean;
      worst_margin = std::max(worst_margin, st.mean - bound);
      const bool ok = st.mean <= bound;
      pass = pass && ok;
      CHECK(ok);
    }
  }
  const double secs = timer.elapsed();
  pass = pass && secs < 60.0;
  char detail[120];
  std::snprintf(detail, sizeof detail, "8 (spec, k, d) cells, worst estimate-bound gap %.3f",
                worst_margin);
  verdict(7, pass, secs, detail);
  CHECK(secs < 60.0);
}

TEST_CASE("criterion 08: berry-esseen gap decays at the sqrt(m) rate") {
  Stopwatch timer;
  const std::int64_t trials = 1000000;
  const double p4 =
      estimate_psi(MarginalSpec::centered_exponential(), 4, trials, RngStream(kMasterSeed, 2000));
  const double p16 =
      estimate_psi(MarginalSpec::centered_exponential(), 16, trials, RngStream(kMasterSeed, 2001));
  const double p64 =
      estimate_psi(MarginalSpec::centered_exponential(), 64, trials, RngStream(kMasterSeed, 2002));
  const double rad =
      estimate_psi(MarginalSpec::rademacher(), 1, trials, RngStream(kMasterSeed, 2003));
  const double secs = timer.elapsed();
  const bool decay_ok = p16 <= 0.75 * p4 && p64 <= 0.75 * p16;
  const bool rad_ok = std::abs(rad - 0.3413) <= 0.01;
  const bool pass = decay_ok && rad_ok && secs < 60.0;
  char detail[160];
  std::snprintf(detail, sizeof detail,
                "psi(4)=%.4f psi(16)=%.4f psi(64)=%.4f; rademacher psi(1)=%.4f", p4, p16, p64, rad);
  verdict(8, pass, secs, detail);
  CHECK(p16 <= 0.75 * p4);
  CHECK(p64 <= 0.75 * p16);
  CHECK(std::abs(rad - 0.3413) <= 0.01);
  CHECK(secs < 60.0);
}

TEST_CASE("criterion 09: marginal conditions (1) and (2) for the gaussian") {
  Stopwatch timer;
  const DistributionSpec spec = DistributionSpec::standard_gaussian(4);
  const int directions = 64;
  const int trials = 100000;
  const ConditionReport rep = check_marginal_conditions(spec, 1, 0.6744897502, {0.1}, directions,
                                                        trials, RngStream(kMasterSeed, 0));
  const double se = std::sqrt(0.25 / trials);
  const double secs = timer.elapsed();
  const bool dev_ok = rep.condition1_deviation <= 3.0 * se;
  const bool gamma_ok = rep.gamma_hat >= 0.3;
  const bool pass = dev_ok && gamma_ok && secs < 60.0;
  char detail[160];
  std::snprintf(detail, sizeof detail,
                "condition-1 deviation %.5f (3 se = %.5f), gamma_hat %.3f (expect ~0.657)",
                rep.condition1_deviation, 3.0 * se, rep.gamma_hat);
  verdict(9, pass, secs, detail);
  CHECK(dev_ok);
  CHECK(gamma_ok);
  CHECK(secs < 60.0);
}

TEST_CASE("criterion 10: reports are byte-identical under identical configs") {
  Stopwatch timer;
  bool pass = true;
  for (const json cfg_json :
       {json{{"experiment", "psi_decay"}, {"marginal", "centered_exponential"},
             {"m_values", {1, 4}}, {"trials", 150000}, {"seed", kMasterSeed}},
        json{{"experiment", "zigzag_sphere"}, {"d", 6}, {"eta", 0.25}, {"seeds", 2},
             {"directions", 400}, {"alpha_trials", 50000}, {"seed", kMasterSeed}}}) {
    const ExperimentConfig cfg = ExperimentConfig::from_json(cfg_json);
    const ReportFile a = run_experiment(cfg);
    const ReportFile b = run_experiment(cfg);
    const bool same = report_body_json(a) == report_body_json(b) &&
                      report_body_csv(a) == report_body_csv(b);
    pass = pass && same;
    CHECK(same);

    const std::string pa = "/tmp/covapprox_acc10_a." + cfg.experiment;
    const std::string pb = "/tmp/covapprox_acc10_b." + cfg.experiment;
    write_report(a, ReportFormat::json, pa);
    write_report(b, ReportFormat::json, pb);
    std::ifstream fa(pa, std::ios::binary), fb(pb, std::ios::binary);
    const std::string ca((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
    const std::string cb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
    const bool files_same = !ca.empty() && ca == cb;
    pass = pass && files_same;
    CHECK(files_same);
  }
  verdict(10, pass, timer.elapsed(), "psi_decay and zigzag_sphere re-runs compared byte-wise");
}
