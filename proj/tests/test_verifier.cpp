#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "covapprox/numeric.hpp"
#include "covapprox/report.hpp"
#include "covapprox/verifier.hpp"
#include "test_util.hpp"

using namespace covapprox;
using namespace covapprox::testutil;

TEST_CASE("l2 sphere directions satisfy u^T T u = 1") {
  RngStream rng(300, 0);
  CHECK(std::abs(norm2(sample_l2_sphere_direction(SymMatrix::identity(6), rng)) - 1.0) < 1e-12);

  const SymMatrix t = SymMatrix::diagonal({4.0, 1.0});
  const L2DirectionSampler sampler(t);
  for (int i = 0; i < 200; ++i) {
    const Vector u = sampler.draw(rng);
    CHECK(std::abs(quadratic_form(t, u) - 1.0) < 1e-10);
  }

  RngStream rp(300, 1);
  const SymMatrix tr = random_psd(rp, 5, 0.3);
  const L2DirectionSampler rs(tr);
  for (int i = 0; i < 100; ++i) {
    CHECK(std::abs(quadratic_form(tr, rs.draw(rp)) - 1.0) < 1e-10);
  }
}

TEST_CASE("sphere direction sampling is centred") {
  const int d = 3;
  const std::int64_t trials = 100000;
  const L2DirectionSampler sampler(SymMatrix::identity(d));
  RngStream rng(301, 0);
  Vector mean(d, 0.0);
  for (std::int64_t i = 0; i < trials; ++i) {
    const Vector u = sampler.draw(rng);
    for (int c = 0; c < d; ++c) mean[c] += u[c];
  }
  // coordinate variance 1/d; 4 sigma envelope on each mean
  for (int c = 0; c < d; ++c) {
    CHECK(std::abs(mean[c] / trials) < 4.0 / std::sqrt(static_cast<double>(d) * trials));
  }
}

TEST_CASE("certify on scaled copies of B returns the scale exactly") {
  RngStream seed_rng(302, 0);
  const SymMatrix t = random_psd(seed_rng, 4, 0.3);
  for (double c : {0.5, 1.0, 2.0}) {
    const auto rep = certify_approximation(
        [&](const Vector& u) { return c / std::sqrt(quadratic_form(t, u)); }, t, 500,
        RngStream(302, 1));
    CHECK(std::abs(rep.min_ratio - c) < 1e-10);
    CHECK(std::abs(rep.max_ratio - c) < 1e-10);
    CHECK(rep.infinite_radial_count == 0);
    CHECK(rep.implied_eta_inner == doctest::Approx(std::max(0.0, 1.0 - 1.0 / c)));
    CHECK(rep.implied_eta_outer == doctest::Approx(std::max(0.0, 1.0 / c - 1.0)));
  }
}

TEST_CASE("certify counts infinite radials and rejects non-positive ones") {
  const SymMatrix t = SymMatrix::identity(3);
  int calls = 0;
  const auto rep = certify_approximation(
      [&](const Vector&) {
        return ++calls % 5 == 0 ? std::numeric_limits<double>::infinity() : 1.0;
      },
      t, 100, RngStream(303, 0), Exec::serial);
  CHECK(rep.infinite_radial_count == 20);
  CHECK(rep.max_ratio == 1.0);
  CHECK(std::isinf(rep.implied_eta_outer));

  CHECK_THROWS_AS(certify_approximation([](const Vector&) { return 0.0; }, t, 10,
                                        RngStream(303, 1), Exec::serial),
                  NumericError);
}

TEST_CASE("certify reports are deterministic bit for bit") {
  RngStream seed_rng(304, 0);
  const SymMatrix t = random_psd(seed_rng, 3, 0.4);
  auto fn = [&](const Vector& u) { return 1.3 / std::sqrt(quadratic_form(t, u)); };
  const auto a = certify_approximation(fn, t, 2000, RngStream(304, 9), Exec::parallel);
  const auto b = certify_approximation(fn, t, 2000, RngStream(304, 9), Exec::serial);
  const auto c = certify_approximation(fn, t, 2000, RngStream(304, 9), Exec::parallel);
  CHECK(to_json(a).dump() == to_json(b).dump());
  CHECK(to_json(a).dump() == to_json(c).dump());
  CHECK(a.worst_offenders.size() == 10);
}

TEST_CASE("marginal conditions for the standard gaussian at m = 1") {
  const DistributionSpec spec = DistributionSpec::standard_gaussian(8);
  const double alpha = gaussian_abs_median();
  const int directions = 16;
  const int trials = 20000;
  const ConditionReport rep = check_marginal_conditions(spec, 1, alpha, {0.1, 0.2}, directions,
                                                        trials, RngStream(305, 0));
  // beta_hat ~ 1/2 within 3 binomial stderr for every direction
  const double se = std::sqrt(0.25 / trials);
  CHECK(rep.beta_min >= 0.5 - 3.5 * se);
  CHECK(rep.beta_max <= 0.5 + 3.5 * se);
  CHECK(rep.condition1_deviation <= 4.0 * se);

  // normal-CDF oracle for the two-sided interval mass at eps = 0.1:
  // 2(Phi(alpha) - Phi(alpha - 0.1)) ~ 0.0657, so gamma_hat ~ 0.657
  const double mass_01 = 2.0 * (normal_cdf(alpha) - normal_cdf(alpha - 0.1));
  const double mass_02 = 2.0 * (normal_cdf(alpha) - normal_cdf(alpha - 0.2));
  CHECK(rep.condition2_min_mass.at(0.1) ==
        doctest::Approx(mass_01).epsilon(0.15));
  CHECK(rep.condition2_min_mass.at(0.2) ==
        doctest::Approx(mass_02).epsilon(0.15));
  const double gamma_expect = std::min(mass_01 / 0.1, mass_02 / 0.2);
  CHECK(rep.gamma_hat == doctest::Approx(gamma_expect).epsilon(0.15));
  CHECK(rep.gamma_hat >= 0.3);
}

TEST_CASE("marginal conditions on the sphere with the empirical median") {
  const int d = 50;
  const DistributionSpec spec = DistributionSpec::uniform_sphere(d);
  RngStream rng(306, 0);
  const L2DirectionSampler sampler(spec.covariance());
  RngStream vs(306, 1);
  const Vector v0 = sampler.draw(vs);
  const double alpha_d = estimate_abs_quantile(spec, v0, 1, 0.5, 200000, rng);
  const ConditionReport rep =
      check_marginal_conditions(spec, 1, alpha_d, {alpha_d / 2}, 16, 20000, RngStream(306, 2));
  // rotation invariance: beta is a constant (1/2) over directions
  CHECK(rep.beta_mean == doctest::Approx(0.5).epsilon(0.01));
  CHECK(rep.condition1_deviation < 4.0 * std::sqrt(0.25 / 20000));
}

TEST_CASE("check_marginal_conditions validates inputs") {
  const DistributionSpec spec = DistributionSpec::standard_gaussian(2);
  CHECK_THROWS_WITH_AS(
      check_marginal_conditions(spec, 1, 0.6745, {0.1}, 4, 5000, RngStream(307, 0)),
      doctest::Contains("insufficient trials"), std::invalid_argument);
  CHECK_THROWS_AS(check_marginal_conditions(spec, 1, 0.6745, {0.9}, 4, 20000, RngStream(307, 1)),
                  std::invalid_argument);
}

TEST_CASE("psi estimator: rademacher point mass at m = 1") {
  const double psi = estimate_psi(MarginalSpec::rademacher(), 1, 200000, RngStream(308, 0));
  // sup_t |Pr(Y > t) - Pr(g > t)| = Phi(1) - 1/2 = 0.3413
  CHECK(psi == doctest::Approx(0.3413).epsilon(0.02));
}

TEST_CASE("psi estimator: gaussian marginal leaves only estimator noise") {
  const std::int64_t trials = 200000;
  for (int m : {1, 7}) {
    const double psi =
        estimate_psi(MarginalSpec::standard_gaussian(), m, trials, RngStream(309, m));
    CHECK(psi <= 1.5 * 1.36 / std::sqrt(static_cast<double>(trials)));
  }
}

TEST_CASE("psi estimator: berry-esseen decay for the centred exponential") {
  const std::int64_t trials = 400000;
  const double psi4 = estimate_psi(MarginalSpec::centered_exponential(), 4, trials, RngStream(310, 0));
  const double psi16 =
      estimate_psi(MarginalSpec::centered_exponential(), 16, trials, RngStream(310, 1));
  CHECK(psi16 <= 0.75 * psi4);
}

TEST_CASE("psi is invariant under rescaling the summands") {
  RngStream rng(311, 0);
  const int m = 4;
  const std::int64_t trials = 100000;
  std::vector<double> base(static_cast<size_t>(trials));
  for (auto& y : base) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += rng.next_exponential() - 1.0;
    y = s / std::sqrt(static_cast<double>(m));
  }
  std::vector<double> scaled_vals(base.size());
  const double c = 2.0;
  // studentization by the analytic sigma cancels the scale exactly
  for (size_t i = 0; i < base.size(); ++i) scaled_vals[i] = (c * base[i]) / c;
  CHECK(kolmogorov_distance_to_normal(base) == kolmogorov_distance_to_normal(scaled_vals));
}

TEST_CASE("rademacher sup estimates against sqrt(kd)") {
  // k = 1, d = 1, rademacher coordinates: the norm is exactly 1
  const DistributionSpec rad1 =
      DistributionSpec::mixed_product(MarginalSpec::rademacher(), SymMatrix::identity(1));
  const MeanStderr one = rademacher_sup_stats(rad1, 1, 1000, RngStream(312, 0));
  CHECK(one.mean == doctest::Approx(1.0));
  CHECK(one.stderr_of_mean == doctest::Approx(0.0));

  // gaussian, k = 10, d = 20: E ~ sqrt(10) E chi_20 < sqrt(200)
  const DistributionSpec g = DistributionSpec::standard_gaussian(20);
  const MeanStderr st = rademacher_sup_stats(g, 10, 2000, RngStream(312, 1));
  CHECK(st.mean < std::sqrt(200.0));
  CHECK(st.mean == doctest::Approx(13.97).epsilon(0.02));

  for (auto [k, d] : {std::pair{5, 5}, std::pair{20, 50}}) {
    for (bool xu : {false, true}) {
      const DistributionSpec spec =
          xu ? DistributionSpec::heavy_tail_xu(d, 1.0) : DistributionSpec::standard_gaussian(d);
      const MeanStderr s = rademacher_sup_stats(spec, k, 1500, RngStream(312, 7 + k + d + xu));
      CHECK(s.mean <= std::sqrt(static_cast<double>(k) * d) + 3.0 * s.stderr_of_mean);
    }
  }

  CHECK(rademacher_sup_estimate(g, 2, 1000, RngStream(312, 5)) ==
        rademacher_sup_stats(g, 2, 1000, RngStream(312, 5)).mean);
  CHECK_THROWS_AS(rademacher_sup_estimate(g, 2, 500, RngStream(312, 6)), std::invalid_argument);
}

TEST_CASE("brute force radial bisection") {
  // unit cube membership via max-norm
  auto cube = [](const Vector& v) { return std::abs(v[0]) <= 1.0 && std::abs(v[1]) <= 1.0; };
  const auto r = brute_force_radial(cube, {1.0, 0.0}, 1e3);
  CHECK_FALSE(r.unbounded);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-9));

  // true ellipsoid: radius 1 on the L2 sphere
  RngStream rng(313, 0);
  const SymMatrix t = random_psd(rng, 4, 0.3);
  const L2DirectionSampler sampler(t);
  for (int i = 0; i < 10; ++i) {
    const Vector u = sampler.draw(rng);
    const auto res = brute_force_radial(
        [&](const Vector& v) { return quadratic_form(t, v) <= 1.0; }, u, 1e3);
    CHECK(std::abs(res.value - 1.0) < 1e-9);
  }

  // unbounded ray and star-shape violation
  auto slab_x = [](const Vector& v) { return std::abs(v[0]) <= 1.0; };
  const auto unb = brute_force_radial(slab_x, {0.0, 1.0}, 1e3);
  CHECK(unb.unbounded);
  CHECK(unb.value == 1e3);
  CHECK_THROWS_AS(brute_force_radial([](const Vector&) { return false; }, {1.0}, 1e3),
                  std::invalid_argument);
}

TEST_CASE("abs quantile oracle recovers the gaussian median") {
  const DistributionSpec spec = DistributionSpec::standard_gaussian(4);
  const L2DirectionSampler sampler(spec.covariance());
  RngStream vs(314, 0);
  const Vector v = sampler.draw(vs);
  const double q = estimate_abs_quantile(spec, v, 1, 0.5, 1000000, RngStream(314, 1));
  CHECK(q == doctest::Approx(gaussian_abs_median()).epsilon(0.005));
}
