#include "covapprox/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "covapprox/numeric.hpp"

namespace covapprox {

L2DirectionSampler::L2DirectionSampler(const SymMatrix& t, const NumericSettings& settings)
    : t_(t), root_inv_(psd_pow(t, -0.5, settings)) {}

Vector L2DirectionSampler::draw(RngStream& rng) const {
  const int d = t_.dim();
  Vector w(static_cast<size_t>(d));
  double n2 = 0.0;
  do {
    rng.fill_normal(w.data(), d);
    n2 = dot(w, w);
  } while (n2 == 0.0);
  const double inv = 1.0 / std::sqrt(n2);
  for (double& x : w) x *= inv;
  Vector u = root_inv_.apply(w);
  const double q = quadratic_form(t_, u);
  if (!(q > 0.0)) throw NumericError("L2DirectionSampler: degenerate direction");
  const double fix = 1.0 / std::sqrt(q);
  for (double& x : u) x *= fix;
  return u;
}

Vector sample_l2_sphere_direction(const SymMatrix& t, RngStream& rng) {
  return L2DirectionSampler(t).draw(rng);
}

ApproximationReport certify_approximation(const RadialFn& radial_fn, const SymMatrix& t,
                                          int directions, const RngStream& rng, Exec exec) {
  if (directions < 1) throw std::invalid_argument("certify_approximation: directions must be >= 1");
  L2DirectionSampler sampler(t);

  std::vector<double> ratios(static_cast<size_t>(directions));
  for_each_index(exec, directions, [&](std::int64_t i) {
    RngStream child = rng.derive(static_cast<std::uint64_t>(i));
    const Vector u = sampler.draw(child);
    ratios[static_cast<size_t>(i)] = radial_fn(u);
  });

  ApproximationReport rep;
  rep.direction_count = directions;
  rep.seed = rng.seed();
  rep.stream = rng.stream();
  double mn = std::numeric_limits<double>::infinity();
  double mx = 0.0;
  for (double r : ratios) {
    if (std::isinf(r)) {
      ++rep.infinite_radial_count;
      continue;
    }
    if (!(r > 0.0)) {
      throw NumericError("certify_approximation: non-positive radial value " + std::to_string(r));
    }
    mn = std::min(mn, r);
    mx = std::max(mx, r);
  }
  rep.min_ratio = mn;
  rep.max_ratio = mx;
  rep.implied_eta_inner = std::max(0.0, 1.0 - 1.0 / mx);
  rep.implied_eta_outer =
      rep.infinite_radial_count > 0 ? std::numeric_limits<double>::infinity()
                                    : std::max(0.0, 1.0 / mn - 1.0);

  // Top offenders by |log ratio|; directions are re-derived from their index.
  std::vector<int> idx(static_cast<size_t>(directions));
  std::iota(idx.begin(), idx.end(), 0);
  auto badness = [&](int i) {
    const double r = ratios[static_cast<size_t>(i)];
    return std::isinf(r) ? std::numeric_limits<double>::infinity() : std::abs(std::log(r));
  };
  const int keep = std::min(10, directions);
  std::partial_sort(idx.begin(), idx.begin() + keep, idx.end(),
                    [&](int a, int b) { return badness(a) > badness(b); });
  for (int i = 0; i < keep; ++i) {
    RngStream child = rng.derive(static_cast<std::uint64_t>(idx[static_cast<size_t>(i)]));
    rep.worst_offenders.push_back(
        {ratios[static_cast<size_t>(idx[static_cast<size_t>(i)])], sampler.draw(child)});
  }
  return rep;
}

ConditionReport check_marginal_conditions(const DistributionSpec& spec, int m, double alpha,
                                          const std::vector<double>& eps_list, int directions,
                                          int trials, const RngStream& rng, Exec exec) {
  if (trials < 10000) {
    throw std::invalid_argument("check_marginal_conditions: insufficient trials (need >= 1e4)");
  }
  if (directions < 1 || m < 1) {
    throw std::invalid_argument("check_marginal_conditions: bad directions/m");
  }
  if (!(alpha > 0.0)) throw std::invalid_argument("check_marginal_conditions: alpha must be > 0");
  for (double e : eps_list) {
    if (!(e > 0.0 && e < alpha)) {
      throw std::invalid_argument("check_marginal_conditions: eps values must lie in (0, alpha)");
    }
  }

  const int d = spec.dim();
  const int ne = static_cast<int>(eps_list.size());
  L2DirectionSampler sampler(spec.covariance());
  const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));

  // counts[i] = (beta hits, per-eps interval hits...)
  std::vector<std::int64_t> counts(static_cast<size_t>(directions) * (1 + ne), 0);
  for_each_index(exec, directions, [&](std::int64_t i) {
    RngStream dstream = rng.derive(static_cast<std::uint64_t>(i));
    RngStream vstream = dstream.derive(0);
    const Vector v = sampler.draw(vstream);
    std::int64_t* row = counts.data() + static_cast<size_t>(i) * (1 + ne);
    std::vector<double> x(static_cast<size_t>(d));
    std::vector<double> z(static_cast<size_t>(d));
    for (int t = 0; t < trials; ++t) {
      RngStream tstream = dstream.derive(static_cast<std::uint64_t>(t) + 1);
      std::fill(z.begin(), z.end(), 0.0);
      for (int b = 0; b < m; ++b) {
        spec.sample_into(tstream, x.data());
        for (int c = 0; c < d; ++c) z[static_cast<size_t>(c)] += x[static_cast<size_t>(c)];
      }
      double ip = 0.0;
      for (int c = 0; c < d; ++c) ip += z[static_cast<size_t>(c)] * v[static_cast<size_t>(c)];
      const double a = std::abs(ip * inv_sqrt_m);
      if (a <= alpha) {
        ++row[0];
        for (int e = 0; e < ne; ++e) {
          if (a >= alpha - eps_list[static_cast<size_t>(e)]) ++row[1 + e];
        }
      }
    }
  });

  ConditionReport rep;
  rep.alpha = alpha;
  rep.block_size = m;
  rep.directions = directions;
  rep.trials = trials;
  rep.beta_min = 1.0;
  rep.beta_max = 0.0;
  std::vector<double> betas(static_cast<size_t>(directions));
  for (int i = 0; i < directions; ++i) {
    const double b = static_cast<double>(counts[static_cast<size_t>(i) * (1 + ne)]) / trials;
    betas[static_cast<size_t>(i)] = b;
    rep.beta_min = std::min(rep.beta_min, b);
    rep.beta_max = std::max(rep.beta_max, b);
    rep.beta_mean += b;
  }
  rep.beta_mean /= directions;
  for (double b : betas) {
    rep.condition1_deviation = std::max(rep.condition1_deviation, std::abs(b - rep.beta_mean));
  }

  rep.gamma_hat = std::numeric_limits<double>::infinity();
  for (int e = 0; e < ne; ++e) {
    double min_mass = 1.0;
    for (int i = 0; i < directions; ++i) {
      const double mass =
          static_cast<double>(counts[static_cast<size_t>(i) * (1 + ne) + 1 + e]) / trials;
      min_mass = std::min(min_mass, mass);
    }
    rep.condition2_min_mass[eps_list[static_cast<size_t>(e)]] = min_mass;
    rep.gamma_hat = std::min(rep.gamma_hat, min_mass / eps_list[static_cast<size_t>(e)]);
  }
  if (ne == 0) rep.gamma_hat = 0.0;
  return rep;
}

double kolmogorov_distance_to_normal(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("kolmogorov_distance_to_normal: no values");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double dist = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    const double f = normal_cdf(values[i]);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    dist = std::max(dist, std::max(f - lo, hi - f));
  }
  return dist;
}

double estimate_psi(const MarginalSpec& marginal, int m, std::int64_t trials, const RngStream& rng,
                    Exec exec) {
  if (trials < 100000) throw std::invalid_argument("estimate_psi: trials must be >= 1e5");
  if (m < 1) throw std::invalid_argument("estimate_psi: m must be >= 1");
  const double scale = 1.0 / (std::sqrt(static_cast<double>(m)) * marginal.sigma());
  std::vector<double> y(static_cast<size_t>(trials));
  for_each_index(exec, trials, [&](std::int64_t t) {
    RngStream child = rng.derive(static_cast<std::uint64_t>(t));
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += marginal.draw(child);
    y[static_cast<size_t>(t)] = s * scale;
  });
  return kolmogorov_distance_to_normal(std::move(y));
}

MeanStderr rademacher_sup_stats(const DistributionSpec& spec, int k, int trials,
                                const RngStream& rng, Exec exec) {
  if (trials < 1000) throw std::invalid_argument("rademacher_sup_estimate: trials must be >= 1e3");
  if (k < 1) throw std::invalid_argument("rademacher_sup_estimate: k must be >= 1");
  const int d = spec.dim();
  const SymMatrix root_inv = psd_pow(spec.covariance(), -0.5);

  std::vector<double> norms(static_cast<size_t>(trials));
  for_each_index(exec, trials, [&](std::int64_t t) {
    RngStream child = rng.derive(static_cast<std::uint64_t>(t));
    Vector sum(static_cast<size_t>(d), 0.0);
    Vector x(static_cast<size_t>(d));
    for (int i = 0; i < k; ++i) {
      spec.sample_into(child, x.data());
      const double eps = (child.next_u64() & 1u) ? 1.0 : -1.0;
      for (int c = 0; c < d; ++c) sum[static_cast<size_t>(c)] += eps * x[static_cast<size_t>(c)];
    }
    norms[static_cast<size_t>(t)] = norm2(root_inv.apply(sum));
  });

  double mean = 0.0;
  for (double v : norms) mean += v;
  mean /= trials;
  double var = 0.0;
  for (double v : norms) var += (v - mean) * (v - mean);
  var /= std::max(1, trials - 1);
  return {mean, std::sqrt(var / trials)};
}

double rademacher_sup_estimate(const DistributionSpec& spec, int k, int trials,
                               const RngStream& rng, Exec exec) {
  return rademacher_sup_stats(spec, k, trials, rng, exec).mean;
}

BruteForceRadial brute_force_radial(const std::function<bool(const Vector&)>& contains_fn,
                                    const Vector& u, double t_max) {
  if (!(t_max > 0.0)) throw std::invalid_argument("brute_force_radial: t_max must be positive");
  const size_t d = u.size();
  Vector point(d, 0.0);
  auto at = [&](double t) {
    for (size_t c = 0; c < d; ++c) point[c] = t * u[c];
    return contains_fn(point);
  };
  if (!at(0.0)) {
    throw std::invalid_argument("brute_force_radial: body does not contain 0 (not star-shaped)");
  }
  if (at(t_max)) return {t_max, true};
  double lo = 0.0, hi = t_max;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (at(mid) ? lo : hi) = mid;
  }
  return {0.5 * (lo + hi), false};
}

double estimate_abs_quantile(const DistributionSpec& spec, const Vector& v, int m, double q,
                             std::int64_t trials, const RngStream& rng, Exec exec) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("estimate_abs_quantile: q in (0,1)");
  if (trials < 1000) throw std::invalid_argument("estimate_abs_quantile: trials must be >= 1e3");
  if (m < 1) throw std::invalid_argument("estimate_abs_quantile: m must be >= 1");
  const int d = spec.dim();
  const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));
  std::vector<double> vals(static_cast<size_t>(trials));
  for_each_index(exec, trials, [&](std::int64_t t) {
    RngStream child = rng.derive(static_cast<std::uint64_t>(t));
    Vector x(static_cast<size_t>(d));
    Vector z(static_cast<size_t>(d), 0.0);
    for (int i = 0; i < m; ++i) {
      spec.sample_into(child, x.data());
      for (int c = 0; c < d; ++c) z[static_cast<size_t>(c)] += x[static_cast<size_t>(c)];
    }
    double ip = 0.0;
    for (int c = 0; c < d; ++c) ip += z[static_cast<size_t>(c)] * v[static_cast<size_t>(c)];
    vals[static_cast<size_t>(t)] = std::abs(ip) * inv_sqrt_m;
  });
  const size_t pos = static_cast<size_t>(q * (static_cast<double>(trials) - 1.0));
  std::nth_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(pos), vals.end());
  return vals[pos];
}

}  // namespace covapprox
