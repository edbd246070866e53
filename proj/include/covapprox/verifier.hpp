#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "covapprox/distributions.hpp"
#include "covapprox/exec.hpp"
#include "covapprox/linalg.hpp"
#include "covapprox/rng.hpp"

namespace covapprox {

// Draws directions on the L2 sphere S = {v : v^T T v = 1}: u = T^{-1/2} w
// with w uniform on the Euclidean unit sphere, then exactly renormalized so
// u^T T u = 1 to machine precision. Caches T^{-1/2} for batch use.
class L2DirectionSampler {
 public:
  explicit L2DirectionSampler(const SymMatrix& t, const NumericSettings& settings = {});
  Vector draw(RngStream& rng) const;
  const SymMatrix& covariance() const { return t_; }

 private:
  SymMatrix t_;
  SymMatrix root_inv_;
};

Vector sample_l2_sphere_direction(const SymMatrix& t, RngStream& rng);

struct RatioOffender {
  double ratio = 0.0;
  Vector direction;
};

// Radial-ratio certificate against the true ellipsoid B of T: each sampled
// direction u lies on S, where B has radius exactly 1, so the body's radial
// value IS the ratio. The certified statement, restricted to the sampled
// directions, is  min_ratio * B  subset  body  subset  max_ratio * B, i.e.
// the smallest workable eta per Def-style two-sided inclusion is
//   inner: 1 - 1/max_ratio   (body must shrink to fit inside B)
//   outer: 1/min_ratio - 1   (body must grow to cover B).
// Infinite radial values are counted separately and excluded from max_ratio;
// any occurrence fails outer inclusion.
struct ApproximationReport {
  int direction_count = 0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double implied_eta_inner = 0.0;
  double implied_eta_outer = 0.0;
  int infinite_radial_count = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::vector<RatioOffender> worst_offenders;  // up to 10, by |log ratio|
};

using RadialFn = std::function<double(const Vector&)>;

ApproximationReport certify_approximation(const RadialFn& radial_fn, const SymMatrix& t,
                                          int directions, const RngStream& rng,
                                          Exec exec = default_exec());

// Monte Carlo check of the marginal conditions for Z = m-block average:
//   (1) Pr(|<Z,v>| <= alpha) is (nearly) a constant beta on S;
//   (2) Pr(|<Z,v>| in [alpha-eps, alpha]) >= gamma * eps.
// Interval masses are two-sided: the event is on |<Z,v>|, so the gaussian
// reference value for (2) is 2(Phi(alpha) - Phi(alpha-eps)).
// condition1_deviation is max_v |beta_hat(v) - mean_v beta_hat|.
struct ConditionReport {
  double alpha = 0.0;
  int block_size = 1;
  int directions = 0;
  int trials = 0;
  double beta_mean = 0.0;
  double beta_min = 0.0;
  double beta_max = 0.0;
  double condition1_deviation = 0.0;
  std::map<double, double> condition2_min_mass;  // eps -> min-over-directions mass
  double gamma_hat = 0.0;                        // min over (v, eps) of mass/eps
};

ConditionReport check_marginal_conditions(const DistributionSpec& spec, int m, double alpha,
                                          const std::vector<double>& eps_list, int directions,
                                          int trials, const RngStream& rng,
                                          Exec exec = default_exec());

// Kolmogorov distance between the law of Y = (sqrt(m) sigma_W)^{-1} sum W_i
// and the standard normal, from `trials` independent draws of Y. sigma_W is
// analytic per marginal variant, never estimated.
double estimate_psi(const MarginalSpec& marginal, int m, std::int64_t trials, const RngStream& rng,
                    Exec exec = default_exec());

// Internal form used by tests; computes the same statistic from raw draws.
double kolmogorov_distance_to_normal(std::vector<double> values);

struct MeanStderr {
  double mean = 0.0;
  double stderr_of_mean = 0.0;
};

// Monte Carlo average of ||T^{-1/2} sum_{i<=k} eps_i X_i||_2, the supremum of
// the Rademacher process over B = T^{-1/2} B_2.
MeanStderr rademacher_sup_stats(const DistributionSpec& spec, int k, int trials,
                                const RngStream& rng, Exec exec = default_exec());
double rademacher_sup_estimate(const DistributionSpec& spec, int k, int trials,
                               const RngStream& rng, Exec exec = default_exec());

// Bisection oracle for radial functions of star-shaped membership tests.
// Absolute ray-parameter accuracy 1e-10 on [0, t_max]; when the body still
// contains t_max * u the result is t_max with unbounded = true.
struct BruteForceRadial {
  double value = 0.0;
  bool unbounded = false;
};

BruteForceRadial brute_force_radial(const std::function<bool(const Vector&)>& contains_fn,
                                    const Vector& u, double t_max);

// Empirical q-quantile of |<Z, v>| for Z the m-block average of the spec;
// the Monte Carlo oracle behind data-driven thresholds like the sphere
// median alpha_d.
double estimate_abs_quantile(const DistributionSpec& spec, const Vector& v, int m, double q,
                             std::int64_t trials, const RngStream& rng,
                             Exec exec = default_exec());

}  // namespace covapprox
