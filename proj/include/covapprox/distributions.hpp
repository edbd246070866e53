#pragma once

#include <optional>
#include <string>
#include <vector>

#include "covapprox/exec.hpp"
#include "covapprox/linalg.hpp"
#include "covapprox/rng.hpp"

namespace covapprox {

// Centred, unit-variance scalar marginals. Unit variance is analytic per
// variant (sigma() == 1), which keeps mixing matrices equal to covariances
// and removes studentization noise from the Berry-Esseen estimator.
struct MarginalSpec {
  enum class Kind { standard_gaussian, rademacher, centered_exponential, student_like };

  Kind kind = Kind::standard_gaussian;
  // Tail exponent for student_like; moments of order >= p diverge.
  double p = 0.0;

  static MarginalSpec standard_gaussian() { return {Kind::standard_gaussian, 0.0}; }
  static MarginalSpec rademacher() { return {Kind::rademacher, 0.0}; }
  static MarginalSpec centered_exponential() { return {Kind::centered_exponential, 0.0}; }
  // Symmetric Pareto with tail index p > 2, scaled to unit variance:
  // |W| = x0 * U^{-1/p}, x0 = sqrt((p-2)/p).
  static MarginalSpec student_like(double p);

  double sigma() const { return 1.0; }
  double draw(RngStream& rng) const;
  std::string name() const;
};

enum class DistKind { gaussian, uniform_sphere, heavy_tail_xu, mixed_product };

// A sampler plus its exact covariance. Construction validates the variant,
// precomputes the matrix square root used for sampling, and fixes the true
// covariance T in closed form:
//   gaussian(cov)        -> cov            (samples cov^{1/2} g)
//   uniform_sphere       -> Id/d
//   heavy_tail_xu(u)     -> diag(E z^2),   E z^2 = 1/(ud) + 1 - 1/(u^2 d^2)
//   mixed_product(W, M)  -> M              (samples M^{1/2} w, w iid W)
class DistributionSpec {
 public:
  static DistributionSpec gaussian(SymMatrix cov);
  static DistributionSpec standard_gaussian(int dim);
  static DistributionSpec uniform_sphere(int dim);
  static DistributionSpec heavy_tail_xu(int dim, double u);
  static DistributionSpec mixed_product(MarginalSpec marginal, SymMatrix mixing);

  DistributionSpec& with_norm_equivalence(double q, double L);

  DistKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double xu_u() const { return u_; }
  double xu_spike() const { return spike_; }        // R = sqrt(ud)
  double xu_spike_prob() const { return spike_prob_; }  // 1/(u^2 d^2)
  const MarginalSpec& marginal() const { return marginal_; }
  const SymMatrix& covariance() const { return true_cov_; }
  std::optional<double> norm_q() const { return norm_q_; }
  std::optional<double> norm_L() const { return norm_L_; }
  std::string name() const;

  // One draw written to out[0..d); consumes only the given stream.
  void sample_into(RngStream& rng, double* out) const;

 private:
  DistributionSpec() = default;
  // Batched marginal draws (word-packed for rademacher, paired for gaussian).
  void fill_marginal(RngStream& rng, double* out, int n) const;

  DistKind kind_ = DistKind::gaussian;
  int dim_ = 0;
  SymMatrix sqrt_param_;  // cov^{1/2} or mixing^{1/2}
  bool sqrt_is_identity_ = false;
  double u_ = 0.0, spike_ = 0.0, spike_prob_ = 0.0;
  MarginalSpec marginal_;
  SymMatrix true_cov_;
  std::optional<double> norm_q_, norm_L_;
};

// count i.i.d. draws; draw i consumes the child stream rng.derive(i), so the
// batch is reproducible and embarrassingly parallel.
std::vector<Vector> sample_batch(const DistributionSpec& spec, std::int64_t count,
                                 const RngStream& rng, Exec exec = default_exec());

SymMatrix true_covariance(const DistributionSpec& spec);

struct BlockAverageResult {
  std::vector<Vector> blocks;  // Z_j = m^{-1/2} sum_{i in I_j} X_i
  int dropped = 0;             // trailing samples that did not fill a block
};

BlockAverageResult block_average(const std::vector<Vector>& samples, int m);

}  // namespace covapprox
