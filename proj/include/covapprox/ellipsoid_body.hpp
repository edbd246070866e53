#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "covapprox/distributions.hpp"
#include "covapprox/exec.hpp"
#include "covapprox/linalg.hpp"
#include "covapprox/rng.hpp"

namespace covapprox {

// Z_j(v) = m^{-1} sum_{i in block} <X_i, v>^2.
double block_statistic(const std::vector<Vector>& block, const Vector& v);

// Union-of-intersections of sample ellipsoids: v belongs when the block
// second-moment statistic is <= level for at least k of the n blocks.
//
// Blocks are stored either as the raw sample vectors (the default; memory
// O(N d)) or as per-block second-moment matrices G_j = m^{-1} sum x x^T
// (memory O(n d^2)). The Gram form evaluates the same statistic v^T G_j v
// and exists for the large-m regimes where raw storage would dwarf memory;
// the two differ only by floating-point summation order.
class EllipsoidBody {
 public:
  // Low-level: samples flattened row-major, size n*m*d.
  static EllipsoidBody from_raw(std::vector<double> samples, int n, int m, int dim, double eta,
                                int k, int dropped = 0);
  // Low-level: grams flattened row-major, size n*d*d.
  static EllipsoidBody from_gram(std::vector<double> grams, int n, int m, int dim, double eta,
                                 int k, int dropped = 0);

  int dim() const { return dim_; }
  int block_count() const { return n_; }
  int block_size() const { return m_; }
  double eta() const { return eta_; }
  double level() const { return 1.0 + eta_; }
  int required_count() const { return k_; }
  int dropped() const { return dropped_; }
  bool stores_gram() const { return gram_; }

  double block_statistic_at(int j, const Vector& v) const;
  void block_statistics(const Vector& v, double* out) const;  // all n blocks

 private:
  EllipsoidBody() = default;
  int dim_ = 0, n_ = 0, m_ = 0, k_ = 0, dropped_ = 0;
  double eta_ = 0.0;
  bool gram_ = false;
  std::vector<double> data_;
};

// Consecutive blocks of size m, level 1 + eta, k = ceil(0.9 n).
// Requires 0 < eta < 1/4 and n = floor(N/m) >= 10; the trailing remainder is
// dropped and recorded.
EllipsoidBody build_ellipsoid_body(const std::vector<Vector>& samples, int m, double eta);

// Same body built by streaming n*m draws from the sampler into per-block
// Gram matrices; draw i uses rng.derive(i), matching sample_batch.
EllipsoidBody build_ellipsoid_body_gram(const DistributionSpec& spec, int n, int m, double eta,
                                        const RngStream& rng, Exec exec = default_exec());

bool contains(const EllipsoidBody& body, const Vector& v);

// r(u) = sqrt(level / q_(k)) with q_(k) the k-th smallest block statistic;
// +infinity when q_(k) = 0.
double radial(const EllipsoidBody& body, const Vector& u);

// Empirical block size m0(eta): smallest tested m whose worst-over-directions
// failure probability Pr(|Z_j(v) - 1| >= eta/10) estimate is <= 0.01.
struct M0Estimate {
  double eta = 0.0;
  bool attained = false;
  int m0 = 0;  // meaningful only when attained
  std::vector<std::pair<int, double>> failure_probabilities;  // (candidate m, worst estimate)
  int trials = 0;
  int directions = 0;
};

// Directions are drawn once on the L2 sphere of the spec's covariance and
// shared by all candidates; each (candidate, trial) pair draws a fresh block
// of m samples evaluated against every direction. Requires trials >= 3000
// (standard error ~0.002 at p = 0.01). With stop_at_first_success the table
// ends at the first qualifying candidate.
M0Estimate estimate_m0(const DistributionSpec& spec, double eta, const std::vector<int>& candidates,
                       int trials, int directions, const RngStream& rng,
                       Exec exec = default_exec(), bool stop_at_first_success = false);

}  // namespace covapprox
