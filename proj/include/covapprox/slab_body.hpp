#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "covapprox/distributions.hpp"
#include "covapprox/linalg.hpp"

namespace covapprox {

// Median of |g| for a standard gaussian; the slab threshold base value.
double slab_alpha();

// Build modes for slab-count bodies. All of them describe the set
//   { v : |<Z_j, v>| <= theta for at least k of the n directions }.
//
// smoothed:   consumes raw X samples, block-averages with its m;
//             theta = alpha + eta, k = ceil((1/2 - eta) n)
// sharp:      consumes the vectors as given; theta = alpha (overridable with
//             an externally estimated quantile), k = ceil((1/2 - eta) n)
// isomorphic: theta = lambda/2, k = ceil((1 - delta/4) N)
// general:    theta = alpha + eta, k = ceil((beta - eta) n); eta = 0 gives
//             the plain "beta n indices at threshold alpha" body.
struct SmoothedMode {
  int m = 1;
  double eta = 0.0;
};
struct SharpMode {
  double eta = 0.0;
  std::optional<double> alpha;  // default: slab_alpha()
};
struct IsomorphicMode {
  double lambda = 0.0;
  double delta = 0.0;
};
struct GeneralMode {
  double alpha = 0.0;
  double beta = 0.0;
  double eta = 0.0;
};
using SlabMode = std::variant<SmoothedMode, SharpMode, IsomorphicMode, GeneralMode>;

std::string mode_name(const SlabMode& mode);

// Star-shaped, centrally symmetric body cut out by slab counts. Directions
// are stored as a flat n x d row-major matrix.
class SlabBody {
 public:
  SlabBody(std::vector<Vector> directions, double threshold, int required_count, SlabMode mode,
           int dropped = 0);

  int dim() const { return dim_; }
  int count() const { return n_; }
  double threshold() const { return threshold_; }
  int required_count() const { return k_; }
  const SlabMode& mode() const { return mode_; }
  int dropped() const { return dropped_; }

  const double* direction(int j) const { return dirs_.data() + static_cast<size_t>(j) * dim_; }
  const std::vector<double>& direction_matrix() const { return dirs_; }

 private:
  int dim_ = 0;
  int n_ = 0;
  double threshold_ = 0.0;
  int k_ = 0;
  SlabMode mode_;
  int dropped_ = 0;
  std::vector<double> dirs_;
};

SlabBody build_slab_body(const std::vector<Vector>& samples, const SlabMode& mode);

// Membership test with closed inequalities: ties at theta are inside.
bool contains(const SlabBody& body, const Vector& v);

// Radial function r(u) = sup{t >= 0 : t u in body} = theta / a_(k), where
// a_(k) is the k-th smallest |<Z_j, u>|. Returns +infinity when a_(k) = 0.
double radial(const SlabBody& body, const Vector& u);

// Two-hidden-layer threshold network evaluating slab membership:
// sum_i sign_i 1{<v, w_i> >= bias_i} >= k  iff  v in body.
struct ThresholdUnit {
  Vector weight;
  double bias = 0.0;
  int sign = 1;
};

struct ThresholdNetwork {
  std::vector<ThresholdUnit> units;
  int threshold = 0;  // second layer integer threshold k

  bool evaluate(const Vector& v) const;
};

// Each direction z_j becomes the unit pair (z_j, -theta, +1), (z_j, +theta', -1)
// with theta' the next representable value above theta, so the pair's sum is
// exactly the closed-slab indicator 1{-theta <= <v,z_j> <= theta}.
ThresholdNetwork export_threshold_network(const SlabBody& body);

}  // namespace covapprox
