#include "covapprox/slab_body.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "covapprox/numeric.hpp"

namespace covapprox {

double slab_alpha() { return gaussian_abs_median(); }

std::string mode_name(const SlabMode& mode) {
  if (std::holds_alternative<SmoothedMode>(mode)) return "smoothed";
  if (std::holds_alternative<SharpMode>(mode)) return "sharp";
  if (std::holds_alternative<IsomorphicMode>(mode)) return "isomorphic";
  return "general";
}

namespace {

int ceil_count(double x) { return static_cast<int>(std::ceil(x)); }

}  // namespace

SlabBody::SlabBody(std::vector<Vector> directions, double threshold, int required_count,
                   SlabMode mode, int dropped)
    : mode_(std::move(mode)), dropped_(dropped) {
  if (directions.empty()) throw std::invalid_argument("SlabBody: no directions");
  n_ = static_cast<int>(directions.size());
  dim_ = static_cast<int>(directions[0].size());
  if (!(threshold > 0.0)) throw std::invalid_argument("SlabBody: threshold must be positive");
  if (required_count < 1 || required_count > n_) {
    throw std::invalid_argument("SlabBody: required count " + std::to_string(required_count) +
                                " outside [1," + std::to_string(n_) + "]");
  }
  threshold_ = threshold;
  k_ = required_count;
  dirs_.resize(static_cast<size_t>(n_) * dim_);
  for (int j = 0; j < n_; ++j) {
    if (static_cast<int>(directions[j].size()) != dim_) {
      throw std::invalid_argument("SlabBody: ragged direction list");
    }
    std::copy(directions[j].begin(), directions[j].end(),
              dirs_.begin() + static_cast<size_t>(j) * dim_);
  }
}

SlabBody build_slab_body(const std::vector<Vector>& samples, const SlabMode& mode) {
  if (samples.empty()) throw std::invalid_argument("build_slab_body: empty samples");

  if (const auto* sm = std::get_if<SmoothedMode>(&mode)) {
    if (!(sm->eta >= 0.0 && sm->eta < 0.5)) {
      throw std::invalid_argument("build_slab_body: smoothed mode requires 0 <= eta < 1/2");
    }
    BlockAverageResult blocks = block_average(samples, sm->m);
    if (blocks.blocks.empty()) {
      throw std::invalid_argument("build_slab_body: fewer samples than block size");
    }
    const int n = static_cast<int>(blocks.blocks.size());
    const double theta = slab_alpha() + sm->eta;
    const int k = ceil_count((0.5 - sm->eta) * n);
    return SlabBody(std::move(blocks.blocks), theta, k, mode, blocks.dropped);
  }
  if (const auto* sh = std::get_if<SharpMode>(&mode)) {
    if (!(sh->eta >= 0.0 && sh->eta < 0.5)) {
      throw std::invalid_argument("build_slab_body: sharp mode requires 0 <= eta < 1/2");
    }
    const int n = static_cast<int>(samples.size());
    const double theta = sh->alpha.value_or(slab_alpha());
    const int k = ceil_count((0.5 - sh->eta) * n);
    return SlabBody(samples, theta, k, mode);
  }
  if (const auto* iso = std::get_if<IsomorphicMode>(&mode)) {
    if (!(iso->lambda > 0.0)) {
      throw std::invalid_argument("build_slab_body: isomorphic mode requires lambda > 0");
    }
    if (!(iso->delta > 0.0 && iso->delta < 4.0)) {
      throw std::invalid_argument("build_slab_body: isomorphic mode requires 0 < delta < 4");
    }
    const int n = static_cast<int>(samples.size());
    const double theta = iso->lambda / 2.0;
    const int k = ceil_count((1.0 - iso->delta / 4.0) * n);
    return SlabBody(samples, theta, k, mode);
  }
  const auto& g = std::get<GeneralMode>(mode);
  if (!(g.beta > 0.0 && g.beta <= 1.0) || g.eta < 0.0 || g.beta - g.eta <= 0.0) {
    throw std::invalid_argument("build_slab_body: general mode requires 0 < beta - eta <= beta <= 1");
  }
  const int n = static_cast<int>(samples.size());
  const double theta = g.alpha + g.eta;
  const int k = ceil_count((g.beta - g.eta) * n);
  return SlabBody(samples, theta, k, mode);
}

bool contains(const SlabBody& body, const Vector& v) {
  if (static_cast<int>(v.size()) != body.dim()) {
    throw std::invalid_argument("SlabBody contains: dimension mismatch");
  }
  const int n = body.count();
  const int d = body.dim();
  const double theta = body.threshold();
  int hits = 0;
  for (int j = 0; j < n; ++j) {
    const double* z = body.direction(j);
    double s = 0.0;
    for (int c = 0; c < d; ++c) s += z[c] * v[c];
    if (std::abs(s) <= theta) ++hits;
  }
  return hits >= body.required_count();
}

double radial(const SlabBody& body, const Vector& u) {
  if (static_cast<int>(u.size()) != body.dim()) {
    throw std::invalid_argument("SlabBody radial: dimension mismatch");
  }
  double un2 = 0.0;
  for (double x : u) un2 += x * x;
  if (un2 == 0.0) throw std::invalid_argument("SlabBody radial: zero direction");

  const int n = body.count();
  const int d = body.dim();
  std::vector<double> a(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double* z = body.direction(j);
    double s = 0.0;
    for (int c = 0; c < d; ++c) s += z[c] * u[c];
    a[static_cast<size_t>(j)] = std::abs(s);
  }
  const int k = body.required_count();
  std::nth_element(a.begin(), a.begin() + (k - 1), a.end());
  const double ak = a[static_cast<size_t>(k - 1)];
  if (ak == 0.0) return std::numeric_limits<double>::infinity();
  return body.threshold() / ak;
}

bool ThresholdNetwork::evaluate(const Vector& v) const {
  int sum = 0;
  for (const ThresholdUnit& unit : units) {
    double s = 0.0;
    for (size_t c = 0; c < v.size(); ++c) s += unit.weight[c] * v[c];
    if (s >= unit.bias) sum += unit.sign;
  }
  return sum >= threshold;
}

ThresholdNetwork export_threshold_network(const SlabBody& body) {
  ThresholdNetwork net;
  net.threshold = body.required_count();
  net.units.reserve(static_cast<size_t>(2 * body.count()));
  const double theta = body.threshold();
  const double upper = std::nextafter(theta, std::numeric_limits<double>::infinity());
  for (int j = 0; j < body.count(); ++j) {
    Vector z(body.direction(j), body.direction(j) + body.dim());
    net.units.push_back({z, -theta, +1});
    net.units.push_back({std::move(z), upper, -1});
  }
  return net;
}

}  // namespace covapprox
