#include "covapprox/ellipsoid_body.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "covapprox/verifier.hpp"

namespace covapprox {

double block_statistic(const std::vector<Vector>& block, const Vector& v) {
  if (block.empty()) throw std::invalid_argument("block_statistic: empty block");
  double s = 0.0;
  for (const Vector& x : block) {
    const double ip = dot(x, v);
    s += ip * ip;
  }
  return s / static_cast<double>(block.size());
}

EllipsoidBody EllipsoidBody::from_raw(std::vector<double> samples, int n, int m, int dim,
                                      double eta, int k, int dropped) {
  if (n < 1 || m < 1 || dim < 1) throw std::invalid_argument("EllipsoidBody: bad shape");
  if (samples.size() != static_cast<size_t>(n) * m * dim) {
    throw std::invalid_argument("EllipsoidBody: sample buffer size mismatch");
  }
  if (k < 1 || k > n) throw std::invalid_argument("EllipsoidBody: required count out of range");
  if (eta < 0.0) throw std::invalid_argument("EllipsoidBody: eta must be >= 0");
  EllipsoidBody b;
  b.dim_ = dim;
  b.n_ = n;
  b.m_ = m;
  b.k_ = k;
  b.eta_ = eta;
  b.dropped_ = dropped;
  b.gram_ = false;
  b.data_ = std::move(samples);
  return b;
}

EllipsoidBody EllipsoidBody::from_gram(std::vector<double> grams, int n, int m, int dim, double eta,
                                       int k, int dropped) {
  if (n < 1 || m < 1 || dim < 1) throw std::invalid_argument("EllipsoidBody: bad shape");
  if (grams.size() != static_cast<size_t>(n) * dim * dim) {
    throw std::invalid_argument("EllipsoidBody: gram buffer size mismatch");
  }
  if (k < 1 || k > n) throw std::invalid_argument("EllipsoidBody: required count out of range");
  if (eta < 0.0) throw std::invalid_argument("EllipsoidBody: eta must be >= 0");
  EllipsoidBody b;
  b.dim_ = dim;
  b.n_ = n;
  b.m_ = m;
  b.k_ = k;
  b.eta_ = eta;
  b.dropped_ = dropped;
  b.gram_ = true;
  b.data_ = std::move(grams);
  return b;
}

double EllipsoidBody::block_statistic_at(int j, const Vector& v) const {
  if (static_cast<int>(v.size()) != dim_) {
    throw std::invalid_argument("block_statistic_at: dimension mismatch");
  }
  if (j < 0 || j >= n_) throw std::invalid_argument("block_statistic_at: block index");
  if (!gram_) {
    const double* base = data_.data() + static_cast<size_t>(j) * m_ * dim_;
    double s = 0.0;
    for (int i = 0; i < m_; ++i) {
      const double* x = base + static_cast<size_t>(i) * dim_;
      double ip = 0.0;
      for (int c = 0; c < dim_; ++c) ip += x[c] * v[c];
      s += ip * ip;
    }
    return s / static_cast<double>(m_);
  }
  const double* g = data_.data() + static_cast<size_t>(j) * dim_ * dim_;
  double s = 0.0;
  for (int a = 0; a < dim_; ++a) {
    const double* row = g + static_cast<size_t>(a) * dim_;
    double r = 0.0;
    for (int b = 0; b < dim_; ++b) r += row[b] * v[b];
    s += v[a] * r;
  }
  return s;
}

void EllipsoidBody::block_statistics(const Vector& v, double* out) const {
  for (int j = 0; j < n_; ++j) out[j] = block_statistic_at(j, v);
}

EllipsoidBody build_ellipsoid_body(const std::vector<Vector>& samples, int m, double eta) {
  if (!(eta > 0.0 && eta < 0.25)) {
    throw std::invalid_argument("build_ellipsoid_body: eta out of range (0, 1/4)");
  }
  if (m < 1) throw std::invalid_argument("build_ellipsoid_body: m must be >= 1");
  const int n = static_cast<int>(samples.size()) / m;
  if (n < 10) throw std::invalid_argument("build_ellipsoid_body: too few samples (need n >= 10)");
  const int dropped = static_cast<int>(samples.size()) - n * m;
  const int d = static_cast<int>(samples[0].size());
  std::vector<double> flat(static_cast<size_t>(n) * m * d);
  for (int i = 0; i < n * m; ++i) {
    if (static_cast<int>(samples[static_cast<size_t>(i)].size()) != d) {
      throw std::invalid_argument("build_ellipsoid_body: ragged samples");
    }
    std::copy(samples[static_cast<size_t>(i)].begin(), samples[static_cast<size_t>(i)].end(),
              flat.begin() + static_cast<size_t>(i) * d);
  }
  const int k = static_cast<int>(std::ceil(0.9 * n));
  return EllipsoidBody::from_raw(std::move(flat), n, m, d, eta, k, dropped);
}

EllipsoidBody build_ellipsoid_body_gram(const DistributionSpec& spec, int n, int m, double eta,
                                        const RngStream& rng, Exec exec) {
  if (!(eta > 0.0 && eta < 0.25)) {
    throw std::invalid_argument("build_ellipsoid_body_gram: eta out of range (0, 1/4)");
  }
  if (m < 1 || n < 10) throw std::invalid_argument("build_ellipsoid_body_gram: need m >= 1, n >= 10");
  const int d = spec.dim();
  std::vector<double> grams(static_cast<size_t>(n) * d * d, 0.0);
  for_each_index(exec, n, [&](std::int64_t j) {
    double* g = grams.data() + static_cast<size_t>(j) * d * d;
    std::vector<double> x(static_cast<size_t>(d));
    for (int i = 0; i < m; ++i) {
      RngStream child = rng.derive(static_cast<std::uint64_t>(j) * m + i);
      spec.sample_into(child, x.data());
      for (int a = 0; a < d; ++a) {
        const double xa = x[static_cast<size_t>(a)];
        double* row = g + static_cast<size_t>(a) * d;
        for (int b = 0; b < d; ++b) row[b] += xa * x[static_cast<size_t>(b)];
      }
    }
    const double inv_m = 1.0 / static_cast<double>(m);
    for (int c = 0; c < d * d; ++c) g[c] *= inv_m;
  });
  const int k = static_cast<int>(std::ceil(0.9 * n));
  return EllipsoidBody::from_gram(std::move(grams), n, m, d, eta, k, 0);
}

bool contains(const EllipsoidBody& body, const Vector& v) {
  if (static_cast<int>(v.size()) != body.dim()) {
    throw std::invalid_argument("EllipsoidBody contains: dimension mismatch");
  }
  const double level = body.level();
  int hits = 0;
  for (int j = 0; j < body.block_count(); ++j) {
    if (body.block_statistic_at(j, v) <= level) ++hits;
  }
  return hits >= body.required_count();
}

double radial(const EllipsoidBody& body, const Vector& u) {
  if (static_cast<int>(u.size()) != body.dim()) {
    throw std::invalid_argument("EllipsoidBody radial: dimension mismatch");
  }
  double un2 = 0.0;
  for (double x : u) un2 += x * x;
  if (un2 == 0.0) throw std::invalid_argument("EllipsoidBody radial: zero direction");

  std::vector<double> stats(static_cast<size_t>(body.block_count()));
  body.block_statistics(u, stats.data());
  const int k = body.required_count();
  std::nth_element(stats.begin(), stats.begin() + (k - 1), stats.end());
  const double qk = stats[static_cast<size_t>(k - 1)];
  if (qk == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(body.level() / qk);
}

M0Estimate estimate_m0(const DistributionSpec& spec, double eta, const std::vector<int>& candidates,
                       int trials, int directions, const RngStream& rng, Exec exec,
                       bool stop_at_first_success) {
  if (!(eta > 0.0)) throw std::invalid_argument("estimate_m0: eta must be positive");
  if (trials < 3000) {
    throw std::invalid_argument(
        "estimate_m0: trials too small to resolve failure probability 0.01 (need >= 3000)");
  }
  if (directions < 1) throw std::invalid_argument("estimate_m0: directions must be >= 1");
  if (candidates.empty()) throw std::invalid_argument("estimate_m0: no candidates");
  for (size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i] < 1 || (i > 0 && candidates[i] <= candidates[i - 1])) {
      throw std::invalid_argument("estimate_m0: candidates must be positive and ascending");
    }
  }

  const int d = spec.dim();
  L2DirectionSampler sampler(spec.covariance());
  std::vector<double> dirs(static_cast<size_t>(directions) * d);
  for (int i = 0; i < directions; ++i) {
    RngStream child = rng.derive(1u).derive(static_cast<std::uint64_t>(i));
    Vector v = sampler.draw(child);
    std::copy(v.begin(), v.end(), dirs.begin() + static_cast<size_t>(i) * d);
  }

  M0Estimate est;
  est.eta = eta;
  est.trials = trials;
  est.directions = directions;
  const double margin = eta / 10.0;

  for (size_t ci = 0; ci < candidates.size(); ++ci) {
    const int m = candidates[ci];
    std::vector<std::uint8_t> fail(static_cast<size_t>(trials) * directions, 0);
    for_each_index(exec, trials, [&](std::int64_t t) {
      RngStream child =
          rng.derive(2u).derive(static_cast<std::uint64_t>(ci) * trials + static_cast<std::uint64_t>(t));
      // Accumulate the trial's second-moment matrix once (d^2 per sample),
      // then evaluate every direction against it (d^2 per direction).
      std::vector<double> gram(static_cast<size_t>(d) * d, 0.0);
      std::vector<double> x(static_cast<size_t>(d));
      for (int i = 0; i < m; ++i) {
        spec.sample_into(child, x.data());
        for (int a = 0; a < d; ++a) {
          const double xa = x[static_cast<size_t>(a)];
          double* row = gram.data() + static_cast<size_t>(a) * d;
          for (int b = 0; b < d; ++b) row[b] += xa * x[static_cast<size_t>(b)];
        }
      }
      std::uint8_t* row = fail.data() + static_cast<size_t>(t) * directions;
      const double inv_m = 1.0 / static_cast<double>(m);
      for (int j = 0; j < directions; ++j) {
        const double* v = dirs.data() + static_cast<size_t>(j) * d;
        double stat = 0.0;
        for (int a = 0; a < d; ++a) {
          const double* grow = gram.data() + static_cast<size_t>(a) * d;
          double r = 0.0;
          for (int b = 0; b < d; ++b) r += grow[b] * v[b];
          stat += v[a] * r;
        }
        row[j] = std::abs(stat * inv_m - 1.0) >= margin ? 1 : 0;
      }
    });
    double worst = 0.0;
    for (int j = 0; j < directions; ++j) {
      std::int64_t count = 0;
      for (int t = 0; t < trials; ++t) count += fail[static_cast<size_t>(t) * directions + j];
      worst = std::max(worst, static_cast<double>(count) / trials);
    }
    est.failure_probabilities.emplace_back(m, worst);
    if (!est.attained && worst <= 0.01) {
      est.attained = true;
      est.m0 = m;
      if (stop_at_first_success) break;
    }
  }
  return est;
}

}  // namespace covapprox
