#include "covapprox/distributions.hpp"

#include <cmath>
#include <stdexcept>

namespace covapprox {

MarginalSpec MarginalSpec::student_like(double p) {
  if (!(p > 2.0)) throw std::invalid_argument("MarginalSpec::student_like: requires p > 2");
  return {Kind::student_like, p};
}

double MarginalSpec::draw(RngStream& rng) const {
  switch (kind) {
    case Kind::standard_gaussian:
      return rng.next_normal_pair().first;
    case Kind::rademacher:
      return (rng.next_u64() & 1u) ? 1.0 : -1.0;
    case Kind::centered_exponential:
      return rng.next_exponential() - 1.0;
    case Kind::student_like: {
      const std::uint64_t w = rng.next_u64();
      const double sign = (w & 1u) ? 1.0 : -1.0;
      const double u = static_cast<double>((w >> 11) + 1) * 0x1.0p-53;
      const double x0 = std::sqrt((p - 2.0) / p);
      return sign * x0 * std::pow(u, -1.0 / p);
    }
  }
  throw std::logic_error("MarginalSpec::draw: unknown kind");
}

std::string MarginalSpec::name() const {
  switch (kind) {
    case Kind::standard_gaussian:
      return "standard_gaussian";
    case Kind::rademacher:
      return "rademacher";
    case Kind::centered_exponential:
      return "centered_exponential";
    case Kind::student_like:
      return "student_like(" + std::to_string(p) + ")";
  }
  return "?";
}

DistributionSpec DistributionSpec::gaussian(SymMatrix cov) {
  DistributionSpec s;
  s.kind_ = DistKind::gaussian;
  s.dim_ = cov.dim();
  if (s.dim_ < 1) throw std::invalid_argument("gaussian: dimension must be >= 1");
  NumericSettings settings;
  // psd_pow(-1/2) is the invertibility check the invariant asks for.
  psd_pow(cov, -0.5, settings);
  s.sqrt_param_ = psd_pow(cov, 0.5, settings);
  s.sqrt_is_identity_ = cov.is_identity();
  s.true_cov_ = std::move(cov);
  return s;
}

DistributionSpec DistributionSpec::standard_gaussian(int dim) {
  return gaussian(SymMatrix::identity(dim));
}

DistributionSpec DistributionSpec::uniform_sphere(int dim) {
  if (dim < 1) throw std::invalid_argument("uniform_sphere: dimension must be >= 1");
  DistributionSpec s;
  s.kind_ = DistKind::uniform_sphere;
  s.dim_ = dim;
  Vector diag(dim, 1.0 / dim);
  s.true_cov_ = SymMatrix::diagonal(diag);
  return s;
}

DistributionSpec DistributionSpec::heavy_tail_xu(int dim, double u) {
  if (dim < 1) throw std::invalid_argument("heavy_tail_xu: dimension must be >= 1");
  if (!(u >= 1.0 / dim)) {
    throw std::invalid_argument("heavy_tail_xu: requires u >= 1/d, got u=" + std::to_string(u));
  }
  DistributionSpec s;
  s.kind_ = DistKind::heavy_tail_xu;
  s.dim_ = dim;
  s.u_ = u;
  s.spike_ = std::sqrt(u * dim);
  s.spike_prob_ = 1.0 / (u * u * static_cast<double>(dim) * dim);
  // E z^2 = R^2/(u^2 d^2) + (1 - 1/(u^2 d^2)), R^2 = ud.
  const double ez2 = 1.0 / (u * dim) + (1.0 - s.spike_prob_);
  Vector diag(dim, ez2);
  s.true_cov_ = SymMatrix::diagonal(diag);
  return s;
}

DistributionSpec DistributionSpec::mixed_product(MarginalSpec marginal, SymMatrix mixing) {
  DistributionSpec s;
  s.kind_ = DistKind::mixed_product;
  s.dim_ = mixing.dim();
  if (s.dim_ < 1) throw std::invalid_argument("mixed_product: dimension must be >= 1");
  s.marginal_ = marginal;
  s.sqrt_param_ = psd_pow(mixing, 0.5);
  s.sqrt_is_identity_ = mixing.is_identity();
  s.true_cov_ = std::move(mixing);
  return s;
}

DistributionSpec& DistributionSpec::with_norm_equivalence(double q, double L) {
  norm_q_ = q;
  norm_L_ = L;
  return *this;
}

std::string DistributionSpec::name() const {
  switch (kind_) {
    case DistKind::gaussian:
      return "gaussian";
    case DistKind::uniform_sphere:
      return "uniform_sphere";
    case DistKind::heavy_tail_xu:
      return "heavy_tail_xu(u=" + std::to_string(u_) + ")";
    case DistKind::mixed_product:
      return "mixed_product(" + marginal_.name() + ")";
  }
  return "?";
}

void DistributionSpec::fill_marginal(RngStream& rng, double* out, int n) const {
  switch (marginal_.kind) {
    case MarginalSpec::Kind::standard_gaussian:
      rng.fill_normal(out, n);
      return;
    case MarginalSpec::Kind::rademacher:
      rng.fill_rademacher(out, n);
      return;
    default:
      for (int i = 0; i < n; ++i) out[i] = marginal_.draw(rng);
  }
}

void DistributionSpec::sample_into(RngStream& rng, double* out) const {
  const int d = dim_;
  switch (kind_) {
    case DistKind::gaussian: {
      if (sqrt_is_identity_) {
        rng.fill_normal(out, d);
        return;
      }
      Vector g(d);
      rng.fill_normal(g.data(), d);
      Vector x = sqrt_param_.apply(g);
      std::copy(x.begin(), x.end(), out);
      return;
    }
    case DistKind::uniform_sphere: {
      double n2 = 0.0;
      do {
        rng.fill_normal(out, d);
        n2 = 0.0;
        for (int i = 0; i < d; ++i) n2 += out[i] * out[i];
      } while (n2 == 0.0);
      const double inv = 1.0 / std::sqrt(n2);
      for (int i = 0; i < d; ++i) out[i] *= inv;
      return;
    }
    case DistKind::heavy_tail_xu: {
      // z_i = eps_i * max{eta_i R, 1}: one word gives the sign bit and the
      // Bernoulli uniform for each coordinate.
      for (int i = 0; i < d; ++i) {
        const std::uint64_t w = rng.next_u64();
        const double sign = (w & 1u) ? 1.0 : -1.0;
        const double unif = static_cast<double>(w >> 11) * 0x1.0p-53;
        out[i] = sign * (unif < spike_prob_ ? spike_ : 1.0);
      }
      return;
    }
    case DistKind::mixed_product: {
      if (sqrt_is_identity_) {
        fill_marginal(rng, out, d);
        return;
      }
      Vector w(d);
      fill_marginal(rng, w.data(), d);
      Vector x = sqrt_param_.apply(w);
      std::copy(x.begin(), x.end(), out);
      return;
    }
  }
  throw std::logic_error("DistributionSpec::sample_into: unknown kind");
}

std::vector<Vector> sample_batch(const DistributionSpec& spec, std::int64_t count,
                                 const RngStream& rng, Exec exec) {
  if (count < 1) throw std::invalid_argument("sample_batch: count must be >= 1");
  std::vector<Vector> out(static_cast<size_t>(count), Vector(spec.dim()));
  for_each_index(exec, count, [&](std::int64_t i) {
    RngStream child = rng.derive(static_cast<std::uint64_t>(i));
    spec.sample_into(child, out[static_cast<size_t>(i)].data());
  });
  return out;
}

SymMatrix true_covariance(const DistributionSpec& spec) { return spec.covariance(); }

BlockAverageResult block_average(const std::vector<Vector>& samples, int m) {
  if (m <= 0) throw std::invalid_argument("block_average: m must be positive");
  BlockAverageResult res;
  const std::int64_t n = static_cast<std::int64_t>(samples.size()) / m;
  res.dropped = static_cast<int>(samples.size() - static_cast<size_t>(n) * m);
  if (n == 0) return res;
  const int d = static_cast<int>(samples[0].size());
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  res.blocks.assign(static_cast<size_t>(n), Vector(d, 0.0));
  for (std::int64_t j = 0; j < n; ++j) {
    Vector& z = res.blocks[static_cast<size_t>(j)];
    for (int i = 0; i < m; ++i) {
      const Vector& x = samples[static_cast<size_t>(j * m + i)];
      for (int c = 0; c < d; ++c) z[c] += x[c];
    }
    for (int c = 0; c < d; ++c) z[c] *= scale;
  }
  return res;
}

}  // namespace covapprox
