#include "covapprox/baseline.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace covapprox {

EmpiricalEllipsoid empirical_covariance(const std::vector<Vector>& samples) {
  if (samples.empty()) throw std::invalid_argument("empirical_covariance: empty input");
  const int d = static_cast<int>(samples[0].size());
  SymMatrix t(d);
  for (const Vector& x : samples) {
    if (static_cast<int>(x.size()) != d) {
      throw std::invalid_argument("empirical_covariance: ragged samples");
    }
    for (int i = 0; i < d; ++i) {
      for (int j = i; j < d; ++j) t.add(i, j, x[static_cast<size_t>(i)] * x[static_cast<size_t>(j)]);
    }
  }
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  SymMatrix out(d);
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) out.set(i, j, t(i, j) * inv_n);
  }
  return {std::move(out), static_cast<int>(samples.size())};
}

double radial_empirical(const EmpiricalEllipsoid& e, const Vector& u) {
  double un2 = 0.0;
  for (double x : u) un2 += x * x;
  if (un2 == 0.0) throw std::invalid_argument("radial_empirical: zero direction");
  const double q = quadratic_form(e.t_hat, u);
  if (q == 0.0) return std::numeric_limits<double>::infinity();
  if (q < 0.0) throw NumericError("radial_empirical: negative quadratic form");
  return 1.0 / std::sqrt(q);
}

namespace {

std::vector<Vector> isotropize(const std::vector<Vector>& samples, const SymMatrix& t,
                               const NumericSettings& settings) {
  const SymMatrix root_inv = psd_pow(t, -0.5, settings);
  std::vector<Vector> y;
  y.reserve(samples.size());
  for (const Vector& x : samples) y.push_back(root_inv.apply(x));
  return y;
}

}  // namespace

double isotropic_deviation(const std::vector<Vector>& samples, const SymMatrix& t,
                           const NumericSettings& settings) {
  if (samples.empty()) throw std::invalid_argument("isotropic_deviation: empty input");
  const std::vector<Vector> y = isotropize(samples, t, settings);
  const EmpiricalEllipsoid emp = empirical_covariance(y);
  const int d = emp.t_hat.dim();
  SymMatrix gap(d);
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) gap.set(i, j, (i == j ? 1.0 : 0.0) - emp.t_hat(i, j));
  }
  return operator_norm_sym(gap, settings);
}

DeviationDiagnostics tikhomirov_bound_terms(const std::vector<Vector>& samples, const SymMatrix& t,
                                            double p, const NumericSettings& settings) {
  if (!(p > 2.0)) throw std::invalid_argument("tikhomirov_bound_terms: p must exceed 2");
  if (samples.empty()) throw std::invalid_argument("tikhomirov_bound_terms: empty input");
  const std::vector<Vector> y = isotropize(samples, t, settings);
  const double n = static_cast<double>(y.size());
  const double d = static_cast<double>(y[0].size());

  DeviationDiagnostics diag;
  diag.p = p;
  double max_norm2 = 0.0;
  for (const Vector& v : y) max_norm2 = std::max(max_norm2, dot(v, v));
  diag.max_norm_term = max_norm2 / n;

  const double ratio = d / n;
  const double lg = std::log(std::exp(1.0) * n / d);
  diag.moment_term = std::pow(ratio, 1.0 - 2.0 / p) * lg * lg * lg * lg;
  diag.truncation_term = std::pow(ratio, 1.0 - 2.0 / std::min(4.0, p));

  const EmpiricalEllipsoid emp = empirical_covariance(y);
  SpectralDecomposition dec = sym_eig(emp.t_hat, settings);
  double dev = 0.0;
  for (double l : dec.eigenvalues) dev = std::max(dev, std::abs(1.0 - l));
  diag.operator_deviation = dev;

  // sup_v N^{-1} sum <Y_i,v>^2 >= N^{-1} max ||Y_i||^2 must hold exactly;
  // a violation means the eigensolver or the accumulation went wrong.
  const double lmax = dec.eigenvalues.empty() ? 0.0 : dec.eigenvalues.front();
  if (lmax + 1e-9 * std::max(1.0, lmax) < diag.max_norm_term) {
    throw NumericError("tikhomirov_bound_terms: operator norm below max-norm lower bound");
  }
  return diag;
}

}  // namespace covapprox
