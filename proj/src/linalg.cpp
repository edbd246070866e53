#include "covapprox/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace covapprox {

double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw NumericError("dot: dimension mismatch");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

Vector scaled(const Vector& a, double c) {
  Vector out(a);
  for (double& x : out) x *= c;
  return out;
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector Matrix::apply(const Vector& v) const {
  if (static_cast<int>(v.size()) != cols_) throw NumericError("Matrix::apply: dimension mismatch");
  Vector out(rows_, 0.0);
  for (int i = 0; i < rows_; ++i) {
    const double* row = a_.data() + static_cast<size_t>(i) * cols_;
    double s = 0.0;
    for (int j = 0; j < cols_; ++j) s += row[j] * v[j];
    out[i] = s;
  }
  return out;
}

SymMatrix SymMatrix::identity(int dim) {
  SymMatrix m(dim);
  for (int i = 0; i < dim; ++i) m.set(i, i, 1.0);
  return m;
}

SymMatrix SymMatrix::diagonal(const Vector& diag) {
  SymMatrix m(static_cast<int>(diag.size()));
  for (int i = 0; i < m.dim(); ++i) m.set(i, i, diag[i]);
  return m;
}

SymMatrix SymMatrix::from_entries(int dim, const std::vector<double>& entries,
                                  const NumericSettings& settings) {
  if (static_cast<size_t>(dim) * dim != entries.size()) {
    throw NumericError("SymMatrix: entry count does not match dimension");
  }
  for (double x : entries) {
    if (!std::isfinite(x)) throw NumericError("SymMatrix: non-finite entry");
  }
  for (int i = 0; i < dim; ++i) {
    for (int j = i + 1; j < dim; ++j) {
      const double aij = entries[static_cast<size_t>(i) * dim + j];
      const double aji = entries[static_cast<size_t>(j) * dim + i];
      if (std::abs(aij - aji) > settings.symmetry_tol * std::max(1.0, std::abs(aij))) {
        throw NumericError("SymMatrix: entries are not symmetric at (" + std::to_string(i) + "," +
                           std::to_string(j) + ")");
      }
    }
  }
  SymMatrix m(dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      const double v = 0.5 * (entries[static_cast<size_t>(i) * dim + j] +
                              entries[static_cast<size_t>(j) * dim + i]);
      m.set(i, j, v);
    }
  }
  return m;
}

Vector SymMatrix::apply(const Vector& v) const {
  if (static_cast<int>(v.size()) != dim_) throw NumericError("SymMatrix::apply: dimension mismatch");
  Vector out(dim_, 0.0);
  for (int i = 0; i < dim_; ++i) {
    const double* row = a_.data() + static_cast<size_t>(i) * dim_;
    double s = 0.0;
    for (int j = 0; j < dim_; ++j) s += row[j] * v[j];
    out[i] = s;
  }
  return out;
}

double SymMatrix::trace() const {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) s += (*this)(i, i);
  return s;
}

double SymMatrix::frobenius() const {
  double s = 0.0;
  for (double x : a_) s += x * x;
  return std::sqrt(s);
}

bool SymMatrix::is_identity(double tol) const {
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) {
      const double want = i == j ? 1.0 : 0.0;
      if (std::abs((*this)(i, j) - want) > tol) return false;
    }
  }
  return true;
}

namespace {

double offdiag_norm(const Matrix& a) {
  double s = 0.0;
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = i + 1; j < a.cols(); ++j) s += a(i, j) * a(i, j);
  }
  return std::sqrt(2.0 * s);
}

}  // namespace

SpectralDecomposition sym_eig(const SymMatrix& input, const NumericSettings& settings) {
  const int d = input.dim();
  Matrix a(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) a(i, j) = input(i, j);
  }
  Matrix q = Matrix::identity(d);

  // Cyclic-by-row Jacobi on the upper triangle, with the usual small-element
  // threshold for the opening sweeps so early rotations are not wasted on
  // negligible entries.
  const double fro = input.frobenius();
  double off = offdiag_norm(a);
  if (fro > 0.0) {
    bool converged = off <= settings.jacobi_tol * fro;
    auto rotate = [&](double& x, double& y, double s, double tau) {
      const double gx = x;
      const double gy = y;
      x = gx - s * (gy + tau * gx);
      y = gy + s * (gx - tau * gy);
    };
    for (int sweep = 0; sweep < settings.jacobi_max_sweeps && !converged; ++sweep) {
      const double thresh = sweep < 3 ? 0.2 * off / (static_cast<double>(d) * d) : 0.0;
      for (int p = 0; p < d - 1; ++p) {
        for (int r = p + 1; r < d; ++r) {
          const double apr = a(p, r);
          const double g = 100.0 * std::abs(apr);
          if (sweep >= 3 && std::abs(a(p, p)) + g == std::abs(a(p, p)) &&
              std::abs(a(r, r)) + g == std::abs(a(r, r))) {
            a(p, r) = 0.0;
            continue;
          }
          if (std::abs(apr) <= thresh) continue;
          const double theta = (a(r, r) - a(p, p)) / (2.0 * apr);
          const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          const double c = 1.0 / std::sqrt(t * t + 1.0);
          const double s = t * c;
          const double tau = s / (1.0 + c);

          a(p, p) -= t * apr;
          a(r, r) += t * apr;
          a(p, r) = 0.0;
          for (int j = 0; j < p; ++j) rotate(a(j, p), a(j, r), s, tau);
          for (int j = p + 1; j < r; ++j) rotate(a(p, j), a(j, r), s, tau);
          for (int j = r + 1; j < d; ++j) rotate(a(p, j), a(r, j), s, tau);
          for (int i = 0; i < d; ++i) rotate(q(i, p), q(i, r), s, tau);
        }
      }
      off = 0.0;
      for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) off += a(i, j) * a(i, j);
      }
      off = std::sqrt(2.0 * off);
      converged = off <= settings.jacobi_tol * fro;
    }
    if (!converged) {
      throw NumericError("sym_eig: Jacobi did not converge after " +
                         std::to_string(settings.jacobi_max_sweeps) +
                         " sweeps; off-diagonal residual " + std::to_string(off));
    }
  }

  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) > a(j, j); });

  SpectralDecomposition dec;
  dec.eigenvalues.resize(d);
  dec.eigenvectors = Matrix(d, d);
  for (int j = 0; j < d; ++j) {
    dec.eigenvalues[j] = a(order[j], order[j]);
    for (int i = 0; i < d; ++i) dec.eigenvectors(i, j) = q(i, order[j]);
  }
  return dec;
}

SymMatrix psd_pow(const SymMatrix& a, double exponent, const NumericSettings& settings) {
  SpectralDecomposition dec = sym_eig(a, settings);
  const int d = a.dim();
  Vector lambda = dec.eigenvalues;
  for (double& l : lambda) {
    if (l < settings.psd_clamp) {
      throw NumericError("psd_pow: not PSD (eigenvalue " + std::to_string(l) + ")");
    }
    if (l < 0.0) l = 0.0;
  }
  if (exponent < 0.0) {
    const double lmin = lambda.back();
    if (lmin <= settings.invert_tol) {
      throw NumericError("psd_pow: not invertible (smallest eigenvalue " + std::to_string(lmin) +
                         ")");
    }
  }
  Vector powed(d);
  for (int i = 0; i < d; ++i) {
    powed[i] = lambda[i] == 0.0 ? 0.0 : std::pow(lambda[i], exponent);
  }
  SymMatrix out(d);
  const Matrix& q = dec.eigenvectors;
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) s += q(i, k) * powed[k] * q(j, k);
      out.set(i, j, s);
    }
  }
  return out;
}

double quadratic_form(const SymMatrix& a, const Vector& v) {
  if (static_cast<int>(v.size()) != a.dim()) {
    throw NumericError("quadratic_form: dimension mismatch");
  }
  const int d = a.dim();
  double s = 0.0;
  for (int i = 0; i < d; ++i) {
    const double* row = a.data().data() + static_cast<size_t>(i) * d;
    double r = 0.0;
    for (int j = 0; j < d; ++j) r += row[j] * v[j];
    s += v[i] * r;
  }
  return s;
}

double operator_norm_sym(const SymMatrix& a, const NumericSettings& settings) {
  SpectralDecomposition dec = sym_eig(a, settings);
  double m = 0.0;
  for (double l : dec.eigenvalues) m = std::max(m, std::abs(l));
  return m;
}

}  // namespace covapprox
