#pragma once

#include <vector>

#include "covapprox/numeric.hpp"

namespace covapprox {

using Vector = std::vector<double>;

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& a);
Vector scaled(const Vector& a, double c);

// Dense row-major matrix; only what the spectral code needs.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, 0.0) {}
  static Matrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }
  double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  const std::vector<double>& data() const { return a_; }

  Vector apply(const Vector& v) const;

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

// Symmetric d x d matrix with full row-major storage. Construction from raw
// entries enforces the symmetry invariant (within NumericSettings::symmetry_tol)
// and then symmetrizes exactly; the mutating set() writes both triangles.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int dim) : dim_(dim), a_(static_cast<size_t>(dim) * dim, 0.0) {}
  static SymMatrix identity(int dim);
  static SymMatrix diagonal(const Vector& diag);
  // Validates |A_ij - A_ji| and finiteness, then stores (A + A^T)/2.
  static SymMatrix from_entries(int dim, const std::vector<double>& entries,
                                const NumericSettings& settings = {});

  int dim() const { return dim_; }
  double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * dim_ + j]; }
  void set(int i, int j, double v) {
    a_[static_cast<size_t>(i) * dim_ + j] = v;
    a_[static_cast<size_t>(j) * dim_ + i] = v;
  }
  void add(int i, int j, double v) {
    a_[static_cast<size_t>(i) * dim_ + j] += v;
    if (i != j) a_[static_cast<size_t>(j) * dim_ + i] += v;
  }
  const std::vector<double>& data() const { return a_; }

  Vector apply(const Vector& v) const;
  double trace() const;
  double frobenius() const;
  bool is_identity(double tol = 0.0) const;

 private:
  int dim_ = 0;
  std::vector<double> a_;
};

// Eigenvalues sorted descending; eigenvectors() holds the matching
// orthonormal eigenvectors as columns, so A = Q diag(lambda) Q^T.
struct SpectralDecomposition {
  Vector eigenvalues;
  Matrix eigenvectors;
};

// Cyclic Jacobi rotations; throws NumericError naming the off-diagonal
// residual if the sweep cap is exceeded.
SpectralDecomposition sym_eig(const SymMatrix& a, const NumericSettings& settings = {});

// Q diag(lambda^exponent) Q^T. Eigenvalues in [psd_clamp, 0] are clamped to
// zero; below psd_clamp throws "not PSD". Negative exponents additionally
// require min eigenvalue > invert_tol ("not invertible" otherwise).
SymMatrix psd_pow(const SymMatrix& a, double exponent, const NumericSettings& settings = {});

// v^T A v.
double quadratic_form(const SymMatrix& a, const Vector& v);

// max |eigenvalue|, via the full symmetric eigendecomposition.
double operator_norm_sym(const SymMatrix& a, const NumericSettings& settings = {});

}  // namespace covapprox
