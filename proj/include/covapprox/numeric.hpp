#pragma once

#include <stdexcept>
#include <string>

namespace covapprox {

// Single knob record for the numerical tolerances used across the library.
// Every routine that needs a tolerance takes one of these (defaulted), so the
// values below are the library-wide defaults.
struct NumericSettings {
  // |A_ij - A_ji| <= symmetry_tol * max(1, |A_ij|) for accepted input matrices.
  double symmetry_tol = 1e-12;
  // Eigenvalues in [psd_clamp, 0] are clamped to zero; anything below is an error.
  double psd_clamp = -1e-9;
  // Smallest eigenvalue that still counts as invertible for negative matrix powers.
  double invert_tol = 1e-12;
  // Cyclic Jacobi sweep cap and off-diagonal convergence target (relative to ||A||_F).
  int jacobi_max_sweeps = 64;
  double jacobi_tol = 1e-14;
};

class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Standard normal CDF, routed through std::erfc; absolute error is far below
// the 1e-7 the verifier contracts require. Every Phi-based quantity in the
// library goes through this one function.
double normal_cdf(double x);

// Standard normal density.
double normal_pdf(double x);

// Inverse CDF by bisection on normal_cdf, absolute accuracy ~1e-13.
double normal_quantile(double p);

// Median of |g| for a standard gaussian g: the alpha of the slab bodies.
// Solves Phi(alpha) = 3/4; approximately 0.6744897501960817.
double gaussian_abs_median();

}  // namespace covapprox
