#pragma once

#include <vector>

#include "covapprox/linalg.hpp"

namespace covapprox {

// The natural competitor: the empirical covariance matrix and its ellipsoid
// {v : v^T T_hat v <= 1}.
struct EmpiricalEllipsoid {
  SymMatrix t_hat;
  int sample_count = 0;
};

EmpiricalEllipsoid empirical_covariance(const std::vector<Vector>& samples);

// Radial function of the empirical ellipsoid: 1/sqrt(u^T T_hat u), +infinity
// on the kernel.
double radial_empirical(const EmpiricalEllipsoid& e, const Vector& u);

// ||Id - N^{-1} sum Y_i Y_i^T||_{2->2} for the isotropized samples
// Y_i = T^{-1/2} X_i, via the full symmetric eigendecomposition.
double isotropic_deviation(const std::vector<Vector>& samples, const SymMatrix& t,
                           const NumericSettings& settings = {});

// The measured operator deviation next to the three sample-complexity terms
//   max_norm:   N^{-1} max_i ||Y_i||_2^2
//   moment:     (d/N)^{1-2/p} log^4(eN/d)
//   truncation: (d/N)^{1-2/min(4,p)}
// computed verbatim from (d, N, p) and the isotropized samples.
struct DeviationDiagnostics {
  double operator_deviation = 0.0;
  double max_norm_term = 0.0;
  double moment_term = 0.0;
  double truncation_term = 0.0;
  double p = 0.0;
};

DeviationDiagnostics tikhomirov_bound_terms(const std::vector<Vector>& samples, const SymMatrix& t,
                                            double p, const NumericSettings& settings = {});

}  // namespace covapprox
