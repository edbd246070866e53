#include "covapprox/numeric.hpp"

#include <cmath>

namespace covapprox {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_pdf(double x) {
  static const double inv_sqrt_2pi = 0.3989422804014327;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw NumericError("normal_quantile: p must lie in (0,1), got " + std::to_string(p));
  }
  double lo = -40.0, hi = 40.0;
  // 160 halvings push the bracket width below 1e-46; the doubles saturate
  // to adjacent representables long before that.
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double gaussian_abs_median() {
  static const double alpha = normal_quantile(0.75);
  return alpha;
}

}  // namespace covapprox
