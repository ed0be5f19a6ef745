#include "mcvar/normal.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "mcvar/errors.hpp"

namespace mcvar {

double norm_cdf(double x) noexcept {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double norm_pdf(double x) noexcept {
  constexpr double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double norm_quantile(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError("norm_quantile: probability outside [0, 1]");
  }
  if (p == 0.0) return -std::numeric_limits<double>::infinity();
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  // Work from the nearer tail so small upper-tail masses are not lost in 1 - p.
  if (p > 0.5) {
    return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * (1.0 - p));
  }
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

}  // namespace mcvar
