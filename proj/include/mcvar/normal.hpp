#pragma once

namespace mcvar {

/// Standard normal CDF, evaluated through erfc so both tails keep full relative precision.
double norm_cdf(double x) noexcept;

double norm_pdf(double x) noexcept;

/// Inverse of norm_cdf. Returns -inf at p = 0 and +inf at p = 1.
double norm_quantile(double p);

}  // namespace mcvar
