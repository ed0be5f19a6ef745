#pragma once

// Shared fixtures: the Black-Scholes market of the reference example and a
// non-lognormal density model.

#include <algorithm>
#include <cmath>

#include "mcvar/configurations.hpp"
#include "mcvar/market.hpp"

namespace mcvar::test {

inline MarketParams table_market() { return {0.05, 0.2, 0.1, 10.0, 2.0}; }

inline ProblemSpec table_spec(double x_u, std::optional<double> z) {
  ProblemSpec p;
  p.x_d = 0.0;
  p.x_u = x_u;
  p.x_0 = 10.0;
  p.lambda = 0.05;
  p.z = z;
  return p;
}

inline double table_x_r() { return 10.0 * std::exp(0.1); }

/// rho uniform on [0, 2] under P: bounded density, ess sup 2.
class UniformRnd final : public RndModel {
 public:
  double prob_above(double u) const override { return 1.0 - 0.5 * a(u); }
  double prob_below(double u) const override { return 0.5 * a(u); }
  double tilde_prob_above(double u) const override { return 1.0 - 0.25 * a(u) * a(u); }
  double tilde_prob_below(double u) const override { return 0.25 * a(u) * a(u); }
  double log_quantile_above(double q) const override { return std::log(2.0 * (1.0 - q)); }
  double log_quantile_below(double q) const override { return std::log(2.0 * q); }
  double log_tilde_quantile_above(double q) const override { return std::log(2.0 * std::sqrt(1.0 - q)); }
  double log_tilde_quantile_below(double q) const override { return std::log(2.0 * std::sqrt(q)); }
  double ess_sup() const override { return 2.0; }
  bool is_degenerate() const override { return false; }
  LogRange log_bracket() const override { return {-700.0, std::log(2.0)}; }

 private:
  static double a(double u) { return std::clamp(std::exp(u), 0.0, 2.0); }
};

}  // namespace mcvar::test
