#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mcvar/configurations.hpp"
#include "mcvar/market.hpp"

namespace mcvar {

/// Finitely many states with P-probabilities p_i and density values rho_i = dP~/dP,
/// sorted ascending in rho.
struct DiscreteMarket {
  std::vector<double> rho;
  std::vector<double> p;

  std::size_t size() const noexcept { return rho.size(); }
  double ptilde(std::size_t i) const noexcept { return rho[i] * p[i]; }
  double ess_sup() const noexcept { return rho.empty() ? 0.0 : rho.back(); }

  /// Sum p = 1, sum p rho = 1, ascending rho; throws ValidationError otherwise.
  void validate() const;
};

/// Where each equal-probability bucket of rho puts its atom.
enum class AtomPlacement {
  /// E[rho | bucket]. Every bucket-measurable payoff then has the same P- and
  /// P~-expectations as in the continuous model, so the discrete optimum is the
  /// continuous one restricted to such payoffs and can only be worse.
  ConditionalMean,
  /// The bucket median, exp(-v^2/2 + v N^{-1}((i + 1/2)/n)). Thins the upper tail.
  BucketMedian,
};

/// n equally likely atoms for ln rho ~ N(-v^2/2, v^2), v = theta_sqrt_T, rescaled
/// so that sum p_i rho_i = 1 holds to rounding.
DiscreteMarket discretize(std::size_t n, double theta_sqrt_T,
                          AtomPlacement placement = AtomPlacement::ConditionalMean);
DiscreteMarket discretize(std::size_t n, const MarketParams& market,
                          AtomPlacement placement = AtomPlacement::ConditionalMean);

/// Discrete step-1 value v(c) = min E[(c - X)^+] over atomwise payoffs with
/// x_d <= X <= x_u, E~[X] = x_r and E[X] >= z (when z is set).
struct Step1Result {
  double value;
  std::vector<double> payoff;
};
Step1Result lp_step1(const DiscreteMarket& dm, double c, const ProblemSpec& spec, double x_r);

struct LpMeanCvar {
  double cvar;
  double c;  ///< minimizing c of (v(c) - lambda c) / lambda (a value-at-risk level)
  std::vector<double> payoff;
  std::size_t lp_solves = 0;
};

/// Exact discrete Mean-CVaR optimum, min_c (v(c) - lambda c)/lambda. g(c) = v(c) - lambda c
/// is convex and piecewise linear, so a cutting-plane search on secant slopes closes the
/// gap between the best value and the supporting-line lower bound. Throws
/// InfeasibleError (with the phase-1 certificate) when z exceeds the discrete z_bar.
LpMeanCvar lp_mean_cvar(const DiscreteMarket& dm, const ProblemSpec& spec, double x_r);

/// The same optimum from the joint Rockafellar-Uryasev LP over (X_i, s_i, c) with
/// n + 2 rows. Dense, so meant for small n cross-checks.
LpMeanCvar lp_mean_cvar_joint(const DiscreteMarket& dm, const ProblemSpec& spec, double x_r);

/// Level-set layout of an atomwise payoff, atoms in ascending rho.
struct StructureSummary {
  std::size_t n_high = 0;  ///< atoms at x_u
  std::size_t n_mid = 0;   ///< atoms at the common interior level
  std::size_t n_low = 0;   ///< atoms at x_d
  std::size_t n_odd = 0;   ///< interior atoms off the common level
  double mid_level = 0.0;
  bool monotone = false;   ///< payoff nonincreasing in rho
  bool three_level = false;  ///< x_u block, interior block, x_d block, <= 1 odd atom per seam
  std::string pattern;     ///< run-length code, e.g. "U120 M3900 o1 L75"
};

StructureSummary summarize_structure(const std::vector<double>& payoff, const ProblemSpec& spec);

}  // namespace mcvar
