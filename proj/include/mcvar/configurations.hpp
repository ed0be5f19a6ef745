#pragma once

#include <optional>
#include <string>
#include <variant>

#include "mcvar/market.hpp"

namespace mcvar {

/// Static problem data. x_u may be +inf; z is absent in pure CVaR mode.
struct ProblemSpec {
  double x_d = 0.0;     ///< lower bound on the portfolio value
  double x_u = kInf;    ///< upper bound (may be +inf)
  double x_0 = 0.0;     ///< initial capital
  double lambda = 0.05; ///< CVaR confidence level, in (0, 1)
  std::optional<double> z;  ///< expected-return target

  /// Requires -inf < x_d < x_0 <= x_r < x_u <= +inf and lambda in (0, 1).
  void validate(double x_r) const;
};

/// x_r = x_0 e^{rT}, the capital the terminal payoff must carry under P~.
double capital_target(const ProblemSpec& spec, const MarketParams& market);

// Terminal payoffs, all functions of rho through thresholds.
// Sets: A = {rho > a}, B = {b <= rho <= a}, D = {rho < b}.

struct Constant {
  double level;
};

/// low on {rho > a}, mid on {rho <= a}.
struct TwoLineLowMid {
  double log_a;
  double low;
  double mid;
};

/// mid on {rho >= b}, high on {rho < b}.
struct TwoLineMidUp {
  double log_b;
  double mid;
  double high;
};

/// low on {rho > a}, high on {rho < a}: the Bar-System shape.
struct TwoLineLowUp {
  double log_a;
  double low;
  double high;
};

/// low on A, mid on B, high on D.
struct ThreeLine {
  double log_a;
  double log_b;
  double low;
  double mid;
  double high;
};

using PayoffConfig = std::variant<Constant, TwoLineLowMid, TwoLineMidUp, TwoLineLowUp, ThreeLine>;

/// Any config written in Three-Line form. Empty sets use log_a = +inf or log_b = -inf.
struct Levels {
  double log_a;
  double log_b;
  double low;
  double mid;
  double high;
};

Levels levels_of(const PayoffConfig& cfg);

std::string kind_name(const PayoffConfig& cfg);

/// Terminal value of the payoff in a state with ln rho = log_rho.
double payoff_at(const PayoffConfig& cfg, double log_rho);

/// Probabilities of A, B, D under P and under P~.
struct EventProbs {
  double pA, pB, pD;
  double tA, tB, tD;
};

EventProbs event_probs(const RndModel& model, const Levels& lv);

/// E[X]. +inf if an infinite level carries positive probability.
double expected_return(const RndModel& model, const PayoffConfig& cfg);

/// E~[X]. +inf if an infinite level carries positive probability.
double capital(const RndModel& model, const PayoffConfig& cfg);

/// E[(x - X)^+].
double expected_shortfall(const RndModel& model, const PayoffConfig& cfg, double x);

/// CVaR_lambda(X) = (1/lambda) min_c (E[(c - X)^+] - lambda c). The dual objective is
/// convex and piecewise linear with kinks at the payoff levels, so the minimum over
/// the (at most three) levels is exact.
double cvar(const RndModel& model, const PayoffConfig& cfg, double lambda);

}  // namespace mcvar
