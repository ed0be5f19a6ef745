#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>

#include "mcvar/configurations.hpp"
#include "mcvar/market.hpp"

namespace mcvar {

/// Branches of the Mean-CVaR case analysis.
enum class CaseLabel {
  MoneyMarketOptimal,
  NonexistentAtMoneyMarketLevel,
  BarOptimal,
  StarOptimal,
  DoubleStarOptimal,
  NonexistentAtStarLevel,
  InfeasibleReturnTarget,
};

std::string to_string(CaseLabel label);

/// True for the branches that come with an optimal payoff.
bool is_optimal(CaseLabel label) noexcept;

struct Diagnostics {
  std::optional<double> a_bar, z_bar;
  std::optional<double> a_star, x_star, z_star;
  std::optional<double> x_z1, x_z2;
};

struct Solution {
  CaseLabel case_label = CaseLabel::InfeasibleReturnTarget;
  std::optional<PayoffConfig> config;  ///< present iff case_label is an optimal branch
  double cvar = 0.0;                   ///< minimum, or infimum when no optimizer exists
  Diagnostics diagnostics;
  std::string note;
};

struct BarSystem {
  double log_a;  ///< ln a_bar; +inf when x_u = +inf
  double z;      ///< z_bar, the largest attainable expected return
};

struct StarSystem {
  double log_a;
  double x;
  double z;            ///< z*; equals z_bar when the Bar-System dominates
  bool bar_dominates;  ///< x* >= x_u: the capped two-line solution is the Bar-System
};

struct Thresholds {
  double log_a;
  double log_b;
};

struct DoubleStar {
  double log_a;
  double log_b;
  double x;
  bool collapsed_to_bar;  ///< z == z_bar: a = b = a_bar
};

struct ShortfallValue {
  double value;
  PayoffConfig config;
};

/// Closed-form threshold systems of the static Mean-CVaR problem
///
///   min CVaR_lambda(X)  s.t.  E[X] >= z,  E~[X] = x_r,  x_d <= X <= x_u,
///
/// for a continuous law of rho = dP~/dP. Every 1-D solve runs on a bracket whose
/// sign change follows from a monotonicity property of the threshold maps and is
/// checked before iterating. Immutable after construction; all methods are const.
class StaticSolver {
 public:
  StaticSolver(std::shared_ptr<const RndModel> model, ProblemSpec spec, double x_r);
  StaticSolver(const MarketParams& market, ProblemSpec spec);

  const RndModel& model() const noexcept { return *model_; }
  const ProblemSpec& spec() const noexcept { return spec_; }
  double x_r() const noexcept { return x_r_; }

  /// a_bar solves x_d P~(rho > a) + x_u P~(rho < a) = x_r; z_bar = E of that payoff.
  /// With x_u = +inf returns {nan, +inf}.
  BarSystem solve_bar() const;

  /// Two-line minimizer of CVaR under the capital constraint alone. Requires
  /// ess sup rho > 1/lambda (otherwise MisuseError).
  StarSystem solve_star() const;

  /// Mid levels where the degenerate two-line payoffs meet E[X] = z exactly:
  /// x_z1 on [x_d, x_r] for x 1_B + x_u 1_D, x_z2 on [x_r, x_u] for x_d 1_A + x 1_B.
  double x_z1(double z) const;
  double x_z2(double z) const;

  /// (a, b) with b <= a_bar <= a meeting both the return and the capital constraint
  /// for the three-line payoff with mid level x. Requires x in (x_z1(z), x_z2(z)).
  Thresholds solve_three_line_given_x(double x, double z) const;

  /// d/dx (v(x) - lambda x) = P(A) + (P~(B) - b P(B)) / (a - b) - lambda at the
  /// thresholds of solve_three_line_given_x.
  double euler_residual(double x, double z) const;

  /// Three-line payoff satisfying the return, capital and Euler conditions.
  /// `x_hint` narrows the initial bracket when the previous solution is nearby.
  DoubleStar solve_double_star(double z, std::optional<double> x_hint = std::nullopt) const;

  /// Step-1 value v(x) = min E[(x - X)^+] under both constraints, and a minimizer.
  ShortfallValue v_of_x(double x, double z) const;

  /// Full case dispatch for the return target z (spec().z when omitted; no target
  /// means pure CVaR minimization). `x_hint` is passed to solve_double_star.
  Solution solve(std::optional<double> z = std::nullopt,
                 std::optional<double> x_hint = std::nullopt) const;

  /// Feasible payoff within eps of the infimum in the two nonexistence branches.
  PayoffConfig epsilon_suboptimal(double eps, std::optional<double> z = std::nullopt) const;

  /// CVaR of the Star-System, -x_r + (x* - x_d)(P(A*) - lambda P~(A*)) / lambda.
  double star_cvar(const StarSystem& star) const;

 private:
  bool bounded_above() const noexcept { return std::isfinite(spec_.x_u); }
  bool exceeds_one_over_lambda() const;
  double tolerance(double scale) const noexcept;

  // Thresholds at the closed ends of [x_z1, x_z2] are the degenerate two-line ones.
  Thresholds three_line_thresholds(double x, double z, double xz1, double xz2) const;
  double euler_at(double x, const Thresholds& t) const;
  double log_b_dc1(double x) const;  // capital constraint of x 1_B + x_u 1_D
  double log_a_dc2(double x) const;  // capital constraint of x_d 1_A + x 1_B
  double two_line_euler(double log_a) const;

  std::shared_ptr<const RndModel> model_;
  ProblemSpec spec_;
  double x_r_;
};

}  // namespace mcvar
