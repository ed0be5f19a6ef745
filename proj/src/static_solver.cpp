#include "mcvar/static_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mcvar/errors.hpp"
#include "mcvar/roots.hpp"

namespace mcvar {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Relative gap below which a Three-Line payoff is treated as the Bar-System.
constexpr double kCollapseGap = 1e-9;

double clamp01(double q) { return std::clamp(q, 0.0, 1.0); }

// Ratio of the P~ and P masses of {rho < a}; 0 when both vanish.
double tilde_ratio_below(const RndModel& m, double log_a) {
  const double p = m.prob_below(log_a);
  if (p <= 0.0) return 0.0;
  return m.tilde_prob_below(log_a) / p;
}

}  // namespace

std::string to_string(CaseLabel label) {
  switch (label) {
    case CaseLabel::MoneyMarketOptimal: return "MoneyMarketOptimal";
    case CaseLabel::NonexistentAtMoneyMarketLevel: return "NonexistentAtMoneyMarketLevel";
    case CaseLabel::BarOptimal: return "BarOptimal";
    case CaseLabel::StarOptimal: return "StarOptimal";
    case CaseLabel::DoubleStarOptimal: return "DoubleStarOptimal";
    case CaseLabel::NonexistentAtStarLevel: return "NonexistentAtStarLevel";
    case CaseLabel::InfeasibleReturnTarget: return "InfeasibleReturnTarget";
  }
  return "Unknown";
}

bool is_optimal(CaseLabel label) noexcept {
  switch (label) {
    case CaseLabel::MoneyMarketOptimal:
    case CaseLabel::BarOptimal:
    case CaseLabel::StarOptimal:
    case CaseLabel::DoubleStarOptimal:
      return true;
    default:
      return false;
  }
}

StaticSolver::StaticSolver(std::shared_ptr<const RndModel> model, ProblemSpec spec, double x_r)
    : model_(std::move(model)), spec_(spec), x_r_(x_r) {
  if (!model_) throw ValidationError("model", "missing Radon-Nikodym model");
  spec_.validate(x_r_);
}

StaticSolver::StaticSolver(const MarketParams& market, ProblemSpec spec)
    : StaticSolver((market.validate(), make_rnd_model(market)), spec, capital_target(spec, market)) {}

double StaticSolver::tolerance(double scale) const noexcept {
  return 1e-10 * std::max(1.0, std::abs(scale));
}

bool StaticSolver::exceeds_one_over_lambda() const {
  // ess sup == 1/lambda is grouped with the "<=" branch.
  return model_->ess_sup() > 1.0 / spec_.lambda;
}

BarSystem StaticSolver::solve_bar() const {
  if (!bounded_above()) return {kNaN, kInf};
  if (model_->is_degenerate()) return {0.0, x_r_};
  const double x_d = spec_.x_d;
  const double x_u = spec_.x_u;
  // P~(rho < a) + P~(rho > a) = 1 turns the capital constraint into a quantile.
  const double log_a = model_->log_tilde_quantile_below((x_r_ - x_d) / (x_u - x_d));
  const double residual =
      x_d * model_->tilde_prob_above(log_a) + x_u * model_->tilde_prob_below(log_a) - x_r_;
  if (std::abs(residual) > 1e-10 * (x_u - x_d)) {
    throw SolverError("solve_bar: capital residual " + std::to_string(residual));
  }
  const double z = x_d * model_->prob_above(log_a) + x_u * model_->prob_below(log_a);
  return {log_a, z};
}

double StaticSolver::two_line_euler(double log_a) const {
  // P(A) + P~(A^c) / a - lambda, written so that a huge 1/a never meets a zero mass.
  const double tilde_below = model_->tilde_prob_below(log_a);
  const double ratio = tilde_below > 0.0 ? std::exp(std::log(tilde_below) - log_a) : 0.0;
  return model_->prob_above(log_a) + ratio - spec_.lambda;
}

StarSystem StaticSolver::solve_star() const {
  if (!exceeds_one_over_lambda()) {
    throw MisuseError("solve_star: requires ess sup rho > 1/lambda");
  }
  const LogRange range = model_->log_bracket();
  // h(a) = P(A) + P~(A^c)/a - lambda decreases strictly from 1 - lambda to -lambda.
  const double log_a = find_root([this](double u) { return two_line_euler(u); }, range.lo,
                                 std::min(range.hi, std::log(model_->ess_sup())),
                                 "solve_star: Euler condition");
  const double t_above = model_->tilde_prob_above(log_a);
  const double t_below = model_->tilde_prob_below(log_a);
  const double x_star = (x_r_ - spec_.x_d * t_above) / t_below;

  StarSystem star{log_a, x_star, 0.0, false};
  if (bounded_above()) {
    const BarSystem bar = solve_bar();
    if (two_line_euler(bar.log_a) <= 0.0) {
      star.bar_dominates = true;
      star.z = bar.z;
      return star;
    }
  }
  star.z = spec_.x_d * model_->prob_above(log_a) + x_star * model_->prob_below(log_a);
  return star;
}

double StaticSolver::star_cvar(const StarSystem& star) const {
  const double lambda = spec_.lambda;
  if (star.bar_dominates) {
    const BarSystem bar = solve_bar();
    return -x_r_ + (spec_.x_u - spec_.x_d) *
                       (model_->prob_above(bar.log_a) - lambda * model_->tilde_prob_above(bar.log_a)) /
                       lambda;
  }
  return -x_r_ + (star.x - spec_.x_d) *
                     (model_->prob_above(star.log_a) - lambda * model_->tilde_prob_above(star.log_a)) /
                     lambda;
}

double StaticSolver::log_b_dc1(double x) const {
  return model_->log_tilde_quantile_below(clamp01((x_r_ - x) / (spec_.x_u - x)));
}

double StaticSolver::log_a_dc2(double x) const {
  return model_->log_tilde_quantile_above(clamp01((x - x_r_) / (x - spec_.x_d)));
}

double StaticSolver::x_z1(double z) const {
  if (!bounded_above()) throw MisuseError("x_z1: requires a finite upper bound");
  const BarSystem bar = solve_bar();
  if (z < x_r_ - tolerance(x_r_) || z > bar.z + tolerance(bar.z)) {
    throw InfeasibleError("x_z1: z outside [x_r, z_bar]");
  }
  if (z <= x_r_) return x_r_;
  if (z >= bar.z) return spec_.x_d;
  const double x_u = spec_.x_u;
  // z(x) = x + (x_u - x) P(rho < b_x) decreases from z_bar at x_d to x_r at x_r.
  auto excess = [&](double x) { return x + (x_u - x) * model_->prob_below(log_b_dc1(x)) - z; };
  return find_root(excess, spec_.x_d, x_r_, "x_z1",
                   {.abs_tol = 1e-13 * std::max(1.0, std::abs(x_r_))});
}

double StaticSolver::x_z2(double z) const {
  if (!bounded_above()) throw MisuseError("x_z2: requires a finite upper bound");
  const BarSystem bar = solve_bar();
  if (z < x_r_ - tolerance(x_r_) || z > bar.z + tolerance(bar.z)) {
    throw InfeasibleError("x_z2: z outside [x_r, z_bar]");
  }
  if (z <= x_r_) return x_r_;
  if (z >= bar.z) return spec_.x_u;
  const double x_d = spec_.x_d;
  // z(x) = x - (x - x_d) P(rho > a_x) increases from x_r at x_r to z_bar at x_u.
  auto excess = [&](double x) { return x - (x - x_d) * model_->prob_above(log_a_dc2(x)) - z; };
  return find_root(excess, x_r_, spec_.x_u, "x_z2",
                   {.abs_tol = 1e-13 * std::max(1.0, std::abs(spec_.x_u))});
}

Thresholds StaticSolver::three_line_thresholds(double x, double z, double xz1, double xz2) const {
  if (x <= xz1) return {kInf, log_b_dc1(xz1)};
  if (x >= xz2) return {log_a_dc2(xz2), -kInf};

  const BarSystem bar = solve_bar();
  if (z >= bar.z - tolerance(bar.z)) return {bar.log_a, bar.log_a};

  const double x_d = spec_.x_d;
  const double x_u = spec_.x_u;
  // Capital constraint solved for a given b:
  //   (x - x_d) P~(rho > a) = x - x_r + (x_u - x) P~(rho < b).
  auto log_a_of = [&](double log_b) {
    const double q = (x - x_r_ + (x_u - x) * model_->tilde_prob_below(log_b)) / (x - x_d);
    return model_->log_tilde_quantile_above(clamp01(q));
  };
  // Return along the capital curve; increases with b up to z_bar at b = a_bar.
  auto excess = [&](double log_b) {
    const double log_a = log_a_of(log_b);
    return x + (x_d - x) * model_->prob_above(log_a) + (x_u - x) * model_->prob_below(log_b) - z;
  };
  const double lo = x < x_r_ ? log_b_dc1(x) : model_->log_bracket().lo;
  const double log_b = find_root(excess, lo, bar.log_a, "three-line return constraint");
  return {log_a_of(log_b), log_b};
}

Thresholds StaticSolver::solve_three_line_given_x(double x, double z) const {
  if (!bounded_above()) throw MisuseError("solve_three_line_given_x: requires x_u < inf");
  const double xz1 = x_z1(z);
  const double xz2 = x_z2(z);
  if (!(x > xz1 && x < xz2)) {
    throw SolverError("solve_three_line_given_x: x outside (x_z1, x_z2) = (" +
                      std::to_string(xz1) + ", " + std::to_string(xz2) + ")");
  }
  return three_line_thresholds(x, z, xz1, xz2);
}

double StaticSolver::euler_at(double /*x*/, const Thresholds& t) const {
  const double pA = model_->prob_above(t.log_a);
  if (t.log_a == kInf) return pA - spec_.lambda;
  const double a = std::exp(t.log_a);
  const double b = t.log_b == -kInf ? 0.0 : std::exp(t.log_b);
  if (!(a - b > kCollapseGap * a)) return pA - spec_.lambda;
  const double pB = model_->prob_between(t.log_b, t.log_a);
  const double tB = model_->tilde_prob_between(t.log_b, t.log_a);
  return pA + (tB - b * pB) / (a - b) - spec_.lambda;
}

double StaticSolver::euler_residual(double x, double z) const {
  return euler_at(x, solve_three_line_given_x(x, z));
}

DoubleStar StaticSolver::solve_double_star(double z, std::optional<double> x_hint) const {
  if (!bounded_above()) throw MisuseError("solve_double_star: requires x_u < inf");
  if (!exceeds_one_over_lambda()) {
    throw MisuseError("solve_double_star: requires ess sup rho > 1/lambda");
  }
  const StarSystem star = solve_star();
  const BarSystem bar = solve_bar();
  if (z > bar.z + tolerance(bar.z)) throw InfeasibleError("solve_double_star: z above z_bar");
  if (z <= star.z) throw MisuseError("solve_double_star: z <= z*, use the Star/Bar branch");
  if (z >= bar.z - tolerance(bar.z)) return {bar.log_a, bar.log_a, kNaN, true};

  const double xz1 = x_z1(z);
  const double xz2 = x_z2(z);
  auto residual = [&](double x) { return euler_at(x, three_line_thresholds(x, z, xz1, xz2)); };
  const RootOptions opt{.abs_tol = 1e-12 * std::max(1.0, std::abs(xz2))};

  double x = kNaN;
  if (x_hint && *x_hint > xz1 && *x_hint < xz2) {
    const double width = 1e-3 * (xz2 - xz1);
    const double lo = std::max(xz1, *x_hint - width);
    const double hi = std::min(xz2, *x_hint + width);
    const double r_lo = residual(lo);
    const double r_hi = residual(hi);
    if (r_lo < 0.0 && r_hi > 0.0) x = find_root(residual, lo, hi, "double-star Euler condition", opt);
  }
  if (std::isnan(x)) {
    // The residual is -lambda at x_z1 and h(a_{x_z2}) > 0 at x_z2 (x* < x_z2).
    x = find_root(residual, xz1, xz2, "double-star Euler condition", opt);
  }
  const Thresholds t = three_line_thresholds(x, z, xz1, xz2);
  const bool collapsed = std::exp(t.log_a) - std::exp(t.log_b) < kCollapseGap * std::exp(t.log_a);
  return {t.log_a, t.log_b, x, collapsed};
}

ShortfallValue StaticSolver::v_of_x(double x, double z) const {
  if (!bounded_above()) throw MisuseError("v_of_x: requires x_u < inf");
  const BarSystem bar = solve_bar();
  if (z > bar.z + tolerance(bar.z)) throw InfeasibleError("v_of_x: z above z_bar");
  z = std::max(z, x_r_);
  const double x_d = spec_.x_d;
  const double x_u = spec_.x_u;
  const double xz1 = x_z1(z);
  const double xz2 = x_z2(z);
  if (x <= xz1) {
    return {0.0, TwoLineMidUp{log_b_dc1(xz1), xz1, x_u}};
  }
  if (x < xz2) {
    const Thresholds t = three_line_thresholds(x, z, xz1, xz2);
    return {(x - x_d) * model_->prob_above(t.log_a), ThreeLine{t.log_a, t.log_b, x_d, x, x_u}};
  }
  if (x <= x_u) {
    const double log_a = log_a_dc2(x);
    return {(x - x_d) * model_->prob_above(log_a), TwoLineLowMid{log_a, x_d, x}};
  }
  const double value =
      (x - x_d) * model_->prob_above(bar.log_a) + (x - x_u) * model_->prob_below(bar.log_a);
  return {value, TwoLineLowUp{bar.log_a, x_d, x_u}};
}

Solution StaticSolver::solve(std::optional<double> z_in, std::optional<double> x_hint) const {
  const std::optional<double> z = z_in ? z_in : spec_.z;
  Solution sol;
  Diagnostics& diag = sol.diagnostics;
  const double x_d = spec_.x_d;
  const double lambda = spec_.lambda;

  const BarSystem bar = solve_bar();
  if (bounded_above()) {
    if (!model_->is_degenerate()) diag.a_bar = std::exp(bar.log_a);
    diag.z_bar = bar.z;
  }

  auto infeasible = [&]() {
    sol.case_label = CaseLabel::InfeasibleReturnTarget;
    sol.cvar = kInf;
    sol.note = "return target exceeds the largest attainable expected return z_bar";
    return sol;
  };

  if (!exceeds_one_over_lambda()) {
    // Without a mean-CVaR trade-off only the money market is efficient.
    const double z_bar = model_->is_degenerate() ? x_r_ : bar.z;
    diag.z_bar = z_bar;
    if (!z || *z <= x_r_ + tolerance(x_r_)) {
      sol.case_label = CaseLabel::MoneyMarketOptimal;
      sol.config = Constant{x_r_};
      sol.cvar = -x_r_;
      return sol;
    }
    if (*z > z_bar + tolerance(z_bar)) return infeasible();
    sol.case_label = CaseLabel::NonexistentAtMoneyMarketLevel;
    sol.cvar = -x_r_;
    sol.note = "infimum -x_r is approached but not attained";
    return sol;
  }

  const StarSystem star = solve_star();
  diag.a_star = std::exp(star.log_a);
  diag.x_star = star.x;
  diag.z_star = star.z;

  if (z && bounded_above()) {
    if (*z > bar.z + tolerance(bar.z)) return infeasible();
    if (*z >= x_r_) {
      diag.x_z1 = x_z1(*z);
      diag.x_z2 = x_z2(*z);
    }
  }

  if (!z || *z <= star.z) {
    if (star.bar_dominates) {
      sol.case_label = CaseLabel::BarOptimal;
      sol.config = TwoLineLowUp{bar.log_a, x_d, spec_.x_u};
    } else {
      sol.case_label = CaseLabel::StarOptimal;
      sol.config = TwoLineLowMid{star.log_a, x_d, star.x};
    }
    sol.cvar = star_cvar(star);
    return sol;
  }

  if (!bounded_above()) {
    sol.case_label = CaseLabel::NonexistentAtStarLevel;
    sol.cvar = star_cvar(star);
    sol.note = "infimum CVaR(X*) is approached by three-line payoffs but not attained";
    return sol;
  }

  const DoubleStar ds = solve_double_star(*z, x_hint);
  sol.case_label = CaseLabel::DoubleStarOptimal;
  if (ds.collapsed_to_bar) {
    sol.config = TwoLineLowUp{bar.log_a, x_d, spec_.x_u};
    sol.cvar = cvar(*model_, *sol.config, lambda);
    sol.note = "z = z_bar: the three-line payoff collapses to the Bar-System";
    return sol;
  }
  sol.config = ThreeLine{ds.log_a, ds.log_b, x_d, ds.x, spec_.x_u};
  sol.cvar = ((ds.x - x_d) * model_->prob_above(ds.log_a) - lambda * ds.x) / lambda;
  return sol;
}

PayoffConfig StaticSolver::epsilon_suboptimal(double eps, std::optional<double> z_in) const {
  if (!(eps > 0.0)) throw DomainError("epsilon_suboptimal: eps must be > 0");
  const std::optional<double> z = z_in ? z_in : spec_.z;
  const Solution sol = solve(z);
  const double x_d = spec_.x_d;
  const LogRange range = model_->log_bracket();
  // Lower end for ratio searches: deep in the left tail but with representable mass.
  auto deep_left = [&](double log_hi) {
    return std::min(log_hi, std::max(range.lo, model_->log_quantile_below(1e-250)));
  };

  if (sol.case_label == CaseLabel::NonexistentAtMoneyMarketLevel) {
    // x_eps on {rho > a}, alpha on {rho <= a}, with E~[X] = x_r and E[X] = z.
    eps = std::min(eps, 0.5 * (x_r_ - x_d));
    const double gamma = *z - x_r_;
    const double target = eps / (gamma + eps);
    const double hi = std::min(range.hi, std::log(model_->ess_sup()));
    // E[rho | rho <= a] rises to 1 as a reaches ess sup rho.
    auto excess = [&](double u) { return tilde_ratio_below(*model_, u) - target; };
    const double log_a = find_root(excess, deep_left(hi), hi, "epsilon_suboptimal: a_eps");
    const double alpha = x_r_ + eps * model_->tilde_prob_above(log_a) / model_->tilde_prob_below(log_a);
    if (alpha > spec_.x_u) {
      throw SolverError("epsilon_suboptimal: construction exceeds x_u; choose a larger eps");
    }
    return TwoLineLowMid{log_a, x_r_ - eps, alpha};
  }

  if (sol.case_label == CaseLabel::NonexistentAtStarLevel) {
    const StarSystem star = solve_star();
    const double lambda = spec_.lambda;
    const double pA = model_->prob_above(star.log_a);
    // Shrinking eps keeps the middle level above x_d; the gap bound only improves.
    double delta = lambda / (lambda - pA) * eps;
    delta = std::min(delta, 0.5 * (star.x - x_d));
    const double gamma = *z - star.z;
    const double pB = model_->prob_below(star.log_a);
    const double tB = model_->tilde_prob_below(star.log_a);
    const double target = tB / (gamma / delta + pB);
    // E[rho | rho < b] increases from 0 to P~(B*)/P(B*) as b rises to a*.
    auto excess = [&](double w) { return tilde_ratio_below(*model_, w) - target; };
    const double log_b = find_root(excess, deep_left(star.log_a), star.log_a, "epsilon_suboptimal: b_eps");
    const double alpha = star.x + (tB / model_->tilde_prob_below(log_b) - 1.0) * delta;
    return ThreeLine{star.log_a, log_b, x_d, star.x - delta, alpha};
  }

  throw MisuseError("epsilon_suboptimal: an optimal payoff exists (" + to_string(sol.case_label) + ")");
}

}  // namespace mcvar
