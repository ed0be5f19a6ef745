#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>
#include <variant>

#include "mcvar/errors.hpp"
#include "mcvar/oracle.hpp"
#include "mcvar/roots.hpp"
#include "mcvar/static_solver.hpp"
#include "support.hpp"

using namespace mcvar;
using test::table_market;
using test::table_spec;

namespace {

StaticSolver table_solver(double x_u, std::optional<double> z) {
  return StaticSolver(table_market(), table_spec(x_u, z));
}

// min over x of (v(x) - lambda x) / lambda: dense scan, then golden section.
double brute_force_cvar(const StaticSolver& s, double z) {
  const double lambda = s.spec().lambda;
  auto f = [&](double x) { return (s.v_of_x(x, z).value - lambda * x) / lambda; };
  const double lo = s.spec().x_d, hi = s.spec().x_u;
  const int n = 200;
  int best = 0;
  double best_f = f(lo);
  for (int i = 1; i <= n; ++i) {
    const double v = f(lo + (hi - lo) * i / n);
    if (v < best_f) {
      best_f = v;
      best = i;
    }
  }
  double a = lo + (hi - lo) * std::max(0, best - 1) / n;
  double b = lo + (hi - lo) * std::min(n, best + 1) / n;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 80; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return std::min({best_f, fc, fd});
}

// Atoms at bucket conditional means of rho ~ U[0, 2].
DiscreteMarket uniform_atoms(std::size_t n) {
  DiscreteMarket dm;
  for (std::size_t i = 0; i < n; ++i) {
    dm.rho.push_back((2.0 * i + 1.0) / n);
    dm.p.push_back(1.0 / n);
  }
  return dm;
}

}  // namespace

TEST_CASE("star system of the reference market") {
  const StaticSolver s = table_solver(kInf, std::nullopt);
  const StarSystem star = s.solve_star();
  CHECK(s.x_r() == doctest::Approx(11.0517091808).epsilon(1e-11));
  CHECK(std::exp(star.log_a) == doctest::Approx(14.530444).epsilon(1e-6));
  CHECK(star.x == doctest::Approx(19.066998).epsilon(1e-6));
  CHECK(star.z == doctest::Approx(18.874238).epsilon(1e-6));
  CHECK_FALSE(star.bar_dominates);
  CHECK(s.star_cvar(star) == doctest::Approx(-15.211798).epsilon(1e-6));

  // Euler: 1/a* = (lambda - P(A*)) / (1 - P~(A*)); capital: P~(A*) = 1 - x_r/x*.
  const RndModel& m = s.model();
  const double a = std::exp(star.log_a);
  CHECK(1.0 / a == doctest::Approx((0.05 - m.prob_above(star.log_a)) / m.tilde_prob_below(star.log_a)).epsilon(1e-12));
  CHECK(m.tilde_prob_above(star.log_a) == doctest::Approx(1.0 - s.x_r() / star.x).epsilon(1e-12));

  const Solution sol = s.solve();
  CHECK(sol.case_label == CaseLabel::StarOptimal);
  CHECK(sol.cvar == doctest::Approx(cvar(m, *sol.config, 0.05)).epsilon(1e-12));
}

TEST_CASE("bar system and its capital residual") {
  for (auto [x_u, z_bar] : {std::pair{30.0, 28.886568}, std::pair{50.0, 45.595535}}) {
    const StaticSolver s = table_solver(x_u, std::nullopt);
    const BarSystem bar = s.solve_bar();
    CHECK(bar.z == doctest::Approx(z_bar).epsilon(1e-7));
    const RndModel& m = s.model();
    CHECK(std::abs(x_u * m.tilde_prob_below(bar.log_a) - s.x_r()) <= 1e-10 * x_u);
  }
  const StaticSolver unbounded = table_solver(kInf, std::nullopt);
  CHECK(std::isinf(unbounded.solve_bar().z));
}

TEST_CASE("degenerate two-line mid levels") {
  const StaticSolver s = table_solver(30.0, std::nullopt);
  CHECK(s.x_z1(20.0) == doctest::Approx(10.7639).epsilon(1e-5));
  CHECK(s.x_z2(20.0) == doctest::Approx(20.2569).epsilon(1e-5));
  CHECK(s.x_z1(25.0) == doctest::Approx(9.4742).epsilon(1e-5));
  CHECK(s.x_z2(25.0) == doctest::Approx(25.6618).epsilon(1e-5));
  CHECK(s.x_z1(s.x_r()) == doctest::Approx(s.x_r()));
  CHECK(s.x_z2(s.x_r()) == doctest::Approx(s.x_r()));
  CHECK_THROWS_AS(s.x_z1(29.0), InfeasibleError);
  CHECK_THROWS_AS(table_solver(kInf, 20.0).x_z2(20.0), MisuseError);
}

TEST_CASE("double-star systems of the reference table") {
  struct Row {
    double x_u, z, x, a, b, cvar;
  };
  for (const Row& r : {Row{30, 20, 19.125756, 14.376496, 0.0068204, -15.206695},
                       Row{30, 25, 19.573438, 12.578542, 0.1326427, -14.840528},
                       Row{50, 25, 19.143413, 14.167711, 0.0171846, -15.148281}}) {
    CAPTURE(r.x_u);
    CAPTURE(r.z);
    const StaticSolver s = table_solver(r.x_u, r.z);
    const Solution sol = s.solve();
    REQUIRE(sol.case_label == CaseLabel::DoubleStarOptimal);
    const auto& cfg = std::get<ThreeLine>(*sol.config);
    CHECK(cfg.mid == doctest::Approx(r.x).epsilon(2e-7));
    CHECK(std::exp(cfg.log_a) == doctest::Approx(r.a).epsilon(2e-7));
    CHECK(std::exp(cfg.log_b) == doctest::Approx(r.b).epsilon(1e-5));
    CHECK(sol.cvar == doctest::Approx(r.cvar).epsilon(2e-7));

    // Return, capital and Euler conditions.
    const RndModel& m = s.model();
    CHECK(std::abs(expected_return(m, cfg) - r.z) < 1e-8);
    CHECK(std::abs(capital(m, cfg) - s.x_r()) < 1e-8);
    CHECK(std::abs(s.euler_residual(cfg.mid, r.z)) < 1e-8);
    CHECK(sol.cvar == doctest::Approx(cvar(m, cfg, 0.05)).epsilon(1e-11));
    CHECK(sol.diagnostics.x_z1.has_value());
  }
}

TEST_CASE("three-line thresholds stay ordered around a_bar") {
  const StaticSolver s = table_solver(30.0, 20.0);
  const double a_bar = std::exp(s.solve_bar().log_a);
  for (double x : {10.8, 12.0, 15.0, 19.0, 20.2}) {
    const Thresholds t = s.solve_three_line_given_x(x, 20.0);
    CHECK(std::exp(t.log_b) <= a_bar + 1e-12);
    CHECK(std::exp(t.log_a) >= a_bar - 1e-12);
  }
  CHECK_THROWS_AS(s.solve_three_line_given_x(5.0, 20.0), SolverError);
  // The Euler residual changes sign across (x_z1, x_z2).
  CHECK(s.euler_residual(10.8, 20.0) < 0.0);
  CHECK(s.euler_residual(20.2, 20.0) > 0.0);
}

TEST_CASE("case dispatch") {
  SUBCASE("target at or below the star return") {
    CHECK(table_solver(30.0, 15.0).solve().case_label == CaseLabel::StarOptimal);
    CHECK(table_solver(30.0, 5.0).solve().case_label == CaseLabel::StarOptimal);
    const StaticSolver s = table_solver(30.0, std::nullopt);
    CHECK(s.solve(s.solve_star().z).case_label == CaseLabel::StarOptimal);
  }
  SUBCASE("target at z_bar collapses to the bar payoff") {
    const StaticSolver s = table_solver(30.0, std::nullopt);
    const Solution sol = s.solve(s.solve_bar().z);
    CHECK(sol.case_label == CaseLabel::DoubleStarOptimal);
    CHECK(std::holds_alternative<TwoLineLowUp>(*sol.config));
    CHECK_FALSE(sol.note.empty());
  }
  SUBCASE("above z_bar") {
    const Solution sol = table_solver(30.0, 29.0).solve();
    CHECK(sol.case_label == CaseLabel::InfeasibleReturnTarget);
    CHECK_FALSE(sol.config.has_value());
    CHECK_THROWS_AS(table_solver(30.0, 29.0).solve_double_star(29.0), InfeasibleError);
  }
  SUBCASE("bar dominates when x_u is below x*") {
    const StaticSolver s = table_solver(15.0, std::nullopt);
    const StarSystem star = s.solve_star();
    CHECK(star.bar_dominates);
    CHECK(star.z == doctest::Approx(s.solve_bar().z));
    const Solution sol = s.solve(13.0);
    CHECK(sol.case_label == CaseLabel::BarOptimal);
    CHECK(sol.cvar == doctest::Approx(cvar(s.model(), *sol.config, 0.05)).epsilon(1e-12));
  }
  SUBCASE("unbounded above") {
    const Solution sol = table_solver(kInf, 25.0).solve();
    CHECK(sol.case_label == CaseLabel::NonexistentAtStarLevel);
    CHECK(sol.cvar == doctest::Approx(-15.211798).epsilon(1e-6));
    CHECK_FALSE(sol.config.has_value());
  }
  SUBCASE("zero market price of risk") {
    MarketParams mk = table_market();
    mk.mu = mk.r;
    const StaticSolver s(mk, table_spec(30.0, std::nullopt));
    const Solution at_xr = s.solve(s.x_r());
    CHECK(at_xr.case_label == CaseLabel::MoneyMarketOptimal);
    CHECK(at_xr.cvar == doctest::Approx(-s.x_r()));
    CHECK(s.solve(s.x_r() + 1.0).case_label == CaseLabel::InfeasibleReturnTarget);
    CHECK_THROWS_AS(s.solve_star(), MisuseError);
  }
}

TEST_CASE("epsilon-suboptimal payoff above the star return") {
  const StaticSolver s = table_solver(kInf, 25.0);
  const RndModel& m = s.model();
  for (double eps : {1.0, 0.1, 0.01, 1e-4}) {
    const PayoffConfig cfg = s.epsilon_suboptimal(eps);
    CHECK(std::abs(capital(m, cfg) - s.x_r()) < 1e-8);
    CHECK(std::abs(expected_return(m, cfg) - 25.0) < 1e-8);
    CHECK(cvar(m, cfg, 0.05) <= -15.2117981 + eps + 1e-9);
  }
  CHECK_THROWS_AS(s.epsilon_suboptimal(0.0), DomainError);
  CHECK_THROWS_AS(table_solver(30.0, 20.0).epsilon_suboptimal(0.1), MisuseError);
}

TEST_CASE("bounded density: money market level without an optimum") {
  auto model = std::make_shared<test::UniformRnd>();
  ProblemSpec spec;
  spec.x_d = 0.0;
  spec.x_u = kInf;
  spec.x_0 = 10.0;
  spec.lambda = 0.4;  // ess sup rho = 2 <= 1/lambda
  spec.z = 15.0;
  const StaticSolver s(model, spec, 10.0);
  CHECK(s.solve(10.0).case_label == CaseLabel::MoneyMarketOptimal);
  const Solution sol = s.solve();
  CHECK(sol.case_label == CaseLabel::NonexistentAtMoneyMarketLevel);
  CHECK(sol.cvar == doctest::Approx(-10.0));
  for (double eps : {2.0, 0.5, 0.01}) {
    const PayoffConfig cfg = s.epsilon_suboptimal(eps);
    CHECK(std::holds_alternative<TwoLineLowMid>(cfg));
    CHECK(std::abs(capital(*model, cfg) - 10.0) < 1e-8);
    CHECK(std::abs(expected_return(*model, cfg) - 15.0) < 1e-8);
    CHECK(cvar(*model, cfg, 0.4) <= -10.0 + eps + 1e-9);
  }
  // A finite upper bound caps the return.
  spec.x_u = 20.0;
  const StaticSolver capped(model, spec, 10.0);
  CHECK(capped.solve(25.0).case_label == CaseLabel::InfeasibleReturnTarget);
}

TEST_CASE("bounded density with a mean-CVaR trade-off agrees with its LP") {
  auto model = std::make_shared<test::UniformRnd>();
  ProblemSpec spec;
  spec.x_d = 0.0;
  spec.x_u = 30.0;
  spec.x_0 = 10.0;
  spec.lambda = 0.6;  // ess sup rho = 2 > 1/lambda
  const StaticSolver s(model, spec, 10.0);
  const StarSystem star = s.solve_star();
  const DiscreteMarket dm = uniform_atoms(2048);
  for (double z : {12.0, star.z + 1.0, 0.5 * (star.z + s.solve_bar().z)}) {
    CAPTURE(z);
    const Solution sol = s.solve(z);
    ProblemSpec pz = spec;
    pz.z = z;
    const LpMeanCvar lp = lp_mean_cvar(dm, pz, 10.0);
    CHECK(sol.cvar <= lp.cvar + 1e-9);
    CHECK(lp.cvar - sol.cvar <= 2e-3 * std::abs(sol.cvar));
  }
}

TEST_CASE("random configurations: direct minimization and LP bound") {
  std::mt19937_64 gen(20240611);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    MarketParams mk;
    mk.r = 0.08 * U(gen);
    mk.sigma = 0.1 + 0.3 * U(gen);
    mk.T = 0.25 + 2.75 * U(gen);
    const double v = 0.4 + 2.2 * U(gen);
    mk.mu = mk.r + v / std::sqrt(mk.T) * mk.sigma;
    mk.s0 = 10.0;
    ProblemSpec spec;
    spec.x_d = -5.0 + 10.0 * U(gen);
    spec.x_0 = std::max(spec.x_d, 0.0) + 1.0 + 9.0 * U(gen);
    spec.lambda = 0.01 + 0.29 * U(gen);
    const double x_r = capital_target(spec, mk);
    spec.x_u = x_r + (0.5 + 30.0 * U(gen)) * (x_r - spec.x_d);
    const StaticSolver base(mk, spec);
    const double z_bar = base.solve_bar().z;
    const double z = x_r + (z_bar - x_r) * (0.02 + 0.96 * U(gen));
    CAPTURE(i);
    const Solution sol = base.solve(z);
    REQUIRE(is_optimal(sol.case_label));
    CHECK(sol.cvar == doctest::Approx(cvar(base.model(), *sol.config, spec.lambda)).epsilon(1e-9));
    // The return constraint binds only on the three-line branch.
    const double ret = expected_return(base.model(), *sol.config);
    CHECK(ret >= z - 1e-7 * std::max(1.0, std::abs(z)));
    if (sol.case_label == CaseLabel::DoubleStarOptimal) CHECK(std::abs(ret - z) < 1e-7 * std::max(1.0, std::abs(z)));
    CHECK(sol.cvar <= brute_force_cvar(base, z) + 1e-7 * std::max(1.0, std::abs(sol.cvar)));
    CHECK(sol.cvar >= brute_force_cvar(base, z) - 1e-6 * std::max(1.0, std::abs(sol.cvar)));

    // Payoffs of the discrete market are payoffs of the continuous one.
    ProblemSpec pz = spec;
    pz.z = z;
    const LpMeanCvar lp = lp_mean_cvar(discretize(512, mk), pz, x_r);
    CHECK(sol.cvar <= lp.cvar + 1e-8 * std::max(1.0, std::abs(sol.cvar)));
    ++checked;
  }
  CHECK(checked == 200);
}

TEST_CASE("shortfall value is convex in the mid level") {
  for (double z : {15.0, 20.0, 25.0}) {
    const StaticSolver s = table_solver(30.0, z);
    const int n = 200;
    std::vector<double> v(n);
    const double lo = 0.0, hi = 35.0, h = (hi - lo) / (n - 1);
    for (int i = 0; i < n; ++i) v[i] = s.v_of_x(lo + h * i, z).value;
    double worst = 0.0;
    for (int i = 1; i + 1 < n; ++i) worst = std::min(worst, v[i + 1] - 2.0 * v[i] + v[i - 1]);
    CHECK(worst >= -1e-9);
    CHECK(v[0] == 0.0);
  }
}

TEST_CASE("root finder refuses a bracket without a sign change") {
  auto f = [](double x) { return x * x + 1.0; };
  CHECK_THROWS_AS(find_root(f, -1.0, 1.0, "no root"), SolverError);
  CHECK(find_root([](double x) { return x - 0.3; }, 0.0, 1.0, "root") == doctest::Approx(0.3).epsilon(1e-12));
  CHECK_THROWS_AS(find_root([](double) { return NAN; }, 0.0, 1.0, "nan"), SolverError);
}
