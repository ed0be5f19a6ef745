#include <doctest.h>

#include <cmath>
#include <random>

#include "mcvar/errors.hpp"
#include "mcvar/oracle.hpp"
#include "mcvar/static_solver.hpp"
#include "support.hpp"

using namespace mcvar;
using test::table_market;
using test::table_spec;
using test::table_x_r;

TEST_CASE("discretization is a probability density of rho") {
  for (auto placement : {AtomPlacement::ConditionalMean, AtomPlacement::BucketMedian}) {
    const DiscreteMarket dm = discretize(1000, table_market(), placement);
    double sp = 0.0, sr = 0.0;
    for (std::size_t i = 0; i < dm.size(); ++i) {
      sp += dm.p[i];
      sr += dm.ptilde(i);
    }
    CHECK(sp == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sr == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_NOTHROW(dm.validate());
  }
  const DiscreteMarket two = discretize(2, 0.01);
  CHECK(two.rho[0] == doctest::Approx(1.0).epsilon(0.02));
  CHECK(two.rho[1] == doctest::Approx(1.0).epsilon(0.02));
  double prev = 0.0;
  for (std::size_t n : {64, 512, 4096}) {
    const double top = discretize(n, table_market()).ess_sup();
    CHECK(top > prev);
    prev = top;
  }
  CHECK_THROWS_AS(discretize(1, 1.0), ValidationError);
}

TEST_CASE("conditional-mean atoms carry the exact bucket expectations") {
  // Bucket-measurable payoffs keep their P~-price: check with the top bucket.
  const LognormalRnd model = LognormalRnd::from_market(table_market());
  const std::size_t n = 256;
  const DiscreteMarket dm = discretize(n, table_market());
  const double top_price = dm.ptilde(n - 1);
  const double cut = model.log_quantile_above(1.0 / n);
  CHECK(top_price == doctest::Approx(model.tilde_prob_above(cut)).epsilon(1e-9));
}

TEST_CASE("decomposed and joint LP agree") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int k = 0; k < 12; ++k) {
    const std::size_t n = 8 + 8 * (k % 4);
    const double x_u = k % 3 == 0 ? kInf : 15.0 + 30.0 * U(gen);
    ProblemSpec spec = table_spec(x_u, std::nullopt);
    spec.lambda = 0.05 + 0.3 * U(gen);
    const DiscreteMarket dm = discretize(n, 0.5 + 2.0 * U(gen));
    // Stay below the discrete largest return.
    const double z = table_x_r() + 3.0 * U(gen);
    if (k % 2 == 0) spec.z = z;
    CAPTURE(k);
    double joint_value = 0.0;
    bool joint_ok = true;
    try {
      joint_value = lp_mean_cvar_joint(dm, spec, table_x_r()).cvar;
    } catch (const InfeasibleError&) {
      joint_ok = false;
      CHECK_THROWS_AS(lp_mean_cvar(dm, spec, table_x_r()), InfeasibleError);
    }
    if (joint_ok) {
      const LpMeanCvar dec = lp_mean_cvar(dm, spec, table_x_r());
      CHECK(dec.cvar == doctest::Approx(joint_value).epsilon(1e-7));
    }
  }
}

TEST_CASE("money market is the discrete optimum without a density spread") {
  const DiscreteMarket dm = discretize(64, 0.0);
  ProblemSpec spec = table_spec(30.0, table_x_r());
  const LpMeanCvar lp = lp_mean_cvar(dm, spec, table_x_r());
  CHECK(lp.cvar == doctest::Approx(-table_x_r()).epsilon(1e-10));
  for (double x : lp.payoff) CHECK(x == doctest::Approx(table_x_r()).epsilon(1e-9));
}

TEST_CASE("step-1 LP against the closed-form shortfall value") {
  const ProblemSpec spec = table_spec(30.0, 20.0);
  const DiscreteMarket dm = discretize(4096, table_market());
  const StaticSolver s(table_market(), spec);
  CHECK(lp_step1(dm, -1.0, spec, table_x_r()).value == 0.0);
  CHECK(lp_step1(dm, 0.0, spec, table_x_r()).value == 0.0);
  std::vector<double> v;
  for (double x = 11.0; x <= 20.0 + 1e-9; x += 1.0) {
    const double lp = lp_step1(dm, x, spec, table_x_r()).value;
    const double an = s.v_of_x(x, 20.0).value;
    CAPTURE(x);
    CHECK(lp >= an - 1e-9);
    // Bucket resolution limits the absolute accuracy where the shortfall is tiny.
    CHECK(std::abs(lp - an) <= 1e-3 + 5e-3 * an);
    v.push_back(lp);
  }
  for (std::size_t i = 1; i + 1 < v.size(); ++i) CHECK(v[i + 1] - 2 * v[i] + v[i - 1] >= -1e-9);
}

TEST_CASE("discrete optimum bounds the continuous one and converges") {
  for (auto [x_u, z] : {std::pair{30.0, 20.0}, std::pair{30.0, 25.0}, std::pair{50.0, 25.0}}) {
    const ProblemSpec spec = table_spec(x_u, z);
    const double analytic = StaticSolver(table_market(), spec).solve().cvar;
    double prev_gap = INFINITY;
    for (std::size_t n : {128, 512, 2048}) {
      const LpMeanCvar lp = lp_mean_cvar(discretize(n, table_market()), spec, table_x_r());
      CHECK(lp.cvar >= analytic - 1e-9);
      const double gap = lp.cvar - analytic;
      CHECK(gap < prev_gap);
      prev_gap = gap;
      const StructureSummary st = summarize_structure(lp.payoff, spec);
      CHECK(st.monotone);
      CHECK(st.three_level);
    }
  }
}

TEST_CASE("infeasible discrete target") {
  const ProblemSpec spec = table_spec(30.0, 29.5);
  CHECK_THROWS_AS(lp_mean_cvar(discretize(64, table_market()), spec, table_x_r()), InfeasibleError);
  CHECK_THROWS_AS(lp_step1(discretize(64, table_market()), 15.0, spec, table_x_r()), InfeasibleError);
}

TEST_CASE("structure summary") {
  const ProblemSpec spec = table_spec(30.0, 20.0);
  StructureSummary s = summarize_structure({30, 30, 25, 19, 19, 19, 7, 0, 0}, spec);
  CHECK(s.three_level);
  CHECK(s.n_high == 2);
  CHECK(s.n_mid == 3);
  CHECK(s.n_odd == 2);
  CHECK(s.n_low == 2);
  CHECK(s.mid_level == doctest::Approx(19.0));
  CHECK(s.pattern == "U2 o1 M3 o1 L2");

  CHECK_FALSE(summarize_structure({30, 19, 30, 0}, spec).monotone);
  CHECK_FALSE(summarize_structure({30, 25, 24, 19, 19, 0}, spec).three_level);
  CHECK(summarize_structure({19, 19, 19}, spec).three_level);
}
