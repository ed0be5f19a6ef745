#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "mcvar/configurations.hpp"
#include "mcvar/errors.hpp"
#include "support.hpp"

using namespace mcvar;

namespace {

// Expected shortfall straight from the definition: average of the worst
// lambda-fraction of a discrete distribution, levels visited from the bottom.
double tail_average_cvar(std::vector<std::pair<double, double>> atoms, double lambda) {
  std::sort(atoms.begin(), atoms.end());
  double mass = 0.0, sum = 0.0;
  for (const auto& [level, p] : atoms) {
    const double take = std::min(p, lambda - mass);
    if (take <= 0.0) break;
    sum += take * level;
    mass += take;
  }
  return -sum / lambda;
}

}  // namespace

TEST_CASE("cvar of threshold payoffs equals the tail average") {
  const LognormalRnd model(2.1);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0), lev(0.0, 40.0), lam(0.01, 0.9);
  for (int i = 0; i < 300; ++i) {
    double la = u(gen), lb = u(gen);
    if (lb > la) std::swap(la, lb);
    std::vector<double> l{lev(gen), lev(gen), lev(gen)};
    const ThreeLine cfg{la, lb, l[0], l[1], l[2]};
    const EventProbs e = event_probs(model, levels_of(cfg));
    const double lambda = lam(gen);
    const double expect = tail_average_cvar({{l[0], e.pA}, {l[1], e.pB}, {l[2], e.pD}}, lambda);
    CHECK(cvar(model, cfg, lambda) == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("expectations of the payoff families") {
  const LognormalRnd model(1.0);
  const double la = std::log(3.0), lb = std::log(0.4);
  const ThreeLine three{la, lb, 1.0, 5.0, 9.0};
  const double pA = model.prob_above(la), pD = model.prob_below(lb);
  CHECK(expected_return(model, three) == doctest::Approx(1.0 * pA + 9.0 * pD + 5.0 * (1 - pA - pD)));
  const double tA = model.tilde_prob_above(la), tD = model.tilde_prob_below(lb);
  CHECK(capital(model, three) == doctest::Approx(1.0 * tA + 9.0 * tD + 5.0 * (1 - tA - tD)));
  CHECK(expected_shortfall(model, three, 6.0) == doctest::Approx(5.0 * pA + 1.0 * (1 - pA - pD)));

  CHECK(expected_return(model, Constant{7.0}) == doctest::Approx(7.0));
  CHECK(capital(model, TwoLineLowUp{0.0, 2.0, 4.0}) ==
        doctest::Approx(2.0 * model.tilde_prob_above(0.0) + 4.0 * model.tilde_prob_below(0.0)));
  CHECK(cvar(model, Constant{3.0}, 0.05) == doctest::Approx(-3.0));
  CHECK_THROWS_AS(cvar(model, Constant{3.0}, 1.0), DomainError);
}

TEST_CASE("payoff_at picks the level of the rho region") {
  const ThreeLine cfg{std::log(10.0), std::log(0.1), 0.0, 5.0, 30.0};
  CHECK(payoff_at(cfg, std::log(20.0)) == 0.0);
  CHECK(payoff_at(cfg, 0.0) == 5.0);
  CHECK(payoff_at(cfg, std::log(0.01)) == 30.0);
  CHECK(payoff_at(TwoLineLowMid{0.0, 1.0, 2.0}, -1.0) == 2.0);
  CHECK(payoff_at(TwoLineMidUp{0.0, 1.0, 2.0}, -1.0) == 2.0);
  CHECK(payoff_at(TwoLineLowUp{0.0, 1.0, 2.0}, 1.0) == 1.0);
  CHECK(kind_name(cfg) == "ThreeLine");
}

TEST_CASE("problem validation names the field") {
  const double x_r = test::table_x_r();
  auto field_of = [&](ProblemSpec p) {
    try {
      p.validate(x_r);
    } catch (const ValidationError& e) {
      return e.field();
    }
    return std::string();
  };
  ProblemSpec p = test::table_spec(30.0, 20.0);
  CHECK(field_of(p).empty());
  p.lambda = 1.0;
  CHECK(field_of(p) == "lambda");
  p = test::table_spec(10.0, 20.0);
  CHECK(field_of(p) == "x_u");
  p = test::table_spec(30.0, 20.0);
  p.x_d = 10.0;
  CHECK(field_of(p) == "x_d");
  p = test::table_spec(kInf, std::nullopt);
  CHECK(field_of(p).empty());
  CHECK(capital_target(p, test::table_market()) == doctest::Approx(11.0517091808));
}
