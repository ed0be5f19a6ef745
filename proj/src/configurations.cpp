#include "mcvar/configurations.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "mcvar/errors.hpp"

namespace mcvar {

void ProblemSpec::validate(double x_r) const {
  if (!std::isfinite(x_d)) throw ValidationError("x_d", "must be finite");
  if (!std::isfinite(x_0)) throw ValidationError("x_0", "must be finite");
  if (!(x_d < x_0)) throw ValidationError("x_d", "must be below x_0");
  if (!(x_0 <= x_r)) throw ValidationError("x_0", "must not exceed x_r = x_0 e^{rT} (needs r >= 0)");
  if (std::isnan(x_u) || !(x_r < x_u)) throw ValidationError("x_u", "must exceed x_r = x_0 e^{rT}");
  if (!(lambda > 0.0 && lambda < 1.0)) throw ValidationError("lambda", "must lie in (0, 1)");
  if (z && std::isnan(*z)) throw ValidationError("z", "must be a number");
}

double capital_target(const ProblemSpec& spec, const MarketParams& market) {
  return spec.x_0 * market.growth();
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

Levels levels_of(const PayoffConfig& cfg) {
  return std::visit(
      Overloaded{
          [](const Constant& c) { return Levels{kInf, -kInf, c.level, c.level, c.level}; },
          [](const TwoLineLowMid& c) { return Levels{c.log_a, -kInf, c.low, c.mid, c.mid}; },
          [](const TwoLineMidUp& c) { return Levels{kInf, c.log_b, c.mid, c.mid, c.high}; },
          [](const TwoLineLowUp& c) { return Levels{c.log_a, c.log_a, c.low, c.low, c.high}; },
          [](const ThreeLine& c) { return Levels{c.log_a, c.log_b, c.low, c.mid, c.high}; },
      },
      cfg);
}

std::string kind_name(const PayoffConfig& cfg) {
  return std::visit(Overloaded{
                        [](const Constant&) { return std::string("Constant"); },
                        [](const TwoLineLowMid&) { return std::string("TwoLineLowMid"); },
                        [](const TwoLineMidUp&) { return std::string("TwoLineMidUp"); },
                        [](const TwoLineLowUp&) { return std::string("TwoLineLowUp"); },
                        [](const ThreeLine&) { return std::string("ThreeLine"); },
                    },
                    cfg);
}

double payoff_at(const PayoffConfig& cfg, double log_rho) {
  const Levels lv = levels_of(cfg);
  if (log_rho > lv.log_a) return lv.low;
  if (log_rho < lv.log_b) return lv.high;
  return lv.mid;
}

EventProbs event_probs(const RndModel& model, const Levels& lv) {
  EventProbs p{};
  p.pA = model.prob_above(lv.log_a);
  p.pD = model.prob_below(lv.log_b);
  p.pB = model.prob_between(lv.log_b, lv.log_a);
  p.tA = model.tilde_prob_above(lv.log_a);
  p.tD = model.tilde_prob_below(lv.log_b);
  p.tB = model.tilde_prob_between(lv.log_b, lv.log_a);
  return p;
}

namespace {

// sum level_i * prob_i, skipping null events so that an infinite level on an
// empty set does not produce inf * 0.
double weighted(const std::array<double, 3>& level, const std::array<double, 3>& prob) {
  double acc = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    if (prob[i] > 0.0) acc += level[i] * prob[i];
  }
  return acc;
}

}  // namespace

double expected_return(const RndModel& model, const PayoffConfig& cfg) {
  const Levels lv = levels_of(cfg);
  const EventProbs p = event_probs(model, lv);
  return weighted({lv.low, lv.mid, lv.high}, {p.pA, p.pB, p.pD});
}

double capital(const RndModel& model, const PayoffConfig& cfg) {
  const Levels lv = levels_of(cfg);
  const EventProbs p = event_probs(model, lv);
  return weighted({lv.low, lv.mid, lv.high}, {p.tA, p.tB, p.tD});
}

double expected_shortfall(const RndModel& model, const PayoffConfig& cfg, double x) {
  const Levels lv = levels_of(cfg);
  const EventProbs p = event_probs(model, lv);
  auto gap = [x](double level) { return std::max(0.0, x - level); };
  return weighted({gap(lv.low), gap(lv.mid), gap(lv.high)}, {p.pA, p.pB, p.pD});
}

double cvar(const RndModel& model, const PayoffConfig& cfg, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("cvar: lambda must lie in (0, 1)");
  const Levels lv = levels_of(cfg);
  const EventProbs p = event_probs(model, lv);
  const std::array<double, 3> level{lv.low, lv.mid, lv.high};
  const std::array<double, 3> prob{p.pA, p.pB, p.pD};
  double best = kInf;
  for (std::size_t k = 0; k < 3; ++k) {
    const double c = level[k];
    if (!std::isfinite(c)) continue;
    double shortfall = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      if (prob[i] > 0.0 && level[i] < c) shortfall += (c - level[i]) * prob[i];
    }
    best = std::min(best, shortfall - lambda * c);
  }
  return best / lambda;
}

}  // namespace mcvar
