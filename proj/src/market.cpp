#include "mcvar/market.hpp"

#include <algorithm>
#include <cmath>

#include "mcvar/errors.hpp"
#include "mcvar/normal.hpp"

namespace mcvar {

double MarketParams::growth() const noexcept { return std::exp(r * T); }

void MarketParams::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(r)) throw ValidationError("r", "must be finite");
  if (!finite(mu)) throw ValidationError("mu", "must be finite");
  if (!finite(sigma) || sigma <= 0.0) throw ValidationError("sigma", "must be > 0");
  if (!finite(s0) || s0 <= 0.0) throw ValidationError("s0", "must be > 0");
  if (!finite(T) || T <= 0.0) throw ValidationError("T", "must be > 0");
  if (!finite(theta())) throw ValidationError("mu", "market price of risk is not finite");
}

double RndModel::prob_between(double log_b, double log_a) const {
  if (!(log_b < log_a)) return 0.0;
  return std::max(0.0, 1.0 - prob_above(log_a) - prob_below(log_b));
}

double RndModel::tilde_prob_between(double log_b, double log_a) const {
  if (!(log_b < log_a)) return 0.0;
  return std::max(0.0, 1.0 - tilde_prob_above(log_a) - tilde_prob_below(log_b));
}

double RndModel::prob_P_above(double a) const {
  if (!(a > 0.0)) throw DomainError("prob_P_above: threshold must be > 0");
  return prob_above(std::log(a));
}

double RndModel::prob_Ptilde_above(double a) const {
  if (!(a > 0.0)) throw DomainError("prob_Ptilde_above: threshold must be > 0");
  return tilde_prob_above(std::log(a));
}

LognormalRnd::LognormalRnd(double theta_sqrt_T) : vol_(std::abs(theta_sqrt_T)) {
  if (!std::isfinite(vol_)) throw ValidationError("theta", "theta * sqrt(T) must be finite");
}

LognormalRnd LognormalRnd::from_market(const MarketParams& market) {
  return LognormalRnd(market.theta() * std::sqrt(market.T));
}

double LognormalRnd::z_score(double log_a, double shift) const noexcept {
  // ln rho has mean shift * vol^2 and standard deviation vol.
  return (log_a - shift * vol_ * vol_) / vol_;
}

namespace {

// Point mass at rho = 1.
double degenerate_above(double log_a) { return log_a < 0.0 ? 1.0 : 0.0; }
double degenerate_below(double log_a) { return log_a > 0.0 ? 1.0 : 0.0; }

}  // namespace

double LognormalRnd::prob_above(double log_a) const {
  if (is_degenerate()) return degenerate_above(log_a);
  return norm_cdf(-z_score(log_a, -0.5));
}

double LognormalRnd::prob_below(double log_a) const {
  if (is_degenerate()) return degenerate_below(log_a);
  return norm_cdf(z_score(log_a, -0.5));
}

double LognormalRnd::tilde_prob_above(double log_a) const {
  if (is_degenerate()) return degenerate_above(log_a);
  return norm_cdf(-z_score(log_a, 0.5));
}

double LognormalRnd::tilde_prob_below(double log_a) const {
  if (is_degenerate()) return degenerate_below(log_a);
  return norm_cdf(z_score(log_a, 0.5));
}

double LognormalRnd::between(double log_b, double log_a, double shift) const {
  if (!(log_b < log_a)) return 0.0;
  if (is_degenerate()) return (log_b <= 0.0 && 0.0 <= log_a) ? 1.0 : 0.0;
  const double lo = z_score(log_b, shift);
  const double hi = z_score(log_a, shift);
  // Difference of the two upper tails when the interval sits right of the centre.
  if (lo > 0.0) return std::max(0.0, norm_cdf(-lo) - norm_cdf(-hi));
  return std::max(0.0, norm_cdf(hi) - norm_cdf(lo));
}

double LognormalRnd::prob_between(double log_b, double log_a) const {
  return between(log_b, log_a, -0.5);
}

double LognormalRnd::tilde_prob_between(double log_b, double log_a) const {
  return between(log_b, log_a, 0.5);
}

namespace {

void require_continuous(bool degenerate) {
  if (degenerate) throw DomainError("rho == 1 has no continuous quantile function");
}

}  // namespace

double LognormalRnd::log_quantile_above(double q) const {
  require_continuous(is_degenerate());
  return -vol_ * norm_quantile(q) - 0.5 * vol_ * vol_;
}

double LognormalRnd::log_quantile_below(double q) const {
  require_continuous(is_degenerate());
  return vol_ * norm_quantile(q) - 0.5 * vol_ * vol_;
}

double LognormalRnd::log_tilde_quantile_above(double q) const {
  require_continuous(is_degenerate());
  return -vol_ * norm_quantile(q) + 0.5 * vol_ * vol_;
}

double LognormalRnd::log_tilde_quantile_below(double q) const {
  require_continuous(is_degenerate());
  return vol_ * norm_quantile(q) + 0.5 * vol_ * vol_;
}

LogRange LognormalRnd::log_bracket() const {
  if (is_degenerate()) return {-1.0, 1.0};
  // 40 standard deviations past either centre: N(-40) underflows to 0.
  constexpr double kSpan = 40.0;
  return {-0.5 * vol_ * vol_ - kSpan * vol_, 0.5 * vol_ * vol_ + kSpan * vol_};
}

std::shared_ptr<const RndModel> make_rnd_model(const MarketParams& market) {
  return std::make_shared<LognormalRnd>(LognormalRnd::from_market(market));
}

}  // namespace mcvar
