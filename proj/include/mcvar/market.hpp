#pragma once

#include <limits>
#include <memory>

namespace mcvar {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Black-Scholes primitives: money market at rate r, one stock dS = mu S dt + sigma S dW.
struct MarketParams {
  double r = 0.0;      ///< risk-free rate, 1/year
  double mu = 0.0;     ///< stock drift, 1/year
  double sigma = 0.0;  ///< volatility, 1/sqrt(year)
  double s0 = 0.0;     ///< initial stock price
  double T = 0.0;      ///< horizon, years

  /// Market price of risk (mu - r) / sigma.
  double theta() const noexcept { return (mu - r) / sigma; }

  /// Growth factor of the money market over the horizon, e^{rT}.
  double growth() const noexcept;

  /// Throws ValidationError naming the first offending field.
  void validate() const;
};

/// Finite log-threshold window [lo, hi]. Outside it every tail probability of rho
/// is numerically 0 or 1, so root finders can use it as a bracket for ln a.
struct LogRange {
  double lo;
  double hi;
};

/// Law of the Radon-Nikodym derivative rho = dP~/dP under P.
///
/// Thresholds are passed as ln a (ln b) and may be +-inf: ln a = +inf means the
/// event {rho > a} is empty, ln b = -inf means {rho < b} is empty. rho is assumed to
/// have a continuous law (except for the degenerate model rho == 1), so strict and
/// non-strict inequalities give the same probabilities.
class RndModel {
 public:
  virtual ~RndModel() = default;

  virtual double prob_above(double log_a) const = 0;        ///< P(rho > a)
  virtual double prob_below(double log_a) const = 0;        ///< P(rho < a)
  virtual double tilde_prob_above(double log_a) const = 0;  ///< P~(rho > a) = E[rho 1{rho > a}]
  virtual double tilde_prob_below(double log_a) const = 0;  ///< P~(rho < a)

  /// P(b <= rho <= a); zero when b >= a.
  virtual double prob_between(double log_b, double log_a) const;
  virtual double tilde_prob_between(double log_b, double log_a) const;

  /// ln a such that prob_above(ln a) = q, and likewise for the other three maps.
  virtual double log_quantile_above(double q) const = 0;
  virtual double log_quantile_below(double q) const = 0;
  virtual double log_tilde_quantile_above(double q) const = 0;
  virtual double log_tilde_quantile_below(double q) const = 0;

  /// ess sup rho; +inf for unbounded models.
  virtual double ess_sup() const = 0;

  /// True when rho == 1 almost surely (P~ = P).
  virtual bool is_degenerate() const = 0;

  virtual LogRange log_bracket() const = 0;

  /// P(rho > a) for a > 0 (a = +inf allowed). Throws DomainError for a <= 0.
  double prob_P_above(double a) const;
  /// P~(rho > a) for a > 0. Throws DomainError for a <= 0.
  double prob_Ptilde_above(double a) const;
};

/// ln rho ~ N(-v^2/2, v^2) with v = |theta| sqrt(T): the Black-Scholes density
/// rho = exp(-theta W_T - theta^2 T / 2). v = 0 is the degenerate model rho == 1.
class LognormalRnd final : public RndModel {
 public:
  explicit LognormalRnd(double theta_sqrt_T);

  static LognormalRnd from_market(const MarketParams& market);

  double theta_sqrt_T() const noexcept { return vol_; }

  double prob_above(double log_a) const override;
  double prob_below(double log_a) const override;
  double tilde_prob_above(double log_a) const override;
  double tilde_prob_below(double log_a) const override;
  double prob_between(double log_b, double log_a) const override;
  double tilde_prob_between(double log_b, double log_a) const override;

  double log_quantile_above(double q) const override;
  double log_quantile_below(double q) const override;
  double log_tilde_quantile_above(double q) const override;
  double log_tilde_quantile_below(double q) const override;

  double ess_sup() const override { return vol_ == 0.0 ? 1.0 : kInf; }
  bool is_degenerate() const override { return vol_ == 0.0; }
  LogRange log_bracket() const override;

 private:
  // Standardized distance of ln a from the centre of ln rho under P (shift = -1/2)
  // or under P~ (shift = +1/2), in units of vol_.
  double z_score(double log_a, double shift) const noexcept;
  double between(double log_b, double log_a, double shift) const;

  double vol_;
};

std::shared_ptr<const RndModel> make_rnd_model(const MarketParams& market);

}  // namespace mcvar
