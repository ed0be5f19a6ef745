#include "mcvar/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>
#include <vector>

#include "mcvar/errors.hpp"
#include "mcvar/normal.hpp"

namespace mcvar {

namespace {

constexpr char kRngName[] = "mt19937_64 seeded by splitmix64(seed, path); std::normal_distribution";

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_time(const MarketParams& m, double t, double s) {
  if (!(t >= 0.0 && t < m.T)) throw DomainError("time must lie in [0, T)");
  if (!(s > 0.0)) throw DomainError("stock price must be positive");
}

// d_- with a given as ln a; +-inf thresholds give +-inf.
double d_minus_log(const MarketParams& m, double log_a, double s, double t) {
  const double theta = m.theta();
  const double tau = m.T - t;
  const double drift = theta / m.sigma * (0.5 * (m.mu + m.r - m.sigma * m.sigma) * t - std::log(s / m.s0));
  return (-log_a + drift + 0.5 * theta * theta * tau) / (std::abs(theta) * std::sqrt(tau));
}

// ln rho_T on a path with terminal Brownian value w_T.
double log_rho_T(const MarketParams& m, double w_T) {
  const double theta = m.theta();
  return -theta * w_T - 0.5 * theta * theta * m.T;
}

struct SampleStats {
  double mean, mean_se, cvar, cvar_se;
};

// Summation in index order keeps the result independent of the thread count.
// CVaR = -(mean of the ceil(lambda n) smallest outcomes); its standard error uses the
// Rockafellar-Uryasev form (1/lambda) E[(c - X)^+] - c with c the tail cut.
SampleStats sample_stats(const std::vector<double>& v, double lambda) {
  const double n = static_cast<double>(v.size());
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);

  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  const auto k = static_cast<std::size_t>(std::ceil(lambda * n - 1e-9));
  const std::size_t tail = std::clamp<std::size_t>(k, 1, sorted.size());
  double tail_sum = 0.0;
  for (std::size_t i = 0; i < tail; ++i) tail_sum += sorted[i];
  const double cut = sorted[tail - 1];
  double s_mean = 0.0, s_sq = 0.0;
  for (double x : v) s_mean += std::max(cut - x, 0.0);
  s_mean /= n;
  for (double x : v) {
    const double d = std::max(cut - x, 0.0) - s_mean;
    s_sq += d * d;
  }
  const bool many = v.size() > 1;
  return {mean, many ? std::sqrt(ss / (n - 1.0) / n) : 0.0, -tail_sum / static_cast<double>(tail),
          many ? std::sqrt(s_sq / (n - 1.0)) / (lambda * std::sqrt(n)) : 0.0};
}

}  // namespace

void HedgePlan::validate() const {
  market.validate();
  const Levels lv = levels_of(config);
  if (!std::isfinite(lv.low) || !std::isfinite(lv.mid) || !std::isfinite(lv.high)) {
    throw ValidationError("config", "payoff levels must be finite to be replicated");
  }
  if (std::isnan(lv.log_a) || std::isnan(lv.log_b)) throw ValidationError("config", "NaN threshold");
}

double d_minus(const MarketParams& m, double a, double s, double t) {
  check_time(m, t, s);
  if (!(a > 0.0)) throw DomainError("d_minus: threshold must be positive");
  if (m.theta() == 0.0) throw DomainError("d_minus: undefined for theta = 0");
  return d_minus_log(m, std::log(a), s, t);
}

double d_plus(const MarketParams& m, double a, double s, double t) { return -d_minus(m, a, s, t); }

double portfolio_value(const HedgePlan& plan, double t, double s) {
  const MarketParams& m = plan.market;
  check_time(m, t, s);
  const Levels lv = levels_of(plan.config);
  const double disc = std::exp(-m.r * (m.T - t));
  if (m.theta() == 0.0) return disc * payoff_at(plan.config, 0.0);
  // P~_t(A) = N(d_-(a)), P~_t(D) = N(d_+(b)), B takes the rest.
  const double pA = norm_cdf(d_minus_log(m, lv.log_a, s, t));
  const double pD = norm_cdf(-d_minus_log(m, lv.log_b, s, t));
  // Written relative to the middle level to avoid cancellation in 1 - pA - pD.
  double v = lv.mid;
  if (pA > 0.0) v += (lv.low - lv.mid) * pA;
  if (pD > 0.0) v += (lv.high - lv.mid) * pD;
  return disc * v;
}

double hedge_shares(const HedgePlan& plan, double t, double s) {
  const MarketParams& m = plan.market;
  check_time(m, t, s);
  const double theta = m.theta();
  if (theta == 0.0) return 0.0;
  const Levels lv = levels_of(plan.config);
  const double tau = m.T - t;
  const double dm_a = d_minus_log(m, lv.log_a, s, t);
  const double dp_b = -d_minus_log(m, lv.log_b, s, t);
  double kernel = 0.0;
  if (std::isfinite(dm_a)) kernel += (lv.mid - lv.low) * std::exp(-0.5 * dm_a * dm_a);
  if (std::isfinite(dp_b)) kernel += (lv.high - lv.mid) * std::exp(-0.5 * dp_b * dp_b);
  return sign(theta) * std::exp(-m.r * tau) * kernel /
         (m.sigma * s * std::sqrt(2.0 * std::numbers::pi * tau));
}

double terminal_payoff(const HedgePlan& plan, double s_T) {
  const MarketParams& m = plan.market;
  if (!(s_T > 0.0)) throw DomainError("terminal_payoff: stock price must be positive");
  const double w_T = (std::log(s_T / m.s0) - (m.mu - 0.5 * m.sigma * m.sigma) * m.T) / m.sigma;
  return payoff_at(plan.config, log_rho_T(m, w_T));
}

PathSimResult simulate_replication(const HedgePlan& plan, std::uint64_t n_paths,
                                   std::uint64_t n_steps, std::uint64_t seed, double lambda,
                                   unsigned threads) {
  plan.validate();
  if (n_paths < 1) throw ValidationError("paths", "must be >= 1");
  if (n_steps < 1) throw ValidationError("steps", "must be >= 1");
  if (!(lambda > 0.0 && lambda < 1.0)) throw ValidationError("lambda", "must lie in (0, 1)");

  const MarketParams& m = plan.market;
  const double dt = m.T / static_cast<double>(n_steps);
  const double sqrt_dt = std::sqrt(dt);
  const double step_drift = (m.mu - 0.5 * m.sigma * m.sigma) * dt;
  const double carry = std::exp(m.r * dt);
  const double x0 = portfolio_value(plan, 0.0, m.s0);

  std::vector<double> wealth(n_paths);
  std::vector<double> error(n_paths);
  std::vector<double> payoff(n_paths);

  auto run_path = [&](std::uint64_t path) {
    std::mt19937_64 gen(splitmix64(seed ^ splitmix64(path)));
    std::normal_distribution<double> normal;
    double s = m.s0;
    double w = 0.0;
    double x = x0;
    for (std::uint64_t k = 0; k < n_steps; ++k) {
      const double t = static_cast<double>(k) * dt;
      const double xi = hedge_shares(plan, t, s);
      const double dw = sqrt_dt * normal(gen);
      w += dw;
      const double s_next = s * std::exp(step_drift + m.sigma * dw);
      x = xi * s_next + (x - xi * s) * carry;
      s = s_next;
    }
    const double target = payoff_at(plan.config, log_rho_T(m, w));
    wealth[path] = x;
    payoff[path] = target;
    error[path] = std::abs(x - target);
  };

  threads = std::max(1u, threads);
  if (threads == 1 || n_paths < 2) {
    for (std::uint64_t i = 0; i < n_paths; ++i) run_path(i);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::uint64_t i = w; i < n_paths; i += threads) run_path(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  PathSimResult res;
  res.n_paths = n_paths;
  res.n_steps = n_steps;
  res.seed = seed;
  res.lambda = lambda;
  res.rng = kRngName;
  const double n = static_cast<double>(n_paths);

  const SampleStats hedged = sample_stats(wealth, lambda);
  const SampleStats target = sample_stats(payoff, lambda);
  res.empirical_mean = hedged.mean;
  res.empirical_mean_se = hedged.mean_se;
  res.empirical_cvar = hedged.cvar;
  res.empirical_cvar_se = hedged.cvar_se;
  res.payoff_mean = target.mean;
  res.payoff_mean_se = target.mean_se;
  res.payoff_cvar = target.cvar;
  res.payoff_cvar_se = target.cvar_se;

  double err_sum = 0.0;
  for (double e : error) err_sum += e;
  std::sort(error.begin(), error.end());
  auto quantile = [&](double q) {
    const double pos = q * (n - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min<std::size_t>(lo + 1, error.size() - 1);
    return error[lo] + (pos - static_cast<double>(lo)) * (error[hi] - error[lo]);
  };
  res.terminal_abs_error = {err_sum / n, quantile(0.5), quantile(0.99)};
  return res;
}

}  // namespace mcvar
