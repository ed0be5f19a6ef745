#pragma once

#include <cstdint>
#include <string>

#include "mcvar/configurations.hpp"
#include "mcvar/market.hpp"

namespace mcvar {

/// Replicating strategy of a threshold payoff in the Black-Scholes market.
/// Every config form is supported; the thresholds refer to rho_T = dP~/dP.
struct HedgePlan {
  PayoffConfig config;
  MarketParams market;

  /// Levels must be finite and x_d-style ordering is not required.
  void validate() const;
};

/// d_-(a, s, t) = [-ln a + (theta/sigma)((mu + r - sigma^2)/2 t - ln(s/S0)) + theta^2 (T-t)/2]
///                / (|theta| sqrt(T-t)),
/// so that N(d_-(a, S_t, t)) = P~(rho_T > a | S_t). Requires 0 <= t < T, s > 0, a > 0.
double d_minus(const MarketParams& m, double a, double s, double t);
double d_plus(const MarketParams& m, double a, double s, double t);

/// Time-t price of the payoff given S_t = s: e^{-r(T-t)} E~[X_T | S_t = s].
double portfolio_value(const HedgePlan& plan, double t, double s);

/// Stock holding xi_t = dX_t/ds of the replicating portfolio.
double hedge_shares(const HedgePlan& plan, double t, double s);

/// X_T as a function of the terminal stock price.
double terminal_payoff(const HedgePlan& plan, double s_T);

struct ErrorSummary {
  double mean = 0.0;
  double median = 0.0;
  double p99 = 0.0;
};

struct PathSimResult {
  std::uint64_t n_paths = 0;
  std::uint64_t n_steps = 0;
  std::uint64_t seed = 0;
  ErrorSummary terminal_abs_error;  ///< |X_T - payoff(S_T)| over all paths
  double empirical_mean = 0.0;      ///< mean of the hedged wealth X_T
  double empirical_mean_se = 0.0;
  double empirical_cvar = 0.0;      ///< sorted-tail CVaR of X_T, tail size ceil(lambda n)
  double empirical_cvar_se = 0.0;
  // The same statistics for the target payoff on the simulated paths, i.e. with
  // perfect replication. Their gap to the hedged figures is the rebalancing effect.
  double payoff_mean = 0.0;
  double payoff_mean_se = 0.0;
  double payoff_cvar = 0.0;
  double payoff_cvar_se = 0.0;
  double lambda = 0.0;
  std::string rng;
};

/// Simulates S under P by exact lognormal steps and rebalances a self-financing
/// portfolio (xi from hedge_shares, remainder in the money market) on an equally
/// spaced grid. Path i draws from its own generator seeded from (seed, i), so the
/// result depends only on (seed, n_paths, n_steps), never on `threads`.
PathSimResult simulate_replication(const HedgePlan& plan, std::uint64_t n_paths,
                                   std::uint64_t n_steps, std::uint64_t seed, double lambda,
                                   unsigned threads = 1);

}  // namespace mcvar
