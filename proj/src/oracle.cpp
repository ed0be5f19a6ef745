#include "mcvar/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "mcvar/errors.hpp"
#include "mcvar/normal.hpp"
#include "mcvar/simplex.hpp"

namespace mcvar {

namespace {

std::string certificate_text(const LpResult& r) {
  std::ostringstream os;
  os.precision(12);
  os << "phase-1 infeasibility " << r.infeasibility << ", row multipliers [";
  for (std::size_t i = 0; i < r.certificate.size(); ++i) os << (i ? ", " : "") << r.certificate[i];
  os << "]";
  return os.str();
}

void check_spec(const DiscreteMarket& dm, const ProblemSpec& spec, double x_r) {
  dm.validate();
  spec.validate(x_r);
}

}  // namespace

void DiscreteMarket::validate() const {
  if (rho.size() != p.size() || rho.empty()) throw ValidationError("atoms", "rho and p must match");
  double sp = 0.0, sr = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    if (!(rho[i] > 0.0) || !(p[i] > 0.0)) throw ValidationError("atoms", "rho and p must be positive");
    if (i && rho[i] < rho[i - 1]) throw ValidationError("atoms", "rho must be ascending");
    sp += p[i];
    sr += p[i] * rho[i];
  }
  if (std::abs(sp - 1.0) > 1e-12) throw ValidationError("atoms", "probabilities must sum to 1");
  if (std::abs(sr - 1.0) > 1e-10) throw ValidationError("atoms", "E[rho] must equal 1");
}

DiscreteMarket discretize(std::size_t n, double theta_sqrt_T, AtomPlacement placement) {
  if (n < 2) throw ValidationError("atoms", "need at least 2 atoms");
  const double v = std::abs(theta_sqrt_T);
  const double nd = static_cast<double>(n);
  DiscreteMarket dm;
  dm.rho.resize(n);
  dm.p.assign(n, 1.0 / nd);
  // P~ mass of the standard-normal bucket [lo, hi] of ln rho's score: N(hi - v) - N(lo - v),
  // taken from the nearer tail.
  auto tilde_mass = [v](double lo, double hi) {
    if (lo - v > 0.0) return norm_cdf(v - lo) - norm_cdf(v - hi);
    return norm_cdf(hi - v) - norm_cdf(lo - v);
  };
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double di = static_cast<double>(i);
    if (v == 0.0) {
      dm.rho[i] = 1.0;
    } else if (placement == AtomPlacement::ConditionalMean) {
      dm.rho[i] = nd * tilde_mass(norm_quantile(di / nd), norm_quantile((di + 1.0) / nd));
    } else {
      dm.rho[i] = std::exp(-0.5 * v * v + v * norm_quantile((di + 0.5) / nd));
    }
    mean += dm.p[i] * dm.rho[i];
  }
  for (double& r : dm.rho) r /= mean;
  return dm;
}

DiscreteMarket discretize(std::size_t n, const MarketParams& market, AtomPlacement placement) {
  market.validate();
  return discretize(n, market.theta() * std::sqrt(market.T), placement);
}

Step1Result lp_step1(const DiscreteMarket& dm, double c, const ProblemSpec& spec, double x_r) {
  check_spec(dm, spec, x_r);
  const std::size_t n = dm.size();
  const double x_d = spec.x_d;
  const double x_u = spec.x_u;
  // X_i = x_d + y_i + w_i, y_i the part below c (reduces the shortfall), w_i the rest.
  const double y_cap = std::max(0.0, std::min(c, x_u) - x_d);
  const double w_cap = x_u - std::max(c, x_d);
  LinearProgram lp;
  for (std::size_t i = 0; i < n; ++i) lp.add_variable(-dm.p[i], 0.0, y_cap);
  for (std::size_t i = 0; i < n; ++i) lp.add_variable(0.0, 0.0, w_cap);
  std::vector<double> ret(2 * n), cap(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    ret[i] = ret[n + i] = dm.p[i];
    cap[i] = cap[n + i] = dm.ptilde(i);
  }
  lp.add_row(std::move(cap), RowSense::Equal, x_r - x_d);
  if (spec.z) lp.add_row(std::move(ret), RowSense::GreaterEqual, *spec.z - x_d);

  const LpResult r = solve_lp(lp);
  if (r.status == LpStatus::Infeasible) {
    throw InfeasibleError("lp_step1: no payoff meets the constraints; " + certificate_text(r));
  }
  if (r.status != LpStatus::Optimal) throw SolverError("lp_step1: simplex did not reach optimality");

  Step1Result out;
  out.payoff.resize(n);
  double covered = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.payoff[i] = x_d + r.x[i] + r.x[n + i];
    covered += dm.p[i] * r.x[i];
  }
  out.value = std::max(0.0, c - x_d) - covered;
  return out;
}

LpMeanCvar lp_mean_cvar(const DiscreteMarket& dm, const ProblemSpec& spec, double x_r) {
  check_spec(dm, spec, x_r);
  const double lambda = spec.lambda;
  LpMeanCvar out;
  auto g = [&](double c) {
    ++out.lp_solves;
    return lp_step1(dm, c, spec, x_r).value - lambda * c;
  };
  const double scale = std::max({1.0, std::abs(x_r), std::abs(spec.x_d)});
  const double h = 1e-8 * scale;
  const double tol = 1e-12 * scale;

  double best_c = spec.x_d;
  double best_g = g(best_c);
  auto consider = [&](double c, double v) {
    if (v < best_g) {
      best_g = v;
      best_c = c;
    }
  };

  // Left end with its right secant slope.
  double lo = spec.x_d;
  double g_lo = best_g;
  double s_lo = (g(lo + h) - g_lo) / h;
  bool done = s_lo >= 0.0;

  double hi = spec.x_u;
  double g_hi = 0.0, s_hi = 0.0;
  if (!done) {
    if (std::isfinite(hi)) {
      g_hi = g(hi);
      s_hi = (g_hi - g(hi - h)) / h;
      consider(hi, g_hi);
    } else {
      // Beyond the largest payoff the slope is 1 - lambda > 0; find a point past the minimum.
      hi = std::max(2.0 * x_r - spec.x_d, spec.x_d + 1.0);
      for (int k = 0;; ++k) {
        g_hi = g(hi);
        s_hi = (g_hi - g(hi - h)) / h;
        consider(hi, g_hi);
        if (s_hi > 0.0) break;
        if (k == 60) throw SolverError("lp_mean_cvar: no upper bracket for the VaR level");
        lo = hi;
        g_lo = g_hi;
        s_lo = (g(lo + h) - g_lo) / h;
        hi = spec.x_d + 2.0 * (hi - spec.x_d);
      }
    }
    done = s_hi <= 0.0;
  }

  for (int it = 0; !done && it < 200; ++it) {
    // Secant lines below convex g; their crossing bounds the minimum from below.
    const double c = std::clamp((g_hi - g_lo + s_lo * lo - s_hi * hi) / (s_lo - s_hi), lo, hi);
    const double bound = g_lo + s_lo * (c - lo);
    const double gc = g(c);
    consider(c, gc);
    if (best_g - bound <= tol || hi - lo <= 2.0 * h) break;
    const double s_right = (g(c + h) - gc) / h;
    if (s_right < 0.0) {
      lo = c;
      g_lo = gc;
      s_lo = s_right;
      continue;
    }
    const double s_left = (gc - g(c - h)) / h;
    if (s_left > 0.0) {
      hi = c;
      g_hi = gc;
      s_hi = s_left;
      continue;
    }
    break;  // 0 lies in the subdifferential at c
  }
  // g is piecewise linear: fit the pieces on either side of a kink near the best point,
  // once assuming the kink lies right of it and once left, and try both crossings.
  if (!done) {
    const double c0 = best_c;
    auto cross = [&](double x1, double g1, double s1, double x2, double g2, double s2) {
      if (!(s1 < s2)) return;
      const double c = std::clamp((g2 - g1 + s1 * x1 - s2 * x2) / (s1 - s2), spec.x_d,
                                  std::isfinite(spec.x_u) ? spec.x_u : c0 + 4.0 * h);
      consider(c, g(c));
    };
    const double gm2 = c0 - 2.0 * h >= spec.x_d ? g(c0 - 2.0 * h) : NAN;
    const double gm1 = c0 - h >= spec.x_d ? g(c0 - h) : NAN;
    const double gp1 = c0 + h <= spec.x_u ? g(c0 + h) : NAN;
    const double gp2 = c0 + 2.0 * h <= spec.x_u ? g(c0 + 2.0 * h) : NAN;
    const double g0 = best_g;
    if (std::isfinite(gm1) && std::isfinite(gp1) && std::isfinite(gp2)) {
      cross(c0, g0, (g0 - gm1) / h, c0 + h, gp1, (gp2 - gp1) / h);
    }
    if (std::isfinite(gm2) && std::isfinite(gm1) && std::isfinite(gp1)) {
      cross(c0 - h, gm1, (gm1 - gm2) / h, c0, g0, (gp1 - g0) / h);
    }
  }

  Step1Result at = lp_step1(dm, best_c, spec, x_r);
  ++out.lp_solves;
  out.c = best_c;
  out.cvar = (at.value - lambda * best_c) / lambda;
  out.payoff = std::move(at.payoff);
  return out;
}

LpMeanCvar lp_mean_cvar_joint(const DiscreteMarket& dm, const ProblemSpec& spec, double x_r) {
  check_spec(dm, spec, x_r);
  const std::size_t n = dm.size();
  const double lambda = spec.lambda;
  LinearProgram lp;
  for (std::size_t i = 0; i < n; ++i) lp.add_variable(0.0, spec.x_d, spec.x_u);        // X_i
  for (std::size_t i = 0; i < n; ++i) lp.add_variable(dm.p[i] / lambda, 0.0, kInf);    // s_i
  const std::size_t c_idx = lp.add_variable(-1.0, spec.x_d, spec.x_u);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(2 * n + 1, 0.0);
    row[i] = 1.0;
    row[n + i] = 1.0;
    row[c_idx] = -1.0;
    lp.add_row(std::move(row), RowSense::GreaterEqual, 0.0);  // s_i >= c - X_i
  }
  std::vector<double> cap(2 * n + 1, 0.0), ret(2 * n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    cap[i] = dm.ptilde(i);
    ret[i] = dm.p[i];
  }
  lp.add_row(std::move(cap), RowSense::Equal, x_r);
  if (spec.z) lp.add_row(std::move(ret), RowSense::GreaterEqual, *spec.z);

  const LpResult r = solve_lp(lp);
  if (r.status == LpStatus::Infeasible) {
    throw InfeasibleError("lp_mean_cvar_joint: infeasible; " + certificate_text(r));
  }
  if (r.status != LpStatus::Optimal) throw SolverError("lp_mean_cvar_joint: simplex failed");
  LpMeanCvar out;
  out.cvar = r.objective;
  out.c = r.x[c_idx];
  out.payoff.assign(r.x.begin(), r.x.begin() + static_cast<std::ptrdiff_t>(n));
  out.lp_solves = 1;
  return out;
}

StructureSummary summarize_structure(const std::vector<double>& payoff, const ProblemSpec& spec) {
  StructureSummary s;
  double hi_scale = std::abs(spec.x_d);
  for (double v : payoff) hi_scale = std::max(hi_scale, std::abs(v));
  const double tol = 1e-7 * std::max(1.0, hi_scale);

  // Label each atom; interior values vote for the common mid level.
  std::vector<char> label(payoff.size());
  std::map<long long, std::size_t> votes;
  for (std::size_t i = 0; i < payoff.size(); ++i) {
    const double v = payoff[i];
    if (std::isfinite(spec.x_u) && std::abs(v - spec.x_u) <= tol) {
      label[i] = 'U';
    } else if (std::abs(v - spec.x_d) <= tol) {
      label[i] = 'L';
    } else {
      label[i] = 'M';
      ++votes[std::llround(v / tol)];
    }
  }
  if (!votes.empty()) {
    const auto top = std::max_element(votes.begin(), votes.end(),
                                      [](const auto& a, const auto& b) { return a.second < b.second; });
    s.mid_level = static_cast<double>(top->first) * tol;
  }
  for (std::size_t i = 0; i < payoff.size(); ++i) {
    if (label[i] == 'M' && std::abs(payoff[i] - s.mid_level) > 2.0 * tol) label[i] = 'o';
    switch (label[i]) {
      case 'U': ++s.n_high; break;
      case 'L': ++s.n_low; break;
      case 'M': ++s.n_mid; break;
      default: ++s.n_odd; break;
    }
  }

  s.monotone = true;
  for (std::size_t i = 1; i < payoff.size(); ++i) {
    if (payoff[i] > payoff[i - 1] + tol) s.monotone = false;
  }

  // Run-length code and block order: U..., M..., L..., odd atoms only at seams.
  std::ostringstream os;
  std::string runs;
  for (std::size_t i = 0; i < label.size();) {
    std::size_t j = i;
    while (j < label.size() && label[j] == label[i]) ++j;
    os << (i ? " " : "") << label[i] << (j - i);
    runs.push_back(label[i]);
    if (label[i] == 'o' && j - i > 1) runs.push_back('o');  // two odd atoms in a row
    i = j;
  }
  s.pattern = os.str();
  auto rank = [](char c) { return c == 'U' ? 0 : c == 'M' ? 2 : c == 'L' ? 4 : -1; };
  bool ordered = true;
  int prev = -1;
  int odd_seams = 0;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    if (runs[k] == 'o') {
      // A lone odd atom sits between two different blocks (or at an end).
      if (k + 1 < runs.size() && runs[k + 1] == 'o') ordered = false;
      ++odd_seams;
      continue;
    }
    const int r = rank(runs[k]);
    if (r <= prev) ordered = false;
    prev = r;
  }
  s.three_level = s.monotone && ordered && odd_seams <= 2;
  return s;
}

}  // namespace mcvar
