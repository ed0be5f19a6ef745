#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include <boost/math/tools/toms748_solve.hpp>

#include "mcvar/errors.hpp"

namespace mcvar {

struct RootOptions {
  double abs_tol = 1e-12;
  double rel_tol = 4e-16;
  std::uintmax_t max_iter = 200;
};

/// Root of a continuous f on [lo, hi] by TOMS 748 (bisection safeguarded by
/// inverse cubic interpolation). The bracket is checked before iterating: f(lo)
/// and f(hi) must not share a strict sign. Throws SolverError on a missing bracket
/// or when the iteration cap is reached.
template <class F>
double find_root(F&& f, double lo, double hi, const std::string& what,
                 const RootOptions& opt = {}) {
  const double f_lo = f(lo);
  const double f_hi = f(hi);
  if (std::isnan(f_lo) || std::isnan(f_hi)) {
    throw SolverError(what + ": objective is NaN at the bracket ends");
  }
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    throw SolverError(what + ": no sign change on bracket [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
  }
  auto done = [&opt](double a, double b) {
    return std::abs(b - a) <= opt.abs_tol + opt.rel_tol * std::max(std::abs(a), std::abs(b));
  };
  std::uintmax_t iters = opt.max_iter;
  const auto [a, b] =
      boost::math::tools::toms748_solve(std::forward<F>(f), lo, hi, f_lo, f_hi, done, iters);
  if (iters >= opt.max_iter && !done(a, b)) {
    throw SolverError(what + ": iteration cap reached");
  }
  return 0.5 * (a + b);
}

}  // namespace mcvar
