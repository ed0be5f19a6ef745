#include "mcvar/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mcvar/errors.hpp"

namespace mcvar {

namespace {

constexpr double kInfD = std::numeric_limits<double>::infinity();

enum class Where { Lower, Upper, Basic };

// Working form: A x = b over structural, slack and artificial columns.
class Simplex {
 public:
  Simplex(const LinearProgram& lp, const SimplexOptions& opt) : opt_(opt) {
    m_ = lp.rows.size();
    n_struct_ = lp.cost.size();
    cols_.reserve(n_struct_ + 2 * m_);
    for (std::size_t j = 0; j < n_struct_; ++j) {
      std::vector<double> col(m_);
      for (std::size_t i = 0; i < m_; ++i) col[i] = lp.rows[i][j];
      add_column(std::move(col), lp.lower[j], lp.upper[j], lp.cost[j]);
    }
    for (std::size_t i = 0; i < m_; ++i) {
      if (lp.sense[i] == RowSense::Equal) continue;
      std::vector<double> col(m_, 0.0);
      col[i] = lp.sense[i] == RowSense::LessEqual ? 1.0 : -1.0;
      add_column(std::move(col), 0.0, kInfD, 0.0);
    }
    b_ = lp.rhs;
    n_real_ = cols_.size();

    for (std::size_t j = 0; j < n_real_; ++j) {
      if (!std::isfinite(lo_[j]) && !std::isfinite(hi_[j])) {
        throw MisuseError("solve_lp: free variables are not supported");
      }
      if (lo_[j] > hi_[j]) throw MisuseError("solve_lp: empty variable box");
      const bool at_upper = std::isfinite(hi_[j]) && (cost_[j] < 0.0 || !std::isfinite(lo_[j]));
      where_[j] = at_upper ? Where::Upper : Where::Lower;
      x_[j] = at_upper ? hi_[j] : lo_[j];
    }
    // One artificial per row, signed so that it starts nonnegative.
    std::vector<double> resid = b_;
    for (std::size_t j = 0; j < n_real_; ++j) {
      if (x_[j] == 0.0) continue;
      for (std::size_t i = 0; i < m_; ++i) resid[i] -= cols_[j][i] * x_[j];
    }
    basis_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      std::vector<double> col(m_, 0.0);
      col[i] = resid[i] >= 0.0 ? 1.0 : -1.0;
      basis_[i] = add_column(std::move(col), 0.0, kInfD, 0.0);
      where_[basis_[i]] = Where::Basic;
      x_[basis_[i]] = std::abs(resid[i]);
    }
    refactor();
  }

  LpResult run() {
    LpResult res;
    // Phase 1: minimize the sum of artificials.
    std::vector<double> phase1(cols_.size(), 0.0);
    for (std::size_t j = n_real_; j < cols_.size(); ++j) phase1[j] = 1.0;
    LpStatus st = iterate(phase1, res.iterations);
    double infeas = 0.0;
    for (std::size_t j = n_real_; j < cols_.size(); ++j) infeas += x_[j];
    res.infeasibility = infeas;
    if (st == LpStatus::IterationLimit) {
      res.status = st;
      return res;
    }
    if (infeas > opt_.feas_tol * std::max(1.0, scale_)) {
      res.status = LpStatus::Infeasible;
      res.certificate = duals(phase1);
      return res;
    }
    // Phase 2: artificials are pinned at zero.
    for (std::size_t j = n_real_; j < cols_.size(); ++j) {
      hi_[j] = 0.0;
      if (where_[j] != Where::Basic) {
        where_[j] = Where::Lower;
        x_[j] = 0.0;
      }
    }
    st = iterate(cost_, res.iterations);
    res.status = st;
    res.x.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_struct_));
    res.objective = 0.0;
    for (std::size_t j = 0; j < n_struct_; ++j) res.objective += cost_[j] * x_[j];
    res.duals = duals(cost_);
    return res;
  }

 private:
  std::size_t add_column(std::vector<double> col, double lo, double hi, double c) {
    for (double v : col) scale_ = std::max(scale_, std::abs(v));
    cols_.push_back(std::move(col));
    lo_.push_back(lo);
    hi_.push_back(hi);
    cost_.push_back(c);
    x_.push_back(0.0);
    where_.push_back(Where::Lower);
    return cols_.size() - 1;
  }

  // Rebuilds B^{-1} by Gauss-Jordan with partial pivoting and recomputes x_B.
  void refactor() {
    std::vector<std::vector<double>> a(m_, std::vector<double>(2 * m_, 0.0));
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t k = 0; k < m_; ++k) a[i][k] = cols_[basis_[k]][i];
      a[i][m_ + i] = 1.0;
    }
    for (std::size_t c = 0; c < m_; ++c) {
      std::size_t piv = c;
      for (std::size_t i = c + 1; i < m_; ++i) {
        if (std::abs(a[i][c]) > std::abs(a[piv][c])) piv = i;
      }
      if (std::abs(a[piv][c]) < 1e-13) throw SolverError("solve_lp: singular basis");
      std::swap(a[piv], a[c]);
      const double inv = 1.0 / a[c][c];
      for (double& v : a[c]) v *= inv;
      for (std::size_t i = 0; i < m_; ++i) {
        if (i == c || a[i][c] == 0.0) continue;
        const double f = a[i][c];
        for (std::size_t k = 0; k < 2 * m_; ++k) a[i][k] -= f * a[c][k];
      }
    }
    binv_.assign(m_, std::vector<double>(m_));
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t k = 0; k < m_; ++k) binv_[i][k] = a[i][m_ + k];
    }
    std::vector<double> r = b_;
    for (std::size_t j = 0; j < cols_.size(); ++j) {
      if (where_[j] == Where::Basic || x_[j] == 0.0) continue;
      for (std::size_t i = 0; i < m_; ++i) r[i] -= cols_[j][i] * x_[j];
    }
    for (std::size_t i = 0; i < m_; ++i) {
      double v = 0.0;
      for (std::size_t k = 0; k < m_; ++k) v += binv_[i][k] * r[k];
      x_[basis_[i]] = v;
    }
    since_refactor_ = 0;
  }

  std::vector<double> duals(const std::vector<double>& c) const {
    std::vector<double> y(m_, 0.0);
    for (std::size_t k = 0; k < m_; ++k) {
      const double cb = c[basis_[k]];
      if (cb == 0.0) continue;
      for (std::size_t i = 0; i < m_; ++i) y[i] += cb * binv_[k][i];
    }
    return y;
  }

  double reduced_cost(const std::vector<double>& c, const std::vector<double>& y,
                      std::size_t j) const {
    double d = c[j];
    for (std::size_t i = 0; i < m_; ++i) d -= y[i] * cols_[j][i];
    return d;
  }

  LpStatus iterate(const std::vector<double>& c, std::size_t& iterations) {
    std::size_t degenerate_run = 0;
    std::vector<double> alpha(m_);
    while (true) {
      if (iterations >= opt_.max_iter) return LpStatus::IterationLimit;
      if (since_refactor_ >= opt_.refactor_every) refactor();
      const std::vector<double> y = duals(c);
      const bool bland = degenerate_run > 50;

      // Pricing.
      std::size_t enter = cols_.size();
      double best = 0.0;
      double dir = 0.0;
      for (std::size_t j = 0; j < cols_.size(); ++j) {
        if (where_[j] == Where::Basic || lo_[j] == hi_[j]) continue;
        const double d = reduced_cost(c, y, j);
        double gain = 0.0, s = 0.0;
        if (where_[j] == Where::Lower && d < -opt_.opt_tol) {
          gain = -d;
          s = 1.0;
        } else if (where_[j] == Where::Upper && d > opt_.opt_tol) {
          gain = d;
          s = -1.0;
        } else {
          continue;
        }
        if (bland) {
          enter = j;
          dir = s;
          break;
        }
        if (gain > best) {
          best = gain;
          enter = j;
          dir = s;
        }
      }
      if (enter == cols_.size()) return LpStatus::Optimal;

      // alpha = B^{-1} a_enter; x_B moves by -dir * alpha * t.
      for (std::size_t i = 0; i < m_; ++i) {
        double v = 0.0;
        for (std::size_t k = 0; k < m_; ++k) v += binv_[i][k] * cols_[enter][k];
        alpha[i] = v;
      }
      double t_max = hi_[enter] - lo_[enter];
      std::size_t leave = m_;
      bool leave_to_upper = false;
      for (std::size_t i = 0; i < m_; ++i) {
        const double delta = -dir * alpha[i];
        if (std::abs(delta) < 1e-12) continue;
        const std::size_t bj = basis_[i];
        double t;
        bool to_upper;
        if (delta < 0.0) {
          if (!std::isfinite(lo_[bj])) continue;
          t = (x_[bj] - lo_[bj]) / -delta;
          to_upper = false;
        } else {
          if (!std::isfinite(hi_[bj])) continue;
          t = (hi_[bj] - x_[bj]) / delta;
          to_upper = true;
        }
        t = std::max(t, 0.0);
        bool take = t < t_max - 1e-12;
        if (!take && leave < m_ && t <= t_max + 1e-12) {
          // Ties: Bland picks the lowest index, otherwise the largest pivot.
          take = bland ? bj < basis_[leave] : std::abs(alpha[i]) > std::abs(alpha[leave]);
        }
        if (take) {
          t_max = t;
          leave = i;
          leave_to_upper = to_upper;
        }
      }
      if (!std::isfinite(t_max)) return LpStatus::Unbounded;
      ++iterations;
      degenerate_run = t_max <= 1e-13 ? degenerate_run + 1 : 0;

      for (std::size_t i = 0; i < m_; ++i) x_[basis_[i]] -= dir * alpha[i] * t_max;
      if (leave == m_) {
        // Bound flip: the entering variable crosses its box without a pivot.
        where_[enter] = dir > 0.0 ? Where::Upper : Where::Lower;
        x_[enter] = dir > 0.0 ? hi_[enter] : lo_[enter];
        continue;
      }
      x_[enter] += dir * t_max;
      const std::size_t out = basis_[leave];
      where_[out] = leave_to_upper ? Where::Upper : Where::Lower;
      x_[out] = leave_to_upper ? hi_[out] : lo_[out];
      where_[enter] = Where::Basic;
      basis_[leave] = enter;

      // Eta update of B^{-1}.
      const double piv = alpha[leave];
      if (std::abs(piv) < 1e-11) {
        refactor();
        continue;
      }
      for (double& v : binv_[leave]) v /= piv;
      for (std::size_t i = 0; i < m_; ++i) {
        if (i == leave || alpha[i] == 0.0) continue;
        const double f = alpha[i];
        for (std::size_t k = 0; k < m_; ++k) binv_[i][k] -= f * binv_[leave][k];
      }
      ++since_refactor_;
    }
  }

  SimplexOptions opt_;
  std::size_t m_ = 0;
  std::size_t n_struct_ = 0;
  std::size_t n_real_ = 0;
  double scale_ = 1.0;
  std::vector<std::vector<double>> cols_;
  std::vector<double> lo_, hi_, cost_, x_, b_;
  std::vector<Where> where_;
  std::vector<std::size_t> basis_;
  std::vector<std::vector<double>> binv_;
  std::size_t since_refactor_ = 0;
};

}  // namespace

std::size_t LinearProgram::add_variable(double c, double lo, double hi) {
  cost.push_back(c);
  lower.push_back(lo);
  upper.push_back(hi);
  for (auto& row : rows) row.push_back(0.0);
  return cost.size() - 1;
}

void LinearProgram::add_row(std::vector<double> coeffs, RowSense s, double b) {
  coeffs.resize(cost.size(), 0.0);
  rows.push_back(std::move(coeffs));
  sense.push_back(s);
  rhs.push_back(b);
}

LpResult solve_lp(const LinearProgram& lp, const SimplexOptions& opt) {
  const std::size_t n = lp.cost.size();
  if (lp.lower.size() != n || lp.upper.size() != n || lp.sense.size() != lp.rows.size() ||
      lp.rhs.size() != lp.rows.size()) {
    throw MisuseError("solve_lp: inconsistent dimensions");
  }
  for (const auto& row : lp.rows) {
    if (row.size() != n) throw MisuseError("solve_lp: row length differs from variable count");
  }
  return Simplex(lp, opt).run();
}

}  // namespace mcvar
