#pragma once

#include <cstddef>
#include <vector>

namespace mcvar {

enum class RowSense { LessEqual, Equal, GreaterEqual };

/// min cost.x  s.t.  rows[i].x (sense_i) rhs_i,  lower <= x <= upper.
/// Bounds may be infinite but every variable needs at least one finite bound.
struct LinearProgram {
  std::vector<double> cost;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::vector<double>> rows;  // dense, each of size cost.size()
  std::vector<RowSense> sense;
  std::vector<double> rhs;

  std::size_t add_variable(double c, double lo, double hi);
  void add_row(std::vector<double> coeffs, RowSense s, double b);
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpResult {
  LpStatus status = LpStatus::IterationLimit;
  std::vector<double> x;
  double objective = 0.0;
  std::vector<double> duals;  ///< row multipliers at the final basis
  /// Infeasible: phase-1 row multipliers y; y.(A x - b) stays above `infeasibility`
  /// over the box, which certifies that no feasible point exists.
  std::vector<double> certificate;
  double infeasibility = 0.0;  ///< phase-1 optimum (sum of artificials)
  std::size_t iterations = 0;
};

struct SimplexOptions {
  double feas_tol = 1e-9;
  double opt_tol = 1e-11;
  std::size_t max_iter = 200000;
  std::size_t refactor_every = 64;
};

/// Two-phase bounded-variable revised simplex on a dense explicit basis inverse.
/// Nonbasic variables start at the bound favoured by their cost, so box-dominated
/// problems need few pivots. Dantzig pricing, with Bland's rule after a run of
/// degenerate steps to rule out cycling.
LpResult solve_lp(const LinearProgram& lp, const SimplexOptions& opt = {});

}  // namespace mcvar
