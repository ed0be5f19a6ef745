#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mcvar/static_solver.hpp"

namespace mcvar {

struct FrontierPoint {
  double z = 0.0;
  CaseLabel case_label = CaseLabel::InfeasibleReturnTarget;
  double cvar = 0.0;            ///< +inf at infeasible points
  std::optional<double> x;      ///< mid level of the optimal payoff
  std::optional<double> a;
  std::optional<double> b;
  std::string note;
};

/// `points` equally spaced targets on [x_r, z_bar], both ends included. Requires x_u < inf.
std::vector<double> default_grid(const StaticSolver& solver, std::size_t points = 101);

/// One solution per target, in grid order. Consecutive Double-Star solves start from
/// the previous mid level. Targets above z_bar yield infeasible points.
std::vector<FrontierPoint> sweep(const StaticSolver& solver, const std::vector<double>& z_grid);

/// CSV with header z,cvar,case,x,a,b; absent fields are empty.
std::string to_csv(const std::vector<FrontierPoint>& points);

}  // namespace mcvar
