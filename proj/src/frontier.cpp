#include "mcvar/frontier.hpp"

#include <cmath>
#include <sstream>
#include <variant>

#include "mcvar/errors.hpp"

namespace mcvar {

std::vector<double> default_grid(const StaticSolver& solver, std::size_t points) {
  if (points < 2) throw ValidationError("points", "need at least 2 grid points");
  if (!std::isfinite(solver.spec().x_u)) {
    throw ValidationError("x_u", "the default grid needs a finite upper bound (z_bar < inf)");
  }
  const double lo = solver.x_r();
  const double hi = solver.solve_bar().z;
  std::vector<double> grid(points);
  const double n = static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = lo + (hi - lo) * (static_cast<double>(i) / n);
  }
  grid.back() = hi;
  return grid;
}

std::vector<FrontierPoint> sweep(const StaticSolver& solver, const std::vector<double>& z_grid) {
  std::vector<FrontierPoint> out;
  out.reserve(z_grid.size());
  std::optional<double> hint;
  for (double z : z_grid) {
    FrontierPoint pt;
    pt.z = z;
    const Solution sol = solver.solve(z, hint);
    pt.case_label = sol.case_label;
    pt.cvar = sol.cvar;
    pt.note = sol.note;
    hint.reset();
    if (sol.config) {
      const PayoffConfig& cfg = *sol.config;
      if (const auto* c = std::get_if<Constant>(&cfg)) {
        pt.x = c->level;
      } else if (const auto* c = std::get_if<TwoLineLowMid>(&cfg)) {
        pt.x = c->mid;
        pt.a = std::exp(c->log_a);
      } else if (const auto* c = std::get_if<TwoLineMidUp>(&cfg)) {
        pt.x = c->mid;
        pt.b = std::exp(c->log_b);
      } else if (const auto* c = std::get_if<TwoLineLowUp>(&cfg)) {
        pt.a = pt.b = std::exp(c->log_a);
      } else if (const auto* c = std::get_if<ThreeLine>(&cfg)) {
        pt.x = c->mid;
        pt.a = std::exp(c->log_a);
        pt.b = std::exp(c->log_b);
        hint = c->mid;
      }
    }
    out.push_back(std::move(pt));
  }
  return out;
}

std::string to_csv(const std::vector<FrontierPoint>& points) {
  std::ostringstream os;
  os.precision(12);
  auto opt = [&os](const std::optional<double>& v) {
    if (v) os << *v;
  };
  os << "z,cvar,case,x,a,b\n";
  for (const FrontierPoint& p : points) {
    os << p.z << ',';
    if (std::isfinite(p.cvar)) os << p.cvar;
    os << ',' << to_string(p.case_label) << ',';
    opt(p.x);
    os << ',';
    opt(p.a);
    os << ',';
    opt(p.b);
    os << '\n';
  }
  return os.str();
}

}  // namespace mcvar
