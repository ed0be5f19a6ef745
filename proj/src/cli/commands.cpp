#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <variant>

#include <json.hpp>

#include "mcvar/cli.hpp"
#include "mcvar/dynamics.hpp"
#include "mcvar/errors.hpp"
#include "mcvar/frontier.hpp"
#include "mcvar/oracle.hpp"
#include "mcvar/static_solver.hpp"

namespace mcvar::cli {

namespace {

using Json = nlohmann::ordered_json;

// Non-finite numbers become null (JSON has no infinities).
Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }
Json num(const std::optional<double>& v) { return v ? num(*v) : Json(nullptr); }

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json config_json(const PayoffConfig& cfg) {
  const Levels lv = levels_of(cfg);
  Json j;
  j["kind"] = kind_name(cfg);
  j["a"] = num(std::exp(lv.log_a));
  j["b"] = num(std::exp(lv.log_b));
  j["log_a"] = num(lv.log_a);
  j["log_b"] = num(lv.log_b);
  j["low"] = num(lv.low);
  j["mid"] = num(lv.mid);
  j["high"] = num(lv.high);
  return j;
}

Json residuals_json(const RndModel& model, const PayoffConfig& cfg, double x_r,
                    const std::optional<double>& z) {
  Json j;
  j["capital"] = num(capital(model, cfg) - x_r);
  j["return"] = z ? num(expected_return(model, cfg) - *z) : Json(nullptr);
  return j;
}

Json diagnostics_json(const Diagnostics& d, double x_r) {
  Json j;
  j["x_r"] = num(x_r);
  j["a_bar"] = num(d.a_bar);
  j["z_bar"] = num(d.z_bar);
  j["a_star"] = num(d.a_star);
  j["x_star"] = num(d.x_star);
  j["z_star"] = num(d.z_star);
  j["x_z1"] = num(d.x_z1);
  j["x_z2"] = num(d.x_z2);
  return j;
}

}  // namespace

CommandOutput failure_output(int code, const std::string& message) {
  return {code, "", "error: " + message + "\n"};
}

int exit_code_for_current_exception(std::string& message) {
  try {
    throw;
  } catch (const ValidationError& e) {
    message = e.what();
    return kValidationFailure;
  } catch (const DomainError& e) {
    message = e.what();
    return kValidationFailure;
  } catch (const InfeasibleError& e) {
    message = e.what();
    return kInfeasible;
  } catch (const std::exception& e) {
    message = e.what();
    return kSolverFailure;
  } catch (...) {
    message = "unknown failure";
    return kSolverFailure;
  }
}

CommandOutput cmd_solve(const RunConfig& cfg, std::optional<double> epsilon) {
  return guarded([&] {
    const StaticSolver solver(cfg.market, cfg.problem);
    const Solution sol = solver.solve();
    const RndModel& model = solver.model();
    const std::optional<double>& z = cfg.problem.z;

    Json doc;
    doc["command"] = "solve";
    doc["case"] = to_string(sol.case_label);
    doc["optimal"] = is_optimal(sol.case_label);
    doc["cvar"] = num(sol.cvar);
    doc["z"] = num(z);
    doc["note"] = sol.note;
    doc["config"] = sol.config ? config_json(*sol.config) : Json(nullptr);
    doc["expected_return"] = sol.config ? num(expected_return(model, *sol.config)) : Json(nullptr);
    doc["residuals"] = sol.config ? residuals_json(model, *sol.config, solver.x_r(), z) : Json(nullptr);
    doc["diagnostics"] = diagnostics_json(sol.diagnostics, solver.x_r());

    CommandOutput out;
    if (epsilon) {
      const bool nonexistent = sol.case_label == CaseLabel::NonexistentAtMoneyMarketLevel ||
                               sol.case_label == CaseLabel::NonexistentAtStarLevel;
      if (nonexistent) {
        const PayoffConfig eps_cfg = solver.epsilon_suboptimal(*epsilon);
        Json e;
        e["epsilon"] = *epsilon;
        e["config"] = config_json(eps_cfg);
        e["cvar"] = num(cvar(model, eps_cfg, cfg.problem.lambda));
        e["expected_return"] = num(expected_return(model, eps_cfg));
        e["residuals"] = residuals_json(model, eps_cfg, solver.x_r(), z);
        doc["epsilon_suboptimal"] = e;
      } else {
        out.err += "note: --epsilon ignored, the infimum is attained or the target infeasible\n";
      }
    }
    out.out = dump(doc);
    if (sol.case_label == CaseLabel::InfeasibleReturnTarget) {
      out.exit_code = kInfeasible;
      out.err += "error: " + sol.note + "\n";
    }
    return out;
  });
}

CommandOutput cmd_frontier(const RunConfig& cfg, std::size_t points, const std::vector<double>& extra) {
  return guarded([&] {
    ProblemSpec spec = cfg.problem;
    spec.z.reset();
    const StaticSolver solver(cfg.market, spec);
    std::vector<double> grid = default_grid(solver, points);
    grid.insert(grid.end(), extra.begin(), extra.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    const std::vector<FrontierPoint> pts = sweep(solver, grid);
    return CommandOutput{kSuccess, to_csv(pts), ""};
  });
}

CommandOutput cmd_hedge(const RunConfig& cfg, std::uint64_t paths, std::uint64_t steps,
                        std::uint64_t seed, unsigned threads) {
  return guarded([&] {
    const StaticSolver solver(cfg.market, cfg.problem);
    const Solution sol = solver.solve();
    if (sol.case_label == CaseLabel::InfeasibleReturnTarget) {
      return failure_output(kInfeasible, sol.note);
    }
    if (!sol.config) {
      return failure_output(kValidationFailure,
                            "no optimal payoff to replicate (" + to_string(sol.case_label) +
                                "); use solve --epsilon for a near-optimal payoff");
    }
    const HedgePlan plan{*sol.config, cfg.market};
    const PathSimResult r =
        simulate_replication(plan, paths, steps, seed, cfg.problem.lambda, threads);

    Json doc;
    doc["command"] = "hedge";
    doc["case"] = to_string(sol.case_label);
    doc["config"] = config_json(*sol.config);
    doc["initial_value"] = num(portfolio_value(plan, 0.0, cfg.market.s0));
    doc["target"] = {{"expected_return", num(expected_return(solver.model(), *sol.config))},
                     {"cvar", num(sol.cvar)}};
    doc["n_paths"] = r.n_paths;
    doc["n_steps"] = r.n_steps;
    doc["seed"] = r.seed;
    doc["rng"] = r.rng;
    doc["lambda"] = r.lambda;
    doc["terminal_abs_error"] = {{"mean", num(r.terminal_abs_error.mean)},
                                 {"median", num(r.terminal_abs_error.median)},
                                 {"p99", num(r.terminal_abs_error.p99)}};
    doc["empirical_mean"] = num(r.empirical_mean);
    doc["empirical_mean_se"] = num(r.empirical_mean_se);
    doc["empirical_cvar"] = num(r.empirical_cvar);
    doc["empirical_cvar_se"] = num(r.empirical_cvar_se);
    doc["payoff_mean"] = num(r.payoff_mean);
    doc["payoff_mean_se"] = num(r.payoff_mean_se);
    doc["payoff_cvar"] = num(r.payoff_cvar);
    doc["payoff_cvar_se"] = num(r.payoff_cvar_se);
    return CommandOutput{kSuccess, dump(doc), ""};
  });
}

CommandOutput cmd_validate(const RunConfig& cfg, std::size_t atoms, double gap_tolerance) {
  return guarded([&] {
    if (!(gap_tolerance >= 0.0)) throw ValidationError("gap_tolerance", "must be >= 0");
    const StaticSolver solver(cfg.market, cfg.problem);
    const Solution sol = solver.solve();
    const DiscreteMarket dm = discretize(atoms, cfg.market);

    Json doc;
    doc["command"] = "validate";
    doc["atoms"] = atoms;
    doc["case"] = to_string(sol.case_label);
    doc["analytic_cvar"] = num(sol.cvar);

    LpMeanCvar lp;
    try {
      lp = lp_mean_cvar(dm, cfg.problem, solver.x_r());
    } catch (const InfeasibleError& e) {
      doc["lp_cvar"] = nullptr;
      doc["lp_note"] = e.what();
      if (sol.case_label == CaseLabel::InfeasibleReturnTarget) {
        return CommandOutput{kInfeasible, dump(doc), "error: return target infeasible\n"};
      }
      return CommandOutput{kSolverFailure, dump(doc),
                           "error: LP infeasible while the analytic problem is feasible\n"};
    }
    if (sol.case_label == CaseLabel::InfeasibleReturnTarget) {
      // Discrete payoffs are bucket-measurable payoffs of the continuous model.
      return CommandOutput{kSolverFailure, dump(doc),
                           "error: LP feasible while the analytic problem is infeasible\n"};
    }
    const double gap = std::abs(lp.cvar - sol.cvar);
    const double rel = gap / std::max(std::abs(sol.cvar), 1e-300);
    const StructureSummary st = summarize_structure(lp.payoff, cfg.problem);
    doc["lp_cvar"] = num(lp.cvar);
    doc["lp_var_level"] = num(lp.c);
    doc["lp_solves"] = lp.lp_solves;
    doc["gap_abs"] = num(gap);
    doc["gap_rel"] = sol.cvar == 0.0 ? num(gap) : num(rel);
    doc["gap_tolerance"] = gap_tolerance;
    const bool pass = (sol.cvar == 0.0 ? gap : rel) <= gap_tolerance;
    doc["pass"] = pass;
    doc["structure"] = {{"pattern", st.pattern},       {"n_high", st.n_high},
                        {"n_mid", st.n_mid},           {"n_low", st.n_low},
                        {"n_odd", st.n_odd},           {"mid_level", num(st.mid_level)},
                        {"monotone", st.monotone},     {"three_level", st.three_level}};
    CommandOutput out{kSuccess, dump(doc), ""};
    if (!pass) {
      out.exit_code = kValidationFailure;
      out.err = "error: LP/analytic gap exceeds the tolerance\n";
    }
    return out;
  });
}

}  // namespace mcvar::cli
