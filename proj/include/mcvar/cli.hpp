#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcvar/configurations.hpp"
#include "mcvar/market.hpp"

namespace mcvar::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInfeasible = 2,
  kValidationFailure = 3,
  kSolverFailure = 4,
};

/// Problem file contents:
///   {"market":  {"r":..., "mu":..., "sigma":..., "s0":..., "T":...},
///    "problem": {"x_d":..., "x_u": number or "inf", "x_0":..., "lambda":..., "z": number or null}}
/// x_u and z are optional (defaults +inf and no target); every other field is required.
struct RunConfig {
  MarketParams market;
  ProblemSpec problem;

  double x_r() const { return capital_target(problem, market); }
};

/// Parses and validates; throws ValidationError naming the field (e.g. "market.sigma").
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

struct CommandOutput {
  int exit_code = kSuccess;
  std::string out;  ///< document for standard output (JSON or CSV)
  std::string err;  ///< diagnostics for standard error
};

CommandOutput cmd_solve(const RunConfig& cfg, std::optional<double> epsilon = std::nullopt);
/// `extra` targets are merged into the equally spaced grid (sorted, duplicates dropped).
CommandOutput cmd_frontier(const RunConfig& cfg, std::size_t points = 101,
                           const std::vector<double>& extra = {});
CommandOutput cmd_hedge(const RunConfig& cfg, std::uint64_t paths, std::uint64_t steps,
                        std::uint64_t seed, unsigned threads = 1);
CommandOutput cmd_validate(const RunConfig& cfg, std::size_t atoms, double gap_tolerance = 0.005);

/// Runs `body`, mapping library exceptions to exit codes: ValidationError and
/// DomainError -> 3, InfeasibleError -> 2, anything else -> 4.
template <class F>
CommandOutput guarded(F&& body);

CommandOutput failure_output(int code, const std::string& message);
int exit_code_for_current_exception(std::string& message);

template <class F>
CommandOutput guarded(F&& body) {
  try {
    return body();
  } catch (...) {
    std::string message;
    const int code = exit_code_for_current_exception(message);
    return failure_output(code, message);
  }
}

}  // namespace mcvar::cli
