// mcvar: command-line front end of the Mean-CVaR library.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcvar/cli.hpp"

using namespace mcvar::cli;

namespace {

int emit(const CommandOutput& r, const std::string& output_path) {
  if (!r.err.empty()) std::cerr << r.err;
  if (output_path.empty()) {
    std::cout << r.out;
  } else if (!r.out.empty()) {
    std::ofstream f(output_path);
    if (!f) {
      std::cerr << "error: cannot write " << output_path << "\n";
      return kValidationFailure;
    }
    f << r.out;
  }
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-CVaR optimal payoffs, frontiers and hedges in the Black-Scholes market"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_path;
  std::optional<double> epsilon;
  std::size_t points = 101;
  std::vector<double> extra;
  std::uint64_t paths = 0, steps = 0, seed = 0;
  unsigned threads = 1;
  std::size_t atoms = 4096;
  double gap_tol = 0.005;

  auto common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "JSON problem file")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--output", output_path, "write the document here instead of stdout");
  };

  CLI::App* solve = app.add_subcommand("solve", "optimal payoff for the problem's return target");
  common(solve);
  solve->add_option("--epsilon", epsilon, "also build an eps-suboptimal payoff when no optimum exists")
      ->check(CLI::PositiveNumber);

  CLI::App* frontier = app.add_subcommand("frontier", "efficient frontier over [x_r, z_bar] as CSV");
  common(frontier);
  frontier->add_option("--points", points, "grid size")->check(CLI::Range(2, 1000000));
  frontier->add_option("--include", extra, "additional return targets")->delimiter(',');

  CLI::App* hedge = app.add_subcommand("hedge", "simulate the replicating strategy");
  common(hedge);
  hedge->add_option("--paths", paths, "Monte Carlo paths")->required()->check(CLI::PositiveNumber);
  hedge->add_option("--steps", steps, "rebalancing steps")->required()->check(CLI::PositiveNumber);
  hedge->add_option("--seed", seed, "RNG seed")->required();
  hedge->add_option("--threads", threads, "worker threads (results do not depend on it)")
      ->check(CLI::Range(1u, 1024u));

  CLI::App* validate = app.add_subcommand("validate", "compare against the discretized LP");
  common(validate);
  validate->add_option("--atoms", atoms, "number of equally likely states")->check(CLI::Range(2, 1000000));
  validate->add_option("--gap-tolerance", gap_tol, "relative gap allowed")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kValidationFailure;
  }

  RunConfig cfg;
  const CommandOutput loaded = guarded([&] {
    cfg = load_run_config(config_path);
    return CommandOutput{};
  });
  if (loaded.exit_code != kSuccess) return emit(loaded, "");

  if (*solve) return emit(cmd_solve(cfg, epsilon), output_path);
  if (*frontier) return emit(cmd_frontier(cfg, points, extra), output_path);
  if (*hedge) return emit(cmd_hedge(cfg, paths, steps, seed, threads), output_path);
  return emit(cmd_validate(cfg, atoms, gap_tol), output_path);
}
