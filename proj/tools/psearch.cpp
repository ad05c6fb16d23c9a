// psearch: solve, sweep and simulate the two-quote search market.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "psearch/psearch.hpp"

namespace {

using psearch::cli::ConfigError;

struct Options {
  std::string config;
  std::string out;
  std::string format;
  std::optional<std::uint64_t> seed;
  std::size_t grid = 201;
};

int run(const std::string& command, const Options& opt) {
  namespace cli = psearch::cli;
  auto cfg = cli::load_config(opt.config);
  if (!opt.format.empty()) cfg.output.format = cli::parse_format(opt.format);
  if (!opt.out.empty()) cfg.output.path = opt.out;
  if (opt.seed && cfg.simulation) cfg.simulation->run.seed = *opt.seed;

  std::ostringstream buffer;
  int code = cli::kExitFailure;
  if (command == "solve") {
    code = cli::cmd_solve(cfg, buffer);
  } else if (command == "sweep-benefit") {
    code = cli::cmd_sweep_benefit(cfg, opt.grid, buffer);
  } else if (command == "welfare") {
    code = cli::cmd_welfare(cfg, buffer);
  } else if (command == "simulate") {
    code = cli::cmd_simulate(cfg, buffer, std::cerr);
  } else if (command == "unravel") {
    code = cli::cmd_unravel(cfg, buffer, std::cerr);
  }

  if (cfg.output.path.empty()) {
    std::cout << buffer.str();
  } else {
    std::ofstream file(cfg.output.path);
    if (!file) {
      std::cerr << "cannot write '" << cfg.output.path << "'\n";
      return cli::kExitFailure;
    }
    file << buffer.str();
  }
  if (code == cli::kExitNoActive && command == "solve") {
    std::cerr << "no active-search equilibrium; Diamond only\n";
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Price dispersion with unobserved costs: equilibria, welfare, simulation"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "Scenario file (JSON)")->required();
    sub->add_option("--out", opt.out, "Write results here instead of stdout");
    sub->add_option("--format", opt.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
  };
  auto* solve = app.add_subcommand("solve", "Thresholds and equilibria per regime");
  auto* sweep = app.add_subcommand("sweep-benefit", "Benefit curves on a q grid");
  auto* welfare = app.add_subcommand("welfare", "Welfare comparison of the regimes");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo run of one equilibrium");
  auto* unravel = app.add_subcommand("unravel", "Voluntary cost disclosure trace");
  for (auto* sub : {solve, sweep, welfare, simulate, unravel}) add_common(sub);
  sweep->add_option("--grid", opt.grid, "Number of q grid points")
      ->check(CLI::Range(std::size_t{3}, std::size_t{10000000}));
  std::uint64_t seed = 0;
  auto* seed_opt = simulate->add_option("--seed", seed, "Overrides simulation.seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : psearch::cli::kExitConfig;
  }
  if (*seed_opt) opt.seed = seed;

  std::string command;
  for (auto* sub : app.get_subcommands()) command = sub->get_name();
  try {
    return run(command, opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return psearch::cli::kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return psearch::cli::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return psearch::cli::kExitFailure;
  }
}
