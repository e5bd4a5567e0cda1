#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rlxa/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"rlxa: hyperbolic relaxation experiments"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  int jobs = 1;
  std::uint64_t seed = 0;
  std::vector<std::string> paths;

  app.add_option("--out", out, "output directory (overrides the config)");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "seed (overrides the config)");

  auto* solve = app.add_subcommand("solve", "integrate one trajectory");
  auto* eigen = app.add_subcommand("eigen", "Poincare constant of the mesh");
  auto* split = app.add_subcommand("split", "Z/K splitting diagnostics");
  auto* limit = app.add_subcommand("limit", "attractor semicontinuity sweep");
  auto* verify = app.add_subcommand("verify", "certify ledgers");
  for (auto* sub : {solve, eigen, split, limit}) sub->add_option("--config", config, "config file")->required();
  verify->add_option("paths", paths, "ledger csv files or run directories")->required();

  CLI11_PARSE(app, argc, argv);
  rlxa::set_log_level(rlxa::log_level_from_env());

  rlxa::RunContext ctx;
  ctx.out = out;
  ctx.jobs = jobs;
  if (seed_opt->count()) ctx.seed = seed;

  try {
    rlxa::CommandResult res;
    if (*verify) {
      res = rlxa::cmd_verify(paths, ctx);
    } else {
      const rlxa::ExperimentConfig cfg = rlxa::load_config(config);
      if (*solve) res = rlxa::cmd_solve(cfg, ctx);
      if (*eigen) res = rlxa::cmd_eigen(cfg, ctx);
      if (*split) res = rlxa::cmd_split(cfg, ctx);
      if (*limit) res = rlxa::cmd_limit(cfg, ctx);
    }
    std::cout << res.summary << "\n";
    for (const auto& f : res.files) rlxa::log(rlxa::LogLevel::info, "wrote " + f);
    return res.exit_code;
  } catch (const rlxa::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
