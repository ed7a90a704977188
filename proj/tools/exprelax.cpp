#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "exprelax/commands.hpp"
#include "exprelax/config.hpp"
#include "exprelax/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Implicit time stepping for du/dt = Laplace(exp(-p-Laplace u)) with diagnostics"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int levels = 0;
  long long seed = -1;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    sub->add_option("--levels", levels, "refinement levels (overrides refine.levels)")
        ->check(CLI::Range(2, 12));
    sub->add_option("--seed", seed, "initial-condition seed (overrides ic.seed)")
        ->check(CLI::NonNegativeNumber);
  };
  CLI::App* run = app.add_subcommand("run", "simulate and write ledger, fields and report");
  CLI::App* check = app.add_subcommand("check", "run every invariant suite");
  CLI::App* refine = app.add_subcommand("refine", "time-step refinement study");
  CLI::App* probe = app.add_subcommand("probe", "singular-set report under refinement");
  for (CLI::App* sub : {run, check, refine, probe}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exprelax::kExitConfigError;
  }

  exprelax::RunConfig cfg;
  try {
    cfg = exprelax::parse_config(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (levels > 0) cfg.levels = levels;
    if (seed >= 0) cfg.ic.seed = static_cast<std::uint64_t>(seed);
  } catch (const exprelax::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return exprelax::kExitConfigError;
  }

  try {
    int status = 0;
    if (*run) status = exprelax::cmd_run(cfg);
    else if (*check) status = exprelax::cmd_check(cfg);
    else if (*refine) status = exprelax::cmd_refine(cfg, cfg.levels);
    else status = exprelax::cmd_probe(cfg);
    std::fprintf(stderr, "%s: exit %d, report in %s/report.json\n",
                 app.get_subcommands().front()->get_name().c_str(), status, cfg.out_dir.c_str());
    return status;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exprelax::kExitCheckFailure;
  }
}
