#include "jumpdiff/suite.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
  bool dt_halve = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "YAML run configuration")->required();
  cmd->add_option("--seed", c.seed, "master seed (overrides the config)");
  cmd->add_option("--out", c.out, "output directory (overrides the config)");
  cmd->add_option("--threads", c.threads, "worker threads; outputs do not depend on it")->check(CLI::Range(1, 4096));
  cmd->add_flag("--dt-halve", c.dt_halve, "fit the discretization allowance from runs at dt and dt/2");
}

jd::RunConfig resolve(const Common& c) {
  jd::RunConfig cfg = jd::load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.out) cfg.output = *c.out;
  if (c.threads) cfg.threads = *c.threads;
  if (c.dt_halve) cfg.fit_epsilon = true;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Jump-diffusion measure-change simulator and verifier"};
  app.require_subcommand(1);

  Common c;
  auto* simulate = app.add_subcommand("simulate", "simulate paths and write path and density dumps");
  auto* verify = app.add_subcommand("verify", "run the configured check suite");
  auto* scan = app.add_subcommand("scan", "scan the local boundedness conditions over U^n");
  auto* cdc = app.add_subcommand("cdc-demo", "carre-du-champ cross-checks");
  for (auto* cmd : {simulate, verify, scan, cdc}) add_common(cmd, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    // CLI11's own codes would overlap the failed-check counts.
    app.exit(e);
    return jd::kExitConfigError;
  }

  jd::RunConfig cfg;
  try {
    cfg = resolve(c);
  } catch (const jd::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return jd::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return jd::kExitIoError;
  }

  try {
    if (simulate->parsed()) return jd::run_simulate(cfg, std::cout);
    if (verify->parsed()) return jd::run_verify(cfg, std::cout);
    if (scan->parsed()) return jd::run_scan(cfg, std::cout);
    return jd::run_cdc_demo(cfg, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return jd::kExitRuntimeError;
  }
}
