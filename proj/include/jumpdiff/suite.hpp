#pragma once

#include "jumpdiff/cdc.hpp"
#include "jumpdiff/config.hpp"
#include "jumpdiff/mccheck.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace jd {

/// Process exit codes besides the failed-check count (capped below these).
inline constexpr int kExitIoError = 200;
inline constexpr int kExitConfigError = 201;
inline constexpr int kMaxFailureExit = 199;
inline constexpr int kExitRuntimeError = 202;

/// Models and change assembled from a RunConfig.
struct BuiltModels {
  ModelSpec p;
  ModelSpec q;
  ChangeSpec change;
  ChangeSpec identity;
  Vec x0;
  std::optional<HFunction> h;
  CirJumpParams cir;
  std::string change_kind;

  double p_survival(double t) const;
  /// Q[t < killing] and E_Q[X_t; t < killing] when closed forms exist.
  std::optional<double> q_survival(double t) const;
  std::optional<double> q_survival_mean(double t) const;
};

BuiltModels build_models(const RunConfig& cfg);

/// Checks that every requested target is available; throws ConfigError.
void validate_plan(const RunConfig& cfg, const BuiltModels& built);

/// Runs one configured check. `index` selects the check's seed stream.
std::vector<CheckReport> run_check(const RunConfig& cfg, const BuiltModels& built, const CheckSpec& spec,
                                   std::size_t index);

std::vector<CheckReport> run_checks(const RunConfig& cfg, const BuiltModels& built);

int failed_count(const std::vector<CheckReport>& reports);
int exit_status(int failures);

/// name,estimate,se,target,provenance,z,epsilon,pass,n,seed
void write_report_csv(std::ostream& os, const std::vector<CheckReport>& reports);
void write_report_json(std::ostream& os, const std::vector<CheckReport>& reports, std::uint64_t seed);
/// name,runtime_ms
void write_timing_csv(std::ostream& os, const std::vector<CheckReport>& reports);

struct PlotData {
  std::vector<double> times;
  std::vector<Moments> mean_density;  // D_t 1{t < S_n}
  std::vector<Moments> p_survival;    // 1{t < killing}
  std::vector<Moments> q_mass;        // D_t 1{t < S_n, t < killing}
  std::vector<double> p_oracle;
  std::vector<std::optional<double>> q_oracle;
  std::vector<double> lambda;  // Lambda at the horizon, per path
};

PlotData collect_plot_data(const RunConfig& cfg, const BuiltModels& built);
/// t,mean,se,lower,upper (band = mean -/+ 3 se)
void write_density_plot_csv(std::ostream& os, const PlotData& d);
/// t,p_survival,p_se,p_oracle,q_mass,q_se,q_oracle (empty when no oracle)
void write_survival_plot_csv(std::ostream& os, const PlotData& d);
/// bin_lo,bin_hi,count
void write_lambda_histogram_csv(std::ostream& os, const PlotData& d, int bins);

/// Subcommands. Each writes into cfg.output and returns the process status.
int run_verify(const RunConfig& cfg, std::ostream& log);
int run_simulate(const RunConfig& cfg, std::ostream& log);
int run_scan(const RunConfig& cfg, std::ostream& log);
int run_cdc_demo(const RunConfig& cfg, std::ostream& log);

}  // namespace jd
