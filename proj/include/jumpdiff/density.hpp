#pragma once

#include "jumpdiff/model.hpp"
#include "jumpdiff/sim.hpp"
#include "jumpdiff/types.hpp"

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace jd {

/// Jump of the killed process: either a spatial jump of size xi or the jump to
/// the cemetery.
struct JumpMark {
  bool killing = false;
  Vec xi;

  static JumpMark kill() { return {true, Vec()}; }
  static JumpMark spatial(Vec xi) { return {false, std::move(xi)}; }
};

/// phi2(x) for killing, phi3(x, xi) for a spatial jump.
double psi(const ChangeSpec& change, const Vec& x, const JumpMark& mark);

/// Log-density of the measure change along one P-path, sampled on the path's
/// grid. Component vectors are cumulative; after the localization time (or the
/// end of the record) every entry is frozen at its last value.
struct DensityTrace {
  double log_d0 = 0.0;
  std::vector<double> times;
  std::vector<double> log_density;
  std::vector<double> stochastic;   // sum <phi1, L dW>
  std::vector<double> quadratic;    // 1/2 sum <alpha phi1, phi1> dt
  std::vector<double> compensator;  // sum [gamma (phi2 - 1) + kappa] dt
  std::vector<double> jump_log;     // sum log psi over jumps and killing
  std::vector<double> lambda;       // Lambda accumulator
  /// valid[k]: grid time k lies before the localization time.
  std::vector<char> valid;
  /// S_n = min(R_n, T_n, n) for the requested level; the end of the path record
  /// also caps it when the simulator stopped earlier.
  double localization_time = kNever;
  /// Killing time of the underlying path (kNever if alive).
  double killing_time = kNever;

  std::size_t index_at(double t) const;
  double log_density_at(double t) const { return log_density[index_at(t)]; }
  double density_at(double t) const;
  double lambda_at(double t) const { return lambda[index_at(t)]; }
  bool before_localization(double t) const { return t < localization_time; }
  bool alive_at(double t) const { return t < killing_time; }
};

/// Accumulates log D = log D0 + stochastic - quadratic - compensator + jump_log
/// for localization level n, reusing the recorded Brownian increments and the
/// same diffusion factor as the simulator. A step cut by killing contributes
/// its compensator up to the killing time and log phi2 at the pre-death state.
DensityTrace accumulate(const PathRecord& path, const ModelSpec& model, const ChangeSpec& change, int n,
                        double d0 = 1.0);

/// Lambda up to the localization time (left-endpoint sum of the integrand).
double accumulate_lambda(const PathRecord& path, const ModelSpec& model, const ChangeSpec& change, int n);

/// Localization time S_n of a recorded path: first grid time outside U^n
/// (living states only), the explosion cap, n itself, and the end of an early
/// stopped record, whichever comes first.
double localization_time(const PathRecord& path, const ChangeSpec& change, int n);

/// Trace dump with header "path_id,t,logD,Lambda,valid".
void write_trace_csv_header(std::ostream& os);
void write_trace_csv_rows(std::ostream& os, std::size_t path_id, const DensityTrace& trace);

}  // namespace jd
