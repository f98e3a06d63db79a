#pragma once

#include "jumpdiff/model.hpp"
#include "jumpdiff/types.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace jd {

enum class JumpScheme {
  /// Poisson arrivals at the kernel's constant rate, in continuous time.
  exact_constant_intensity,
  /// Candidate arrivals at rate `intensity_bound`, accepted with probability
  /// lambda(X_k) / bound. Exact in law for the frozen-coefficient scheme.
  thinning,
  /// One Bernoulli(lambda(X_k) dt) trial per step; O(dt) biased.
  left_endpoint,
};

JumpScheme parse_jump_scheme(const std::string& name);
std::string to_string(JumpScheme s);

struct SimConfig {
  double horizon = 1.0;
  double dt = 1.0 / 1024.0;
  /// |X| >= n_expl caps the path (explosion localization T_n).
  int n_expl = 1000000;
  /// Selects U^n for the exit time R_n; also the time cap in S_n.
  int n_loc = 10;
  JumpScheme scheme = JumpScheme::exact_constant_intensity;
  double intensity_bound = 0.0;
  /// Each Brownian increment is the sum of 2^r unit substeps. Running (dt, r+1)
  /// and (dt/2, r) on one seed gives the same Brownian path at two resolutions.
  int brownian_refinement = 0;

  void validate() const;
  std::size_t steps() const;
  double time(std::size_t k) const { return static_cast<double>(k) * dt; }

  /// Same step, one extra refinement level (same law, couples with `halved`).
  SimConfig coarse_coupled() const;
  /// Half step at the original refinement.
  SimConfig halved() const;
};

enum class PathStatus { alive, killed, explosion_capped, exited_domain };
std::string to_string(PathStatus s);

struct JumpEvent {
  double time = 0.0;
  std::size_t step = 0;
  /// State at which the kernel was evaluated (left grid point of the step).
  Vec pre_state;
  Vec size;
};

/// One simulated trajectory. Grid entries stop at the first of: horizon,
/// killing (last entry is the cemetery), explosion cap, exit from U^n_loc.
struct PathRecord {
  std::uint64_t seed = 0;
  double dt = 0.0;
  std::vector<double> times;
  std::vector<State> states;
  /// Raw Brownian increment of each step taken (not scaled by the diffusion).
  std::vector<Vec> brownian;
  std::vector<JumpEvent> jumps;
  PathStatus status = PathStatus::alive;
  double kill_threshold = 0.0;
  double killing_time = kNever;
  double explosion_time = kNever;
  double exit_time = kNever;
  /// S_n = min(R_n, T_n, n_loc).
  double localization_time = kNever;

  std::size_t steps() const { return brownian.size(); }
  double end_time() const { return times.back(); }
  /// Grid index of time t (nearest grid point), clamped to the last entry.
  std::size_t index_at(double t) const;
  /// Stopped state at t: last recorded entry when t is past the record.
  const State& state_at(double t) const;
};

/// Simulates one path, deterministic in (inputs, seed). Diffusion: Euler with
/// coefficients frozen at the left grid point, followed by the state-space
/// projection. Killing: hazard sum of gamma(X_k) dt against an Exp(1) threshold
/// drawn first; the death time is located inside the step. When `change` is
/// given, R_n for U^{n_loc} is tracked and the path stops on exit.
PathRecord simulate_path(const ModelSpec& model, const Vec& x0, const SimConfig& cfg, const ChangeSpec* change,
                         std::uint64_t seed);

using PathVisitor = std::function<void(std::size_t index, const PathRecord& path)>;

inline constexpr std::size_t kChunkPaths = 1024;

/// Simulates paths first .. first+count-1 with seeds split_seed(master, i),
/// invoking `visit` once per path. Chunks of kChunkPaths run on `threads`
/// workers; the visitor may be called concurrently for distinct indices.
void batch_simulate(const ModelSpec& model, const Vec& x0, const SimConfig& cfg, const ChangeSpec* change,
                    std::size_t first, std::size_t count, std::uint64_t master_seed, int threads,
                    const PathVisitor& visit);

std::vector<PathRecord> batch_simulate(const ModelSpec& model, const Vec& x0, const SimConfig& cfg,
                                       const ChangeSpec* change, std::size_t first, std::size_t count,
                                       std::uint64_t master_seed, int threads = 1);

/// Runs `task(i)` for i in [0, count) on `threads` workers in chunks of
/// kChunkPaths. The first failing index (lowest) is rethrown.
void parallel_chunks(std::size_t count, int threads, const std::function<void(std::size_t)>& task);

/// Path dump: header "path_id,t,x0[,x1...],status", one row per grid time;
/// cemetery rows leave coordinates empty.
void write_path_csv_header(std::ostream& os, int dim);
void write_path_csv_rows(std::ostream& os, std::size_t path_id, const PathRecord& path);

}  // namespace jd
