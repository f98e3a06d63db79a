#include "jumpdiff/sim.hpp"

#include "jumpdiff/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

namespace jd {

JumpScheme parse_jump_scheme(const std::string& name) {
  if (name == "exact-constant-intensity") return JumpScheme::exact_constant_intensity;
  if (name == "thinning") return JumpScheme::thinning;
  if (name == "left-endpoint") return JumpScheme::left_endpoint;
  throw ParameterError("unknown jump scheme '" + name + "'");
}

std::string to_string(JumpScheme s) {
  switch (s) {
    case JumpScheme::exact_constant_intensity: return "exact-constant-intensity";
    case JumpScheme::thinning: return "thinning";
    case JumpScheme::left_endpoint: return "left-endpoint";
  }
  return "?";
}

std::string to_string(PathStatus s) {
  switch (s) {
    case PathStatus::alive: return "alive";
    case PathStatus::killed: return "killed";
    case PathStatus::explosion_capped: return "explosion-capped";
    case PathStatus::exited_domain: return "exited-U";
  }
  return "?";
}

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("dt must be positive");
  if (!(horizon >= dt)) throw ParameterError("horizon must be at least dt");
  if (n_expl < 1) throw ParameterError("n_expl must be >= 1");
  if (n_loc < 1) throw ParameterError("n_loc must be >= 1");
  if (brownian_refinement < 0 || brownian_refinement > 20) throw ParameterError("brownian refinement out of range");
  if (scheme == JumpScheme::thinning && !(intensity_bound > 0.0))
    throw ParameterError("thinning needs a positive intensity bound");
}

std::size_t SimConfig::steps() const {
  return static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
}

SimConfig SimConfig::coarse_coupled() const {
  SimConfig c = *this;
  c.brownian_refinement += 1;
  return c;
}

SimConfig SimConfig::halved() const {
  SimConfig c = *this;
  c.dt = dt / 2.0;
  return c;
}

std::size_t PathRecord::index_at(double t) const {
  const double k = std::round(t / dt);
  if (k <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(k), times.size() - 1);
}

const State& PathRecord::state_at(double t) const { return states[index_at(t)]; }

PathRecord simulate_path(const ModelSpec& model, const Vec& x0, const SimConfig& cfg, const ChangeSpec* change,
                         std::uint64_t seed) {
  cfg.validate();
  if (x0.size() != model.dim()) throw ParameterError("initial state has wrong dimension");
  if (!model.space.contains(x0)) throw ParameterError("initial state " + format_state(x0) + " outside E");
  if (cfg.scheme == JumpScheme::exact_constant_intensity && model.jumps.active() && !model.jumps.constant_intensity)
    throw ParameterError("exact-constant-intensity scheme needs a constant-intensity kernel");

  const std::size_t steps = cfg.steps();
  const int sub = 1 << cfg.brownian_refinement;
  const double sub_scale = std::sqrt(cfg.dt / sub);
  const int d = model.dim();

  PathStreams rs(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  PathRecord rec;
  rec.seed = seed;
  rec.dt = cfg.dt;
  rec.kill_threshold = -std::log1p(-unif(rs.main));
  rec.times.reserve(steps + 1);
  rec.states.reserve(steps + 1);
  rec.brownian.reserve(steps);
  rec.times.push_back(0.0);
  rec.states.emplace_back(x0);

  Vec x = x0;
  bool stopped = false;
  if (x.norm() >= cfg.n_expl) {
    rec.explosion_time = 0.0;
    rec.status = PathStatus::explosion_capped;
    stopped = true;
  } else if (change && !change->in_exhaustion(cfg.n_loc, x)) {
    rec.exit_time = 0.0;
    rec.status = PathStatus::exited_domain;
    stopped = true;
  }

  const bool has_jumps = model.jumps.active();
  double arrival_rate = 0.0;
  if (has_jumps && cfg.scheme == JumpScheme::exact_constant_intensity) arrival_rate = model.jumps.intensity(x0);
  if (has_jumps && cfg.scheme == JumpScheme::thinning) arrival_rate = cfg.intensity_bound;
  const auto next_gap = [&]() {
    std::exponential_distribution<double> ex(arrival_rate);
    return ex(rs.jumps);
  };
  double next_arrival = arrival_rate > 0.0 ? next_gap() : kNever;

  double hazard = 0.0;
  for (std::size_t k = 0; k < steps && !stopped; ++k) {
    const double t0 = cfg.time(k);
    const double t1 = cfg.time(k + 1);

    Mat factor;
    try {
      factor = psd_factor(model.diffusion(x));
    } catch (const SimulationError& e) {
      throw SimulationError(std::string(e.what()) + " at state " + format_state(x));
    }
    const Vec drift = model.drift(x);
    const double gamma = model.killing(x);

    Vec dw = Vec::Zero(d);
    for (int s = 0; s < sub; ++s)
      for (int i = 0; i < d; ++i) dw[i] += normal(rs.brownian);
    dw *= sub_scale;
    rec.brownian.push_back(dw);

    double tau = kNever;
    if (gamma > 0.0) {
      const double h = gamma * cfg.dt;
      if (hazard + h >= rec.kill_threshold) tau = t0 + (rec.kill_threshold - hazard) / gamma;
      hazard += h;
    }
    const double event_end = std::min(t1, tau);

    Vec jump_sum = Vec::Zero(d);
    if (has_jumps) {
      switch (cfg.scheme) {
        case JumpScheme::exact_constant_intensity:
          while (next_arrival < event_end) {
            Vec xi = model.jumps.sample(x, rs.jumps);
            rec.jumps.push_back({next_arrival, k, x, xi});
            jump_sum += xi;
            next_arrival += next_gap();
          }
          break;
        case JumpScheme::thinning: {
          const double lam = next_arrival < event_end ? model.jumps.intensity(x) : 0.0;
          if (lam > cfg.intensity_bound * (1.0 + 1e-12))
            throw SimulationError("jump intensity " + std::to_string(lam) + " exceeds thinning bound at state " +
                                  format_state(x));
          while (next_arrival < event_end) {
            if (unif(rs.jumps) * cfg.intensity_bound < lam) {
              Vec xi = model.jumps.sample(x, rs.jumps);
              rec.jumps.push_back({next_arrival, k, x, xi});
              jump_sum += xi;
            }
            next_arrival += next_gap();
          }
          break;
        }
        case JumpScheme::left_endpoint: {
          const double lam = model.jumps.intensity(x);
          if (unif(rs.jumps) < lam * cfg.dt && t0 < tau) {
            Vec xi = model.jumps.sample(x, rs.jumps);
            rec.jumps.push_back({t0, k, x, xi});
            jump_sum += xi;
          }
          break;
        }
      }
    }

    if (tau <= t1) {
      rec.killing_time = tau;
      rec.status = PathStatus::killed;
      rec.times.push_back(t1);
      rec.states.push_back(State::cemetery());
      break;
    }

    Vec next = model.space.project(x + drift * cfg.dt + factor * dw + jump_sum);
    if (!next.allFinite()) throw SimulationError("non-finite state at step " + std::to_string(k + 1));
    rec.times.push_back(t1);
    rec.states.emplace_back(next);
    x = next;

    if (x.norm() >= cfg.n_expl) {
      rec.explosion_time = t1;
      rec.status = PathStatus::explosion_capped;
      stopped = true;
    } else if (change && !change->in_exhaustion(cfg.n_loc, x)) {
      rec.exit_time = t1;
      rec.status = PathStatus::exited_domain;
      stopped = true;
    }
  }

  rec.localization_time = std::min({rec.exit_time, rec.explosion_time, static_cast<double>(cfg.n_loc)});
  return rec;
}

void parallel_chunks(std::size_t count, int threads, const std::function<void(std::size_t)>& task) {
  const std::size_t chunks = (count + kChunkPaths - 1) / kChunkPaths;
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads < 1 ? 1 : threads, chunks));

  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::size_t err_index = count;
  std::exception_ptr err;

  const auto worker = [&]() {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      const std::size_t lo = c * kChunkPaths;
      const std::size_t hi = std::min(count, lo + kChunkPaths);
      for (std::size_t i = lo; i < hi; ++i) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (i < err_index) {
            err_index = i;
            err = std::current_exception();
          }
          break;
        }
      }
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (err) std::rethrow_exception(err);
}

void batch_simulate(const ModelSpec& model, const Vec& x0, const SimConfig& cfg, const ChangeSpec* change,
                    std::size_t first, std::size_t count, std::uint64_t master_seed, int threads,
                    const PathVisitor& visit) {
  if (count < 1) throw ParameterError("batch needs at least one path");
  parallel_chunks(count, threads, [&](std::size_t i) {
    const std::size_t index = first + i;
    try {
      visit(index, simulate_path(model, x0, cfg, change, split_seed(master_seed, index)));
    } catch (const SimulationError& e) {
      throw SimulationError("path " + std::to_string(index) + ": " + e.what());
    }
  });
}

std::vector<PathRecord> batch_simulate(const ModelSpec& model, const Vec& x0, const SimConfig& cfg,
                                       const ChangeSpec* change, std::size_t first, std::size_t count,
                                       std::uint64_t master_seed, int threads) {
  std::vector<PathRecord> out(count);
  batch_simulate(model, x0, cfg, change, first, count, master_seed, threads,
                 [&](std::size_t index, const PathRecord& p) { out[index - first] = p; });
  return out;
}

void write_path_csv_header(std::ostream& os, int dim) {
  os << "path_id,t";
  for (int i = 0; i < dim; ++i) os << ",x" << i;
  os << ",status\n";
}

void write_path_csv_rows(std::ostream& os, std::size_t path_id, const PathRecord& path) {
  const int dim = path.states.front().point().size();
  for (std::size_t k = 0; k < path.times.size(); ++k) {
    os << path_id << ',' << format_double(path.times[k]);
    const State& s = path.states[k];
    for (int i = 0; i < dim; ++i) {
      os << ',';
      if (!s.is_cemetery()) os << format_double(s.point()[i]);
    }
    os << ',' << (s.is_cemetery() ? "cemetery" : "alive") << '\n';
  }
}

}  // namespace jd
