#include "jumpdiff/density.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace jd {

double psi(const ChangeSpec& change, const Vec& x, const JumpMark& mark) {
  return mark.killing ? change.checked_phi2(x) : change.checked_phi3(x, mark.xi);
}

std::size_t DensityTrace::index_at(double t) const {
  if (times.size() < 2) return 0;
  const double dt = times[1] - times[0];
  const double k = std::round(t / dt);
  if (k <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(k), times.size() - 1);
}

double DensityTrace::density_at(double t) const {
  const double v = log_density_at(t);
  return v == -kNever ? 0.0 : std::exp(v);
}

double localization_time(const PathRecord& path, const ChangeSpec& change, int n) {
  double s = std::min(path.explosion_time, static_cast<double>(n));
  for (std::size_t k = 0; k < path.states.size(); ++k) {
    if (path.times[k] >= s) break;
    const State& st = path.states[k];
    if (st.is_cemetery()) break;
    if (!change.in_exhaustion(n, st.point())) {
      s = path.times[k];
      break;
    }
  }
  // A record that stops early (exit from the simulator's own U^n) ends the
  // observable window.
  if (path.status == PathStatus::exited_domain) s = std::min(s, path.exit_time);
  return s;
}

DensityTrace accumulate(const PathRecord& path, const ModelSpec& model, const ChangeSpec& change, int n, double d0) {
  if (!(d0 >= 0.0) || !std::isfinite(d0)) throw ParameterError("D0 must be a finite nonnegative number");
  const std::size_t m = path.times.size();
  DensityTrace tr;
  tr.log_d0 = d0 > 0.0 ? std::log(d0) : -kNever;
  tr.times = path.times;
  tr.log_density.assign(m, tr.log_d0);
  tr.stochastic.assign(m, 0.0);
  tr.quadratic.assign(m, 0.0);
  tr.compensator.assign(m, 0.0);
  tr.jump_log.assign(m, 0.0);
  tr.lambda.assign(m, 0.0);
  tr.valid.assign(m, 0);
  tr.localization_time = localization_time(path, change, n);
  tr.killing_time = path.killing_time;

  double stoch = 0.0, quad = 0.0, comp = 0.0, jlog = 0.0, lam = 0.0;
  std::size_t next_jump = 0;
  tr.valid[0] = 0.0 < tr.localization_time;
  for (std::size_t k = 0; k < path.steps(); ++k) {
    const double t0 = path.times[k];
    if (!(t0 < tr.localization_time)) {
      // Frozen: carry the last values forward.
      for (std::size_t j = k + 1; j < m; ++j) {
        tr.stochastic[j] = stoch;
        tr.quadratic[j] = quad;
        tr.compensator[j] = comp;
        tr.jump_log[j] = jlog;
        tr.lambda[j] = lam;
        tr.log_density[j] = tr.log_d0 + stoch - quad - comp + jlog;
      }
      break;
    }
    const Vec& x = path.states[k].point();
    if (!change.in_domain(x)) throw DomainError("density accumulated at " + format_state(x) + " outside U");

    const double t1 = path.times[k + 1];
    const bool killed_here = path.killing_time <= t1;
    const double dur = (killed_here ? path.killing_time : t1) - t0;

    const Mat alpha = model.diffusion(x);
    const Vec phi = change.phi1(x);
    const double gamma = model.killing(x);
    const double phi2 = change.checked_phi2(x);
    const double kappa = model.jumps.active() ? change.kappa(x) : 0.0;

    if (!killed_here) {
      const Mat factor = psd_factor(alpha);
      stoch += phi.dot(factor * path.brownian[k]);
      quad += 0.5 * phi.dot(alpha * phi) * dur;
    }
    comp += (gamma * (phi2 - 1.0) + kappa) * dur;
    while (next_jump < path.jumps.size() && path.jumps[next_jump].step == k) {
      const JumpEvent& ev = path.jumps[next_jump];
      jlog += std::log(change.checked_phi3(ev.pre_state, ev.size));
      ++next_jump;
    }
    if (killed_here && gamma > 0.0) jlog += std::log(phi2);

    const double ell3 = model.jumps.active() ? change.entropy3(x) : 0.0;
    lam += (0.5 * phi.dot(alpha * phi) + entropy_l(phi2) * gamma + ell3) * dur;

    tr.stochastic[k + 1] = stoch;
    tr.quadratic[k + 1] = quad;
    tr.compensator[k + 1] = comp;
    tr.jump_log[k + 1] = jlog;
    tr.lambda[k + 1] = lam;
    tr.log_density[k + 1] = tr.log_d0 + stoch - quad - comp + jlog;
    tr.valid[k + 1] = t1 < tr.localization_time;
  }
  return tr;
}

double accumulate_lambda(const PathRecord& path, const ModelSpec& model, const ChangeSpec& change, int n) {
  const double s = localization_time(path, change, n);
  double lam = 0.0;
  for (std::size_t k = 0; k < path.steps(); ++k) {
    const double t0 = path.times[k];
    if (!(t0 < s)) break;
    const double end = std::min(path.times[k + 1], path.killing_time);
    lam += lambda_integrand(model, change, path.states[k].point()) * (end - t0);
  }
  return lam;
}

void write_trace_csv_header(std::ostream& os) { os << "path_id,t,logD,Lambda,valid\n"; }

void write_trace_csv_rows(std::ostream& os, std::size_t path_id, const DensityTrace& trace) {
  for (std::size_t k = 0; k < trace.times.size(); ++k)
    os << path_id << ',' << format_double(trace.times[k]) << ',' << format_double(trace.log_density[k]) << ','
       << format_double(trace.lambda[k]) << ','
       << static_cast<int>(trace.valid[k]) << '\n';
}

}  // namespace jd
