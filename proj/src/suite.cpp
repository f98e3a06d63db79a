#include "jumpdiff/suite.hpp"

#include "jumpdiff/density.hpp"
#include "jumpdiff/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>

namespace jd {

namespace fs = std::filesystem;

double BuiltModels::p_survival(double t) const { return std::exp(-cir.gamma * t); }

std::optional<double> BuiltModels::q_survival(double t) const {
  if (change_kind == "identity") return p_survival(t);
  if (change_kind == "cirjump" && cir.g1t == 0.0) return survival_oracle(cir, Side::Q, t);
  return std::nullopt;
}

std::optional<double> BuiltModels::q_survival_mean(double t) const {
  if (change_kind == "identity") return mean_oracle(cir, Side::P, t) * p_survival(t);
  if (change_kind == "cirjump" && cir.g1t == 0.0)
    return mean_oracle(cir, Side::Q, t) * survival_oracle(cir, Side::Q, t);
  return std::nullopt;
}

BuiltModels build_models(const RunConfig& cfg) {
  BuiltModels b;
  b.cir = cfg.cir;
  b.change_kind = cfg.change;
  b.x0 = scalar_vec(cfg.cir.y0);
  b.p = p_model(cfg.cir);
  if (cfg.family == "cirjump") {
    b.identity = ChangeSpec::identity(1, positive_open_domain(), reciprocal_exhaustion());
    if (cfg.change == "cirjump") {
      b.change = change_spec(cfg.cir);
      b.q = q_model(cfg.cir);
    } else {
      b.change = b.identity;
      b.q = b.p;
    }
  } else {
    const auto space = b.p.space;
    b.identity = ChangeSpec::identity(1, [space](const Vec& x) { return space.contains(x); }, ball_exhaustion());
    if (cfg.change == "h-bump") {
      b.h = cfg.h.kind == "zero" ? HFunction::zero(1)
                                 : HFunction::bump(cfg.h.center, cfg.h.radius, cfg.h.amplitude, cfg.h.order);
      b.change = change_from_h(*b.h, b.p);
      b.q = transform_model(b.p, b.change);
    } else {
      b.change = b.identity;
      b.q = b.p;
    }
  }
  return b;
}

namespace {

bool wants_oracle(const CheckSpec& k) { return k.target == "oracle" || k.target == "both"; }
bool wants_q(const CheckSpec& k) { return k.target == "q-simulation" || k.target == "both"; }

FunctionSpec reweighted_function(const CheckSpec& k) { return k.functions.empty() ? FunctionSpec{"x"} : k.functions[0]; }

std::vector<double> default_grid(const CheckSpec& k) {
  if (!k.times.empty()) return k.times;
  std::vector<double> out;
  for (int i = 1; i <= 10; ++i) out.push_back(k.t * i / 10.0);
  return out;
}

std::vector<Vec> jump_probe_sizes(const JumpLaw& law, std::uint64_t seed) {
  if (law.kind() == JumpLaw::Kind::point_mass) return {scalar_vec(law.parameter())};
  Engine eng(seed);
  std::vector<Vec> out;
  for (int i = 0; i < 8; ++i) out.push_back(scalar_vec(law.sample(eng)));
  return out;
}

}  // namespace

void validate_plan(const RunConfig& cfg, const BuiltModels& built) {
  std::vector<std::string> errs;
  for (std::size_t i = 0; i < cfg.checks.size(); ++i) {
    const CheckSpec& k = cfg.checks[i];
    const std::string path = "checks[" + std::to_string(i) + "]";
    if (k.type == "density_mass" && wants_oracle(k) && !built.q_survival(k.t))
      errs.push_back(path + ".target: no survival oracle for this change (needs g1t = 0)");
    if (k.type == "reweighted_expectation" && wants_oracle(k)) {
      if (reweighted_function(k).kind != "x")
        errs.push_back(path + ".target: the oracle exists only for f(x) = x");
      else if (!built.q_survival_mean(k.t))
        errs.push_back(path + ".target: no mean oracle for this change (needs g1t = 0)");
    }
  }
  if (cfg.family == "cdc-demo" && cfg.change == "h-bump" && cfg.h.kind == "x")
    errs.push_back("change.h.kind: h must be compactly supported (bump or zero)");
  if (!errs.empty()) throw ConfigError(errs);
}

std::vector<CheckReport> run_check(const RunConfig& cfg, const BuiltModels& b, const CheckSpec& k, std::size_t index) {
  CheckSettings s;
  s.sim = cfg.sim;
  s.paths = k.paths ? k.paths : cfg.paths;
  s.z = k.z;
  s.seed = split_seed(cfg.seed, 1 + index);
  s.threads = cfg.threads;
  s.fit_epsilon = cfg.fit_epsilon;
  s.fit_paths = cfg.fit_paths;
  const int n = cfg.n;

  std::vector<CheckReport> out;
  if (k.type == "identity_density") {
    out.push_back(identity_density_check(b.p, b.identity, n, b.x0, k.t, s, k.d0));
  } else if (k.type == "density_mass") {
    const std::optional<double> oracle = b.q_survival(k.t);
    const bool use_oracle = wants_oracle(k) || (k.target == "auto" && oracle);
    const bool use_q = wants_q(k) || (k.target == "auto" && !oracle);
    if (use_oracle) out.push_back(density_mass_check(b.p, b.change, nullptr, n, b.x0, k.t, s, oracle));
    if (use_q) {
      out.push_back(density_mass_check(b.p, b.change, &b.q, n, b.x0, k.t, s));
      if (use_oracle) out.back().name += " vs Q";
    }
    if (use_oracle && use_q) out.front().name += " vs oracle";
  } else if (k.type == "reweighted_expectation") {
    const FunctionSpec fspec = reweighted_function(k);
    const std::optional<double> oracle = fspec.kind == "x" ? b.q_survival_mean(k.t) : std::nullopt;
    const bool use_oracle = wants_oracle(k) || (k.target == "auto" && oracle);
    const bool use_q = wants_q(k) || k.target == "auto";
    out = reweighted_expectation_check(b.p, b.change, use_q ? &b.q : nullptr, n, fspec.build(), b.x0, k.t, s,
                                       use_oracle ? oracle : std::nullopt);
  } else if (k.type == "martingale" || k.type == "girsanov") {
    std::vector<TestFunction> fs;
    for (const auto& f : k.functions) fs.push_back(f.build());
    if (k.type == "martingale")
      out = martingale_check(k.side == "Q" ? b.q : b.p, fs, b.x0, k.t, s);
    else
      out = girsanov_check(b.p, b.q, b.change, n, fs, b.x0, k.t, s);
    if (k.type == "martingale" && k.side == "Q")
      for (auto& r : out) r.name += " under Q";
  } else if (k.type == "killing_compensator") {
    out.push_back(killing_compensator_check(k.side == "Q" ? b.q : b.p, b.x0, k.t, s));
    if (k.side == "Q") out.back().name += " under Q";
  } else if (k.type == "supermartingale") {
    out.push_back(supermartingale_check(b.p, b.change, n, b.x0, default_grid(k), s, k.survivors_only).report);
  } else if (k.type == "positivity") {
    out.push_back(positivity_check(b.p, b.change, n, b.x0, k.t, s, k.d0));
  } else if (k.type == "ratio_bounds") {
    out.push_back(ratio_bounds_property(k.samples, s.seed));
  } else if (k.type == "entropy_positivity") {
    out.push_back(entropy_positivity_property(k.samples, s.seed));
  } else if (k.type == "transform_consistency") {
    Engine eng(s.seed);
    std::uniform_real_distribution<double> ux(0.0, 50.0);
    std::vector<Vec> states;
    for (std::size_t i = 0; i < k.points; ++i) {
      double x = ux(eng);
      while (x == 0.0) x = ux(eng);
      states.push_back(scalar_vec(x));
    }
    const ModelSpec tilde = transform_model(b.p, b.change);
    const auto xis = jump_probe_sizes(b.cir.m, s.seed ^ 0x9e3779b97f4a7c15ULL);
    out.push_back(model_agreement_check("transform_consistency", tilde, b.q, states, xis, 1e-10));
    out.back().seed = s.seed;
  } else {
    throw ParameterError("unknown check type " + k.type);
  }

  for (auto& r : out) {
    if (!k.label.empty()) r.name = out.size() == 1 ? k.label : k.label + "/" + r.name;
    if (k.target_shift != 0.0) {
      r.target += k.target_shift;
      r.decide();
      if (!r.detail.empty()) r.detail += "; ";
      r.detail += "target shifted by " + format_double(k.target_shift);
    }
  }
  return out;
}

std::vector<CheckReport> run_checks(const RunConfig& cfg, const BuiltModels& built) {
  validate_plan(cfg, built);
  std::vector<CheckReport> out;
  for (std::size_t i = 0; i < cfg.checks.size(); ++i) {
    auto rs = run_check(cfg, built, cfg.checks[i], i);
    out.insert(out.end(), rs.begin(), rs.end());
  }
  return out;
}

int failed_count(const std::vector<CheckReport>& reports) {
  return static_cast<int>(std::count_if(reports.begin(), reports.end(), [](const auto& r) { return !r.pass; }));
}

int exit_status(int failures) { return std::min(failures, kMaxFailureExit); }

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_report_csv(std::ostream& os, const std::vector<CheckReport>& reports) {
  os << "name,estimate,se,target,provenance,z,epsilon,pass,n,seed\n";
  for (const auto& r : reports)
    os << csv_field(r.name) << ',' << format_double(r.estimate) << ',' << format_double(r.se) << ','
       << format_double(r.target) << ',' << r.provenance << ',' << format_double(r.z) << ','
       << format_double(r.epsilon) << ',' << (r.pass ? "true" : "false") << ',' << r.n << ',' << r.seed << '\n';
}

void write_report_json(std::ostream& os, const std::vector<CheckReport>& reports, std::uint64_t seed) {
  nlohmann::ordered_json doc;
  doc["seed"] = seed;
  doc["failed"] = failed_count(reports);
  doc["checks"] = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json j;
    j["name"] = r.name;
    j["estimate"] = r.estimate;
    j["se"] = r.se;
    j["target"] = r.target;
    j["provenance"] = r.provenance;
    j["z"] = r.z;
    j["epsilon"] = r.epsilon;
    j["pass"] = r.pass;
    j["n"] = r.n;
    j["seed"] = r.seed;
    j["detail"] = r.detail;
    doc["checks"].push_back(j);
  }
  os << doc.dump(2) << '\n';
}

void write_timing_csv(std::ostream& os, const std::vector<CheckReport>& reports) {
  os << "name,runtime_ms\n";
  for (const auto& r : reports) os << csv_field(r.name) << ',' << format_double(r.runtime_ms) << '\n';
}

PlotData collect_plot_data(const RunConfig& cfg, const BuiltModels& b) {
  PlotData d;
  const int m = cfg.plot_points;
  for (int j = 0; j < m; ++j) d.times.push_back(cfg.sim.horizon * j / (m - 1));
  SimConfig sim = cfg.sim;
  sim.n_loc = cfg.n;
  const std::size_t width = 3 * m + 1;
  const PathSamples samples = collect_functionals(
      b.p, b.x0, sim, &b.change, cfg.plot_paths, split_seed(cfg.seed, 0), cfg.threads, width,
      [&](const PathRecord& path, double* out) {
        const DensityTrace tr = accumulate(path, b.p, b.change, cfg.n);
        for (int j = 0; j < m; ++j) {
          const double t = d.times[j];
          const bool in = tr.before_localization(t);
          const double dens = in ? tr.density_at(t) : 0.0;
          out[j] = dens;
          out[m + j] = tr.alive_at(t) ? 1.0 : 0.0;
          out[2 * m + j] = tr.alive_at(t) ? dens : 0.0;
        }
        out[3 * m] = tr.lambda.back();
      });
  for (int j = 0; j < m; ++j) {
    d.mean_density.push_back(samples.column(j));
    d.p_survival.push_back(samples.column(m + j));
    d.q_mass.push_back(samples.column(2 * m + j));
    d.p_oracle.push_back(b.p_survival(d.times[j]));
    d.q_oracle.push_back(b.q_survival(d.times[j]));
  }
  for (std::size_t i = 0; i < samples.paths; ++i) d.lambda.push_back(samples.values[i * width + 3 * m]);
  return d;
}

void write_density_plot_csv(std::ostream& os, const PlotData& d) {
  os << "t,mean,se,lower,upper\n";
  for (std::size_t j = 0; j < d.times.size(); ++j) {
    const Moments& mo = d.mean_density[j];
    os << format_double(d.times[j]) << ',' << format_double(mo.mean) << ',' << format_double(mo.se()) << ','
       << format_double(mo.mean - 3.0 * mo.se()) << ',' << format_double(mo.mean + 3.0 * mo.se()) << '\n';
  }
}

void write_survival_plot_csv(std::ostream& os, const PlotData& d) {
  os << "t,p_survival,p_se,p_oracle,q_mass,q_se,q_oracle\n";
  for (std::size_t j = 0; j < d.times.size(); ++j) {
    os << format_double(d.times[j]) << ',' << format_double(d.p_survival[j].mean) << ','
       << format_double(d.p_survival[j].se()) << ',' << format_double(d.p_oracle[j]) << ','
       << format_double(d.q_mass[j].mean) << ',' << format_double(d.q_mass[j].se()) << ','
       << (d.q_oracle[j] ? format_double(*d.q_oracle[j]) : "") << '\n';
  }
}

void write_lambda_histogram_csv(std::ostream& os, const PlotData& d, int bins) {
  os << "bin_lo,bin_hi,count\n";
  if (d.lambda.empty()) return;
  const auto [lo_it, hi_it] = std::minmax_element(d.lambda.begin(), d.lambda.end());
  const double lo = *lo_it;
  const double hi = *hi_it > lo ? *hi_it : lo + 1.0;
  const double w = (hi - lo) / bins;
  std::vector<std::size_t> counts(bins, 0);
  for (double v : d.lambda) {
    int i = static_cast<int>((v - lo) / w);
    counts[std::clamp(i, 0, bins - 1)]++;
  }
  for (int i = 0; i < bins; ++i)
    os << format_double(lo + i * w) << ',' << format_double(i + 1 == bins ? hi : lo + (i + 1) * w) << ','
       << counts[i] << '\n';
}

namespace {

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write " + p.string());
  out.exceptions(std::ios::badbit | std::ios::failbit);
  return out;
}

fs::path prepare_output(const RunConfig& cfg) {
  const fs::path dir(cfg.output);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::ios_base::failure("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_metadata(const fs::path& dir, const RunConfig& cfg, const std::string& command) {
  nlohmann::ordered_json meta;
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  meta["command"] = command;
  meta["finished_at"] = stamp;
  meta["seed"] = cfg.seed;
  meta["threads"] = cfg.threads;
  meta["fit_epsilon"] = cfg.fit_epsilon;
  auto out = open_out(dir / "metadata.json");
  out << meta.dump(2) << '\n';
}

void print_report_lines(std::ostream& log, const std::vector<CheckReport>& reports) {
  for (const auto& r : reports)
    log << (r.pass ? "PASS " : "FAIL ") << r.name << ": estimate " << format_double(r.estimate) << " target "
        << format_double(r.target) << " se " << format_double(r.se) << " eps " << format_double(r.epsilon) << '\n';
}

template <class F>
int guarded(std::ostream& log, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    log << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::ios_base::failure& e) {
    log << "I/O error: " << e.what() << '\n';
    return kExitIoError;
  } catch (const std::filesystem::filesystem_error& e) {
    log << "I/O error: " << e.what() << '\n';
    return kExitIoError;
  }
}

}  // namespace

int run_verify(const RunConfig& cfg, std::ostream& log) {
  return guarded(log, [&] {
    const BuiltModels built = build_models(cfg);
    validate_plan(cfg, built);
    const fs::path dir = prepare_output(cfg);
    const auto reports = run_checks(cfg, built);
    {
      auto out = open_out(dir / "report.csv");
      write_report_csv(out, reports);
    }
    {
      auto out = open_out(dir / "report.json");
      write_report_json(out, reports, cfg.seed);
    }
    {
      auto out = open_out(dir / "timing.csv");
      write_timing_csv(out, reports);
    }
    if (cfg.plot_paths > 0) {
      const PlotData d = collect_plot_data(cfg, built);
      auto a = open_out(dir / "plot_density_mean.csv");
      write_density_plot_csv(a, d);
      auto b = open_out(dir / "plot_survival.csv");
      write_survival_plot_csv(b, d);
      auto c = open_out(dir / "plot_lambda_hist.csv");
      write_lambda_histogram_csv(c, d, cfg.histogram_bins);
    }
    write_metadata(dir, cfg, "verify");
    print_report_lines(log, reports);
    const int failures = failed_count(reports);
    log << failures << " of " << reports.size() << " checks failed\n";
    return exit_status(failures);
  });
}

int run_simulate(const RunConfig& cfg, std::ostream& log) {
  return guarded(log, [&] {
    const BuiltModels built = build_models(cfg);
    const fs::path dir = prepare_output(cfg);
    SimConfig sim = cfg.sim;
    sim.n_loc = cfg.n;
    const auto paths = batch_simulate(built.p, built.x0, sim, &built.change, 0, cfg.dump_paths,
                                      split_seed(cfg.seed, 0), cfg.threads);
    auto po = open_out(dir / "paths.csv");
    write_path_csv_header(po, built.p.dim());
    auto to = open_out(dir / "traces.csv");
    write_trace_csv_header(to);
    std::map<std::string, std::size_t> status;
    for (std::size_t i = 0; i < paths.size(); ++i) {
      write_path_csv_rows(po, i, paths[i]);
      write_trace_csv_rows(to, i, accumulate(paths[i], built.p, built.change, cfg.n));
      status[to_string(paths[i].status)]++;
    }
    write_metadata(dir, cfg, "simulate");
    log << paths.size() << " paths written to " << (dir / "paths.csv").string() << '\n';
    for (const auto& [k, v] : status) log << "  " << k << ": " << v << '\n';
    return 0;
  });
}

int run_scan(const RunConfig& cfg, std::ostream& log) {
  return guarded(log, [&] {
    const BuiltModels built = build_models(cfg);
    const fs::path dir = prepare_output(cfg);
    const auto rows = scan_exhaustion(built.p, built.change, cfg.scan_levels, cfg.scan_points);
    auto out = open_out(dir / "scan.csv");
    out << "n,diffusion_max,killing_max,jump_max,growth,diverging\n";
    for (const auto& r : rows) {
      out << r.n << ',' << format_double(r.maxima.diffusion_max) << ',' << format_double(r.maxima.killing_max) << ','
          << format_double(r.maxima.jump_max) << ',' << format_double(r.growth) << ','
          << (r.diverging ? "true" : "false") << '\n';
      log << "n=" << r.n << " diffusion " << format_double(r.maxima.diffusion_max) << " killing "
          << format_double(r.maxima.killing_max) << " jump " << format_double(r.maxima.jump_max)
          << (r.diverging ? "  (growing)" : "") << '\n';
    }
    write_metadata(dir, cfg, "scan");
    return 0;
  });
}

int run_cdc_demo(const RunConfig& cfg, std::ostream& log) {
  return guarded(log, [&] {
    RunConfig c = cfg;
    if (c.h.kind == "x") throw ConfigError({"change.h.kind: h must be compactly supported (bump or zero)"});
    const ModelSpec p = p_model(c.cir);
    const HFunction h = c.h.kind == "zero" ? HFunction::zero(1) : HFunction::bump(c.h.center, c.h.radius, c.h.amplitude, c.h.order);
    const fs::path dir = prepare_output(c);
    const std::uint64_t seed = split_seed(c.seed, 2);
    const auto samples = cdc_samples(c.cdc_points, seed, 0.05, 5.0);
    std::vector<CheckReport> reports;
    reports.push_back(cdc_gamma_check(p, samples, seed));
    reports.push_back(cdc_generator_check(p, h, samples, seed));
    reports.push_back(
        cdc_density_check(p, h, c.n, scalar_vec(c.cir.y0), c.sim, c.cdc_paths, split_seed(c.seed, 3), c.threads));
    {
      auto out = open_out(dir / "cdc_report.csv");
      write_report_csv(out, reports);
    }
    {
      auto out = open_out(dir / "cdc_report.json");
      write_report_json(out, reports, c.seed);
    }
    {
      auto out = open_out(dir / "cdc_timing.csv");
      write_timing_csv(out, reports);
    }
    write_metadata(dir, c, "cdc-demo");
    print_report_lines(log, reports);
    for (const auto& r : reports)
      if (!r.detail.empty()) log << "  " << r.name << ": " << r.detail << '\n';
    return exit_status(failed_count(reports));
  });
}

}  // namespace jd
