#include "jumpdiff/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace jd {

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error([&] {
        std::string msg = "invalid config:";
        for (const auto& e : errors) msg += "\n  " + e;
        return msg;
      }()),
      errors_(std::move(errors)) {}

TestFunction FunctionSpec::build() const {
  if (kind == "x")
    return TestFunction::generic(
        1, [](const Vec& x) { return x[0]; }, [](const Vec&) { return scalar_vec(1.0); },
        [](const Vec&) { return Mat::Zero(1, 1).eval(); }, kNever, 1e-4, "x");
  if (kind == "zero") return TestFunction::zero(1);
  return TestFunction::bump(center, radius, amplitude, order);
}

namespace {

std::string where(const YAML::Node& node) {
  const YAML::Mark m = node.Mark();
  if (m.is_null()) return "";
  std::ostringstream os;
  os << " (line " << m.line + 1 << ", column " << m.column + 1 << ")";
  return os.str();
}

class Reader {
 public:
  std::vector<std::string> errors;

  void error(const std::string& path, const std::string& msg, const YAML::Node& at = YAML::Node()) {
    errors.push_back(path + ": " + msg + (at.IsDefined() ? where(at) : ""));
  }

  /// Flags keys outside `allowed`; false if the node is not a mapping.
  bool mapping(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed) {
    if (!node.IsMap()) {
      error(path, "expected a mapping", node);
      return false;
    }
    for (const auto& kv : node) {
      const std::string key = kv.first.as<std::string>();
      if (!allowed.count(key)) error(path.empty() ? key : path + "." + key, "unknown key", kv.first);
    }
    return true;
  }

  template <class T>
  void read(const YAML::Node& parent, const std::string& key, const std::string& path, T& out) {
    const YAML::Node node = parent[key];
    if (!node.IsDefined() || node.IsNull()) return;
    const std::string full = path.empty() ? key : path + "." + key;
    if (!node.IsScalar()) {
      error(full, "expected a scalar", node);
      return;
    }
    try {
      if constexpr (std::is_same_v<T, bool>) {
        out = node.as<bool>();
      } else if constexpr (std::is_same_v<T, std::string>) {
        out = node.as<std::string>();
      } else if constexpr (std::is_unsigned_v<T>) {
        const std::string text = node.as<std::string>();
        if (!text.empty() && text[0] == '-') throw YAML::BadConversion(node.Mark());
        const double v = node.as<double>();
        if (v != std::floor(v) || v < 0.0) throw YAML::BadConversion(node.Mark());
        out = text.find_first_of(".eE") == std::string::npos ? node.as<T>() : static_cast<T>(v);
      } else if constexpr (std::is_integral_v<T>) {
        const double v = node.as<double>();
        if (v != std::floor(v)) throw YAML::BadConversion(node.Mark());
        out = static_cast<T>(v);
      } else {
        out = node.as<T>();
      }
    } catch (const YAML::Exception&) {
      const char* expected = std::is_same_v<T, bool>                                   ? "a boolean"
                             : std::is_integral_v<T> && std::is_unsigned_v<T>          ? "a non-negative integer"
                             : std::is_integral_v<T>                                   ? "an integer"
                             : std::is_floating_point_v<T>                             ? "a number"
                                                                                        : "a string";
      error(full, std::string("expected ") + expected, node);
    }
  }

  template <class T>
  void read_list(const YAML::Node& parent, const std::string& key, const std::string& path, std::vector<T>& out) {
    const YAML::Node node = parent[key];
    if (!node.IsDefined() || node.IsNull()) return;
    const std::string full = path + "." + key;
    if (!node.IsSequence()) {
      error(full, "expected a list", node);
      return;
    }
    out.clear();
    for (std::size_t i = 0; i < node.size(); ++i) {
      YAML::Node holder;
      holder["v"] = node[i];
      T v{};
      const std::size_t before = errors.size();
      read(holder, "v", full + "[" + std::to_string(i) + "]", v);
      if (errors.size() == before) out.push_back(v);
    }
  }

  void require(bool ok, const std::string& path, const std::string& msg) {
    if (!ok) errors.push_back(path + ": " + msg);
  }
};

void read_function(Reader& r, const YAML::Node& node, const std::string& path, FunctionSpec& f) {
  if (node.IsScalar()) {
    f.kind = node.as<std::string>();
  } else {
    if (!r.mapping(node, path, {"kind", "center", "radius", "amplitude", "order"})) return;
    r.read(node, "kind", path, f.kind);
    r.read(node, "center", path, f.center);
    r.read(node, "radius", path, f.radius);
    r.read(node, "amplitude", path, f.amplitude);
    r.read(node, "order", path, f.order);
  }
  if (f.kind != "x" && f.kind != "bump" && f.kind != "zero") {
    r.error(path + ".kind", "must be one of x, bump, zero", node);
    return;
  }
  if (f.kind == "bump") {
    r.require(std::isfinite(f.center), path + ".center", "must be finite");
    r.require(f.radius > 0.0 && std::isfinite(f.radius), path + ".radius", "must be > 0");
    r.require(std::isfinite(f.amplitude), path + ".amplitude", "must be finite");
    r.require(f.order >= 3 && f.order <= 10, path + ".order", "must be in [3, 10] (C^2 needs order >= 3)");
  }
}

void read_weight(Reader& r, const YAML::Node& parent, const std::string& key, const std::string& path, ExpWeight& w) {
  const YAML::Node node = parent[key];
  if (!node.IsDefined() || node.IsNull()) return;
  const std::string full = path + "." + key;
  if (!r.mapping(node, full, {"scale", "rate"})) return;
  r.read(node, "scale", full, w.scale);
  r.read(node, "rate", full, w.rate);
}

void read_model(Reader& r, const YAML::Node& node, RunConfig& c) {
  if (!node.IsDefined()) return;
  if (!r.mapping(node, "model", {"family", "x0", "b0", "b1", "sigma", "lambda", "gamma", "jump_law"})) return;
  r.read(node, "family", "model", c.family);
  if (c.family != "cirjump" && c.family != "cdc-demo") r.error("model.family", "must be cirjump or cdc-demo", node["family"]);
  r.read(node, "x0", "model", c.cir.y0);
  r.read(node, "b0", "model", c.cir.b0);
  r.read(node, "b1", "model", c.cir.b1);
  r.read(node, "sigma", "model", c.cir.sigma);
  r.read(node, "lambda", "model", c.cir.lambda);
  r.read(node, "gamma", "model", c.cir.gamma);
  const YAML::Node law = node["jump_law"];
  if (law.IsDefined() && !law.IsNull() && r.mapping(law, "model.jump_law", {"type", "mean", "at"})) {
    std::string type = "exponential";
    double mean = 0.5, at = 1.0;
    r.read(law, "type", "model.jump_law", type);
    r.read(law, "mean", "model.jump_law", mean);
    r.read(law, "at", "model.jump_law", at);
    if (type == "exponential") {
      if (mean > 0.0 && std::isfinite(mean))
        c.cir.m = JumpLaw::exponential(mean);
      else
        r.error("model.jump_law.mean", "must be > 0", law);
      if (law["at"].IsDefined()) r.error("model.jump_law.at", "only valid for type point-mass", law["at"]);
    } else if (type == "point-mass") {
      if (at > 0.0 && std::isfinite(at))
        c.cir.m = JumpLaw::point_mass(at);
      else
        r.error("model.jump_law.at", "must be > 0", law);
      if (law["mean"].IsDefined()) r.error("model.jump_law.mean", "only valid for type exponential", law["mean"]);
    } else {
      r.error("model.jump_law.type", "must be exponential or point-mass", law["type"]);
    }
  }
}

void read_change(Reader& r, const YAML::Node& node, RunConfig& c) {
  if (!node.IsDefined()) return;
  if (!r.mapping(node, "change", {"kind", "n", "b0t", "b1t", "g0t", "g1t", "m0", "m1", "h"})) return;
  r.read(node, "kind", "change", c.change);
  r.read(node, "n", "change", c.n);
  r.read(node, "b0t", "change", c.cir.b0t);
  r.read(node, "b1t", "change", c.cir.b1t);
  r.read(node, "g0t", "change", c.cir.g0t);
  r.read(node, "g1t", "change", c.cir.g1t);
  read_weight(r, node, "m0", "change", c.cir.m0);
  read_weight(r, node, "m1", "change", c.cir.m1);
  if (node["h"].IsDefined()) read_function(r, node["h"], "change.h", c.h);
}

void read_sim(Reader& r, const YAML::Node& node, RunConfig& c) {
  if (!node.IsDefined()) return;
  if (!r.mapping(node, "sim", {"horizon", "dt", "explosion_cap", "scheme", "intensity_bound", "brownian_refinement",
                               "fit_epsilon", "fit_paths"}))
    return;
  r.read(node, "horizon", "sim", c.sim.horizon);
  r.read(node, "dt", "sim", c.sim.dt);
  r.read(node, "explosion_cap", "sim", c.sim.n_expl);
  std::string scheme = to_string(c.sim.scheme);
  r.read(node, "scheme", "sim", scheme);
  try {
    c.sim.scheme = parse_jump_scheme(scheme);
  } catch (const ParameterError& e) {
    r.error("sim.scheme", e.what(), node["scheme"]);
  }
  r.read(node, "intensity_bound", "sim", c.sim.intensity_bound);
  r.read(node, "brownian_refinement", "sim", c.sim.brownian_refinement);
  r.read(node, "fit_epsilon", "sim", c.fit_epsilon);
  r.read(node, "fit_paths", "sim", c.fit_paths);
}

void read_check(Reader& r, const YAML::Node& node, const std::string& path, CheckSpec& k) {
  if (!r.mapping(node, path, {"type", "label", "paths", "t", "z", "target", "functions", "side", "times",
                              "survivors_only", "d0", "samples", "points", "target_shift"}))
    return;
  r.read(node, "type", path, k.type);
  if (k.type.empty())
    r.error(path + ".type", "missing", node);
  else if (std::find(kCheckTypes.begin(), kCheckTypes.end(), k.type) == kCheckTypes.end())
    r.error(path + ".type", "unknown check type '" + k.type + "'", node["type"]);
  r.read(node, "label", path, k.label);
  r.read(node, "paths", path, k.paths);
  r.read(node, "t", path, k.t);
  r.read(node, "z", path, k.z);
  r.read(node, "target", path, k.target);
  r.read(node, "side", path, k.side);
  r.read_list(node, "times", path, k.times);
  r.read(node, "survivors_only", path, k.survivors_only);
  r.read(node, "d0", path, k.d0);
  r.read(node, "samples", path, k.samples);
  r.read(node, "points", path, k.points);
  r.read(node, "target_shift", path, k.target_shift);
  const YAML::Node fs = node["functions"];
  if (fs.IsDefined() && !fs.IsNull()) {
    if (!fs.IsSequence()) {
      r.error(path + ".functions", "expected a list", fs);
    } else {
      for (std::size_t i = 0; i < fs.size(); ++i) {
        FunctionSpec f;
        read_function(r, fs[i], path + ".functions[" + std::to_string(i) + "]", f);
        k.functions.push_back(f);
      }
    }
  }
  r.require(k.z > 0.0 && std::isfinite(k.z), path + ".z", "must be > 0");
  r.require(k.t > 0.0 && std::isfinite(k.t), path + ".t", "must be > 0");
  r.require(k.target == "auto" || k.target == "oracle" || k.target == "q-simulation" || k.target == "both",
            path + ".target", "must be auto, oracle, q-simulation or both");
  r.require(k.side == "P" || k.side == "Q", path + ".side", "must be P or Q");
  r.require(std::isfinite(k.d0) && k.d0 >= 0.0, path + ".d0", "must be >= 0");
  r.require(std::is_sorted(k.times.begin(), k.times.end()), path + ".times", "must be sorted");
  for (double t : k.times) r.require(t >= 0.0 && std::isfinite(t), path + ".times", "entries must be >= 0");
  r.require(std::isfinite(k.target_shift), path + ".target_shift", "must be finite");
  const bool needs_functions = k.type == "martingale" || k.type == "girsanov";
  r.require(!needs_functions || !k.functions.empty(), path + ".functions", "needs at least one function");
  r.require(k.type != "reweighted_expectation" || k.functions.size() <= 1, path + ".functions",
            "reweighted_expectation takes one function");
}

void validate(Reader& r, RunConfig& c) {
  for (const auto& p : c.cir.problems()) {
    const bool q_side = p.rfind("b0t", 0) == 0 || p.rfind("b1t", 0) == 0 || p.rfind("(g0t", 0) == 0 ||
                        p.rfind("g0t", 0) == 0 || p.rfind("g1t", 0) == 0 || p.rfind("m0", 0) == 0 ||
                        p.rfind("(m0", 0) == 0;
    r.errors.push_back((q_side ? "change: " : "model: ") + p);
  }
  if (c.family == "cirjump")
    r.require(c.change == "cirjump" || c.change == "identity", "change.kind", "must be cirjump or identity for family cirjump");
  else
    r.require(c.change == "h-bump" || c.change == "identity", "change.kind", "must be h-bump or identity for family cdc-demo");
  r.require(c.n >= 1, "change.n", "must be >= 1");
  r.require(std::isfinite(c.sim.dt) && c.sim.dt > 0.0, "sim.dt", "must be > 0");
  r.require(std::isfinite(c.sim.horizon) && c.sim.horizon >= c.sim.dt, "sim.horizon", "must be >= dt");
  r.require(c.sim.n_expl >= 1, "sim.explosion_cap", "must be >= 1");
  r.require(c.sim.brownian_refinement >= 0 && c.sim.brownian_refinement <= 20, "sim.brownian_refinement",
            "must be in [0, 20]");
  r.require(c.sim.scheme != JumpScheme::thinning || c.sim.intensity_bound > 0.0, "sim.intensity_bound",
            "thinning needs a positive bound");
  r.require(c.threads >= 1, "threads", "must be >= 1");
  r.require(c.paths >= 1, "paths", "must be >= 1");
  r.require(!c.output.empty(), "output", "must not be empty");
  r.require(c.plot_points >= 2, "plots.points", "must be >= 2");
  r.require(c.histogram_bins >= 1, "plots.histogram_bins", "must be >= 1");
  r.require(c.scan_points >= 2, "scan.points", "must be >= 2");
  for (int n : c.scan_levels) r.require(n >= 2, "scan.levels", "entries must be >= 2");
  for (std::size_t i = 0; i < c.checks.size(); ++i) {
    const CheckSpec& k = c.checks[i];
    const std::string path = "checks[" + std::to_string(i) + "]";
    const bool timed = k.type != "ratio_bounds" && k.type != "entropy_positivity" && k.type != "transform_consistency";
    if (timed) r.require(k.t <= c.sim.horizon, path + ".t", "must not exceed sim.horizon");
    for (double t : k.times) r.require(t <= c.sim.horizon, path + ".times", "entries must not exceed sim.horizon");
    if (k.type == "transform_consistency")
      r.require(c.family == "cirjump" && c.change == "cirjump", path + ".type",
                "transform_consistency needs family cirjump with change cirjump");
  }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    std::ostringstream os;
    os << "syntax error at line " << e.mark.line + 1 << ", column " << e.mark.column + 1 << ": " << e.msg;
    throw ConfigError({os.str()});
  }
  RunConfig c;
  Reader r;
  if (root.IsNull()) throw ConfigError({"config is empty"});
  if (!r.mapping(root, "", {"seed", "threads", "output", "paths", "model", "change", "sim", "checks", "simulate",
                            "plots", "scan", "cdc"}))
    throw ConfigError(r.errors);
  r.read(root, "seed", "", c.seed);
  r.read(root, "threads", "", c.threads);
  r.read(root, "output", "", c.output);
  r.read(root, "paths", "", c.paths);
  read_model(r, root["model"], c);
  read_change(r, root["change"], c);
  read_sim(r, root["sim"], c);

  const YAML::Node checks = root["checks"];
  if (checks.IsDefined() && !checks.IsNull()) {
    if (!checks.IsSequence()) {
      r.error("checks", "expected a list", checks);
    } else {
      for (std::size_t i = 0; i < checks.size(); ++i) {
        CheckSpec k;
        read_check(r, checks[i], "checks[" + std::to_string(i) + "]", k);
        c.checks.push_back(k);
      }
    }
  }
  if (const YAML::Node s = root["simulate"]; s.IsDefined() && r.mapping(s, "simulate", {"paths"}))
    r.read(s, "paths", "simulate", c.dump_paths);
  if (const YAML::Node s = root["plots"]; s.IsDefined() && r.mapping(s, "plots", {"paths", "points", "histogram_bins"})) {
    r.read(s, "paths", "plots", c.plot_paths);
    r.read(s, "points", "plots", c.plot_points);
    r.read(s, "histogram_bins", "plots", c.histogram_bins);
  }
  if (const YAML::Node s = root["scan"]; s.IsDefined() && r.mapping(s, "scan", {"levels", "points"})) {
    r.read_list(s, "levels", "scan", c.scan_levels);
    r.read(s, "points", "scan", c.scan_points);
  }
  if (const YAML::Node s = root["cdc"]; s.IsDefined() && r.mapping(s, "cdc", {"points", "paths"})) {
    r.read(s, "points", "cdc", c.cdc_points);
    r.read(s, "paths", "cdc", c.cdc_paths);
  }
  validate(r, c);
  if (!r.errors.empty()) throw ConfigError(r.errors);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str());
}

}  // namespace jd
