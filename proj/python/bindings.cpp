#include "jumpdiff/density.hpp"
#include "jumpdiff/suite.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace jd;

namespace {

py::dict report_dict(const CheckReport& r) {
  py::dict d;
  d["name"] = r.name;
  d["estimate"] = r.estimate;
  d["se"] = r.se;
  d["target"] = r.target;
  d["provenance"] = r.provenance;
  d["z"] = r.z;
  d["epsilon"] = r.epsilon;
  d["pass"] = r.pass;
  d["n"] = r.n;
  d["seed"] = r.seed;
  d["detail"] = r.detail;
  return d;
}

py::list report_list(const std::vector<CheckReport>& rs) {
  py::list out;
  for (const auto& r : rs) out.append(report_dict(r));
  return out;
}

// One dict per path: t, x (None at the cemetery), status, logD, Lambda, valid.
py::list simulate_traces(const RunConfig& cfg, std::size_t paths, std::uint64_t seed) {
  const BuiltModels built = build_models(cfg);
  SimConfig sim = cfg.sim;
  sim.n_loc = cfg.n;
  std::vector<PathRecord> recs;
  {
    py::gil_scoped_release release;
    recs = batch_simulate(built.p, built.x0, sim, &built.change, 0, paths, seed, cfg.threads);
  }
  py::list out;
  for (const auto& rec : recs) {
    const DensityTrace tr = accumulate(rec, built.p, built.change, cfg.n);
    py::list xs;
    for (const auto& s : rec.states) {
      if (s.is_cemetery())
        xs.append(py::none());
      else
        xs.append(s.point()[0]);
    }
    py::dict d;
    d["t"] = rec.times;
    d["x"] = xs;
    d["status"] = to_string(rec.status);
    d["killing_time"] = rec.killing_time;
    d["localization_time"] = tr.localization_time;
    d["logD"] = tr.log_density;
    d["Lambda"] = tr.lambda;
    std::vector<bool> valid(tr.valid.begin(), tr.valid.end());
    d["valid"] = valid;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_jumpdiff, m) {
  m.doc() = "Jump-diffusion measure-change simulation and verification";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<OracleUnavailable>(m, "OracleUnavailable", PyExc_LookupError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

  py::class_<CirJumpParams>(m, "CirJumpParams")
      .def(py::init<>())
      .def_readwrite("b0", &CirJumpParams::b0)
      .def_readwrite("b1", &CirJumpParams::b1)
      .def_readwrite("sigma", &CirJumpParams::sigma)
      .def_readwrite("lam", &CirJumpParams::lambda)
      .def_readwrite("gamma", &CirJumpParams::gamma)
      .def_readwrite("y0", &CirJumpParams::y0)
      .def_readwrite("b0t", &CirJumpParams::b0t)
      .def_readwrite("b1t", &CirJumpParams::b1t)
      .def_readwrite("g0t", &CirJumpParams::g0t)
      .def_readwrite("g1t", &CirJumpParams::g1t)
      .def_property(
          "jump_mean", [](const CirJumpParams& p) { return p.m.mean(); },
          [](CirJumpParams& p, double v) { p.m = JumpLaw::exponential(v); })
      .def("problems", &CirJumpParams::problems)
      .def("survival_oracle",
           [](const CirJumpParams& p, const std::string& side, double t) {
             return survival_oracle(p, side == "Q" ? Side::Q : Side::P, t);
           })
      .def("mean_oracle", [](const CirJumpParams& p, const std::string& side, double t) {
        return mean_oracle(p, side == "Q" ? Side::Q : Side::P, t);
      });

  py::class_<RunConfig>(m, "RunConfig")
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("threads", &RunConfig::threads)
      .def_readwrite("output", &RunConfig::output)
      .def_readwrite("paths", &RunConfig::paths)
      .def_readwrite("n", &RunConfig::n)
      .def_readwrite("fit_epsilon", &RunConfig::fit_epsilon)
      .def_readwrite("cir", &RunConfig::cir)
      .def_property_readonly("family", [](const RunConfig& c) { return c.family; })
      .def_property_readonly("change", [](const RunConfig& c) { return c.change; })
      .def_property_readonly("check_types", [](const RunConfig& c) {
        std::vector<std::string> out;
        for (const auto& k : c.checks) out.push_back(k.type);
        return out;
      });

  m.def("parse_config", &parse_config, py::arg("text"));
  m.def("load_config", &load_config, py::arg("path"));
  m.def("entropy_l", &entropy_l, py::arg("u"));

  m.def(
      "run_checks",
      [](const RunConfig& cfg) {
        std::vector<CheckReport> rs;
        {
          py::gil_scoped_release release;
          rs = run_checks(cfg, build_models(cfg));
        }
        return report_list(rs);
      },
      py::arg("config"), "Runs the configured checks and returns one dict per report.");

  m.def(
      "verify",
      [](const RunConfig& cfg) {
        std::ostringstream log;
        int rc;
        {
          py::gil_scoped_release release;
          rc = run_verify(cfg, log);
        }
        return py::make_tuple(rc, log.str());
      },
      py::arg("config"), "Writes the verify artifacts into config.output; returns (status, log).");

  m.def("simulate", &simulate_traces, py::arg("config"), py::arg("paths"), py::arg("seed"));

  m.def(
      "ratio_bounds",
      [](std::size_t samples, std::uint64_t seed) { return report_dict(ratio_bounds_property(samples, seed)); },
      py::arg("samples"), py::arg("seed"));
}
