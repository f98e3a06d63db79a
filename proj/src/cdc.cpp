#include "jumpdiff/cdc.hpp"

#include <cmath>
#include <memory>

namespace jd {

namespace {

TestFunction exp_minus_one(const TestFunction& h) {
  const TestFunction hh = h;
  return TestFunction::generic(
      h.dim(), [hh](const Vec& x) { return std::expm1(hh.value(x)); },
      [hh](const Vec& x) { return (std::exp(hh.value(x)) * hh.gradient(x)).eval(); },
      [hh](const Vec& x) {
        const Vec g = hh.gradient(x);
        return (std::exp(hh.value(x)) * (hh.hessian(x) + g * g.transpose())).eval();
      },
      h.support_radius(), kDefaultFdStep, "exp(" + h.name() + ")-1", h.kinks());
}

}  // namespace

HFunction::HFunction(TestFunction h, double sup_bound) : h_(h), big_h_(exp_minus_one(h)), sup_(sup_bound) {
  if (!std::isfinite(sup_bound)) throw ParameterError("h needs a finite upper bound");
}

HFunction HFunction::bump(double center, double radius, double amplitude, int order) {
  return HFunction(TestFunction::bump(center, radius, amplitude, order), std::max(amplitude, 0.0));
}

HFunction HFunction::zero(int dim) { return HFunction(TestFunction::zero(dim), 0.0); }

double gamma_explicit(const ModelSpec& model, const TestFunction& f, const TestFunction& g, const Vec& x) {
  if (!model.space.contains(x)) throw DomainError("carre du champ outside E at " + format_state(x));
  const double fx = f.value(x), gx = g.value(x);
  double out = f.gradient(x).dot(model.diffusion(x) * g.gradient(x)) + model.killing(x) * fx * gx;
  if (!model.jumps.active()) return out;

  JumpIntegrand w;
  w.fn = [&](const Vec& xi) {
    const Vec y = x + xi;
    return (f.value(y) - fx) * (g.value(y) - gx);
  };
  std::vector<PolyPiece> pieces;
  if (!f.pieces().empty() && !g.pieces().empty()) {
    // (F - fx)(G - gx) = FG - gx F - fx G + fx gx, each term piecewise polynomial.
    const TestFunction fg = TestFunction::product(f, g);
    for (const auto& p : fg.pieces()) pieces.push_back(p);
    for (auto p : f.pieces()) {
      p.poly = p.poly.scaled(-gx);
      pieces.push_back(p);
    }
    for (auto p : g.pieces()) {
      p.poly = p.poly.scaled(-fx);
      pieces.push_back(p);
    }
    w.poly = PolyIntegrand{pieces, x[0], fx * gx};
  }
  if (x.size() == 1) {
    for (double k : f.kinks()) w.add_break(k - x[0]);
    for (double k : g.kinks()) w.add_break(k - x[0]);
  }
  return out + model.jumps.integrate(x, w);
}

double gamma_via_generator(const ModelSpec& model, const TestFunction& f, const TestFunction& g, const Vec& x) {
  const TestFunction fg = TestFunction::product(f, g);
  return apply_generator(model, fg, x) - f.value(x) * apply_generator(model, g, x) -
         g.value(x) * apply_generator(model, f, x);
}

ChangeSpec change_from_h(const HFunction& h, const ModelSpec& model) {
  const TestFunction hf = h.h();
  const auto space = model.space;
  const double sup = h.sup_bound();
  const std::vector<double> kinks = hf.kinks();

  ChangeSpec c;
  c.name = "cdc(" + hf.name() + ")";
  c.in_domain = space.contains;
  c.in_exhaustion = [space](int n, const Vec& x) { return space.contains(x) && x.norm() < static_cast<double>(n); };
  c.phi1 = [hf](const Vec& x) { return hf.gradient(x); };
  c.phi2 = [hf](const Vec& x) { return std::exp(-hf.value(x)); };
  c.phi3 = [hf](const Vec& x, const Vec& xi) { return std::exp(hf.value(Vec(x + xi)) - hf.value(x)); };
  c.phi3_bound = [hf, sup](const Vec& x) { return std::exp(sup - hf.value(x)); };
  c.phi3_breaks = [kinks](const Vec& x, JumpIntegrand& g) {
    if (x.size() == 1)
      for (double k : kinks) g.add_break(k - x[0]);
  };

  const JumpKernel kernel = model.jumps;
  const auto phi3 = c.phi3;
  const auto breaks = c.phi3_breaks;
  c.kappa = [kernel, phi3, breaks](const Vec& x) {
    JumpIntegrand g;
    g.fn = [&](const Vec& xi) { return phi3(x, xi) - 1.0; };
    breaks(x, g);
    return kernel.integrate(x, g);
  };
  c.entropy3 = [kernel, phi3, breaks](const Vec& x) {
    JumpIntegrand g;
    g.fn = [&](const Vec& xi) { return entropy_l(phi3(x, xi)); };
    breaks(x, g);
    return kernel.integrate(x, g);
  };
  return c;
}

std::vector<double> explicit_density(const HFunction& h, const PathRecord& path, const ModelSpec& model) {
  const std::size_t m = path.times.size();
  std::vector<double> out(m, 1.0);
  const Vec& x0 = path.states.front().point();
  const double h0 = h.value(x0);
  double integral = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    if (k > 0) {
      const Vec& x = path.states[k - 1].point();
      const double dur = std::min(path.times[k], path.killing_time) - path.times[k - 1];
      integral += apply_generator(model, h.big_h(), x) * std::exp(-h.value(x)) * dur;
    }
    out[k] = std::exp(h.value(path.states[k]) - h0 - integral);
  }
  return out;
}

double tilde_generator_cdc(const ModelSpec& model, const HFunction& h, const TestFunction& f, const Vec& x) {
  return apply_generator(model, f, x) + gamma_explicit(model, h.big_h(), f, x) * std::exp(-h.value(x));
}

}  // namespace jd
