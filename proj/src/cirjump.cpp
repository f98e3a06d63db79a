#include "jumpdiff/cirjump.hpp"

#include <cmath>
#include <sstream>

namespace jd {

std::vector<std::string> CirJumpParams::problems() const {
  std::vector<std::string> out;
  const auto need = [&](bool ok, const std::string& msg) {
    if (!ok) out.push_back(msg);
  };
  need(std::isfinite(b0) && b0 >= 0.0, "b0 must be >= 0");
  need(std::isfinite(b1), "b1 must be finite");
  need(std::isfinite(sigma) && sigma > 0.0, "sigma must be > 0");
  need(std::isfinite(lambda) && lambda > 0.0, "lambda must be > 0");
  need(std::isfinite(gamma) && gamma > 0.0, "gamma must be > 0");
  need(std::isfinite(y0) && y0 > 0.0, "x0 must be > 0");
  need(std::isfinite(b1t), "b1t must be finite");
  need(std::isfinite(b0t) && b0t >= 0.5 * sigma * sigma,
       "b0t must satisfy the Feller condition b0t >= sigma^2/2 required for the Q model");
  need(std::isfinite(g0t) && g0t >= 0.0, "g0t must be >= 0");
  need(std::isfinite(g1t) && g1t >= 0.0, "g1t must be >= 0");
  need(g0t > 0.0 || g1t > 0.0, "(g0t, g1t) must not both be zero");
  need(m0.scale >= 0.0 && m1.scale >= 0.0, "m0 and m1 scales must be >= 0");
  need(m0.rate >= 0.0 && m1.rate >= 0.0, "m0 and m1 rates must be >= 0");
  need(m0.scale > 0.0 || m1.scale > 0.0, "(m0, m1) must not vanish together");
  return out;
}

void CirJumpParams::validate() const {
  const auto errs = problems();
  if (errs.empty()) return;
  std::ostringstream os;
  os << "invalid CIR-jump parameters:";
  for (const auto& e : errs) os << "\n  " << e;
  throw ParameterError(os.str());
}

double CirJumpParams::c0() const { return m0.scale * m.laplace(m0.rate); }
double CirJumpParams::c1() const { return m1.scale * m.laplace(m1.rate); }
double CirJumpParams::j0() const { return m0.scale * m.tilted_first_moment(m0.rate); }
double CirJumpParams::j1() const { return m1.scale * m.tilted_first_moment(m1.rate); }

bool feller_ok(double b0, double sigma) { return b0 >= 0.5 * sigma * sigma; }

ModelSpec p_model(const CirJumpParams& p) {
  p.validate();
  ModelSpec mdl;
  mdl.name = "cirjump-P";
  mdl.space = StateSpace::half_line();
  const double s2 = p.sigma * p.sigma;
  mdl.diffusion = [s2](const Vec& x) {
    Mat a(1, 1);
    a(0, 0) = s2 * std::max(x[0], 0.0);
    return a;
  };
  mdl.drift = [b0 = p.b0, b1 = p.b1](const Vec& x) { return scalar_vec(b0 + b1 * x[0]); };
  mdl.killing = [g = p.gamma](const Vec&) { return g; };
  mdl.jumps = JumpKernel::affine_mixture({{p.lambda, 0.0, p.m}});
  return mdl;
}

ModelSpec q_model(const CirJumpParams& p) {
  p.validate();
  ModelSpec mdl;
  mdl.name = "cirjump-Q";
  mdl.space = StateSpace::half_line();
  const double s2 = p.sigma * p.sigma;
  mdl.diffusion = [s2](const Vec& x) {
    Mat a(1, 1);
    a(0, 0) = s2 * std::max(x[0], 0.0);
    return a;
  };
  mdl.drift = [b0 = p.b0t, b1 = p.b1t](const Vec& x) { return scalar_vec(b0 + b1 * x[0]); };
  mdl.killing = [g0 = p.g0t, g1 = p.g1t](const Vec& x) { return g0 + g1 * std::max(x[0], 0.0); };
  std::vector<MixtureComponent> comps;
  if (p.m0.scale > 0.0) comps.push_back({p.lambda * p.c0(), 0.0, p.m.tilted(p.m0.rate)});
  if (p.m1.scale > 0.0) comps.push_back({0.0, p.lambda * p.c1(), p.m.tilted(p.m1.rate)});
  mdl.jumps = JumpKernel::affine_mixture(std::move(comps));
  return mdl;
}

ChangeSpec change_spec(const CirJumpParams& p) {
  p.validate();
  ChangeSpec c;
  c.name = "cirjump";
  c.in_domain = positive_open_domain();
  c.in_exhaustion = reciprocal_exhaustion();
  const double s2 = p.sigma * p.sigma;
  const double d0 = (p.b0t - p.b0) / s2;
  const double d1 = (p.b1t - p.b1) / s2;
  c.phi1 = [d0, d1](const Vec& x) { return scalar_vec(d0 / x[0] + d1); };
  c.phi2 = [g = p.gamma, g0 = p.g0t, g1 = p.g1t](const Vec& x) { return (g0 + g1 * x[0]) / g; };
  const ExpWeight m0 = p.m0, m1 = p.m1;
  c.phi3 = [m0, m1](const Vec& x, const Vec& xi) { return xi[0] > 0.0 ? m0(xi[0]) + m1(xi[0]) * x[0] : 1.0; };
  c.phi3_bound = [m0, m1](const Vec& x) { return m0.scale + m1.scale * x[0]; };

  const double lam = p.lambda, c0 = p.c0(), c1 = p.c1();
  c.kappa = [lam, c0, c1](const Vec& x) { return lam * (c0 - 1.0 + c1 * x[0]); };

  const JumpLaw law = p.m;
  if (m1.scale == 0.0 || m0.scale == 0.0 || m0.rate == m1.rate) {
    // phi3 = a(x) e^{-rho xi}: int l(phi3) dm = a L log a - a rho T - a L + 1.
    const double rho = m1.scale == 0.0 ? m0.rate : (m0.scale == 0.0 ? m1.rate : m0.rate);
    const double lap = law.laplace(rho), tilt = law.tilted_first_moment(rho);
    c.entropy3 = [lam, m0, m1, rho, lap, tilt](const Vec& x) {
      const double a = m0.scale + m1.scale * x[0];
      if (a == 0.0) return lam;
      return lam * (a * lap * std::log(a) - a * rho * tilt - a * lap + 1.0);
    };
  } else {
    c.entropy3 = [lam, law, m0, m1](const Vec& x) {
      return lam * law.integrate([&](double xi) { return entropy_l(m0(xi) + m1(xi) * x[0]); });
    };
  }
  return c;
}

double mean_oracle(const CirJumpParams& p, Side side, double t) {
  double a, b;
  if (side == Side::P) {
    a = p.b0 + p.lambda * p.m.mean();
    b = p.b1;
  } else {
    if (p.g1t != 0.0) throw OracleUnavailable("mean oracle needs state-independent Q killing (g1t = 0)");
    a = p.b0t + p.lambda * p.j0();
    b = p.b1t + p.lambda * p.j1();
  }
  if (b == 0.0) return p.y0 + a * t;
  return (p.y0 + a / b) * std::exp(b * t) - a / b;
}

double survival_oracle(const CirJumpParams& p, Side side, double t) {
  if (side == Side::P) return std::exp(-p.gamma * t);
  if (p.g1t != 0.0) throw OracleUnavailable("survival oracle needs state-independent Q killing (g1t = 0)");
  return std::exp(-p.g0t * t);
}

double thinning_bound(const CirJumpParams& p, double xmax) {
  return p.lambda * (p.c0() + p.c1() * std::max(xmax, 0.0));
}

}  // namespace jd
