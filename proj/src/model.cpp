#include "jumpdiff/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <memory>
#include <sstream>

namespace jd {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_state(const Vec& x) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

// ---------------------------------------------------------------------------
// State spaces and domains

StateSpace StateSpace::whole_space(int dim) {
  if (dim < 1 || dim > kMaxDim) throw ParameterError("state dimension out of range");
  return {dim, [](const Vec& x) { return x.allFinite(); }, [](const Vec& x) { return x; }};
}

StateSpace StateSpace::half_line() {
  return {1, [](const Vec& x) { return std::isfinite(x[0]) && x[0] >= 0.0; },
          [](const Vec& x) { return scalar_vec(std::max(x[0], 0.0)); }};
}

std::function<bool(const Vec&)> positive_open_domain() {
  return [](const Vec& x) { return x[0] > 0.0 && std::isfinite(x[0]); };
}

std::function<bool(int, const Vec&)> reciprocal_exhaustion() {
  return [](int n, const Vec& x) { return x[0] > 1.0 / n && x[0] < static_cast<double>(n); };
}

std::function<bool(int, const Vec&)> ball_exhaustion() {
  return [](int n, const Vec& x) { return x.norm() < static_cast<double>(n); };
}

// ---------------------------------------------------------------------------
// Jump kernels

JumpKernel JumpKernel::none() {
  JumpKernel k;
  k.intensity = [](const Vec&) { return 0.0; };
  k.sample = [](const Vec&, Engine&) -> Vec { throw SimulationError("sampling from an empty jump kernel"); };
  k.integrate = [](const Vec&, const JumpIntegrand&) { return 0.0; };
  k.density = [](const Vec&, const Vec&) { return 0.0; };
  k.constant_intensity = true;
  k.integration_note = "no jumps";
  return k;
}

JumpKernel JumpKernel::affine_mixture(std::vector<MixtureComponent> components) {
  if (components.empty()) return none();
  for (const auto& c : components)
    if (c.weight0 < 0.0 || c.weight1 < 0.0) throw ParameterError("mixture kernel weights must be nonnegative");

  auto comps = std::make_shared<const std::vector<MixtureComponent>>(std::move(components));
  const bool constant = std::all_of(comps->begin(), comps->end(), [](const auto& c) { return c.weight1 == 0.0; });

  JumpKernel k;
  k.constant_intensity = constant;
  k.integration_note = "closed form";
  k.intensity = [comps](const Vec& x) {
    double total = 0.0;
    for (const auto& c : *comps) total += c.weight0 + c.weight1 * x[0];
    return total;
  };
  k.sample = [comps](const Vec& x, Engine& eng) {
    double total = 0.0;
    for (const auto& c : *comps) total += c.weight0 + c.weight1 * x[0];
    std::uniform_real_distribution<double> unif(0.0, total);
    const double pick = comps->size() == 1 ? 0.0 : unif(eng);
    double acc = 0.0;
    for (std::size_t i = 0; i < comps->size(); ++i) {
      const auto& c = (*comps)[i];
      acc += c.weight0 + c.weight1 * x[0];
      if (pick < acc || i + 1 == comps->size()) return scalar_vec(c.law.sample(eng));
    }
    return scalar_vec((*comps).back().law.sample(eng));
  };
  k.integrate = [comps](const Vec& x, const JumpIntegrand& g) {
    double total = 0.0;
    for (const auto& c : *comps) {
      const double w = c.weight0 + c.weight1 * x[0];
      if (w == 0.0) continue;
      double v;
      if (g.poly) {
        v = c.law.integrate(*g.poly);
      } else {
        v = c.law.integrate([&](double xi) { return g(scalar_vec(xi)); }, g.break_span());
      }
      total += w * v;
    }
    return total;
  };
  k.density = [comps](const Vec& x, const Vec& xi) {
    double total = 0.0;
    for (const auto& c : *comps) total += (c.weight0 + c.weight1 * x[0]) * c.law.density(xi[0]);
    return total;
  };
  return k;
}

JumpKernel JumpKernel::with_monte_carlo(Intensity intensity, Sampler sampler, std::size_t samples,
                                        std::uint64_t seed) {
  if (samples == 0) throw ParameterError("Monte Carlo integrator needs at least one sample");
  JumpKernel k;
  k.intensity = intensity;
  k.sample = sampler;
  k.constant_intensity = false;
  std::ostringstream note;
  note << "monte carlo: " << samples << " samples, seed " << seed;
  k.integration_note = note.str();
  k.integrate = [intensity, sampler, samples, seed](const Vec& x, const JumpIntegrand& g) {
    const double lam = intensity(x);
    if (lam == 0.0) return 0.0;
    Engine eng(seed);
    double acc = 0.0;
    for (std::size_t i = 0; i < samples; ++i) acc += g(sampler(x, eng));
    return lam * acc / static_cast<double>(samples);
  };
  return k;
}

// ---------------------------------------------------------------------------
// Model and change specs

void ModelSpec::check_at(const Vec& x) const {
  const Mat a = diffusion(x);
  if (a.rows() != dim() || a.cols() != dim()) throw ParameterError("diffusion matrix has wrong shape at " + format_state(x));
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ParameterError("diffusion matrix not symmetric at " + format_state(x));
  Eigen::SelfAdjointEigenSolver<Mat> es(a, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kPsdTolerance)
    throw ParameterError("diffusion matrix not positive semidefinite at " + format_state(x));
  if (killing(x) < 0.0) throw ParameterError("negative killing rate at " + format_state(x));
}

void ChangeSpec::require_domain(const Vec& x) const {
  if (!in_domain(x)) throw DomainError("state " + format_state(x) + " outside the change domain U");
}

Vec ChangeSpec::checked_phi1(const Vec& x) const {
  require_domain(x);
  return phi1(x);
}

double ChangeSpec::checked_phi2(const Vec& x) const {
  require_domain(x);
  const double v = phi2(x);
  if (!(v > 0.0)) throw PositivityError("phi2 <= 0 at " + format_state(x));
  return v;
}

double ChangeSpec::checked_phi3(const Vec& x, const Vec& xi) const {
  require_domain(x);
  const double v = phi3(x, xi);
  if (!(v > 0.0)) throw PositivityError("phi3 <= 0 at " + format_state(x) + ", jump " + format_state(xi));
  return v;
}

ChangeSpec ChangeSpec::identity(int dim, std::function<bool(const Vec&)> domain,
                                std::function<bool(int, const Vec&)> exhaustion) {
  ChangeSpec c;
  c.name = "identity";
  c.in_domain = std::move(domain);
  c.in_exhaustion = std::move(exhaustion);
  c.phi1 = [dim](const Vec&) { return Vec::Zero(dim).eval(); };
  c.phi2 = [](const Vec&) { return 1.0; };
  c.phi3 = [](const Vec&, const Vec&) { return 1.0; };
  c.kappa = [](const Vec&) { return 0.0; };
  c.entropy3 = [](const Vec&) { return 0.0; };
  c.phi3_bound = [](const Vec&) { return 1.0; };
  return c;
}

ChangeSpec ChangeSpec::from_fields(const ModelSpec& model, std::string name, std::function<bool(const Vec&)> domain,
                                   std::function<bool(int, const Vec&)> exhaustion,
                                   std::function<Vec(const Vec&)> phi1, std::function<double(const Vec&)> phi2,
                                   std::function<double(const Vec&, const Vec&)> phi3) {
  ChangeSpec c;
  c.name = std::move(name);
  c.in_domain = std::move(domain);
  c.in_exhaustion = std::move(exhaustion);
  c.phi1 = std::move(phi1);
  c.phi2 = std::move(phi2);
  c.phi3 = phi3;
  const JumpKernel kernel = model.jumps;
  c.kappa = [kernel, phi3](const Vec& x) {
    JumpIntegrand g;
    g.fn = [&](const Vec& xi) { return phi3(x, xi) - 1.0; };
    return kernel.integrate(x, g);
  };
  c.entropy3 = [kernel, phi3](const Vec& x) {
    JumpIntegrand g;
    g.fn = [&](const Vec& xi) { return entropy_l(phi3(x, xi)); };
    return kernel.integrate(x, g);
  };
  return c;
}

// ---------------------------------------------------------------------------

Mat psd_factor(const Mat& alpha) {
  if (alpha.rows() == 1) {
    const double v = alpha(0, 0);
    if (!(v >= -kPsdTolerance)) throw SimulationError("diffusion coefficient is negative or NaN");
    Mat l(1, 1);
    l(0, 0) = std::sqrt(std::max(v, 0.0));
    return l;
  }
  Eigen::LLT<Mat> llt(alpha);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Mat> es(alpha);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() < -kPsdTolerance)
    throw SimulationError("diffusion matrix is not positive semidefinite");
  const Vec root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal();
}

double entropy_l(double u) {
  if (u < 0.0 || std::isnan(u)) throw DomainError("l(u) needs u >= 0");
  if (u == 0.0) return 1.0;
  const double e = u - 1.0;
  if (std::abs(e) < 1e-3) {
    // sum_{k>=2} (-1)^k e^k / (k (k - 1))
    double term = e * e;
    double acc = 0.0;
    for (int k = 2; k <= 9; ++k) {
      acc += ((k % 2 == 0) ? 1.0 : -1.0) * term / (k * (k - 1.0));
      term *= e;
    }
    return acc;
  }
  if (std::isinf(u)) return u;
  return u * std::log(u) - u + 1.0;
}

ModelSpec transform_model(const ModelSpec& model, const ChangeSpec& change) {
  auto base = std::make_shared<const ModelSpec>(model);
  auto ch = std::make_shared<const ChangeSpec>(change);

  ModelSpec out;
  out.name = model.name + "~" + change.name;
  out.space = model.space;
  out.diffusion = [base, ch](const Vec& x) {
    ch->require_domain(x);
    return base->diffusion(x);
  };
  out.drift = [base, ch](const Vec& x) {
    const Vec phi = ch->checked_phi1(x);
    return (base->drift(x) + base->diffusion(x) * phi).eval();
  };
  out.killing = [base, ch](const Vec& x) { return ch->checked_phi2(x) * base->killing(x); };

  JumpKernel k;
  k.constant_intensity = false;
  k.integration_note = base->jumps.integration_note + ", reweighted by phi3";
  k.intensity = [base, ch](const Vec& x) {
    ch->require_domain(x);
    return base->jumps.intensity(x) + ch->kappa(x);
  };
  k.sample = [base, ch](const Vec& x, Engine& eng) -> Vec {
    if (!ch->phi3_bound) throw SimulationError("reweighted kernel needs a phi3 bound for sampling");
    const double bound = ch->phi3_bound(x);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int tries = 0; tries < 1000000; ++tries) {
      Vec xi = base->jumps.sample(x, eng);
      const double w = ch->checked_phi3(x, xi);
      if (w > bound * (1.0 + 1e-12))
        throw SimulationError("phi3 exceeds its rejection bound at " + format_state(x));
      if (unif(eng) * bound <= w) return xi;
    }
    throw SimulationError("acceptance-rejection did not terminate at " + format_state(x));
  };
  k.integrate = [base, ch](const Vec& x, const JumpIntegrand& g) {
    ch->require_domain(x);
    JumpIntegrand w;
    w.fn = [&](const Vec& xi) { return g(xi) * ch->phi3(x, xi); };
    for (double b : g.break_span()) w.add_break(b);
    if (ch->phi3_breaks) ch->phi3_breaks(x, w);
    return base->jumps.integrate(x, w);
  };
  if (base->jumps.density) {
    k.density = [base, ch](const Vec& x, const Vec& xi) { return ch->checked_phi3(x, xi) * base->jumps.density(x, xi); };
  }
  out.jumps = std::move(k);
  return out;
}

Vec truncation_chi(const Vec& xi) {
  const double r = xi.norm();
  return r <= 1.0 ? xi : (xi / r).eval();
}

namespace {

Vec integrate_chi(const ModelSpec& model, const Vec& x, const std::function<double(const Vec&)>& weight) {
  const int d = model.dim();
  Vec out = Vec::Zero(d);
  for (int i = 0; i < d; ++i) {
    JumpIntegrand g;
    g.fn = [&](const Vec& xi) { return truncation_chi(xi)[i] * weight(xi); };
    if (d == 1) {
      g.add_break(1.0);
      g.add_break(-1.0);
    }
    out[i] = model.jumps.integrate(x, g);
  }
  return out;
}

}  // namespace

Vec truncated_drift(const ModelSpec& model, const Vec& x) {
  return model.drift(x) + integrate_chi(model, x, [](const Vec&) { return 1.0; });
}

Vec chi_drift_correction(const ModelSpec& model, const ChangeSpec& change, const Vec& x) {
  change.require_domain(x);
  return integrate_chi(model, x, [&](const Vec& xi) { return change.phi3(x, xi) - 1.0; });
}

double lambda_integrand(const ModelSpec& model, const ChangeSpec& change, const Vec& x) {
  const Vec phi = change.checked_phi1(x);
  const double quad = 0.5 * phi.dot(model.diffusion(x) * phi);
  const double kill = entropy_l(change.checked_phi2(x)) * model.killing(x);
  return quad + kill + change.entropy3(x);
}

ConditionScan scan_sufficient_conditions(const ModelSpec& model, const ChangeSpec& change, int n,
                                         std::span<const Vec> grid) {
  if (grid.empty()) throw ParameterError("condition scan needs a nonempty grid");
  ConditionScan out;
  bool first = true;
  for (const Vec& x : grid) {
    if (!change.in_exhaustion(n, x)) throw DomainError("grid point " + format_state(x) + " outside U^n");
    const Vec phi = change.checked_phi1(x);
    const double d = phi.dot(model.diffusion(x) * phi);
    const double k = entropy_l(change.checked_phi2(x)) * model.killing(x);
    const double j = change.entropy3(x);
    if (first || d > out.diffusion_max) out.diffusion_max = d, out.diffusion_argmax = x;
    if (first || k > out.killing_max) out.killing_max = k, out.killing_argmax = x;
    if (first || j > out.jump_max) out.jump_max = j, out.jump_argmax = x;
    first = false;
  }
  return out;
}

std::vector<ExhaustionScanRow> scan_exhaustion(const ModelSpec& model, const ChangeSpec& change,
                                               std::span<const int> levels, int points, double growth_flag) {
  if (model.dim() != 1) throw ParameterError("exhaustion scan grids are scalar");
  if (points < 1) throw ParameterError("exhaustion scan needs at least one point per level");
  std::vector<ExhaustionScanRow> rows;
  for (int n : levels) {
    const double lo = 1.0 / n;
    const double hi = static_cast<double>(n);
    std::vector<Vec> grid;
    grid.reserve(points);
    for (int i = 0; i < points; ++i) grid.push_back(scalar_vec(lo + (i + 0.5) * (hi - lo) / points));
    ExhaustionScanRow row;
    row.n = n;
    row.maxima = scan_sufficient_conditions(model, change, n, grid);
    if (!rows.empty()) {
      const auto& prev = rows.back().maxima;
      const auto ratio = [](double now, double before) {
        if (before > 0.0) return now / before;
        return now > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
      };
      row.growth = std::max({ratio(row.maxima.diffusion_max, prev.diffusion_max),
                             ratio(row.maxima.killing_max, prev.killing_max),
                             ratio(row.maxima.jump_max, prev.jump_max)});
      row.diverging = row.growth > growth_flag;
    } else {
      row.growth = 1.0;
    }
    rows.push_back(row);
  }
  return rows;
}

double FieldDifference::max() const { return std::max({drift, diffusion, killing, intensity, jump_density}); }

FieldDifference compare_fields(const ModelSpec& a, const ModelSpec& b, const Vec& x, std::span<const Vec> xis) {
  const auto rel = [](double u, double v) { return std::abs(u - v) / std::max(1.0, std::abs(v)); };
  FieldDifference d;
  const Vec da = a.drift(x), db = b.drift(x);
  for (int i = 0; i < da.size(); ++i) d.drift = std::max(d.drift, rel(da[i], db[i]));
  const Mat aa = a.diffusion(x), ab = b.diffusion(x);
  for (int i = 0; i < aa.rows(); ++i)
    for (int j = 0; j < aa.cols(); ++j) d.diffusion = std::max(d.diffusion, rel(aa(i, j), ab(i, j)));
  d.killing = rel(a.killing(x), b.killing(x));
  const double la = a.jumps.active() ? a.jumps.intensity(x) : 0.0;
  const double lb = b.jumps.active() ? b.jumps.intensity(x) : 0.0;
  d.intensity = rel(la, lb);
  if (a.jumps.density && b.jumps.density)
    for (const Vec& xi : xis) d.jump_density = std::max(d.jump_density, rel(a.jumps.density(x, xi), b.jumps.density(x, xi)));
  return d;
}

}  // namespace jd
