#include "jumpdiff/numgen.hpp"

#include <algorithm>
#include <cmath>

namespace jd {

struct TestFunction::Impl {
  int dim = 1;
  std::string name;
  double support = kNever;
  double fd_step = kDefaultFdStep;
  Value f;
  Gradient grad;
  Hessian hess;
  bool closed_form = false;
  // Scalar piecewise-polynomial form: f = sum of pieces, with derivative pieces.
  std::vector<PolyPiece> p0, p1, p2;
  std::vector<double> kinks;
  // Sorted piece ends (polynomial form) or declared kinks, cached.
  std::vector<double> breaks;

  bool has_pieces() const { return !p0.empty(); }

  static double sum(const std::vector<PolyPiece>& ps, double y) {
    double acc = 0.0;
    for (const auto& p : ps) acc += p(y);
    return acc;
  }

  void derive_pieces() {
    p1.clear();
    p2.clear();
    for (const auto& p : p0) {
      PolyPiece d = p;
      d.poly = p.poly.derivative();
      p1.push_back(d);
      d.poly = d.poly.derivative();
      p2.push_back(d);
    }
  }

  void cache_breaks() {
    breaks = kinks;
    for (const auto& p : p0) {
      breaks.push_back(p.lo);
      breaks.push_back(p.hi);
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  }

  void bind_piece_evaluators() {
    closed_form = true;
    cache_breaks();
    const Impl* self = this;
    f = [self](const Vec& x) { return sum(self->p0, x[0]); };
    grad = [self](const Vec& x) { return scalar_vec(sum(self->p1, x[0])); };
    hess = [self](const Vec& x) {
      Mat h(1, 1);
      h(0, 0) = sum(self->p2, x[0]);
      return h;
    };
  }
};

namespace {

Vec central_gradient(const TestFunction::Value& f, const Vec& x, double h) {
  Vec g(x.size());
  Vec y = x;
  for (int i = 0; i < x.size(); ++i) {
    y[i] = x[i] + h;
    const double up = f(y);
    y[i] = x[i] - h;
    const double dn = f(y);
    y[i] = x[i];
    g[i] = (up - dn) / (2.0 * h);
  }
  return g;
}

Mat central_hessian(const TestFunction::Value& f, const Vec& x, double h) {
  const int d = x.size();
  Mat m(d, d);
  const double f0 = f(x);
  Vec y = x;
  for (int i = 0; i < d; ++i) {
    y[i] = x[i] + h;
    const double up = f(y);
    y[i] = x[i] - h;
    const double dn = f(y);
    y[i] = x[i];
    m(i, i) = (up - 2.0 * f0 + dn) / (h * h);
    for (int j = 0; j < i; ++j) {
      double acc = 0.0;
      for (int si = -1; si <= 1; si += 2)
        for (int sj = -1; sj <= 1; sj += 2) {
          y[i] = x[i] + si * h;
          y[j] = x[j] + sj * h;
          acc += si * sj * f(y);
        }
      y[i] = x[i];
      y[j] = x[j];
      m(i, j) = m(j, i) = acc / (4.0 * h * h);
    }
  }
  return m;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TestFunction TestFunction::generic(int dim, Value f, Gradient grad, Hessian hess, double support_radius,
                                   double fd_step, std::string name, std::vector<double> kinks) {
  if (dim < 1 || dim > kMaxDim) throw ParameterError("test function dimension out of range");
  if (!f) throw ParameterError("test function needs an evaluator");
  if (!(fd_step > 0.0)) throw ParameterError("finite-difference step must be positive");
  auto impl = std::make_shared<Impl>();
  impl->dim = dim;
  impl->name = std::move(name);
  impl->support = support_radius;
  impl->fd_step = fd_step;
  impl->kinks = std::move(kinks);
  impl->closed_form = grad && hess;
  impl->f = std::move(f);
  const Value fv = impl->f;
  impl->grad = grad ? std::move(grad) : Gradient([fv, fd_step](const Vec& x) { return central_gradient(fv, x, fd_step); });
  impl->hess = hess ? std::move(hess) : Hessian([fv, fd_step](const Vec& x) { return central_hessian(fv, x, fd_step); });
  impl->cache_breaks();
  return TestFunction(impl);
}

TestFunction TestFunction::bump(double center, double radius, double amplitude, int order) {
  if (!(radius > 0.0) || !std::isfinite(center)) throw ParameterError("bump needs a finite center and positive radius");
  if (order < 3 || 2 * order + 1 > kMaxPolyCoeffs) throw ParameterError("bump order must be in [3, 11]");
  auto impl = std::make_shared<Impl>();
  impl->dim = 1;
  impl->name = "bump(" + std::to_string(center) + "," + std::to_string(radius) + ")";
  impl->support = std::abs(center) + radius;
  PolyPiece piece;
  piece.lo = center - radius;
  piece.hi = center + radius;
  piece.center = center;
  piece.poly.size = 2 * order + 1;
  for (int j = 0; j <= order; ++j)
    piece.poly.c[2 * j] = amplitude * binomial(order, j) * ((j % 2) ? -1.0 : 1.0) / std::pow(radius, 2 * j);
  impl->p0.push_back(piece);
  impl->derive_pieces();
  impl->bind_piece_evaluators();
  return TestFunction(impl);
}

TestFunction TestFunction::zero(int dim) {
  return generic(
      dim, [](const Vec&) { return 0.0; }, [dim](const Vec&) { return Vec::Zero(dim).eval(); },
      [dim](const Vec&) { return Mat::Zero(dim, dim).eval(); }, 0.0, kDefaultFdStep, "zero");
}

TestFunction TestFunction::product(const TestFunction& a, const TestFunction& b) {
  if (a.dim() != b.dim()) throw ParameterError("product of test functions of different dimension");
  auto impl = std::make_shared<Impl>();
  impl->dim = a.dim();
  impl->name = a.name() + "*" + b.name();
  impl->support = std::min(a.support_radius(), b.support_radius());
  impl->fd_step = std::min(a.impl_->fd_step, b.impl_->fd_step);
  if (a.impl_->has_pieces() && b.impl_->has_pieces()) {
    for (const auto& pa : a.impl_->p0)
      for (const auto& pb : b.impl_->p0) {
        PolyPiece p;
        p.lo = std::max(pa.lo, pb.lo);
        p.hi = std::min(pa.hi, pb.hi);
        if (!(p.hi > p.lo)) continue;
        p.center = pa.center;
        p.poly = pa.poly * pb.poly.shifted(pa.center - pb.center);
        impl->p0.push_back(p);
      }
    if (impl->p0.empty()) return zero(a.dim());
    impl->derive_pieces();
    impl->bind_piece_evaluators();
    return TestFunction(impl);
  }
  const auto fa = a.impl_, fb = b.impl_;
  impl->kinks = a.kinks();
  for (double k : b.kinks()) impl->kinks.push_back(k);
  impl->closed_form = fa->closed_form && fb->closed_form;
  impl->f = [fa, fb](const Vec& x) { return fa->f(x) * fb->f(x); };
  impl->grad = [fa, fb](const Vec& x) { return (fa->f(x) * fb->grad(x) + fb->f(x) * fa->grad(x)).eval(); };
  impl->hess = [fa, fb](const Vec& x) {
    const Vec ga = fa->grad(x), gb = fb->grad(x);
    return (fa->f(x) * fb->hess(x) + fb->f(x) * fa->hess(x) + ga * gb.transpose() + gb * ga.transpose()).eval();
  };
  impl->cache_breaks();
  return TestFunction(impl);
}

TestFunction TestFunction::combination(double ca, const TestFunction& a, double cb, const TestFunction& b) {
  if (a.dim() != b.dim()) throw ParameterError("combination of test functions of different dimension");
  auto impl = std::make_shared<Impl>();
  impl->dim = a.dim();
  impl->name = "lin(" + a.name() + "," + b.name() + ")";
  impl->support = std::max(a.support_radius(), b.support_radius());
  impl->fd_step = std::min(a.impl_->fd_step, b.impl_->fd_step);
  if (a.impl_->has_pieces() && b.impl_->has_pieces()) {
    for (auto p : a.impl_->p0) {
      p.poly = p.poly.scaled(ca);
      impl->p0.push_back(p);
    }
    for (auto p : b.impl_->p0) {
      p.poly = p.poly.scaled(cb);
      impl->p0.push_back(p);
    }
    impl->derive_pieces();
    impl->bind_piece_evaluators();
    return TestFunction(impl);
  }
  const auto fa = a.impl_, fb = b.impl_;
  impl->kinks = a.kinks();
  for (double k : b.kinks()) impl->kinks.push_back(k);
  impl->closed_form = fa->closed_form && fb->closed_form;
  impl->f = [=](const Vec& x) { return ca * fa->f(x) + cb * fb->f(x); };
  impl->grad = [=](const Vec& x) { return (ca * fa->grad(x) + cb * fb->grad(x)).eval(); };
  impl->hess = [=](const Vec& x) { return (ca * fa->hess(x) + cb * fb->hess(x)).eval(); };
  impl->cache_breaks();
  return TestFunction(impl);
}

int TestFunction::dim() const { return impl_->dim; }
const std::string& TestFunction::name() const { return impl_->name; }
double TestFunction::support_radius() const { return impl_->support; }
bool TestFunction::has_closed_form_derivatives() const { return impl_->closed_form; }

double TestFunction::value(const Vec& x) const { return impl_->f(x); }
Vec TestFunction::gradient(const Vec& x) const { return impl_->grad(x); }
Mat TestFunction::hessian(const Vec& x) const { return impl_->hess(x); }
Vec TestFunction::fd_gradient(const Vec& x) const { return central_gradient(impl_->f, x, impl_->fd_step); }
Mat TestFunction::fd_hessian(const Vec& x) const { return central_hessian(impl_->f, x, impl_->fd_step); }

std::span<const PolyPiece> TestFunction::pieces() const { return impl_->p0; }

std::vector<double> TestFunction::kinks() const { return impl_->breaks; }

JumpIntegrand TestFunction::jump_increment(const Vec& x) const {
  const Impl* impl = impl_.get();
  const double fx = impl->f(x);
  JumpIntegrand g;
  if (impl->has_pieces()) {
    g.poly = PolyIntegrand{impl->p0, x[0], -fx};
  } else {
    g.fn = [impl, x, fx](const Vec& xi) { return impl->f(x + xi) - fx; };
  }
  if (impl->dim == 1)
    for (double k : impl->breaks) g.add_break(k - x[0]);
  return g;
}

namespace {

struct Coefficients {
  Mat alpha;
  Vec beta;
  double gamma;
};

Coefficients coefficients_at(const ModelSpec& model, const Vec& x) {
  return {model.diffusion(x), model.drift(x), model.killing(x)};
}

double generator_with(const ModelSpec& model, const Coefficients& c, const TestFunction& f, const Vec& x) {
  double out = 0.5 * c.alpha.cwiseProduct(f.hessian(x)).sum() + c.beta.dot(f.gradient(x)) - c.gamma * f.value(x);
  if (model.jumps.active()) out += model.jumps.integrate(x, f.jump_increment(x));
  return out;
}

}  // namespace

double apply_generator(const ModelSpec& model, const TestFunction& f, const Vec& x) {
  if (!model.space.contains(x)) throw DomainError("generator applied outside E at " + format_state(x));
  return generator_with(model, coefficients_at(model, x), f, x);
}

std::vector<double> martingale_increments(const ModelSpec& model, std::span<const TestFunction> fs,
                                          const PathRecord& path, double t) {
  std::vector<double> acc(fs.size(), 0.0);
  const double tau = path.killing_time;
  for (std::size_t k = 0; k < path.steps(); ++k) {
    const double t0 = path.times[k];
    if (t0 >= t - 1e-12 * path.dt) break;
    const double dur = std::min({path.times[k + 1], tau, t}) - t0;
    if (dur <= 0.0) break;
    const Vec& x = path.states[k].point();
    if (!model.space.contains(x)) throw DomainError("generator applied outside E at " + format_state(x));
    const Coefficients c = coefficients_at(model, x);
    for (std::size_t i = 0; i < fs.size(); ++i) acc[i] += generator_with(model, c, fs[i], x) * dur;
  }
  const bool dead = tau <= t;
  const State& end = path.state_at(t);
  const Vec& x0 = path.states.front().point();
  std::vector<double> out(fs.size());
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const double ft = dead ? 0.0 : fs[i].value(end);
    out[i] = ft - fs[i].value(x0) - acc[i];
  }
  return out;
}

double martingale_increment(const ModelSpec& model, const TestFunction& f, const PathRecord& path, double t) {
  return martingale_increments(model, std::span<const TestFunction>(&f, 1), path, t).front();
}

}  // namespace jd
