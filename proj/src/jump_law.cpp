#include "jumpdiff/jump_law.hpp"

#include "jumpdiff/types.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace jd {

namespace {

double gauss_piece(const std::function<double(double)>& h, double a, double b) {
  return boost::math::quadrature::gauss<double, 20>::integrate(h, a, b);
}

}  // namespace

JumpLaw JumpLaw::exponential(double mean) {
  if (!(mean > 0.0) || !std::isfinite(mean)) throw ParameterError("exponential jump law needs a positive finite mean");
  return {Kind::exponential, mean};
}

JumpLaw JumpLaw::point_mass(double at) {
  if (!(at > 0.0) || !std::isfinite(at)) throw ParameterError("point-mass jump law needs a positive finite location");
  return {Kind::point_mass, at};
}

std::string JumpLaw::describe() const {
  std::ostringstream os;
  os << (kind_ == Kind::exponential ? "exponential(mean=" : "point_mass(at=") << param_ << ")";
  return os.str();
}

double JumpLaw::mean() const { return param_; }

double JumpLaw::laplace(double rho) const {
  if (kind_ == Kind::exponential) return 1.0 / (1.0 + rho * param_);
  return std::exp(-rho * param_);
}

double JumpLaw::tilted_first_moment(double rho) const {
  if (kind_ == Kind::exponential) {
    const double k = 1.0 + rho * param_;
    return param_ / (k * k);
  }
  return param_ * std::exp(-rho * param_);
}

JumpLaw JumpLaw::tilted(double rho) const {
  if (kind_ == Kind::exponential) return exponential(param_ / (1.0 + rho * param_));
  return *this;
}

double JumpLaw::sample(Engine& eng) const {
  if (kind_ == Kind::point_mass) return param_;
  std::exponential_distribution<double> dist(1.0 / param_);
  return dist(eng);
}

double JumpLaw::density(double xi) const {
  if (kind_ == Kind::exponential) return xi > 0.0 ? std::exp(-xi / param_) / param_ : 0.0;
  return xi == param_ ? 1.0 : 0.0;
}

double JumpLaw::integrate_piece(const PolyPiece& piece, double shift) const {
  // piece(xi + shift) is supported on xi in (lo - shift, hi - shift) and equals
  // poly(xi - xc) there, with xc = center - shift.
  const double xc = piece.center - shift;
  const double a = std::max(piece.lo - shift, 0.0);
  const double b = piece.hi - shift;
  if (!(b > a)) return 0.0;

  if (kind_ == Kind::point_mass) {
    return (param_ > a && param_ < b) ? piece.poly(param_ - xc) : 0.0;
  }

  // Re-expand at a: q(a + s) = sum_j d_j s^j, so with x = (b - a) / eta
  //   int_a^b q(xi) e^{-xi/eta}/eta dxi = e^{-a/eta} sum_j d_j eta^j j! P(j+1, x),
  // P the regularized lower incomplete gamma. Every term is bounded by the
  // size of q on [a, b], so nothing cancels the way R(a) e^{-a/eta} - R(b) e^{-b/eta} does.
  const double eta = param_;
  const Poly d = piece.poly.shifted(a - xc);
  const int size = d.size;
  const double x = (b - a) / eta;
  double p[kMaxPolyCoeffs];
  if (!std::isfinite(x)) {
    std::fill(p, p + size, 1.0);
  } else if (x > 40.0 + size) {
    // 1 - e^{-x} sum_{k<=j} x^k/k!; the sum is negligible against e^x.
    double term = std::exp(-x), acc = 0.0;
    for (int j = 0; j < size; ++j) {
      if (j > 0) term *= x / j;
      acc += term;
      p[j] = 1.0 - acc;
    }
  } else {
    // e^{-x} sum_{k>j} x^k/k!, tail summed from the top.
    const int top = static_cast<int>(std::ceil(x + 10.0 * std::sqrt(x + 1.0))) + 30;
    double terms[256];
    const int last = std::min(top, 255);
    terms[0] = std::exp(-x);
    for (int k = 1; k <= last; ++k) terms[k] = terms[k - 1] * x / k;
    double tail = 0.0;
    for (int k = last; k >= 1; --k) {
      tail += terms[k];
      if (k - 1 < size) p[k - 1] = tail;
    }
  }
  double acc = 0.0, w = 1.0;
  for (int j = 0; j < size; ++j) {
    if (j > 0) w *= eta * j;
    acc += d.c[j] * w * p[j];
  }
  return std::exp(-a / eta) * acc;
}

double JumpLaw::integrate(const PolyIntegrand& g) const {
  double acc = g.constant;
  for (const auto& piece : g.pieces) acc += integrate_piece(piece, g.shift);
  return acc;
}

double JumpLaw::integrate(const std::function<double(double)>& g, std::span<const double> breaks) const {
  if (kind_ == Kind::point_mass) return g(param_);

  const double eta = param_;
  std::vector<double> cuts;
  cuts.reserve(breaks.size() + 1);
  cuts.push_back(0.0);
  for (double b : breaks)
    if (b > 0.0 && std::isfinite(b)) cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  double acc = 0.0;
  const auto weighted = [&](double xi) { return g(xi) * std::exp(-xi / eta) / eta; };
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    // Split long pieces so the exponential weight stays well resolved.
    const double a = cuts[i];
    const double b = cuts[i + 1];
    const int panels = std::clamp(static_cast<int>(std::ceil((b - a) / eta)), 1, 64);
    const double w = (b - a) / panels;
    for (int p = 0; p < panels; ++p) acc += gauss_piece(weighted, a + p * w, a + (p + 1) * w);
  }

  // Tail [c, inf): xi = c + eta s, integrand g(c + eta s) e^{-s} e^{-c/eta} ds.
  const double c = cuts.back();
  const double tail_mass = std::exp(-c / eta);
  if (tail_mass > 0.0) {
    thread_local boost::math::quadrature::exp_sinh<double> tail_rule;
    const auto mapped = [&](double s) {
      const double e = std::exp(-s);
      return e == 0.0 ? 0.0 : g(c + eta * s) * e;
    };
    acc += tail_mass * tail_rule.integrate(mapped, 1e-13);
  }
  return acc;
}

}  // namespace jd
