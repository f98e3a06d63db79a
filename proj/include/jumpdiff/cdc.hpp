#pragma once

#include "jumpdiff/model.hpp"
#include "jumpdiff/numgen.hpp"
#include "jumpdiff/sim.hpp"

#include <vector>

namespace jd {

/// h in C^2_c(E) together with an upper bound on h (used to bound phi3 for
/// sampling) and H = e^h - 1 with derivatives taken from those of h.
class HFunction {
 public:
  HFunction(TestFunction h, double sup_bound);
  /// amplitude * bump; sup bound max(amplitude, 0).
  static HFunction bump(double center, double radius, double amplitude, int order = 3);
  static HFunction zero(int dim);

  const TestFunction& h() const { return h_; }
  /// H = e^h - 1, gradient e^h grad h, Hessian e^h (Hess h + grad h grad h^T).
  const TestFunction& big_h() const { return big_h_; }
  double sup_bound() const { return sup_; }
  double value(const Vec& x) const { return h_.value(x); }
  double value(const State& s) const { return h_.value(s); }

 private:
  TestFunction h_;
  TestFunction big_h_;
  double sup_;
};

/// <alpha grad f, grad g> + gamma f g + int (f(x+xi) - f(x)) (g(x+xi) - g(x)) mu(x, d xi).
double gamma_explicit(const ModelSpec& model, const TestFunction& f, const TestFunction& g, const Vec& x);

/// A(fg) - f Ag - g Af with the product's derivatives from the Leibniz rule.
double gamma_via_generator(const ModelSpec& model, const TestFunction& f, const TestFunction& g, const Vec& x);

/// phi1 = grad h, phi2 = e^{-h}, phi3(x, xi) = e^{h(x+xi) - h(x)} on U = E with
/// U^n = E-points of norm < n. kappa and ell3 use the model's jump integrator.
ChangeSpec change_from_h(const HFunction& h, const ModelSpec& model);

/// D_t = exp(h(X_t) - h(X_0) - sum_k (AH e^{-h})(X_k) dt_k) on the path grid,
/// with h(cemetery) = 0 and dt_k cut at the killing time.
std::vector<double> explicit_density(const HFunction& h, const PathRecord& path, const ModelSpec& model);

/// Af(x) + Gamma(H, f)(x) e^{-h(x)}.
double tilde_generator_cdc(const ModelSpec& model, const HFunction& h, const TestFunction& f, const Vec& x);

}  // namespace jd
