#pragma once

#include "jumpdiff/model.hpp"
#include "jumpdiff/poly.hpp"
#include "jumpdiff/sim.hpp"
#include "jumpdiff/types.hpp"

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace jd {

inline constexpr double kDefaultFdStep = 1e-4;

/// Compactly supported C^2 test function with f(cemetery) = 0. Scalar functions
/// built from bumps also carry a piecewise-polynomial form, which makes their
/// jump integrals exact.
class TestFunction {
 public:
  using Value = std::function<double(const Vec&)>;
  using Gradient = std::function<Vec(const Vec&)>;
  using Hessian = std::function<Mat(const Vec&)>;

  /// User function. Missing derivatives fall back to central differences with
  /// step `fd_step`. `kinks` lists scalar points where f is not smooth enough
  /// for plain Gauss quadrature (support ends of bump-built functions).
  static TestFunction generic(int dim, Value f, Gradient grad = {}, Hessian hess = {}, double support_radius = kNever,
                              double fd_step = kDefaultFdStep, std::string name = "generic",
                              std::vector<double> kinks = {});
  /// amplitude * (1 - (y - center)^2 / radius^2)^order on |y - center| < radius.
  /// order >= 3 gives a C^2 function.
  static TestFunction bump(double center, double radius, double amplitude = 1.0, int order = 3);
  static TestFunction zero(int dim);
  /// Pointwise product with Leibniz-rule derivatives.
  static TestFunction product(const TestFunction& f, const TestFunction& g);
  /// a f + b g.
  static TestFunction combination(double a, const TestFunction& f, double b, const TestFunction& g);

  int dim() const;
  const std::string& name() const;
  double support_radius() const;
  bool has_closed_form_derivatives() const;

  double value(const Vec& x) const;
  double value(const State& s) const { return s.is_cemetery() ? 0.0 : value(s.point()); }
  Vec gradient(const Vec& x) const;
  Mat hessian(const Vec& x) const;
  Vec fd_gradient(const Vec& x) const;
  Mat fd_hessian(const Vec& x) const;

  /// Integrand xi -> f(x + xi) - f(x), with an exact polynomial form when one
  /// is available. Valid while this function is alive.
  JumpIntegrand jump_increment(const Vec& x) const;
  std::span<const PolyPiece> pieces() const;
  /// Piece ends for polynomial functions, declared kinks otherwise.
  std::vector<double> kinks() const;

 private:
  struct Impl;
  explicit TestFunction(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

/// 1/2 tr(alpha Hess f) + <beta, grad f> - gamma f + int (f(x + xi) - f(x)) mu(x, d xi).
double apply_generator(const ModelSpec& model, const TestFunction& f, const Vec& x);

/// M^f_t = f(X_t) - f(X_0) - sum_k Af(X_k) dt_k, where dt_k is the part of step
/// k before death (so the last living step of a killed path is cut at the
/// killing time). The path is read as stopped at its last record.
double martingale_increment(const ModelSpec& model, const TestFunction& f, const PathRecord& path, double t);

/// Residuals of several functions under one generator, in one pass over the path.
std::vector<double> martingale_increments(const ModelSpec& model, std::span<const TestFunction> fs,
                                          const PathRecord& path, double t);

}  // namespace jd
