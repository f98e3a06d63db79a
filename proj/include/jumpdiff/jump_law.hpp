#pragma once

#include "jumpdiff/poly.hpp"
#include "jumpdiff/rng.hpp"

#include <functional>
#include <span>
#include <string>

namespace jd {

/// Named probability law of a scalar jump size on (0, inf). Every quantity the
/// library needs (moments, Laplace transform, polynomial integrals, exponential
/// tilts) is available in closed form.
class JumpLaw {
 public:
  enum class Kind { exponential, point_mass };

  static JumpLaw exponential(double mean);
  static JumpLaw point_mass(double at);

  Kind kind() const { return kind_; }
  /// Mean of the exponential law, or location of the atom.
  double parameter() const { return param_; }
  std::string describe() const;

  double mean() const;
  /// E[exp(-rho xi)].
  double laplace(double rho) const;
  /// E[xi exp(-rho xi)].
  double tilted_first_moment(double rho) const;
  /// The law proportional to exp(-rho xi) m(d xi).
  JumpLaw tilted(double rho) const;

  double sample(Engine& eng) const;

  /// Lebesgue density for the exponential law; for the atom, 1 at the atom and
  /// 0 elsewhere (density w.r.t. counting measure).
  double density(double xi) const;

  /// Exact integral of a polynomial integrand against the law.
  double integrate(const PolyIntegrand& g) const;

  /// Deterministic quadrature of a generic integrand. `breaks` lists jump-size
  /// values where g is not smooth; the exponential law is integrated piecewise
  /// between them with Gauss-Legendre rules.
  double integrate(const std::function<double(double)>& g, std::span<const double> breaks = {}) const;

 private:
  JumpLaw(Kind k, double p) : kind_(k), param_(p) {}

  double integrate_piece(const PolyPiece& piece, double shift) const;

  Kind kind_;
  double param_;
};

}  // namespace jd
