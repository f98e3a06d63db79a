#pragma once

#include "jumpdiff/jump_law.hpp"
#include "jumpdiff/model.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace jd {

/// Jump reweighting factor scale * exp(-rate * xi), rate >= 0 (rate 0 gives a
/// constant).
struct ExpWeight {
  double scale = 0.0;
  double rate = 0.0;

  double operator()(double xi) const { return rate == 0.0 ? scale : scale * std::exp(-rate * xi); }
};

/// CIR diffusion with compound Poisson jumps and constant killing (P), and the
/// affine-coefficient counterpart (Q):
///   P: drift b0 + b1 x, alpha = sigma^2 x, jumps lambda m(d xi), killing gamma
///   Q: drift b0t + b1t x, killing g0t + g1t x, jumps (m0(xi) + m1(xi) x) lambda m(d xi).
struct CirJumpParams {
  double b0 = 0.5;
  double b1 = -1.0;
  double sigma = 1.0;
  double lambda = 1.0;
  JumpLaw m = JumpLaw::exponential(0.5);
  double gamma = 0.2;
  double y0 = 1.0;

  double b0t = 0.5;
  double b1t = -1.0;
  double g0t = 0.2;
  double g1t = 0.0;
  ExpWeight m0{1.0, 0.0};
  ExpWeight m1{0.0, 0.0};

  /// Every violated constraint, one message each (empty when valid).
  std::vector<std::string> problems() const;
  /// Throws ParameterError listing problems().
  void validate() const;

  /// c0 = int m0 dm, c1 = int m1 dm, j0 = int xi m0 dm, j1 = int xi m1 dm.
  double c0() const;
  double c1() const;
  double j0() const;
  double j1() const;
};

enum class Side { P, Q };

bool feller_ok(double b0, double sigma);

ModelSpec p_model(const CirJumpParams& p);
/// Jump kernel as an exact mixture: lambda s_i L(rho_i) x^i times the law m
/// tilted by rho_i, so sampling needs no rejection step.
ModelSpec q_model(const CirJumpParams& p);
/// U = (0, inf), U^n = (1/n, n); phi3 = m0 + m1 x for xi > 0 and 1 otherwise.
ChangeSpec change_spec(const CirJumpParams& p);

/// Mean on survival, from the linear ODE y' = A + B y. Q side needs g1t = 0.
double mean_oracle(const CirJumpParams& p, Side side, double t);
/// exp(-gamma t) or exp(-g0t t). Q side needs g1t = 0.
double survival_oracle(const CirJumpParams& p, Side side, double t);
/// Upper bound of the Q jump intensity on (0, xmax].
double thinning_bound(const CirJumpParams& p, double xmax);

}  // namespace jd
