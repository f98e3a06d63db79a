#pragma once

#include "jumpdiff/jump_law.hpp"
#include "jumpdiff/poly.hpp"
#include "jumpdiff/rng.hpp"
#include "jumpdiff/types.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace jd {

/// Closed state space E inside R^d, plus the rule that maps a raw Euler update
/// back onto E.
struct StateSpace {
  int dim = 1;
  std::function<bool(const Vec&)> contains;
  std::function<Vec(const Vec&)> project;

  static StateSpace whole_space(int dim);
  /// E = [0, inf), projection x -> max(x, 0).
  static StateSpace half_line();
};

/// Integrand g(xi) handed to a jump kernel. Scalar integrands may also carry an
/// exact polynomial form and a list of kink locations for quadrature.
struct JumpIntegrand {
  static constexpr int kMaxBreaks = 8;

  std::function<double(const Vec&)> fn;
  std::optional<PolyIntegrand> poly;
  std::array<double, kMaxBreaks> breaks{};
  int n_breaks = 0;

  /// g(xi), from `fn` or else from the polynomial form.
  double operator()(const Vec& xi) const {
    if (fn) return fn(xi);
    double acc = poly->constant;
    for (const auto& p : poly->pieces) acc += p(xi[0] + poly->shift);
    return acc;
  }

  void add_break(double b) {
    if (n_breaks < kMaxBreaks) breaks[n_breaks++] = b;
  }
  std::span<const double> break_span() const { return {breaks.data(), static_cast<std::size_t>(n_breaks)}; }
};

/// Component of an affine mixture kernel: intensity (weight0 + weight1 * x)
/// with jump sizes drawn from `law`.
struct MixtureComponent {
  double weight0 = 0.0;
  double weight1 = 0.0;
  JumpLaw law;
};

/// Finite-activity jump kernel mu(x, d xi) = intensity(x) * law(x, d xi).
struct JumpKernel {
  using Intensity = std::function<double(const Vec&)>;
  using Sampler = std::function<Vec(const Vec&, Engine&)>;
  using Integrator = std::function<double(const Vec&, const JumpIntegrand&)>;
  using Density = std::function<double(const Vec&, const Vec&)>;

  Intensity intensity;
  /// Draws xi from the normalized law at x.
  Sampler sample;
  /// int g(xi) mu(x, d xi), intensity included.
  Integrator integrate;
  /// Density of mu(x, .) w.r.t. a fixed reference measure (optional).
  Density density;
  bool constant_intensity = false;
  std::string integration_note;

  bool active() const { return static_cast<bool>(intensity); }

  static JumpKernel none();
  /// Scalar kernel sum_i (w0_i + w1_i x) law_i(d xi); all integrals closed form
  /// or deterministic quadrature.
  static JumpKernel affine_mixture(std::vector<MixtureComponent> components);
  /// User kernel whose integrals fall back to fixed-seed Monte Carlo on the
  /// sampler with a declared sample count.
  static JumpKernel with_monte_carlo(Intensity intensity, Sampler sampler, std::size_t samples = 100000,
                                     std::uint64_t seed = 0x5eed);
};

/// Generator specification: diffusion matrix alpha, drift beta, killing rate
/// gamma and jump kernel mu. The jump part is parametrized without truncation
/// (f(x + xi) - f(x)), which is exact for finite-activity kernels.
struct ModelSpec {
  std::string name;
  StateSpace space;
  std::function<Mat(const Vec&)> diffusion;
  std::function<Vec(const Vec&)> drift;
  std::function<double(const Vec&)> killing;
  JumpKernel jumps;

  int dim() const { return space.dim; }
  /// Checks alpha symmetric PSD and gamma >= 0 at x; throws ParameterError.
  void check_at(const Vec& x) const;
};

/// Measure change (phi1, phi2, phi3) on an open set U with exhaustion U^n, plus
/// the jump-compensator difference kappa(x) = int (phi3 - 1) mu(x, d xi) and the
/// entropy integral ell3(x) = int l(phi3) mu(x, d xi).
struct ChangeSpec {
  std::string name;
  std::function<bool(const Vec&)> in_domain;
  std::function<bool(int, const Vec&)> in_exhaustion;
  std::function<Vec(const Vec&)> phi1;
  std::function<double(const Vec&)> phi2;
  std::function<double(const Vec&, const Vec&)> phi3;
  std::function<double(const Vec&)> kappa;
  std::function<double(const Vec&)> entropy3;
  /// Optional sup over xi of phi3(x, xi); needed to sample the reweighted kernel.
  std::function<double(const Vec&)> phi3_bound;
  /// Optional: record kinks of xi -> phi3(x, xi) for quadrature.
  std::function<void(const Vec&, JumpIntegrand&)> phi3_breaks;

  /// Checked evaluators: DomainError outside U, PositivityError on values <= 0.
  Vec checked_phi1(const Vec& x) const;
  double checked_phi2(const Vec& x) const;
  double checked_phi3(const Vec& x, const Vec& xi) const;
  void require_domain(const Vec& x) const;

  static ChangeSpec identity(int dim, std::function<bool(const Vec&)> domain,
                             std::function<bool(int, const Vec&)> exhaustion);
  /// Builds kappa and ell3 from the model's jump integrator.
  static ChangeSpec from_fields(const ModelSpec& model, std::string name, std::function<bool(const Vec&)> domain,
                                std::function<bool(int, const Vec&)> exhaustion, std::function<Vec(const Vec&)> phi1,
                                std::function<double(const Vec&)> phi2,
                                std::function<double(const Vec&, const Vec&)> phi3);
};

/// U = (0, inf) with U^n = (1/n, n).
std::function<bool(const Vec&)> positive_open_domain();
std::function<bool(int, const Vec&)> reciprocal_exhaustion();
/// U^n = E-points with norm < n.
std::function<bool(int, const Vec&)> ball_exhaustion();

/// Factor L with L L^T = alpha. Cholesky when alpha is positive definite,
/// symmetric square root otherwise. Throws SimulationError if alpha is not PSD.
Mat psd_factor(const Mat& alpha);

/// l(u) = u log u - u + 1 with l(0) = 1. Stable near u = 1.
double entropy_l(double u);

/// Transformed model: drift beta + alpha phi1, killing phi2 gamma, jump kernel
/// phi3 mu (intensity lambda + kappa, sampler by acceptance-rejection against
/// phi3_bound). Evaluators throw DomainError outside U.
ModelSpec transform_model(const ModelSpec& model, const ChangeSpec& change);

/// chi(xi) = xi * min(1, 1/|xi|).
Vec truncation_chi(const Vec& xi);
/// Drift of the same generator written with the compensating term
/// <grad f, chi(xi)> inside the jump integral: beta + int chi(xi) mu(x, d xi).
Vec truncated_drift(const ModelSpec& model, const Vec& x);
/// int (phi3(x, xi) - 1) chi(xi) mu(x, d xi): the jump term of the drift
/// transformation in truncated form.
Vec chi_drift_correction(const ModelSpec& model, const ChangeSpec& change, const Vec& x);

/// 1/2 <alpha phi1, phi1> + l(phi2) gamma + ell3 at x in U.
double lambda_integrand(const ModelSpec& model, const ChangeSpec& change, const Vec& x);

/// Largest relative difference |a - b| / max(1, |b|) per field at one state.
struct FieldDifference {
  double drift = 0.0;
  double diffusion = 0.0;
  double killing = 0.0;
  double intensity = 0.0;
  double jump_density = 0.0;  // over the supplied jump sizes; 0 if either density is missing

  double max() const;
};

FieldDifference compare_fields(const ModelSpec& a, const ModelSpec& b, const Vec& x, std::span<const Vec> xis);

struct ConditionScan {
  double diffusion_max = 0.0;  // max <alpha phi1, phi1>
  double killing_max = 0.0;    // max l(phi2) gamma
  double jump_max = 0.0;       // max ell3
  Vec diffusion_argmax, killing_argmax, jump_argmax;
};

/// Maxima of the three local-boundedness quantities over grid points of U^n.
ConditionScan scan_sufficient_conditions(const ModelSpec& model, const ChangeSpec& change, int n,
                                         std::span<const Vec> grid);

struct ExhaustionScanRow {
  int n = 0;
  ConditionScan maxima;
  /// Largest growth factor of any maximum relative to the previous level.
  double growth = 0.0;
  bool diverging = false;
};

/// Scans U^n for each n with a uniform grid of `points` points on the scalar
/// interval (1/n, n) (interior), flagging maxima that grow by more than
/// `growth_flag` between successive levels.
std::vector<ExhaustionScanRow> scan_exhaustion(const ModelSpec& model, const ChangeSpec& change,
                                               std::span<const int> levels, int points, double growth_flag = 10.0);

}  // namespace jd
