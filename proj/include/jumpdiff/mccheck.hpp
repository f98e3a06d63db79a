#pragma once

#include "jumpdiff/cdc.hpp"
#include "jumpdiff/model.hpp"
#include "jumpdiff/numgen.hpp"
#include "jumpdiff/sim.hpp"
#include "jumpdiff/stats.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace jd {

namespace provenance {
inline constexpr const char* analytic = "analytic-oracle";
inline constexpr const char* q_simulation = "direct-Q-simulation";
inline constexpr const char* exact_zero = "exact-zero";
}  // namespace provenance

/// One verification. Two-sided checks pass iff |estimate - target| <= z se + epsilon.
/// One-sided and exact checks (supermartingale, positivity, identity, bounds)
/// report the violation measure as `estimate` against target 0 with se = 0 and
/// epsilon = 0, so the same rule applies.
struct CheckReport {
  std::string name;
  double estimate = 0.0;
  double se = 0.0;
  double target = 0.0;
  std::string provenance;
  double z = 3.0;
  double epsilon = 0.0;
  bool pass = false;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double runtime_ms = 0.0;
  std::string detail;

  void decide() { pass = std::abs(estimate - target) <= z * se + epsilon; }
};

/// Shared Monte Carlo settings. With `fit_epsilon`, each biased check is also
/// run on `fit_paths` coupled paths at dt (one extra Brownian refinement level)
/// and at dt/2, sharing seeds and Brownian paths; then
/// epsilon = 2 * extrapolated bias = 4 |e(dt) - e(dt/2)|.
struct CheckSettings {
  SimConfig sim;
  std::size_t paths = 100000;
  double z = 3.0;
  std::uint64_t seed = 1;
  int threads = 1;
  bool fit_epsilon = false;
  /// 0 selects max(paths / 10, min(paths, 1000)).
  std::size_t fit_paths = 0;

  std::size_t effective_fit_paths() const;
};

/// Runs `paths` paths of `model` from x0 and reduces `width` per-path values,
/// each column with a fixed pairwise tree. `fn` fills `out` (length width).
using PathFunctional = std::function<void(const PathRecord& path, double* out)>;

/// Raw per-path values, row-major (path, column).
struct PathSamples {
  std::size_t paths = 0;
  std::size_t width = 0;
  std::vector<double> values;

  Moments column(std::size_t j) const;
  std::vector<Moments> columns() const;
  /// Moments of this[:, j] - other[:, j] path by path.
  Moments paired_difference(const PathSamples& other, std::size_t j) const;
};

PathSamples collect_functionals(const ModelSpec& model, const Vec& x0, const SimConfig& cfg,
                                const ChangeSpec* stop_domain, std::size_t paths, std::uint64_t master_seed,
                                int threads, std::size_t width, const PathFunctional& fn);

std::vector<Moments> sample_functionals(const ModelSpec& model, const Vec& x0, const SimConfig& cfg,
                                        const ChangeSpec* stop_domain, std::size_t paths, std::uint64_t master_seed,
                                        int threads, std::size_t width, const PathFunctional& fn);

/// Survivor mass E_P[D_t 1{t < S_n} 1{X_t in E}]. Target: `oracle` when given,
/// otherwise direct simulation of `q_model` on an independent stream.
CheckReport density_mass_check(const ModelSpec& model, const ChangeSpec& change, const ModelSpec* q_model, int n,
                               const Vec& x0, double t, const CheckSettings& s,
                               std::optional<double> oracle = std::nullopt);

/// E_P[D_t f(X_t) 1{t < S_n}] against the oracle (if given) and against direct
/// Q simulation (if q_model is given). One report per target.
std::vector<CheckReport> reweighted_expectation_check(const ModelSpec& model, const ChangeSpec& change,
                                                      const ModelSpec* q_model, int n, const TestFunction& f,
                                                      const Vec& x0, double t, const CheckSettings& s,
                                                      std::optional<double> oracle = std::nullopt);

/// Mean of M^f_t under the model, one report per function.
std::vector<CheckReport> martingale_check(const ModelSpec& model, const std::vector<TestFunction>& fs, const Vec& x0,
                                          double t, const CheckSettings& s);

/// Mean of D M~^f over P paths stopped at S_n, where M~ uses `tilde_model`'s
/// generator. One report per function.
std::vector<CheckReport> girsanov_check(const ModelSpec& model, const ModelSpec& tilde_model,
                                        const ChangeSpec& change, int n, const std::vector<TestFunction>& fs,
                                        const Vec& x0, double t, const CheckSettings& s);

/// Mean of 1{tau <= t and before the cap} - int_0^{t, cap, tau} gamma(X_s) ds.
CheckReport killing_compensator_check(const ModelSpec& model, const Vec& x0, double t, const CheckSettings& s);

struct SupermartingaleResult {
  CheckReport report;
  std::vector<double> times;
  std::vector<Moments> means;
};

/// Means of D_{t_i} 1{t_i < S_n} on a time grid (all paths, or survivors only).
/// Passes when every mean is <= 1 + z se and every successive increase is
/// within z times the paired standard error.
SupermartingaleResult supermartingale_check(const ModelSpec& model, const ChangeSpec& change, int n, const Vec& x0,
                                            const std::vector<double>& times, const CheckSettings& s,
                                            bool survivors_only = false);

/// Paths with D0 > 0 and a grid time before S_n at which D is not strictly
/// positive (log D not finite). Target: 0 violations.
CheckReport positivity_check(const ModelSpec& model, const ChangeSpec& change, int n, const Vec& x0, double t,
                             const CheckSettings& s, double d0 = 1.0);

/// Paths whose density deviates from D0 by more than `tol` or whose Lambda is
/// nonzero. Meant for the identity change.
CheckReport identity_density_check(const ModelSpec& model, const ChangeSpec& change, int n, const Vec& x0, double t,
                                   const CheckSettings& s, double d0 = 1.0, double tol = 1e-12);

/// Bounds 1/3 <= l(y)/(y-1)^2 <= 1 on (0, 2] and l(y)/(y-1) >= 1/3 on [2, 1e6]
/// at `samples` log-uniform points each. Exact count of violations.
CheckReport ratio_bounds_property(std::size_t samples, std::uint64_t seed);

/// l(u) > 0 whenever |u - 1| > 1e-8 and l(1) = 0, at `samples` points.
CheckReport entropy_positivity_property(std::size_t samples, std::uint64_t seed);

/// Deterministic comparison reported as estimate against target with
/// epsilon = tol and se = 0.
CheckReport tolerance_report(std::string name, double estimate, double target, double tol, const char* provenance,
                             std::size_t n, std::uint64_t seed);

/// Largest relative field difference (drift, diffusion, killing, intensity,
/// jump density at `xis`) between two models over `states`; passes at <= tol.
CheckReport model_agreement_check(std::string name, const ModelSpec& a, const ModelSpec& b, std::span<const Vec> states,
                                  std::span<const Vec> xis, double tol);

/// Random scalar bump pair (f, g) and state x in [x_lo, x_hi] per point. Bump
/// centres lie within 1 of x, so the jump integral sees the support.
struct CdcSample {
  TestFunction f;
  TestFunction g;
  Vec x;
};
std::vector<CdcSample> cdc_samples(std::size_t points, std::uint64_t seed, double x_lo, double x_hi);

/// max |gamma_via_generator - gamma_explicit|, plus symmetry and diagonal
/// positivity of gamma_explicit, over the samples.
CheckReport cdc_gamma_check(const ModelSpec& model, std::span<const CdcSample> samples, std::uint64_t seed,
                            double tol = 1e-6);

/// max |tilde_generator_cdc - A~f| with A~ from transform_model(change_from_h).
CheckReport cdc_generator_check(const ModelSpec& model, const HFunction& h, std::span<const CdcSample> samples,
                                std::uint64_t seed, double tol = 1e-6);

struct DensityConvergence {
  /// Mean over paths of the grid maximum |explicit - exp(log D)|.
  double error_coarse = 0.0;
  double error_fine = 0.0;
  /// |mean over paths of (explicit - accumulated)| at the horizon.
  double bias_coarse = 0.0;
  double bias_fine = 0.0;
  double ratio() const { return error_coarse / error_fine; }
  double bias_ratio() const { return bias_coarse / bias_fine; }
};

/// Explicit vs accumulated density on `paths` coupled paths at dt and dt/2.
DensityConvergence density_convergence(const ModelSpec& model, const HFunction& h, int n, const Vec& x0,
                                       const SimConfig& cfg, std::size_t paths, std::uint64_t seed, int threads = 1);

/// Pathwise error ratio e(dt)/e(dt/2) against target 2 with tolerance 0.4.
CheckReport cdc_density_check(const ModelSpec& model, const HFunction& h, int n, const Vec& x0, const SimConfig& cfg,
                              std::size_t paths, std::uint64_t seed, int threads = 1);

}  // namespace jd
