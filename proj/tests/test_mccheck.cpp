#include "jumpdiff/cirjump.hpp"
#include "jumpdiff/mccheck.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace jd;

namespace {

CheckSettings small(std::size_t paths, std::uint64_t seed = 3) {
  CheckSettings s;
  s.paths = paths;
  s.seed = seed;
  s.sim.dt = 1.0 / 64;
  return s;
}

}  // namespace

TEST(CheckReport, PassRule) {
  CheckReport r;
  r.estimate = 1.3;
  r.target = 1.0;
  r.se = 0.1;
  r.z = 3.0;
  r.decide();
  EXPECT_TRUE(r.pass);
  r.estimate = 1.31;
  r.decide();
  EXPECT_FALSE(r.pass);
  r.epsilon = 0.02;
  r.decide();
  EXPECT_TRUE(r.pass);
}

TEST(Stats, PairwiseMomentsMatchDirect) {
  std::vector<double> v;
  for (int i = 0; i < 5000; ++i) v.push_back(std::sin(i * 0.37) + 0.01 * i);
  double s = 0.0;
  for (double x : v) s += x;
  const double mean = s / v.size();
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const Moments m = pairwise_moments(v);
  EXPECT_NEAR(m.mean, mean, 1e-12);
  EXPECT_NEAR(m.se(), std::sqrt(ss / (v.size() - 1) / v.size()), 1e-12);
}

TEST(EntropyBounds, KnownRatios) {
  EXPECT_NEAR(entropy_l(1.0 + 1e-4) / 1e-8, 0.5, 1e-4);
  EXPECT_NEAR(entropy_l(2.0), 0.386294361, 1e-9);
  EXPECT_NEAR(entropy_l(1e6) / (1e6 - 1.0), 12.8155, 1e-4);
  const CheckReport r = ratio_bounds_property(100000, 5);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.estimate, 0.0);
  EXPECT_TRUE(entropy_positivity_property(100000, 5).pass);
}

TEST(KillingCompensator, ZeroKillingIsExact) {
  CirJumpParams p;
  ModelSpec m = p_model(p);
  m.killing = [](const Vec&) { return 0.0; };
  const CheckReport r = killing_compensator_check(m, scalar_vec(1.0), 1.0, small(500));
  EXPECT_EQ(r.estimate, 0.0);
  EXPECT_EQ(r.se, 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(KillingCompensator, ConstantKilling) {
  CirJumpParams p;
  const CheckReport r = killing_compensator_check(p_model(p), scalar_vec(1.0), 1.0, small(4000));
  EXPECT_TRUE(r.pass) << r.estimate << " " << r.se;
}

TEST(IdentityCheck, PassesAndCountsPaths) {
  CirJumpParams p;
  const ChangeSpec id = ChangeSpec::identity(1, positive_open_domain(), reciprocal_exhaustion());
  const CheckReport r = identity_density_check(p_model(p), id, 100, scalar_vec(1.0), 1.0, small(300));
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.n, 300u);
}

TEST(DensityMass, CorruptedTargetFails) {
  CirJumpParams p;
  p.b0t = 1.0;
  p.g0t = 0.1;
  const ModelSpec m = p_model(p);
  const ChangeSpec c = change_spec(p);
  const double oracle = survival_oracle(p, Side::Q, 1.0);
  const CheckSettings s = small(2000);
  const CheckReport good = density_mass_check(m, c, nullptr, 100, scalar_vec(1.0), 1.0, s, oracle);
  EXPECT_TRUE(good.pass) << good.estimate << " " << good.se;
  const CheckReport bad = density_mass_check(m, c, nullptr, 100, scalar_vec(1.0), 1.0, s, oracle + 0.2);
  EXPECT_FALSE(bad.pass);
}

TEST(Collect, ThreadInvariant) {
  CirJumpParams p;
  const ModelSpec m = p_model(p);
  SimConfig cfg;
  cfg.dt = 1.0 / 32;
  const auto fn = [](const PathRecord& path, double* out) {
    out[0] = path.states.back().is_cemetery() ? 0.0 : path.states.back().point()[0];
  };
  const auto a = sample_functionals(m, scalar_vec(1.0), cfg, nullptr, 2500, 4, 1, 1, fn);
  const auto b = sample_functionals(m, scalar_vec(1.0), cfg, nullptr, 2500, 4, 3, 1, fn);
  EXPECT_EQ(a[0].mean, b[0].mean);
  EXPECT_EQ(a[0].se(), b[0].se());
}

TEST(Supermartingale, CirJumpChange) {
  CirJumpParams p;
  p.b0t = 1.0;
  p.g0t = 0.1;
  const std::vector<double> times{0.25, 0.5, 0.75, 1.0};
  const auto r = supermartingale_check(p_model(p), change_spec(p), 100, scalar_vec(1.0), times, small(2000));
  EXPECT_TRUE(r.report.pass);
  ASSERT_EQ(r.means.size(), times.size());
}

TEST(ToleranceReport, UsesToleranceAsEpsilon) {
  const CheckReport r = tolerance_report("x", 1.0 + 5e-11, 1.0, 1e-10, provenance::analytic, 1, 0);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.epsilon, 1e-10);
  EXPECT_FALSE(tolerance_report("x", 1.0 + 2e-10, 1.0, 1e-10, provenance::analytic, 1, 0).pass);
}
