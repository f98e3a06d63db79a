#include "jumpdiff/cdc.hpp"
#include "jumpdiff/cirjump.hpp"
#include "jumpdiff/mccheck.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace jd;

namespace {

ModelSpec killing_only(double gamma) {
  ModelSpec m;
  m.space = StateSpace::whole_space(1);
  m.diffusion = [](const Vec&) { return Mat::Zero(1, 1).eval(); };
  m.drift = [](const Vec&) { return scalar_vec(0.0); };
  m.killing = [gamma](const Vec&) { return gamma; };
  m.jumps = JumpKernel::none();
  return m;
}

double h_value(double y) {
  const double u = y - 1.0;
  return std::abs(u) < 1.0 ? 0.3 * std::pow(1.0 - u * u, 3) : 0.0;
}

}  // namespace

TEST(Cdc, Phi3FromH) {
  CirJumpParams p;
  const ModelSpec m = p_model(p);
  const HFunction h = HFunction::bump(1.0, 1.0, 0.3);
  const ChangeSpec c = change_from_h(h, m);
  EXPECT_NEAR(c.phi3(scalar_vec(1.0), scalar_vec(0.5)), std::exp(h_value(1.5) - 0.3), 1e-14);
  EXPECT_NEAR(c.phi2(scalar_vec(1.2)), std::exp(-h_value(1.2)), 1e-14);
  EXPECT_NEAR(c.phi1(scalar_vec(1.2))[0], h.h().gradient(scalar_vec(1.2))[0], 1e-14);
}

TEST(Cdc, ZeroHIsIdentity) {
  CirJumpParams p;
  const ModelSpec m = p_model(p);
  const ChangeSpec c = change_from_h(HFunction::zero(1), m);
  const ModelSpec t = transform_model(m, c);
  const std::vector<Vec> xis{scalar_vec(0.3), scalar_vec(1.7)};
  for (double y : {0.1, 1.0, 4.0}) EXPECT_LT(compare_fields(t, m, scalar_vec(y), xis).max(), 1e-12);
  const PathRecord path = simulate_path(m, scalar_vec(1.0), SimConfig{}, nullptr, 3);
  for (double d : explicit_density(HFunction::zero(1), path, m)) EXPECT_EQ(d, 1.0);
}

TEST(Cdc, KillingOnlyGamma) {
  const ModelSpec m = killing_only(0.2);
  const TestFunction f = TestFunction::bump(0.0, 1.0);
  const TestFunction g = TestFunction::bump(0.3, 1.5, -2.0);
  const Vec x = scalar_vec(0.1);
  EXPECT_NEAR(gamma_explicit(m, f, g, x), 0.2 * f.value(x) * g.value(x), 1e-15);
  EXPECT_NEAR(gamma_via_generator(m, f, g, x), 0.2 * f.value(x) * g.value(x), 1e-12);
}

TEST(Cdc, GammaSymmetricAndMatchesGenerator) {
  CirJumpParams p;
  const ModelSpec m = p_model(p);
  const auto samples = cdc_samples(30, 7, 0.5, 3.0);
  for (const auto& s : samples) {
    const double a = gamma_explicit(m, s.f, s.g, s.x);
    EXPECT_NEAR(a, gamma_explicit(m, s.g, s.f, s.x), 1e-12);
    EXPECT_NEAR(a, gamma_via_generator(m, s.f, s.g, s.x), 1e-6);
    EXPECT_GE(gamma_explicit(m, s.f, s.f, s.x), 0.0);
  }
  EXPECT_TRUE(cdc_gamma_check(m, samples, 7).pass);
}

TEST(Cdc, KillingOnlyTildeGenerator) {
  const ModelSpec m = killing_only(0.5);
  const HFunction h = HFunction::bump(1.0, 1.0, 0.3);
  const TestFunction f = TestFunction::bump(1.2, 0.7);
  for (double y : {0.6, 1.0, 1.4}) {
    const Vec x = scalar_vec(y);
    EXPECT_NEAR(tilde_generator_cdc(m, h, f, x), -0.5 * std::exp(-h_value(y)) * f.value(x), 1e-12);
  }
}

TEST(Cdc, TildeGeneratorMatchesTransform) {
  CirJumpParams p;
  const ModelSpec m = p_model(p);
  const HFunction h = HFunction::bump(1.0, 1.0, 0.3);
  EXPECT_TRUE(cdc_generator_check(m, h, cdc_samples(20, 4, 0.5, 3.0), 4).pass);
}

TEST(Cdc, ExplicitDensityMatchesAccumulated) {
  CirJumpParams p;
  const ModelSpec m = p_model(p);
  SimConfig cfg;
  cfg.dt = 1.0 / 256;
  const DensityConvergence c = density_convergence(m, HFunction::bump(1.0, 1.0, 0.3), 100, scalar_vec(1.0), cfg, 50, 9);
  EXPECT_LT(c.error_fine, c.error_coarse);
  EXPECT_LT(c.error_coarse, 0.2);
}
