#include "jumpdiff/cirjump.hpp"
#include "jumpdiff/sim.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace jd;

namespace {

// RK4 for y' = a + b y on [0, t].
double rk4_linear(double a, double b, double y0, double t, int steps = 4000) {
  const double h = t / steps;
  double y = y0;
  const auto f = [&](double v) { return a + b * v; };
  for (int i = 0; i < steps; ++i) {
    const double k1 = f(y), k2 = f(y + 0.5 * h * k1), k3 = f(y + 0.5 * h * k2), k4 = f(y + h * k3);
    y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return y;
}

bool mentions(const std::vector<std::string>& errs, const std::string& what) {
  return std::any_of(errs.begin(), errs.end(), [&](const auto& e) { return e.find(what) != std::string::npos; });
}

}  // namespace

TEST(CirJump, FellerCondition) {
  EXPECT_TRUE(feller_ok(0.5, 1.0));
  EXPECT_FALSE(feller_ok(0.49, 1.0));
  CirJumpParams p;
  p.b0t = 0.3;
  EXPECT_TRUE(mentions(p.problems(), "Feller"));
  EXPECT_THROW(p.validate(), ParameterError);
}

TEST(CirJump, KillingPairMustNotVanish) {
  CirJumpParams p;
  p.g0t = 0.0;
  p.g1t = 0.0;
  EXPECT_TRUE(mentions(p.problems(), "(g0t, g1t) must not both be zero"));
}

TEST(CirJump, AllProblemsListed) {
  CirJumpParams p;
  p.sigma = -1.0;
  p.gamma = 0.0;
  p.lambda = 0.0;
  EXPECT_GE(p.problems().size(), 3u);
}

TEST(CirJump, MomentsOfExponentialWeights) {
  CirJumpParams p;
  p.m = JumpLaw::exponential(0.5);
  p.m0 = {2.0, 1.0};
  p.m1 = {0.5, 0.0};
  // c0 = 2 E[e^{-xi}] = 2 / (1 + 0.5); j0 = 2 E[xi e^{-xi}] = 2 * 0.5 / 1.5^2
  EXPECT_NEAR(p.c0(), 2.0 / 1.5, 1e-15);
  EXPECT_NEAR(p.j0(), 1.0 / 2.25, 1e-15);
  EXPECT_NEAR(p.c1(), 0.5, 1e-15);
  EXPECT_NEAR(p.j1(), 0.25, 1e-15);
}

TEST(CirJump, QModelFields) {
  CirJumpParams p;
  p.b0t = 1.0;
  p.b1t = -0.5;
  p.g0t = 0.1;
  p.g1t = 0.2;
  p.m0 = {0.5, 0.0};
  p.m1 = {0.25, 0.0};
  const ModelSpec q = q_model(p);
  const Vec x = scalar_vec(2.0);
  EXPECT_DOUBLE_EQ(q.drift(x)[0], 1.0 - 1.0);
  EXPECT_DOUBLE_EQ(q.killing(x), 0.1 + 0.4);
  EXPECT_NEAR(q.jumps.intensity(x), 1.0 * (0.5 + 0.25 * 2.0), 1e-15);
}

TEST(CirJump, TransformMatchesQModel) {
  CirJumpParams p;
  p.b0t = 1.0;
  p.b1t = -0.7;
  p.g0t = 0.1;
  p.g1t = 0.05;
  p.m0 = {0.8, 1.0};
  p.m1 = {0.3, 1.0};
  const ModelSpec t = transform_model(p_model(p), change_spec(p));
  const ModelSpec q = q_model(p);
  std::mt19937_64 eng(2);
  std::uniform_real_distribution<double> u(0.0, 50.0), uxi(0.0, 5.0);
  std::vector<Vec> xis;
  for (int i = 0; i < 10; ++i) xis.push_back(scalar_vec(uxi(eng)));
  for (int i = 0; i < 100; ++i) {
    const Vec x = scalar_vec(u(eng) + 1e-9);
    const FieldDifference d = compare_fields(t, q, x, xis);
    EXPECT_LT(d.max(), 1e-10) << "x=" << x[0] << " drift " << d.drift << " kill " << d.killing << " int "
                              << d.intensity << " dens " << d.jump_density;
  }
}

TEST(CirJump, Phi3Example) {
  CirJumpParams p;
  p.m0 = {1.0, 0.5};
  p.m1 = {0.2, 0.0};
  const ChangeSpec c = change_spec(p);
  EXPECT_NEAR(c.phi3(scalar_vec(2.0), scalar_vec(1.0)), std::exp(-0.5) + 0.4, 1e-15);
  EXPECT_DOUBLE_EQ(c.phi3(scalar_vec(2.0), scalar_vec(-1.0)), 1.0);
}

TEST(CirJump, Entropy3AgainstQuadrature) {
  CirJumpParams p;
  p.m0 = {1.3, 0.4};
  p.m1 = {0.2, 0.4};
  const ChangeSpec closed = change_spec(p);
  CirJumpParams q = p;
  q.m1.rate = 0.41;  // forces the quadrature branch
  const ChangeSpec quad = change_spec(q);
  const Vec x = scalar_vec(1.5);
  const double direct = p.lambda * p.m.integrate([&](double xi) { return entropy_l(p.m0(xi) + p.m1(xi) * 1.5); });
  EXPECT_NEAR(closed.entropy3(x), direct, 1e-10);
  EXPECT_NEAR(quad.entropy3(x), direct, 2e-3);
}

TEST(CirJump, MeanOracleSolvesOde) {
  CirJumpParams p;
  p.y0 = 2.0;
  p.b0t = 1.0;
  p.b1t = -0.3;
  p.m0 = {0.5, 1.0};
  p.m1 = {0.2, 0.5};
  p.g0t = 0.1;
  const double a_p = p.b0 + p.lambda * p.m.mean();
  EXPECT_NEAR(mean_oracle(p, Side::P, 1.3), rk4_linear(a_p, p.b1, 2.0, 1.3), 1e-10);
  const double a_q = p.b0t + p.lambda * p.j0(), b_q = p.b1t + p.lambda * p.j1();
  EXPECT_NEAR(mean_oracle(p, Side::Q, 0.7), rk4_linear(a_q, b_q, 2.0, 0.7), 1e-10);
  CirJumpParams flat = p;
  flat.b1 = 0.0;
  EXPECT_NEAR(mean_oracle(flat, Side::P, 2.0), 2.0 + 2.0 * a_p, 1e-12);
}

TEST(CirJump, SurvivalOracle) {
  CirJumpParams p;
  p.g0t = 0.1;
  EXPECT_NEAR(survival_oracle(p, Side::Q, 1.0), 0.904837418, 1e-9);
  EXPECT_NEAR(survival_oracle(p, Side::P, 1.0), std::exp(-0.2), 1e-15);
  p.g1t = 0.1;
  EXPECT_THROW(survival_oracle(p, Side::Q, 1.0), OracleUnavailable);
  EXPECT_THROW(mean_oracle(p, Side::Q, 1.0), OracleUnavailable);
}

TEST(CirJump, ThinningBound) {
  CirJumpParams p;
  p.m0 = {0.5, 0.0};
  p.m1 = {0.25, 0.0};
  EXPECT_DOUBLE_EQ(thinning_bound(p, 4.0), 0.5 + 1.0);
}

TEST(CirJump, QPathsStayPositive) {
  CirJumpParams p;
  p.b0t = 1.0;
  p.y0 = 1.0;
  const ModelSpec q = q_model(p);
  SimConfig cfg;
  std::size_t touched = 0;
  const std::size_t n = 2000;
  batch_simulate(q, scalar_vec(1.0), cfg, nullptr, 0, n, 77, 1, [&](std::size_t, const PathRecord& path) {
    for (const auto& s : path.states)
      if (!s.is_cemetery() && s.point()[0] <= 0.0) {
        ++touched;
        break;
      }
  });
  EXPECT_LT(static_cast<double>(touched) / n, 1e-3);
}
