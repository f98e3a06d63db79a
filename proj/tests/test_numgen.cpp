#include "jumpdiff/cirjump.hpp"
#include "jumpdiff/numgen.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace jd;

namespace {

ModelSpec zero_model() {
  ModelSpec m;
  m.space = StateSpace::whole_space(1);
  m.diffusion = [](const Vec&) { return Mat::Zero(1, 1).eval(); };
  m.drift = [](const Vec&) { return scalar_vec(0.0); };
  m.killing = [](const Vec&) { return 0.0; };
  m.jumps = JumpKernel::none();
  return m;
}

double bump_value(double y, double c, double r, double a, int k) {
  const double u = (y - c) / r;
  return std::abs(u) < 1.0 ? a * std::pow(1.0 - u * u, k) : 0.0;
}

}  // namespace

TEST(TestFunction, BumpValueAndDerivatives) {
  const TestFunction f = TestFunction::bump(1.0, 0.5, 2.0, 3);
  for (double y : {0.6, 0.9, 1.0, 1.3, 1.45}) {
    const Vec x = scalar_vec(y);
    EXPECT_NEAR(f.value(x), bump_value(y, 1.0, 0.5, 2.0, 3), 1e-14);
    EXPECT_NEAR(f.gradient(x)[0], f.fd_gradient(x)[0], 1e-6);
    EXPECT_NEAR(f.hessian(x)(0, 0), f.fd_hessian(x)(0, 0), 1e-4);
  }
  EXPECT_EQ(f.value(scalar_vec(2.0)), 0.0);
  EXPECT_EQ(f.value(State::cemetery()), 0.0);
}

TEST(TestFunction, ProductAndCombination) {
  const TestFunction f = TestFunction::bump(1.0, 0.8);
  const TestFunction g = TestFunction::bump(1.3, 0.6, -0.5);
  const TestFunction fg = TestFunction::product(f, g);
  const TestFunction h = TestFunction::combination(2.0, f, 3.0, g);
  for (double y : {0.8, 1.0, 1.2, 1.5}) {
    const Vec x = scalar_vec(y);
    EXPECT_NEAR(fg.value(x), f.value(x) * g.value(x), 1e-14);
    EXPECT_NEAR(fg.gradient(x)[0], f.gradient(x)[0] * g.value(x) + f.value(x) * g.gradient(x)[0], 1e-12);
    EXPECT_NEAR(h.hessian(x)(0, 0), 2.0 * f.hessian(x)(0, 0) + 3.0 * g.hessian(x)(0, 0), 1e-12);
  }
}

TEST(TestFunction, JumpIncrementPolynomialForm) {
  const TestFunction f = TestFunction::bump(1.0, 0.8);
  const Vec x = scalar_vec(0.7);
  const JumpIntegrand g = f.jump_increment(x);
  for (double xi : {0.05, 0.3, 0.9, 2.0})
    EXPECT_NEAR(g(scalar_vec(xi)), f.value(scalar_vec(0.7 + xi)) - f.value(x), 1e-14);
}

TEST(Generator, ZeroModelAndZeroFunction) {
  const ModelSpec m = zero_model();
  EXPECT_EQ(apply_generator(m, TestFunction::bump(0.0, 1.0), scalar_vec(0.3)), 0.0);
  CirJumpParams p;
  EXPECT_EQ(apply_generator(p_model(p), TestFunction::zero(1), scalar_vec(1.0)), 0.0);
}

TEST(Generator, CirJumpHandComputation) {
  CirJumpParams p;
  const ModelSpec m = p_model(p);
  const double c = 1.0, r = 0.8;
  const TestFunction f = TestFunction::bump(c, r);
  const double y = 0.9;
  const Vec x = scalar_vec(y);
  const double fx = f.value(x);
  // Jump integral by brute-force Riemann sum on the exponential density.
  double jump = 0.0;
  const double h = 1e-5;
  for (double xi = h / 2; xi < 20.0; xi += h)
    jump += (bump_value(y + xi, c, r, 1.0, 3) - fx) * 2.0 * std::exp(-2.0 * xi) * h;
  const double expected = 0.5 * y * f.hessian(x)(0, 0) + (0.5 - y) * f.gradient(x)[0] - 0.2 * fx + jump;
  EXPECT_NEAR(apply_generator(m, f, x), expected, 1e-8);
}

TEST(Generator, OutsideStateSpaceThrows) {
  CirJumpParams p;
  EXPECT_THROW(apply_generator(p_model(p), TestFunction::bump(1.0, 1.0), scalar_vec(-0.5)), DomainError);
}

TEST(Martingale, ZeroFunctionAndZeroModel) {
  CirJumpParams p;
  const ModelSpec m = p_model(p);
  const PathRecord path = simulate_path(m, scalar_vec(1.0), SimConfig{}, nullptr, 4);
  EXPECT_EQ(martingale_increment(m, TestFunction::zero(1), path, 1.0), 0.0);
  const ModelSpec z = zero_model();
  const PathRecord still = simulate_path(z, scalar_vec(0.2), SimConfig{}, nullptr, 4);
  EXPECT_EQ(martingale_increment(z, TestFunction::bump(0.0, 1.0), still, 1.0), 0.0);
}

TEST(Martingale, KilledPathUsesCutStep) {
  ModelSpec m = zero_model();
  m.killing = [](const Vec&) { return 2.0; };
  const TestFunction f = TestFunction::bump(0.0, 1.0);
  const PathRecord path = simulate_path(m, scalar_vec(0.0), SimConfig{}, nullptr, 8);
  ASSERT_LT(path.killing_time, 1.0);
  // M = f(dead) - f(x0) - int_0^tau (-gamma f(x0)) ds = -1 + 2 tau
  EXPECT_NEAR(martingale_increment(m, f, path, 1.0), -1.0 + 2.0 * path.killing_time, 1e-12);
}

TEST(Martingale, BatchedMatchesSingle) {
  CirJumpParams p;
  const ModelSpec m = p_model(p);
  const PathRecord path = simulate_path(m, scalar_vec(1.0), SimConfig{}, nullptr, 12);
  const std::vector<TestFunction> fs{TestFunction::bump(1.0, 0.5), TestFunction::bump(0.7, 0.9, 2.0)};
  const auto many = martingale_increments(m, fs, path, 0.75);
  for (std::size_t i = 0; i < fs.size(); ++i) EXPECT_NEAR(many[i], martingale_increment(m, fs[i], path, 0.75), 1e-12);
}
