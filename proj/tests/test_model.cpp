#include "jumpdiff/cirjump.hpp"
#include "jumpdiff/model.hpp"
#include "jumpdiff/numgen.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace jd;

namespace {

// Composite Simpson on [a, b], independent of the library quadrature.
template <class F>
double simpson(F f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

TEST(Entropy, ValuesAndSeries) {
  EXPECT_EQ(entropy_l(1.0), 0.0);
  EXPECT_DOUBLE_EQ(entropy_l(0.0), 1.0);
  EXPECT_NEAR(entropy_l(2.0), 2.0 * std::log(2.0) - 1.0, 1e-15);
  for (double e : {1e-3, -1e-3, 1e-6, -2e-5}) {
    const double series = e * e / 2.0 - e * e * e / 6.0 + e * e * e * e / 12.0;
    EXPECT_NEAR(entropy_l(1.0 + e), series, 1e-15);
  }
}

TEST(PsdFactor, ReproducesMatrix) {
  Mat a(2, 2);
  a << 4.0, 1.0, 1.0, 3.0;
  Mat l = psd_factor(a);
  EXPECT_LT((l * l.transpose() - a).norm(), 1e-12);
  Mat s(2, 2);
  s << 1.0, 1.0, 1.0, 1.0;
  l = psd_factor(s);
  EXPECT_LT((l * l.transpose() - s).norm(), 1e-12);
  Mat bad(1, 1);
  bad(0, 0) = -1.0;
  EXPECT_THROW(psd_factor(bad), SimulationError);
}

TEST(JumpLaw, ClosedFormsAgainstSimpson) {
  const JumpLaw m = JumpLaw::exponential(0.5);
  const auto dens = [](double xi) { return 2.0 * std::exp(-2.0 * xi); };
  EXPECT_NEAR(m.laplace(0.7), simpson([&](double x) { return std::exp(-0.7 * x) * dens(x); }, 0, 40), 1e-10);
  EXPECT_NEAR(m.tilted_first_moment(0.7), simpson([&](double x) { return x * std::exp(-0.7 * x) * dens(x); }, 0, 40),
              1e-10);
  const auto g = [](double xi) { return std::sin(xi) * xi; };
  EXPECT_NEAR(m.integrate(g), simpson([&](double x) { return g(x) * dens(x); }, 0, 40), 1e-9);
  const JumpLaw pm = JumpLaw::point_mass(0.3);
  EXPECT_DOUBLE_EQ(pm.integrate(g), g(0.3));
  EXPECT_DOUBLE_EQ(pm.laplace(2.0), std::exp(-0.6));
}

TEST(JumpLaw, NarrowPolynomialPieceAgainstSimpson) {
  // (1 - u^2)^6 on a narrow support: large monomial coefficients.
  const TestFunction f = TestFunction::bump(1.1, 0.3, 1.0, 6);
  const JumpLaw m = JumpLaw::exponential(0.5);
  const auto dens = [](double xi) { return 2.0 * std::exp(-2.0 * xi); };
  for (double y : {0.5, 0.9, 1.2}) {
    const JumpIntegrand g = f.jump_increment(scalar_vec(y));
    ASSERT_TRUE(g.poly.has_value());
    const double fx = f.value(scalar_vec(y));
    const double direct = simpson([&](double xi) { return (f.value(scalar_vec(y + xi)) - fx) * dens(xi); }, 0, 40, 400000);
    EXPECT_NEAR(m.integrate(*g.poly), direct, 1e-11) << y;
  }
}

TEST(JumpKernel, SamplerMatchesEvaluator) {
  const JumpKernel k = JumpKernel::affine_mixture({{1.0, 0.5, JumpLaw::exponential(0.5)}});
  const Vec x = scalar_vec(2.0);
  JumpIntegrand g;
  g.fn = [](const Vec& xi) { return xi[0] * xi[0]; };
  const double exact = k.integrate(x, g);
  EXPECT_NEAR(exact, 2.0 * 0.5, 1e-10);  // intensity 2, E[xi^2] = 2 mean^2
  Engine eng(3);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = k.intensity(x) * std::pow(k.sample(x, eng)[0], 2);
    s += v;
    s2 += v * v;
  }
  const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
  EXPECT_LT(std::abs(mean - exact), 4.0 * se);
}

TEST(ChangeSpec, IdentityFields) {
  const ChangeSpec c = ChangeSpec::identity(1, positive_open_domain(), reciprocal_exhaustion());
  const Vec x = scalar_vec(3.0);
  EXPECT_EQ(c.checked_phi1(x)[0], 0.0);
  EXPECT_EQ(c.checked_phi2(x), 1.0);
  EXPECT_EQ(c.checked_phi3(x, scalar_vec(0.4)), 1.0);
  EXPECT_THROW(c.checked_phi2(scalar_vec(0.0)), DomainError);
  EXPECT_TRUE(c.in_exhaustion(10, scalar_vec(0.2)));
  EXPECT_FALSE(c.in_exhaustion(2, scalar_vec(0.2)));
}

TEST(TransformModel, IdentityChangeKeepsFields) {
  CirJumpParams p;
  const ModelSpec m = p_model(p);
  const ChangeSpec id = ChangeSpec::identity(1, positive_open_domain(), reciprocal_exhaustion());
  const ModelSpec t = transform_model(m, id);
  std::mt19937_64 eng(11);
  std::uniform_real_distribution<double> u(0.01, 50.0);
  std::vector<Vec> states;
  for (int i = 0; i < 50; ++i) states.push_back(scalar_vec(u(eng)));
  const std::vector<Vec> xis{scalar_vec(0.1), scalar_vec(1.3)};
  for (const auto& x : states) EXPECT_LT(compare_fields(t, m, x, xis).max(), 1e-12);
}

TEST(TransformModel, InverseChangeRestoresModel) {
  CirJumpParams p;
  p.b0t = 1.0;
  p.g0t = 0.1;
  p.g1t = 0.05;
  p.m0 = {0.8, 0.0};
  p.m1 = {0.3, 0.0};
  const ModelSpec pm = p_model(p);
  const ChangeSpec c = change_spec(p);
  const ModelSpec q = transform_model(pm, c);
  const ChangeSpec inv = ChangeSpec::from_fields(
      q, "inverse", c.in_domain, c.in_exhaustion, [c](const Vec& x) { return Vec(-c.phi1(x)); },
      [c](const Vec& x) { return 1.0 / c.phi2(x); }, [c](const Vec& x, const Vec& xi) { return 1.0 / c.phi3(x, xi); });
  const ModelSpec back = transform_model(q, inv);
  std::mt19937_64 eng(5);
  std::uniform_real_distribution<double> u(0.01, 50.0);
  const std::vector<Vec> xis{scalar_vec(0.2), scalar_vec(0.9), scalar_vec(2.5)};
  for (int i = 0; i < 100; ++i) {
    const Vec x = scalar_vec(u(eng));
    EXPECT_LT(compare_fields(back, pm, x, xis).max(), 1e-12) << x[0];
  }
}

TEST(TransformModel, DomainErrorOutsideU) {
  CirJumpParams p;
  const ModelSpec q = transform_model(p_model(p), change_spec(p));
  EXPECT_THROW(q.drift(scalar_vec(0.0)), DomainError);
}

TEST(LambdaIntegrand, CirJumpHandComputation) {
  CirJumpParams p;
  p.b0t = 1.0;
  p.g0t = 0.1;
  const ModelSpec m = p_model(p);
  const ChangeSpec c = change_spec(p);
  const double x = 2.0;
  const double phi1 = 0.5 / x;  // (b0t - b0) / sigma^2 / x
  const double expected = 0.5 * x * phi1 * phi1 + entropy_l(0.5) * 0.2;
  EXPECT_NEAR(lambda_integrand(m, c, scalar_vec(x)), expected, 1e-14);
}

TEST(ScanExhaustion, FlagsBlowUpNearZero) {
  CirJumpParams p;
  p.b0t = 1.0;
  const auto rows = scan_exhaustion(p_model(p), change_spec(p), std::vector<int>{2, 4, 8, 16}, 201);
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 1; i < rows.size(); ++i)
    EXPECT_GT(rows[i].maxima.diffusion_max, rows[i - 1].maxima.diffusion_max);
  CirJumpParams flat;
  flat.g0t = 0.2;
  const auto still = scan_exhaustion(p_model(flat), change_spec(flat), std::vector<int>{2, 4, 8}, 201);
  for (const auto& r : still) {
    EXPECT_EQ(r.maxima.diffusion_max, 0.0);
    EXPECT_FALSE(r.diverging);
  }
}

TEST(ChiForm, TruncatedDriftAndCorrection) {
  const Vec xi = scalar_vec(3.0);
  EXPECT_DOUBLE_EQ(truncation_chi(xi)[0], 1.0);
  EXPECT_DOUBLE_EQ(truncation_chi(scalar_vec(0.4))[0], 0.4);
  CirJumpParams p;
  p.m = JumpLaw::point_mass(0.4);
  const ModelSpec m = p_model(p);
  // chi(0.4) = 0.4 with intensity lambda = 1
  EXPECT_NEAR(truncated_drift(m, scalar_vec(1.0))[0], 0.5 - 1.0 + 0.4, 1e-12);
}
