#include "jumpdiff/cirjump.hpp"
#include "jumpdiff/sim.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace jd;

namespace {

ModelSpec pure_killing(double gamma) {
  ModelSpec m;
  m.name = "killing";
  m.space = StateSpace::whole_space(1);
  m.diffusion = [](const Vec&) { return Mat::Zero(1, 1).eval(); };
  m.drift = [](const Vec&) { return scalar_vec(0.0); };
  m.killing = [gamma](const Vec&) { return gamma; };
  m.jumps = JumpKernel::none();
  return m;
}

ModelSpec poisson_model(double rate) {
  ModelSpec m = pure_killing(0.0);
  m.jumps = JumpKernel::affine_mixture({{rate, 0.0, JumpLaw::point_mass(1.0)}});
  return m;
}

}  // namespace

TEST(SimConfig, Validation) {
  SimConfig c;
  EXPECT_NO_THROW(c.validate());
  c.dt = -0.1;
  EXPECT_THROW(c.validate(), ParameterError);
  c = SimConfig{};
  c.scheme = JumpScheme::thinning;
  EXPECT_THROW(c.validate(), ParameterError);
  EXPECT_EQ(SimConfig{}.steps(), 1024u);
}

TEST(SimConfig, SchemeNames) {
  for (auto s : {JumpScheme::exact_constant_intensity, JumpScheme::thinning, JumpScheme::left_endpoint})
    EXPECT_EQ(parse_jump_scheme(to_string(s)), s);
  EXPECT_THROW(parse_jump_scheme("euler"), ParameterError);
}

TEST(Simulate, DeterministicInSeed) {
  CirJumpParams p;
  const ModelSpec m = p_model(p);
  SimConfig cfg;
  const PathRecord a = simulate_path(m, scalar_vec(1.0), cfg, nullptr, 42);
  const PathRecord b = simulate_path(m, scalar_vec(1.0), cfg, nullptr, 42);
  const PathRecord c = simulate_path(m, scalar_vec(1.0), cfg, nullptr, 43);
  ASSERT_EQ(a.states.size(), b.states.size());
  for (std::size_t i = 0; i < a.states.size(); ++i) EXPECT_TRUE(a.states[i] == b.states[i]);
  EXPECT_EQ(a.killing_time, b.killing_time);
  EXPECT_FALSE(a.states.back() == c.states.back() && a.killing_time == c.killing_time);
}

TEST(Simulate, BatchIndependentOfThreads) {
  CirJumpParams p;
  const ModelSpec m = p_model(p);
  SimConfig cfg;
  cfg.dt = 1.0 / 64;
  const auto one = batch_simulate(m, scalar_vec(1.0), cfg, nullptr, 0, 2100, 9, 1);
  const auto three = batch_simulate(m, scalar_vec(1.0), cfg, nullptr, 0, 2100, 9, 3);
  for (std::size_t i = 0; i < one.size(); ++i) {
    ASSERT_EQ(one[i].states.size(), three[i].states.size());
    EXPECT_TRUE(one[i].states.back() == three[i].states.back());
  }
}

TEST(Simulate, CoupledBrownianPaths) {
  CirJumpParams p;
  const ModelSpec m = p_model(p);
  SimConfig cfg;
  cfg.dt = 1.0 / 128;
  const PathRecord coarse = simulate_path(m, scalar_vec(1.0), cfg.coarse_coupled(), nullptr, 5);
  const PathRecord fine = simulate_path(m, scalar_vec(1.0), cfg.halved(), nullptr, 5);
  const std::size_t k = std::min(coarse.steps(), fine.steps() / 2);
  ASSERT_GT(k, 10u);
  for (std::size_t i = 0; i < k; ++i)
    EXPECT_NEAR(coarse.brownian[i][0], fine.brownian[2 * i][0] + fine.brownian[2 * i + 1][0], 1e-14);
  EXPECT_EQ(coarse.kill_threshold, fine.kill_threshold);
}

TEST(Simulate, ConstantKillingTime) {
  const ModelSpec m = pure_killing(0.7);
  SimConfig cfg;
  cfg.horizon = 20.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const PathRecord path = simulate_path(m, scalar_vec(0.0), cfg, nullptr, s);
    ASSERT_EQ(path.status, PathStatus::killed);
    EXPECT_NEAR(path.killing_time, path.kill_threshold / 0.7, 1e-9);
    EXPECT_TRUE(path.states.back().is_cemetery());
    EXPECT_GE(path.times.back(), path.killing_time);
    EXPECT_LT(path.times.back(), path.killing_time + cfg.dt);
  }
}

TEST(Simulate, ZeroModelIsConstant) {
  const ModelSpec m = pure_killing(0.0);
  const PathRecord path = simulate_path(m, scalar_vec(2.5), SimConfig{}, nullptr, 1);
  EXPECT_EQ(path.status, PathStatus::alive);
  for (const auto& s : path.states) EXPECT_EQ(s.point()[0], 2.5);
}

TEST(Simulate, ExplosionCap) {
  ModelSpec m = pure_killing(0.0);
  m.drift = [](const Vec& x) { return scalar_vec(x[0] * x[0]); };
  SimConfig cfg;
  cfg.horizon = 2.0;
  cfg.n_expl = 1000;
  const PathRecord path = simulate_path(m, scalar_vec(1.0), cfg, nullptr, 1);
  EXPECT_EQ(path.status, PathStatus::explosion_capped);
  EXPECT_LT(path.explosion_time, 1.1);
  EXPECT_EQ(path.localization_time, path.explosion_time);
}

TEST(Simulate, ExitFromExhaustion) {
  CirJumpParams p;
  const ModelSpec m = p_model(p);
  const ChangeSpec c = change_spec(p);
  SimConfig cfg;
  cfg.n_loc = 2;
  std::size_t exits = 0;
  batch_simulate(m, scalar_vec(0.6), cfg, &c, 0, 200, 3, 1, [&](std::size_t, const PathRecord& path) {
    if (path.status == PathStatus::exited_domain) {
      ++exits;
      const double x = path.states.back().point()[0];
      EXPECT_TRUE(x <= 0.5 || x >= 2.0);
      EXPECT_DOUBLE_EQ(path.exit_time, path.times.back());
    }
  });
  EXPECT_GT(exits, 0u);
}

TEST(Simulate, JumpCountsMatchRate) {
  for (auto scheme : {JumpScheme::exact_constant_intensity, JumpScheme::thinning, JumpScheme::left_endpoint}) {
    const ModelSpec m = poisson_model(3.0);
    SimConfig cfg;
    cfg.scheme = scheme;
    cfg.intensity_bound = 5.0;
    double s = 0.0, s2 = 0.0;
    const int n = 4000;
    batch_simulate(m, scalar_vec(0.0), cfg, nullptr, 0, n, 17, 1, [&](std::size_t, const PathRecord& path) {
      const double k = static_cast<double>(path.jumps.size());
      s += k;
      s2 += k * k;
      EXPECT_NEAR(path.states.back().point()[0], k, 1e-12);
    });
    const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
    EXPECT_LT(std::abs(mean - 3.0), 4.0 * se + 0.01) << to_string(scheme);
  }
}

TEST(Simulate, PathCsvHeader) {
  std::ostringstream os;
  write_path_csv_header(os, 1);
  EXPECT_EQ(os.str(), "path_id,t,x0,status\n");
}
