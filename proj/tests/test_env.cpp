#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "quadbench/env.hpp"

using namespace quadbench;

namespace {

EnvConfig base_config(const char* obs = "eW-R-w-u") {
  EnvConfig c;
  c.obs = parse_obs_config(obs);
  return c;
}

// Reward written directly from its definition.
double reward_oracle(const Vec3& e, const Vec4& u, const RewardConfig& cfg) {
  if (e.norm() >= cfg.e_m) return -cfg.crash_penalty;
  const double rx = std::max(0.0, 1.0 - std::fabs(e.x()));
  const double ry = std::max(0.0, 1.0 - std::fabs(e.y()));
  const double rz = std::max(0.0, 1.0 - std::fabs(e.z()));
  return std::pow(rx * ry * rz, cfg.beta) - cfg.k_u * u.norm() / (1.0 + u.norm());
}

}  // namespace

TEST(Reward, MaximumAtPerfectHover) {
  const RewardConfig cfg;
  EXPECT_EQ(reward(Vec3::Zero(), Vec4::Zero(), cfg), 1.0);
}

TEST(Reward, PropertiesOverRandomSamples) {
  const RewardConfig cfg;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> err(-4.0, 4.0);
  std::uniform_real_distribution<double> act(-10.0, 10.0);
  for (int i = 0; i < 10'000; ++i) {
    const Vec3 e(err(rng), err(rng), err(rng));
    const Vec4 u(act(rng), act(rng), act(rng), act(rng));
    const double r = reward(e, u, cfg);
    EXPECT_NEAR(r, reward_oracle(e, u, cfg), 1e-12);
    if (e.norm() > cfg.e_m) {
      EXPECT_EQ(r, -cfg.crash_penalty);
      continue;
    }
    // An axis with |e_j| >= 1 zeroes the tracking term.
    if ((e.cwiseAbs().array() >= 1.0).any()) {
      const double penalty = cfg.k_u * u.norm() / (1.0 + u.norm());
      EXPECT_NEAR(r, -penalty, 1e-15);
    }
    EXPECT_LE(r, 1.0);
    // Effort penalty strictly increasing in |u| and below one.
    const Vec4 bigger = u * 1.5;
    EXPECT_LT(reward(e, bigger, cfg), r);
    const double p = cfg.k_u * u.norm() / (1.0 + u.norm());
    EXPECT_LT(p / cfg.k_u, 1.0);
  }
}

TEST(Reward, TrackingTermDecreasesWithEachAxisError) {
  const RewardConfig cfg;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> in(-0.9, 0.9);
  for (int i = 0; i < 1000; ++i) {
    Vec3 e(in(rng), in(rng), in(rng));
    for (int j = 0; j < 3; ++j) {
      Vec3 worse = e;
      worse[j] = std::copysign(std::min(0.99, std::fabs(e[j]) + 0.05), e[j] == 0 ? 1.0 : e[j]);
      EXPECT_LT(reward(worse, Vec4::Zero(), cfg), reward(e, Vec4::Zero(), cfg));
    }
  }
}

TEST(Reward, ConfigValidation) {
  RewardConfig c;
  c.crash_penalty = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = RewardConfig{};
  c.beta = 0.0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Env, ResetRespectsInitialDistribution) {
  const EnvConfig cfg = base_config();
  QuadrotorEnv env(cfg);
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const Eigen::VectorXd obs = env.reset(seed);
    const EnvState& s = env.state();
    const double d = s.error().norm();
    EXPECT_GE(d, 0.5 - 1e-12);
    EXPECT_LE(d, std::min(cfg.init.dist_max, 0.8 * cfg.reward.e_m) + 1e-12);
    EXPECT_LE(std::acos(std::clamp(s.quad.R(2, 2), -1.0, 1.0)), cfg.init.max_tilt + 1e-9);
    EXPECT_LE(s.quad.v.norm(), cfg.init.max_speed + 1e-12);
    EXPECT_LE(s.quad.omega.norm(), cfg.init.max_rate + 1e-12);
    EXPECT_EQ(s.f_cmd_integrator, cfg.nominal.hover_thrust());
    EXPECT_NEAR(s.params.m / cfg.nominal.m, 1.0, cfg.randomization.fraction + 1e-12);
    EXPECT_LE(s.params.g_bias.norm(), cfg.randomization.g_bias_max + 1e-12);
    // History prefilled with copies of the first slice.
    const auto n = static_cast<Eigen::Index>(cfg.obs.step_width());
    for (int k = 1; k < cfg.obs.history; ++k) EXPECT_EQ(obs.segment(k * n, n), obs.head(n));
  }
}

TEST(Env, ResetIsDeterministicGivenSeed) {
  const EnvConfig cfg = base_config();
  QuadrotorEnv a(cfg), b(cfg);
  EXPECT_EQ(a.reset(42), b.reset(42));
  EXPECT_EQ(a.state(), b.state());
  const PolicyAction u{1.0, Vec3(0.1, -0.2, 0.3)};
  for (int k = 0; k < 50; ++k) {
    const StepResult ra = a.step(u), rb = b.step(u);
    EXPECT_EQ(ra.observation, rb.observation);
    EXPECT_EQ(ra.reward, rb.reward);
  }
  QuadrotorEnv c(cfg);
  c.reset(43);
  EXPECT_NE(c.state().quad.p, a.state().quad.p);
}

TEST(Env, ThrustIntegratorIsClamped) {
  EnvConfig cfg = base_config();
  cfg.df_max = 1000.0;
  cfg.max_steps = 100'000;
  cfg.reward.e_m = 1e6;
  QuadrotorEnv env(cfg);
  env.reset(1);
  for (int k = 0; k < 20; ++k) {
    env.step({cfg.df_max, Vec3::Zero()});
    EXPECT_LE(env.state().f_cmd_integrator, env.state().params.f_max);
  }
  for (int k = 0; k < 40; ++k) {
    env.step({-cfg.df_max, Vec3::Zero()});
    EXPECT_GE(env.state().f_cmd_integrator, 0.0);
  }
}

TEST(Env, ThrustIntegratorAccumulatesIncrements) {
  EnvConfig cfg = base_config();
  cfg.randomization = RandomizationSpec::none();
  QuadrotorEnv env(cfg);
  env.reset(2);
  const double f0 = env.state().f_cmd_integrator;
  const double df = 0.5 * cfg.df_max;
  for (int k = 1; k <= 5; ++k) {
    const StepResult r = env.step({df, Vec3::Zero()});
    EXPECT_NEAR(env.state().f_cmd_integrator, f0 + k * df * cfg.ts, 1e-12);
    EXPECT_NEAR(r.info.command.f_cmd, f0 + k * df * cfg.ts, 1e-12);
  }
}

TEST(Env, LeavingTheBallTerminatesWithPenalty) {
  EnvConfig cfg = base_config();
  QuadrotorEnv env(cfg);
  env.reset(3);
  env.mutable_state().quad.p = env.state().target + Vec3(cfg.reward.e_m + 0.5, 0, 0);
  const StepResult r = env.step({});
  EXPECT_TRUE(r.done);
  EXPECT_EQ(r.info.cause, Termination::OutOfBounds);
  EXPECT_EQ(r.reward, -cfg.reward.crash_penalty);
  try {
    env.step({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EpisodeOver);
  }
}

TEST(Env, TimeLimitEndsEpisode) {
  EnvConfig cfg = base_config();
  cfg.max_steps = 7;
  cfg.randomization = RandomizationSpec::none();
  cfg.init.dist_min = cfg.init.dist_max = 0.5;
  cfg.init.max_tilt = cfg.init.max_speed = cfg.init.max_rate = 0.0;
  QuadrotorEnv env(cfg);
  env.reset(4);
  StepResult r;
  for (int k = 0; k < 7; ++k) {
    ASSERT_FALSE(r.done);
    r = env.step({});
  }
  EXPECT_TRUE(r.done);
  EXPECT_EQ(r.info.cause, Termination::TimeLimit);
}

TEST(Env, ErrorStaysInsideBallWhileAlive) {
  EnvConfig cfg = base_config();
  QuadrotorEnv env(cfg);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::uint64_t ep = 0; ep < 20; ++ep) {
    env.reset(ep);
    StepResult r;
    do {
      r = env.step({cfg.df_max * u(rng), Vec3(u(rng), u(rng), u(rng)) * 3.0});
      if (!r.done) EXPECT_LE(r.info.error_norm, cfg.reward.e_m);
    } while (!r.done);
  }
}

TEST(Env, ActionsAreClampedAndObservedNormalized) {
  EnvConfig cfg = base_config("eW-u");
  QuadrotorEnv env(cfg);
  env.reset(5);
  const StepResult r = env.step({1e3, Vec3(1e3, -1e3, 0.0)});
  const Vec4 u_obs = r.observation.segment<4>(3);
  EXPECT_EQ(u_obs, Vec4(1.0, 1.0, -1.0, 0.0));
  EXPECT_EQ(env.state().prev_action.df, cfg.df_max);
}

TEST(Env, CriticObservationHasFixedWidth) {
  for (const auto& name : all_config_names()) {
    QuadrotorEnv env(base_config(name.c_str()));
    env.reset(1);
    const Eigen::VectorXd c = env.critic_observation();
    ASSERT_EQ(c.size(), 21);
    EXPECT_EQ(c.head<3>(), env.state().quad.p);
  }
}

TEST(DelayLine, HoldsPreviousInputUntilRelease) {
  QuadParams p;
  p.k_f = 50.0;
  QuadState a = hover_state(p), b = hover_state(p);
  DelayLine d;
  d.applied = {p.hover_thrust(), Vec3::Zero()};
  const ControlInput up{p.hover_thrust() + 1.0, Vec3::Zero()};
  d.push(up, 0.004);
  d.integrate(a, p, 0.0, 0.01, 0.01);

  // Reference: hold hover for 4 ms, then the new command for 6 ms.
  b = step(b, {p.hover_thrust(), Vec3::Zero()}, p, 0.004);
  b = step(b, up, p, 0.006);
  EXPECT_LT(std::abs(a.f - b.f), 1e-12);
  EXPECT_LT((a.p - b.p).norm(), 1e-12);
  EXPECT_TRUE(d.queue.empty());
  EXPECT_EQ(d.applied, up);
}

TEST(DelayLine, ReleaseTimesNeverGoBackwards) {
  DelayLine d;
  d.push({1.0, Vec3::Zero()}, 0.02);
  d.push({2.0, Vec3::Zero()}, 0.01);
  ASSERT_EQ(d.queue.size(), 2u);
  EXPECT_EQ(d.queue[1].release_time, 0.02);
}

TEST(Randomization, SampledParametersStayInRange) {
  const QuadParams nominal;
  RandomizationSpec spec;
  std::mt19937_64 rng(6);
  for (int i = 0; i < 1000; ++i) {
    const QuadParams p = sample_params(nominal, spec, rng);
    EXPECT_LE(std::abs(p.m / nominal.m - 1.0), spec.fraction + 1e-12);
    for (int j = 0; j < 3; ++j) {
      EXPECT_LE(std::abs(p.J[j] / nominal.J[j] - 1.0), spec.fraction + 1e-12);
    }
    EXPECT_LE(p.g_bias.norm(), spec.g_bias_max + 1e-12);
  }
  spec.fraction = 0.8;
  EXPECT_THROW(spec.validate(), Error);
}
