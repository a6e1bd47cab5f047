#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "quadbench/networks.hpp"

using namespace quadbench;

namespace {

ActorNet<double> random_actor(int in, std::mt19937_64& rng, const Vec4& scale = Vec4(2, 5, 5, 2)) {
  ActorNet<double> a = ActorNet<double>::make(in, {8, 8}, scale);
  std::normal_distribution<double> n(0.0, 0.5);
  for (auto& l : a.net.layers()) {
    for (Eigen::Index i = 0; i < l.W.size(); ++i) l.W.data()[i] = n(rng);
    for (Eigen::Index i = 0; i < l.b.size(); ++i) l.b[i] = n(rng);
  }
  return a;
}

}  // namespace

TEST(Actor, LogProbabilityMatchesClosedForm) {
  std::mt19937_64 rng(1);
  const ActorNet<double> a = random_actor(5, rng);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd obs(5, 4), eps(4, 4);
  for (Eigen::Index i = 0; i < obs.size(); ++i) obs.data()[i] = n(rng);
  for (Eigen::Index i = 0; i < eps.size(); ++i) eps.data()[i] = n(rng);
  const ActorBatch<double> out = a.forward(obs, &eps);
  for (Eigen::Index b = 0; b < 4; ++b) {
    double lp = 0.0;
    for (int i = 0; i < 4; ++i) {
      lp += tanh_gaussian_logpdf(out.squashed(i, b), out.mean(i, b), out.log_std(i, b));
      EXPECT_NEAR(out.raw(i, b), a.scale[i] * out.squashed(i, b), 1e-15);
      EXPECT_LE(std::abs(out.raw(i, b)), a.scale[i]);
    }
    EXPECT_NEAR(out.logp(0, b), lp, 1e-8);
  }
}

TEST(Actor, LogOneMinusTanhSquaredIsStable) {
  for (double z : {-30.0, -5.0, -0.3, 0.0, 0.7, 4.0, 25.0}) {
    const double t = std::tanh(z);
    const double direct = std::log(1.0 - t * t);
    if (std::abs(z) < 5.0) EXPECT_NEAR(log_one_minus_tanh_sq(z), direct, 1e-10);
    EXPECT_TRUE(std::isfinite(log_one_minus_tanh_sq(z)));
  }
}

// Reparameterized gradient of L = sum(c .* raw) + sum(d .* logp).
TEST(Actor, BackwardMatchesFiniteDifferences) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    ActorNet<double> a = random_actor(3, rng);
    Eigen::MatrixXd obs(3, 2), eps(4, 2), c(4, 2), d(1, 2);
    for (auto* m : {&obs, &eps, &c, &d})
      for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = n(rng);
    auto loss = [&] {
      const ActorBatch<double> o = a.forward(obs, &eps);
      return o.raw.cwiseProduct(c).sum() + o.logp.cwiseProduct(d).sum();
    };
    const ActorBatch<double> fwd = a.forward(obs, &eps);
    auto g = a.net.zero_gradients();
    a.backward(fwd, c, d, g);
    const double h = 1e-6;
    double num2 = 0.0, diff2 = 0.0;
    for (std::size_t k = 0; k < a.net.layers().size(); ++k) {
      auto& W = a.net.layers()[k].W;
      for (Eigen::Index i = 0; i < W.size(); ++i) {
        const double keep = W.data()[i];
        W.data()[i] = keep + h;
        const double up = loss();
        W.data()[i] = keep - h;
        const double down = loss();
        W.data()[i] = keep;
        const double fd = (up - down) / (2 * h);
        num2 += fd * fd;
        diff2 += std::pow(fd - g.dW[k].data()[i], 2);
      }
    }
    worst = std::max(worst, std::sqrt(diff2 / std::max(num2, 1e-24)));
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(Actor, HoverOffsetIsExactlyZeroAtHover) {
  std::mt19937_64 rng(3);
  for (const auto& name : all_config_names()) {
    const ObsConfig cfg = parse_obs_config(name);
    const Eigen::VectorXd o0 = perfect_hover_observation(cfg);
    ActorNet<float> a = ActorNet<float>::make(static_cast<int>(o0.size()), {32, 32}, Vec4(2, 5, 5, 2));
    a.initialize(rng);
    // Push the output away from zero so the correction has work to do.
    a.net.layers().back().b.head(4).setConstant(0.8f);
    const PolicyAction u = act(a, o0, o0);
    EXPECT_EQ(u.df, 0.0) << name;
    EXPECT_EQ(u.omega_cmd, Vec3::Zero()) << name;
  }
}

TEST(Actor, DeterministicModeIgnoresNoise) {
  std::mt19937_64 rng(4);
  const ActorNet<double> a = random_actor(6, rng);
  const Eigen::VectorXd obs = Eigen::VectorXd::LinSpaced(6, -1.0, 1.0);
  const Vec4 d1 = actor_forward(a, obs, ActorMode::Deterministic).first;
  const Vec4 d2 = actor_forward(a, obs, ActorMode::Deterministic).first;
  EXPECT_EQ(d1, d2);
  std::mt19937_64 g1(9), g2(9);
  EXPECT_EQ(actor_forward(a, obs, ActorMode::Sample, &g1).first,
            actor_forward(a, obs, ActorMode::Sample, &g2).first);
  EXPECT_THROW(actor_forward(a, obs, ActorMode::Sample), Error);
  EXPECT_THROW(actor_forward(a, Eigen::VectorXd::Zero(5), ActorMode::Deterministic), Error);
}

TEST(Actor, InitialStandardDeviationIsSmall) {
  std::mt19937_64 rng(5);
  ActorNet<float> a = ActorNet<float>::make(10, {16}, Vec4::Ones());
  a.initialize(rng);
  const ActorBatch<float> o = a.forward(Eigen::MatrixXf::Zero(10, 1), nullptr);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(o.log_std(i, 0), -1.0f, 1e-2f);
}

TEST(Critic, TwinHeadsAndPrivilegedWidth) {
  std::mt19937_64 rng(6);
  CriticNet<float> c = CriticNet<float>::make({16, 16}, true);
  c.initialize(rng);
  EXPECT_EQ(c.obs_width(), kCriticObsDim);
  const auto [q1, q2] = critic_forward(c, Eigen::VectorXd::Zero(21), Vec4::Zero());
  EXPECT_TRUE(std::isfinite(q1));
  EXPECT_TRUE(std::isfinite(q2));
  EXPECT_THROW(critic_forward(c, Eigen::VectorXd::Zero(20), Vec4::Zero()), Error);

  CriticNet<float> single = CriticNet<float>::make({8}, false);
  single.initialize(rng);
  const auto [a, b] = critic_forward(single, Eigen::VectorXd::Ones(21), Vec4::Ones());
  EXPECT_EQ(a, b);
}
