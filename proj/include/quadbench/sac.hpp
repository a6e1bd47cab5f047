#ifndef QUADBENCH_SAC_HPP
#define QUADBENCH_SAC_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "quadbench/env.hpp"
#include "quadbench/error.hpp"
#include "quadbench/mlp.hpp"
#include "quadbench/networks.hpp"
#include "quadbench/replay.hpp"

namespace quadbench {

struct SacConfig {
  double gamma = 0.99;
  double tau = 0.005;
  double lr = 3e-4;
  int batch = 256;
  double entropy_target = -4.0;
  std::size_t buffer_capacity = 1'000'000;
  int updates_per_step = 1;
  int warmup_steps = 1000;
  double init_alpha = 0.2;
  bool learn_alpha = true;
  bool twin_critic = true;
  // Train the hover-offset corrected policy u = pi(o) - pi_det(o0) instead of pi(o).
  bool offset_in_training = true;
  std::vector<int> actor_hidden{256, 256, 256};
  std::vector<int> critic_hidden{256, 256, 256};
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  AdamConfig adam() const { return {lr, adam_beta1, adam_beta2, adam_eps}; }

  void validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorKind::InvalidConfig, "gamma in (0,1)");
    if (!(tau > 0.0 && tau <= 1.0)) throw Error(ErrorKind::InvalidConfig, "tau in (0,1]");
    if (batch < 1) throw Error(ErrorKind::InvalidConfig, "batch >= 1");
    if (!(lr >= 0.0)) throw Error(ErrorKind::InvalidConfig, "lr >= 0");
    if (!(init_alpha >= 0.0)) throw Error(ErrorKind::InvalidConfig, "init_alpha >= 0");
    if (buffer_capacity < 1 || updates_per_step < 0 || warmup_steps < 0) {
      throw Error(ErrorKind::InvalidConfig, "sac schedule values");
    }
  }
};

struct SacLosses {
  double critic = 0.0;
  double actor = 0.0;
  double alpha = 0.0;
  double alpha_value = 0.0;
  double mean_q = 0.0;

  bool finite() const {
    return std::isfinite(critic) && std::isfinite(actor) && std::isfinite(alpha);
  }
};

template <typename Scalar>
MatrixX<Scalar> standard_normal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixX<Scalar> m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = static_cast<Scalar>(normal(rng));
  return m;
}

// Soft Actor-Critic in the asymmetric arrangement: the actor reads the
// (history) actor observation, the critics read the privileged state. With
// offset_in_training the behaviour policy, the critic targets and the actor
// gradient all use u = pi(o) - pi_det(o0), clipped to the action bounds, so the
// trained policy is the one act() deploys.
template <typename Scalar>
class SacAgent {
 public:
  using Matrix = MatrixX<Scalar>;

  SacAgent(const Eigen::VectorXd& hover_obs, const Vec4& action_scale, SacConfig cfg,
           std::uint64_t seed, int critic_obs_width = kCriticObsDim)
      : cfg_(std::move(cfg)), hover_obs_(hover_obs) {
    cfg_.validate();
    std::mt19937_64 rng(seed);
    actor_ = ActorNet<Scalar>::make(static_cast<int>(hover_obs.size()), cfg_.actor_hidden,
                                    action_scale);
    actor_.initialize(rng);
    critic_ = CriticNet<Scalar>::make(cfg_.critic_hidden, cfg_.twin_critic, critic_obs_width);
    critic_.initialize(rng);
    target_ = critic_;
    log_alpha_ = cfg_.init_alpha > 0.0 ? std::log(cfg_.init_alpha)
                                       : -std::numeric_limits<double>::infinity();
    reset_optimizers();
  }

  const SacConfig& config() const { return cfg_; }
  const ActorNet<Scalar>& actor() const { return actor_; }
  ActorNet<Scalar>& actor() { return actor_; }
  const CriticNet<Scalar>& critic() const { return critic_; }
  CriticNet<Scalar>& critic() { return critic_; }
  const CriticNet<Scalar>& target() const { return target_; }
  CriticNet<Scalar>& target() { return target_; }
  const Eigen::VectorXd& hover_observation() const { return hover_obs_; }
  double alpha() const { return cfg_.learn_alpha ? std::exp(log_alpha_) : cfg_.init_alpha; }
  double log_alpha() const { return log_alpha_; }
  void set_log_alpha(double v) { log_alpha_ = v; }

  // Rebuilds optimizer moments, e.g. after loading weights.
  void reset_optimizers() {
    actor_opt_ = AdamOptimizer<Scalar>(actor_.net, cfg_.adam());
    q1_opt_ = AdamOptimizer<Scalar>(critic_.q1, cfg_.adam());
    q2_opt_ = AdamOptimizer<Scalar>(critic_.q2, cfg_.adam());
    alpha_opt_ = ScalarAdam(cfg_.adam());
  }

  // Stochastic action used while collecting experience.
  PolicyAction explore(const Eigen::VectorXd& obs, std::mt19937_64& rng) const {
    Vec4 u = actor_forward(actor_, obs, ActorMode::Sample, &rng).first;
    if (cfg_.offset_in_training) {
      const Vec4 bounds = actor_.scale.template cast<double>();
      u -= actor_forward(actor_, hover_obs_, ActorMode::Deterministic).first;
      u = u.cwiseMax(-bounds).cwiseMin(bounds);
    }
    return PolicyAction::from_vector(u);
  }

  // Deployment action: deterministic and hover-offset corrected.
  PolicyAction act(const Eigen::VectorXd& obs) const {
    return quadbench::act(actor_, obs, hover_obs_);
  }

  // Bellman targets y = r + gamma (1 - done)(min Q'(s', a') - alpha logp') for a
  // given draw of next-action noise.
  Matrix critic_targets(const TransitionBatch<Scalar>& b, const Matrix& next_eps) const {
    const ActorBatch<Scalar> next = actor_.forward(b.next_obs, &next_eps);
    const Matrix x = CriticNet<Scalar>::join(b.next_critic_obs, applied(next.squashed, hover_squashed()));
    Matrix q = target_.q1.forward(x);
    if (target_.twin) q = q.cwiseMin(target_.q2.forward(x));
    const auto temperature = static_cast<Scalar>(this->alpha());
    Matrix soft = q;
    if (temperature != Scalar(0)) soft -= temperature * next.logp;
    const auto gamma = static_cast<Scalar>(cfg_.gamma);
    return b.reward + gamma * ((Scalar(1) - b.done.array()) * soft.array()).matrix();
  }

  SacLosses update(const ReplayBuffer<Scalar>& buffer, std::mt19937_64& rng) {
    const auto B = static_cast<std::size_t>(cfg_.batch);
    const TransitionBatch<Scalar> b = buffer.sample(B, rng);
    const Matrix next_eps = standard_normal<Scalar>(kActionDim, cfg_.batch, rng);
    const Matrix eps = standard_normal<Scalar>(kActionDim, cfg_.batch, rng);
    return update_on(b, next_eps, eps);
  }

  // One gradient step on an explicit batch and noise draw.
  SacLosses update_on(const TransitionBatch<Scalar>& b, const Matrix& next_eps,
                      const Matrix& eps) {
    SacLosses out;
    const double alpha = this->alpha();
    const auto a_s = static_cast<Scalar>(alpha);
    const Eigen::Index B = b.obs.cols();
    const Scalar inv_b = Scalar(1) / static_cast<Scalar>(B);

    // Critic step.
    const Matrix y = critic_targets(b, next_eps);
    const Matrix x = CriticNet<Scalar>::join(b.critic_obs, normalized(b.action));
    {
      MlpCache<Scalar> c1, c2;
      const Matrix q1 = critic_.q1.forward(x, c1);
      const Matrix r1 = q1 - y;
      auto g1 = critic_.q1.zero_gradients();
      critic_.q1.backward(c1, r1 * inv_b, g1);
      double loss = 0.5 * static_cast<double>(r1.squaredNorm()) / static_cast<double>(B);
      out.mean_q = static_cast<double>(q1.mean());
      q1_opt_.step(critic_.q1, g1);
      if (critic_.twin) {
        const Matrix q2 = critic_.q2.forward(x, c2);
        const Matrix r2 = q2 - y;
        auto g2 = critic_.q2.zero_gradients();
        critic_.q2.backward(c2, r2 * inv_b, g2);
        loss += 0.5 * static_cast<double>(r2.squaredNorm()) / static_cast<double>(B);
        q2_opt_.step(critic_.q2, g2);
      }
      out.critic = loss;
    }

    // Actor step through the freshly updated critics.
    Matrix logp;
    {
      const ActorBatch<Scalar> cur = actor_.forward(b.obs, &eps);
      ActorBatch<Scalar> hover;
      if (cfg_.offset_in_training) hover = actor_.forward(hover_obs_.cast<Scalar>(), nullptr);
      const Matrix a_norm = applied(cur.squashed, cfg_.offset_in_training ? hover.squashed : Matrix());
      const Matrix xa = CriticNet<Scalar>::join(b.critic_obs, a_norm);
      MlpCache<Scalar> c1, c2;
      const Matrix q1 = critic_.q1.forward(xa, c1);
      Matrix q2 = q1;
      if (critic_.twin) q2 = critic_.q2.forward(xa, c2);
      Matrix dq1 = Matrix::Zero(1, B), dq2 = Matrix::Zero(1, B);
      double loss = 0.0;
      for (Eigen::Index j = 0; j < B; ++j) {
        const bool first = !critic_.twin || q1(0, j) <= q2(0, j);
        const Scalar qmin = first ? q1(0, j) : q2(0, j);
        (first ? dq1 : dq2)(0, j) = -inv_b;
        loss += static_cast<double>(a_s * cur.logp(0, j) - qmin);
      }
      out.actor = loss / static_cast<double>(B);
      auto scratch1 = critic_.q1.zero_gradients();
      Matrix dx = critic_.q1.backward(c1, dq1, scratch1);
      if (critic_.twin) {
        auto scratch2 = critic_.q2.zero_gradients();
        dx += critic_.q2.backward(c2, dq2, scratch2);
      }
      Matrix d_norm = dx.bottomRows(kActionDim);
      if (cfg_.offset_in_training) {
        // Clipped components pass no gradient.
        const Scalar one(1);
        d_norm = (a_norm.array().abs() < one).select(d_norm, Scalar(0));
      }
      const Matrix d_action = actor_.scale.cwiseInverse().asDiagonal() * d_norm;
      auto ga = actor_.net.zero_gradients();
      actor_.backward(cur, d_action, Matrix::Constant(1, B, a_s * inv_b), ga);
      if (cfg_.offset_in_training) {
        const Matrix d_hover = -d_action.rowwise().sum();
        actor_.backward(hover, d_hover, Matrix::Zero(1, 1), ga);
      }
      actor_opt_.step(actor_.net, ga);
      logp = cur.logp;
    }

    // Temperature step.
    {
      const double mean_term =
          static_cast<double>(logp.mean()) + cfg_.entropy_target;
      out.alpha = std::isfinite(log_alpha_) ? -log_alpha_ * mean_term : 0.0;
      if (cfg_.learn_alpha && std::isfinite(log_alpha_)) {
        log_alpha_ = alpha_opt_.step(log_alpha_, -mean_term);
      }
      out.alpha_value = this->alpha();
    }

    target_.soft_update_from(critic_, static_cast<Scalar>(cfg_.tau));
    return out;
  }

 private:
  // The critics see actions divided by the action bounds.
  Matrix normalized(const Matrix& raw) const { return actor_.scale.cwiseInverse().asDiagonal() * raw; }

  // Squashed deterministic action at the hover observation; empty when unused.
  Matrix hover_squashed() const {
    if (!cfg_.offset_in_training) return Matrix();
    return actor_.forward(hover_obs_.cast<Scalar>(), nullptr).squashed;
  }

  // Normalized applied action for squashed policy outputs.
  static Matrix applied(const Matrix& squashed, const Matrix& hover) {
    if (hover.size() == 0) return squashed;
    const Scalar one(1);
    return (squashed.colwise() - hover.col(0)).cwiseMax(-one).cwiseMin(one);
  }

  SacConfig cfg_;
  Eigen::VectorXd hover_obs_;
  ActorNet<Scalar> actor_;
  CriticNet<Scalar> critic_;
  CriticNet<Scalar> target_;
  double log_alpha_ = 0.0;
  AdamOptimizer<Scalar> actor_opt_, q1_opt_, q2_opt_;
  ScalarAdam alpha_opt_;
};

}  // namespace quadbench

#endif  // QUADBENCH_SAC_HPP
