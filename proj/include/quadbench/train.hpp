#ifndef QUADBENCH_TRAIN_HPP
#define QUADBENCH_TRAIN_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "quadbench/checkpoint.hpp"
#include "quadbench/env.hpp"
#include "quadbench/error.hpp"
#include "quadbench/io.hpp"
#include "quadbench/networks.hpp"
#include "quadbench/replay.hpp"
#include "quadbench/sac.hpp"

namespace quadbench {

// splitmix64 finalizer; derives independent stream seeds from one run seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct TrainSchedule {
  long total_steps = 50'000;
  int n_envs = 1;
  long checkpoint_every = 0;  // 0 disables periodic checkpoints
  std::filesystem::path checkpoint_path;
};

struct EpisodeRecord {
  long episode = 0;
  long steps = 0;  // global environment steps when the episode ended
  double cumulative_reward = 0.0;
  double final_error = 0.0;
  int length = 0;
  Termination cause = Termination::None;
};

struct LearningCurve {
  std::vector<EpisodeRecord> episodes;

  std::string to_csv() const {
    std::ostringstream os;
    os << "episode,steps,cumulative_reward\n";
    for (const auto& e : episodes) {
      os << e.episode << ',' << e.steps << ',' << format_double(e.cumulative_reward) << '\n';
    }
    return os.str();
  }

  // Mean cumulative reward over the first or last `fraction` of episodes.
  double head_mean(double fraction) const { return window_mean(fraction, false); }
  double tail_mean(double fraction) const { return window_mean(fraction, true); }

 private:
  double window_mean(double fraction, bool tail) const {
    if (episodes.empty()) return 0.0;
    const auto n = std::max<std::size_t>(
        1, static_cast<std::size_t>(fraction * static_cast<double>(episodes.size())));
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum += episodes[tail ? episodes.size() - n + i : i].cumulative_reward;
    }
    return sum / static_cast<double>(n);
  }
};

struct TrainResult {
  SacAgent<float> agent;
  LearningCurve curve;
  SacLosses last_losses;
  long steps = 0;
};

inline Checkpoint make_checkpoint(const SacAgent<float>& agent, const EnvConfig& env_cfg,
                                  long step) {
  Checkpoint ck;
  ck.obs_config = env_cfg.obs.name();
  ck.history = env_cfg.obs.history;
  ck.step = step;
  ck.sac = agent.config();
  ck.log_alpha = agent.log_alpha();
  ck.actor = agent.actor();
  ck.critic = agent.critic();
  ck.target = agent.target();
  return ck;
}

using ProgressFn = std::function<void(long step, const EpisodeRecord&, const SacLosses&)>;

// Collects experience from n_envs environments in round-robin order and runs
// updates_per_step SAC updates per environment step once warm-up is over.
inline TrainResult train(const EnvConfig& env_cfg, const SacConfig& sac_cfg,
                         const TrainSchedule& schedule, std::uint64_t seed,
                         const ProgressFn& progress = {}) {
  env_cfg.validate();
  sac_cfg.validate();
  if (schedule.n_envs < 1) throw Error(ErrorKind::InvalidConfig, "n_envs >= 1");

  const Eigen::VectorXd o0 = perfect_hover_observation(env_cfg.obs);
  TrainResult result{SacAgent<float>(o0, env_cfg.action_bounds(), sac_cfg, mix_seed(seed, 1)),
                     {}, {}, 0};
  if (schedule.total_steps <= 0) return result;

  SacAgent<float>& agent = result.agent;
  std::mt19937_64 rng(mix_seed(seed, 2));
  const std::size_t capacity =
      std::min<std::size_t>(sac_cfg.buffer_capacity, static_cast<std::size_t>(schedule.total_steps));
  ReplayBuffer<float> buffer(capacity, static_cast<Eigen::Index>(o0.size()), kCriticObsDim);

  struct Slot {
    QuadrotorEnv env;
    Eigen::VectorXd obs;
    double ret = 0.0;
    long episodes = 0;
  };
  std::vector<Slot> slots;
  for (int i = 0; i < schedule.n_envs; ++i) {
    Slot s{QuadrotorEnv(env_cfg), {}, 0.0, 0};
    s.obs = s.env.reset(mix_seed(seed, 1000 + static_cast<std::uint64_t>(i) * 1'000'000));
    slots.push_back(std::move(s));
  }

  const Vec4 bounds = env_cfg.action_bounds();
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  long episode_counter = 0;

  for (long step = 0; step < schedule.total_steps; ++step) {
    const int idx = static_cast<int>(step % schedule.n_envs);
    Slot& slot = slots[static_cast<std::size_t>(idx)];

    PolicyAction action;
    if (step < sac_cfg.warmup_steps) {
      Vec4 u;
      for (int i = 0; i < 4; ++i) u[i] = bounds[i] * unit(rng);
      action = PolicyAction::from_vector(u);
    } else {
      action = agent.explore(slot.obs, rng);
    }

    const Eigen::VectorXd critic_obs = slot.env.critic_observation();
    const StepResult sr = slot.env.step(action);
    const Eigen::VectorXd next_critic_obs = slot.env.critic_observation();
    buffer.push(slot.obs, critic_obs, action.to_vector(), sr.reward, sr.observation,
                next_critic_obs, sr.info.cause == Termination::OutOfBounds);
    slot.ret += sr.reward;
    slot.obs = sr.observation;
    result.steps = step + 1;

    if (step + 1 >= sac_cfg.warmup_steps &&
        buffer.size() >= static_cast<std::size_t>(sac_cfg.batch)) {
      for (int u = 0; u < sac_cfg.updates_per_step; ++u) {
        result.last_losses = agent.update(buffer, rng);
        if (!result.last_losses.finite() || !agent.actor().net.all_finite()) {
          throw Error(ErrorKind::DivergedTraining,
                      "non-finite loss at step " + std::to_string(step + 1));
        }
      }
    }

    if (sr.done) {
      EpisodeRecord rec;
      rec.episode = episode_counter++;
      rec.steps = step + 1;
      rec.cumulative_reward = slot.ret;
      rec.final_error = sr.info.error_norm;
      rec.length = slot.env.state().step_index;
      rec.cause = sr.info.cause;
      result.curve.episodes.push_back(rec);
      if (progress) progress(step + 1, rec, result.last_losses);
      slot.episodes += 1;
      slot.ret = 0.0;
      slot.obs = slot.env.reset(mix_seed(seed, 1000 + static_cast<std::uint64_t>(idx) * 1'000'000 +
                                                   static_cast<std::uint64_t>(slot.episodes)));
    }

    if (schedule.checkpoint_every > 0 && !schedule.checkpoint_path.empty() &&
        (step + 1) % schedule.checkpoint_every == 0) {
      save_checkpoint(schedule.checkpoint_path, make_checkpoint(agent, env_cfg, step + 1));
    }
  }
  return result;
}

struct PolicyEvaluation {
  double mean_return = 0.0;
  double mean_final_error = 0.0;
  int crashes = 0;
};

// Deterministic hover-offset corrected rollouts on fresh resets.
template <typename Scalar>
PolicyEvaluation evaluate_policy(const ActorNet<Scalar>& actor, const EnvConfig& env_cfg,
                                 int episodes, std::uint64_t seed) {
  PolicyEvaluation out;
  const Eigen::VectorXd o0 = perfect_hover_observation(env_cfg.obs);
  for (int ep = 0; ep < episodes; ++ep) {
    QuadrotorEnv env(env_cfg);
    Eigen::VectorXd obs = env.reset(mix_seed(seed, 50'000'000 + static_cast<std::uint64_t>(ep)));
    double ret = 0.0;
    StepResult sr;
    do {
      sr = env.step(act(actor, obs, o0));
      ret += sr.reward;
      obs = sr.observation;
    } while (!sr.done);
    out.mean_return += ret / episodes;
    out.mean_final_error += sr.info.error_norm / episodes;
    if (sr.info.cause == Termination::OutOfBounds) out.crashes += 1;
  }
  return out;
}

}  // namespace quadbench

#endif  // QUADBENCH_TRAIN_HPP
