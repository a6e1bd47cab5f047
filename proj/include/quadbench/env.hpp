#ifndef QUADBENCH_ENV_HPP
#define QUADBENCH_ENV_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "quadbench/dynamics.hpp"
#include "quadbench/error.hpp"
#include "quadbench/observation.hpp"

namespace quadbench {

// Network output: thrust-rate increment and commanded body rates.
struct PolicyAction {
  double df = 0.0;
  Vec3 omega_cmd = Vec3::Zero();

  Vec4 to_vector() const { return Vec4(df, omega_cmd.x(), omega_cmd.y(), omega_cmd.z()); }
  static PolicyAction from_vector(const Vec4& u) { return {u[0], u.tail<3>()}; }

  bool operator==(const PolicyAction&) const = default;
};

struct RewardConfig {
  double beta = 1.0;
  double k_u = 0.05;
  double e_m = 3.0;
  double crash_penalty = 50.0;

  void validate() const {
    if (!(beta > 0.0) || !(k_u >= 0.0) || !(e_m > 0.0) || !(crash_penalty > 0.0)) {
      throw Error(ErrorKind::InvalidConfig, "reward: need beta > 0, k_u >= 0, e_m > 0, c > 0");
    }
  }
};

struct RandomizationSpec {
  double fraction = 0.10;
  double g_bias_max = 0.3;
  double delay_min = 0.0;
  double delay_max = 0.010;

  static RandomizationSpec none() { return {0.0, 0.0, 0.0, 0.0}; }

  void validate() const {
    if (!(fraction >= 0.0 && fraction <= 0.5)) {
      throw Error(ErrorKind::InvalidConfig, "randomization fraction must lie in [0, 0.5]");
    }
    if (!(g_bias_max >= 0.0) || !(delay_min >= 0.0) || !(delay_max >= delay_min)) {
      throw Error(ErrorKind::InvalidConfig, "randomization ranges must be non-negative");
    }
  }
};

// Initial perturbation drawn at every reset.
struct InitSpec {
  double dist_min = 0.5;
  double dist_max = 2.4;  // further capped at 0.8 * e_m
  double max_tilt = std::numbers::pi / 3.0;
  double max_yaw = std::numbers::pi;
  double max_speed = 1.0;
  double max_rate = 1.0;
};

struct EnvConfig {
  QuadParams nominal;
  ObsConfig obs;
  RewardConfig reward;
  RandomizationSpec randomization;
  InitSpec init;
  double ts = 0.01;
  int substeps = 1;
  int max_steps = 500;
  double df_max = 2.0;
  Vec3 target = Vec3::Zero();

  Vec4 action_bounds() const {
    return Vec4(df_max, nominal.omega_max.x(), nominal.omega_max.y(), nominal.omega_max.z());
  }

  void validate() const {
    nominal.validate();
    reward.validate();
    randomization.validate();
    if (!(ts > 0.0) || substeps < 1 || max_steps < 1 || !(df_max > 0.0)) {
      throw Error(ErrorKind::InvalidConfig, "env: need ts > 0, substeps >= 1, max_steps >= 1");
    }
    if (!(init.dist_min >= 0.0) || !(init.dist_max >= init.dist_min)) {
      throw Error(ErrorKind::InvalidConfig, "env: invalid initial distance range");
    }
  }
};

inline PolicyAction clamp_action(const PolicyAction& a, const Vec4& bounds) {
  const Vec4 u = a.to_vector().cwiseMax(-bounds).cwiseMin(bounds);
  return PolicyAction::from_vector(u);
}

// Tracking reward times the effort penalty inside the allowed ball, -c outside.
inline double reward(const Vec3& e, const Vec4& u, const RewardConfig& cfg) {
  if (!(e.norm() < cfg.e_m)) return -cfg.crash_penalty;
  double prod = 1.0;
  for (int j = 0; j < 3; ++j) prod *= std::max(0.0, 1.0 - std::abs(e[j]));
  const double un = u.norm();
  return std::pow(prod, cfg.beta) - cfg.k_u * un / (1.0 + un);
}

enum class Termination { None, TimeLimit, OutOfBounds };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::None: return "none";
    case Termination::TimeLimit: return "time_limit";
    case Termination::OutOfBounds: return "out_of_bounds";
  }
  return "?";
}

struct PendingInput {
  ControlInput input;
  double release_time = 0.0;

  bool operator==(const PendingInput&) const = default;
};

// FIFO of commands waiting for their release time. The held input switches
// exactly at each release instant; until then the previous input stays applied.
struct DelayLine {
  std::vector<PendingInput> queue;
  ControlInput applied;
  double last_release = 0.0;

  // Release times never move backwards, so commands are applied in order.
  void push(const ControlInput& cmd, double release_time) {
    last_release = std::max(release_time, last_release);
    queue.push_back({cmd, last_release});
  }

  // Integrates [t0, t1] with RK4 steps no longer than h_max.
  void integrate(QuadState& quad, const QuadParams& params, double t0, double t1,
                 double h_max) {
    double t = t0;
    while (t < t1) {
      while (!queue.empty() && queue.front().release_time <= t) {
        applied = queue.front().input;
        queue.erase(queue.begin());
      }
      double boundary = t1;
      if (!queue.empty() && queue.front().release_time < t1) {
        boundary = queue.front().release_time;
      }
      const double span = boundary - t;
      if (span > 1e-12) {
        const int n = std::max(1, static_cast<int>(std::ceil(span / h_max - 1e-9)));
        for (int i = 0; i < n; ++i) quad = quadbench::step(quad, applied, params, span / n);
      }
      t = boundary;
    }
  }

  bool operator==(const DelayLine&) const = default;
};

struct EnvState {
  QuadState quad;
  QuadParams params;
  Vec3 target = Vec3::Zero();
  double f_cmd_integrator = 0.0;
  PolicyAction prev_action;
  ObservationHistory history;
  DelayLine delay;
  int step_index = 0;
  bool done = false;
  std::uint64_t seed = 0;
  std::mt19937_64 rng;

  double time(double ts) const { return step_index * ts; }
  Vec3 error() const { return target - quad.p; }

  bool operator==(const EnvState&) const = default;
};

struct StepInfo {
  Termination cause = Termination::None;
  double error_norm = 0.0;
  ControlInput command;
};

struct StepResult {
  Eigen::VectorXd observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

namespace detail {

inline Vec3 uniform_in_ball(std::mt19937_64& rng, double radius) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec3 dir(normal(rng), normal(rng), normal(rng));
  const double n = dir.norm();
  const double r = radius * std::cbrt(unit(rng));
  return n > 0.0 ? Vec3(dir * (r / n)) : Vec3::Zero();
}

inline Vec3 uniform_on_sphere(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (;;) {
    Vec3 dir(normal(rng), normal(rng), normal(rng));
    const double n = dir.norm();
    if (n > 1e-12) return dir / n;
  }
}

}  // namespace detail

// Nominal parameters scaled per entry by U(1 - fraction, 1 + fraction); the
// gravity bias is uniform in a ball.
inline QuadParams sample_params(const QuadParams& nominal, const RandomizationSpec& spec,
                                std::mt19937_64& rng) {
  std::uniform_real_distribution<double> scale(1.0 - spec.fraction, 1.0 + spec.fraction);
  QuadParams p = nominal;
  p.m = nominal.m * scale(rng);
  for (int i = 0; i < 3; ++i) p.J[i] = nominal.J[i] * scale(rng);
  for (int i = 0; i < 3; ++i) p.drag[i] = nominal.drag[i] * scale(rng);
  p.g_bias = detail::uniform_in_ball(rng, spec.g_bias_max);
  return p;
}

// Episodic environment around a fixed target. Copyable value type.
class QuadrotorEnv {
 public:
  explicit QuadrotorEnv(EnvConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

  const EnvConfig& config() const { return cfg_; }
  const EnvState& state() const { return state_; }
  EnvState& mutable_state() { return state_; }

  Eigen::VectorXd reset(std::uint64_t seed) {
    EnvState s;
    s.seed = seed;
    s.rng.seed(seed);
    s.target = cfg_.target;
    s.params = sample_params(cfg_.nominal, cfg_.randomization, s.rng);

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double dmax = std::min(cfg_.init.dist_max, 0.8 * cfg_.reward.e_m);
    const double dmin = std::min(cfg_.init.dist_min, dmax);
    const Vec3 dir = detail::uniform_on_sphere(s.rng);
    const double dist = dmin + (dmax - dmin) * unit(s.rng);
    s.quad.p = s.target - dir * dist;

    const double yaw = cfg_.init.max_yaw * (2.0 * unit(s.rng) - 1.0);
    const double tilt = cfg_.init.max_tilt * unit(s.rng);
    const double tilt_dir = 2.0 * std::numbers::pi * unit(s.rng);
    const Vec3 axis(std::cos(tilt_dir), std::sin(tilt_dir), 0.0);
    s.quad.R = orthonormalize((Eigen::AngleAxisd(tilt, axis) *
                               Eigen::AngleAxisd(yaw, Vec3::UnitZ()))
                                  .toRotationMatrix());
    s.quad.v = detail::uniform_in_ball(s.rng, cfg_.init.max_speed);
    s.quad.omega = detail::uniform_in_ball(s.rng, cfg_.init.max_rate);
    s.quad.f = cfg_.nominal.hover_thrust();
    s.f_cmd_integrator = cfg_.nominal.hover_thrust();
    s.delay.applied = ControlInput{s.f_cmd_integrator, Vec3::Zero()};

    s.history = ObservationHistory(cfg_.obs);
    s.history.reset(observation_slice(s.quad, s.target, Vec4::Zero(), cfg_.obs));
    state_ = std::move(s);
    return state_.history.flatten();
  }

  StepResult step(const PolicyAction& action) {
    EnvState& s = state_;
    if (s.done) throw Error(ErrorKind::EpisodeOver, "reset the environment first");
    const Vec4 bounds = cfg_.action_bounds();
    const PolicyAction applied = clamp_action(action, bounds);

    s.f_cmd_integrator =
        std::clamp(s.f_cmd_integrator + applied.df * cfg_.ts, 0.0, s.params.f_max);
    const ControlInput command =
        clamp_input(ControlInput{s.f_cmd_integrator, applied.omega_cmd}, s.params);

    const double t0 = s.time(cfg_.ts);
    std::uniform_real_distribution<double> delay(cfg_.randomization.delay_min,
                                                 cfg_.randomization.delay_max);
    s.delay.push(command, t0 + delay(s.rng));
    s.delay.integrate(s.quad, s.params, t0, t0 + cfg_.ts, cfg_.ts / cfg_.substeps);

    s.step_index += 1;
    s.prev_action = applied;
    s.history.push(observation_slice(s.quad, s.target, applied.to_vector().cwiseQuotient(bounds),
                                     cfg_.obs));

    StepResult out;
    const Vec3 e = s.error();
    out.reward = reward(e, action.to_vector(), cfg_.reward);
    out.info.error_norm = e.norm();
    out.info.command = command;
    if (e.norm() > cfg_.reward.e_m) {
      out.info.cause = Termination::OutOfBounds;
    } else if (s.step_index >= cfg_.max_steps) {
      out.info.cause = Termination::TimeLimit;
    }
    s.done = out.info.cause != Termination::None;
    out.done = s.done;
    out.observation = s.history.flatten();
    return out;
  }

  Eigen::VectorXd observation() const { return state_.history.flatten(); }

  // Privileged critic input [p, v, a, R row-major, omega]; 21 values for every
  // observation config.
  Eigen::VectorXd critic_observation() const { return critic_observation_of(state_); }

  static Eigen::VectorXd critic_observation_of(const EnvState& s) {
    Eigen::VectorXd out(21);
    out.segment<3>(0) = s.quad.p;
    out.segment<3>(3) = s.quad.v;
    out.segment<3>(6) = linear_acceleration(s.quad, s.params);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) out[9 + 3 * r + c] = s.quad.R(r, c);
    out.segment<3>(18) = s.quad.omega;
    return out;
  }

 private:
  EnvConfig cfg_;
  EnvState state_;
};

}  // namespace quadbench

#endif  // QUADBENCH_ENV_HPP
