#ifndef QUADBENCH_EVALUATION_HPP
#define QUADBENCH_EVALUATION_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <utility>

#include "quadbench/dynamics.hpp"
#include "quadbench/env.hpp"
#include "quadbench/metrics.hpp"
#include "quadbench/networks.hpp"
#include "quadbench/observation.hpp"
#include "quadbench/pid.hpp"
#include "quadbench/trajectories.hpp"

namespace quadbench {

// Common interface of everything that can fly the evaluation scenarios:
// (state, target, dt) -> CTBR command.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual std::string name() const = 0;
  virtual void reset() {}
  virtual ControlInput command(const QuadState& state, const Vec3& target, double dt) = 0;
  // Hook for scripted reference controllers that act on the plant directly.
  virtual void intervene(QuadState& /*state*/, const Vec3& /*target*/) {}
};

class PidController : public Controller {
 public:
  PidController(PidGains gains, QuadParams model, std::string name = "PID")
      : gains_(gains), model_(model), name_(std::move(name)) {
    gains_.validate();
  }

  std::string name() const override { return name_; }
  void reset() override { state_ = PidState{}; }

  ControlInput command(const QuadState& s, const Vec3& target, double dt) override {
    auto [u, next] = pid_control(s, target, gains_, state_, dt, model_);
    state_ = next;
    return u;
  }

  const PidState& state() const { return state_; }

 private:
  PidGains gains_;
  QuadParams model_;
  PidState state_;
  std::string name_;
};

// Runs a trained actor through the same observation pipeline as training, with
// the moving reference substituted for the fixed target.
class PolicyController : public Controller {
 public:
  PolicyController(ActorNet<float> actor, ObsConfig obs, const EnvConfig& env_cfg,
                   std::string name = {})
      : actor_(std::move(actor)),
        obs_(obs),
        o0_(perfect_hover_observation(obs)),
        bounds_(env_cfg.action_bounds()),
        model_(env_cfg.nominal),
        name_(name.empty() ? obs.name() : std::move(name)) {
    if (actor_.input_width() != static_cast<Eigen::Index>(obs_.flat_width())) {
      throw Error(ErrorKind::ShapeError, "policy input width does not match observation config");
    }
    reset();
  }

  std::string name() const override { return name_; }

  void reset() override {
    history_ = ObservationHistory(obs_);
    f_cmd_ = model_.hover_thrust();
    prev_ = PolicyAction{};
    started_ = false;
  }

  ControlInput command(const QuadState& s, const Vec3& target, double dt) override {
    const Eigen::VectorXd slice =
        observation_slice(s, target, prev_.to_vector().cwiseQuotient(bounds_), obs_);
    if (!started_) {
      history_.reset(slice);
      started_ = true;
    } else {
      history_.push(slice);
    }
    const PolicyAction a = clamp_action(act(actor_, history_.flatten(), o0_), bounds_);
    f_cmd_ = std::clamp(f_cmd_ + a.df * dt, 0.0, model_.f_max);
    prev_ = a;
    return clamp_input(ControlInput{f_cmd_, a.omega_cmd}, model_);
  }

 private:
  ActorNet<float> actor_;
  ObsConfig obs_;
  Eigen::VectorXd o0_;
  Vec4 bounds_;
  QuadParams model_;
  std::string name_;
  ObservationHistory history_;
  double f_cmd_ = 0.0;
  PolicyAction prev_;
  bool started_ = false;
};

// Holds the nominal hover input forever.
class FrozenHoverController : public Controller {
 public:
  explicit FrozenHoverController(QuadParams model) : model_(model) {}
  std::string name() const override { return "frozen-hover"; }
  ControlInput command(const QuadState&, const Vec3&, double) override {
    return {model_.hover_thrust(), Vec3::Zero()};
  }

 private:
  QuadParams model_;
};

// Scripted reference: places the vehicle on the target at every tick.
class TeleportController : public Controller {
 public:
  explicit TeleportController(QuadParams model) : model_(model) {}
  std::string name() const override { return "teleport-oracle"; }
  ControlInput command(const QuadState&, const Vec3&, double) override {
    return {model_.hover_thrust(), Vec3::Zero()};
  }
  void intervene(QuadState& state, const Vec3& target) override {
    state = hover_state(model_, target);
  }

 private:
  QuadParams model_;
};

struct EvalConfig {
  QuadParams nominal;
  double ts = 0.01;
  int substeps = 1;
  double duration = 20.0;
  int runs = 3;
  double init_offset = 0.02;  // radius of the initial position perturbation, m
  bool randomize = false;
  RandomizationSpec randomization;
  RewardConfig reward;
  double stress_threshold = 0.50;  // m
  double speed_cap = 3.0;          // m/s
};

namespace detail {

struct Plant {
  QuadState quad;
  QuadParams params;
  DelayLine delay;
  std::mt19937_64 rng;
  RandomizationSpec rand;
  bool randomize = false;

  void apply(const ControlInput& u, double t0, double ts, int substeps) {
    double d = 0.0;
    if (randomize) {
      std::uniform_real_distribution<double> delay_dist(rand.delay_min, rand.delay_max);
      d = delay_dist(rng);
    }
    delay.push(u, t0 + d);
    delay.integrate(quad, params, t0, t0 + ts, ts / substeps);
  }
};

inline Plant make_plant(const EvalConfig& cfg, const Vec3& start, std::uint64_t seed) {
  Plant plant;
  plant.rng.seed(seed);
  plant.randomize = cfg.randomize;
  plant.rand = cfg.randomization;
  plant.params = cfg.randomize ? sample_params(cfg.nominal, cfg.randomization, plant.rng)
                               : cfg.nominal;
  plant.quad = hover_state(cfg.nominal, start);
  if (cfg.init_offset > 0.0) plant.quad.p += uniform_in_ball(plant.rng, cfg.init_offset);
  plant.delay.applied = ControlInput{cfg.nominal.hover_thrust(), Vec3::Zero()};
  return plant;
}

}  // namespace detail

// Closed-loop run against a moving reference; one sample per control tick.
// A run whose error leaves the allowed ball is truncated and flagged.
inline RunLog run_episode(Controller& controller, const TrajectorySpec& spec,
                          const EvalConfig& cfg, std::uint64_t seed) {
  if (!(cfg.duration > 0.0)) throw Error(ErrorKind::InvalidConfig, "duration must be positive");
  controller.reset();
  detail::Plant plant = detail::make_plant(cfg, target_at(spec, 0.0), seed);
  const long n = std::lround(cfg.duration / cfg.ts);
  RunLog log;
  log.samples.reserve(static_cast<std::size_t>(n));
  double prev_f = cfg.nominal.hover_thrust();
  for (long k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * cfg.ts;
    const Vec3 y = target_at(spec, t);
    controller.intervene(plant.quad, y);
    const Vec3 e = y - plant.quad.p;
    if (e.norm() > cfg.reward.e_m) {
      log.failed = true;
      break;
    }
    const ControlInput u = controller.command(plant.quad, y, cfg.ts);
    RunSample s;
    s.t = t;
    s.p = plant.quad.p;
    s.y = y;
    s.df = (u.f_cmd - prev_f) / cfg.ts;
    s.omega_cmd = u.omega_cmd;
    s.reward = reward(e, Vec4(s.df, u.omega_cmd.x(), u.omega_cmd.y(), u.omega_cmd.z()), cfg.reward);
    log.samples.push_back(s);
    prev_f = u.f_cmd;
    try {
      plant.apply(u, t, cfg.ts, cfg.substeps);
    } catch (const Error&) {
      log.failed = true;
      break;
    }
  }
  return log;
}

struct StressResult {
  double max_velocity = 0.0;  // m/s; +inf when the speed cap was reached
  double failure_time = 0.0;
  bool reached_cap = false;
  std::string diagnostic;
};

// Ramping circle until the error first exceeds the threshold; the score is
// the reference's tangential speed at that tick.
inline StressResult stress_test(Controller& controller, double radius, double ramp_accel,
                                const EvalConfig& cfg, std::uint64_t seed) {
  if (!(radius > 0.0) || !(ramp_accel > 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "stress test needs positive radius and ramp");
  }
  TrajectorySpec spec;
  spec.kind = TrajectoryKind::CircleRamp;
  spec.radius = radius;
  spec.ramp_accel = ramp_accel;
  EvalConfig quiet = cfg;
  quiet.init_offset = 0.0;

  controller.reset();
  detail::Plant plant = detail::make_plant(quiet, target_at(spec, 0.0), seed);
  StressResult out;
  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) * cfg.ts;
    const double speed = ramp_accel * t;
    if (speed >= cfg.speed_cap) {
      out.max_velocity = std::numeric_limits<double>::infinity();
      out.failure_time = t;
      out.reached_cap = true;
      return out;
    }
    const Vec3 y = target_at(spec, t);
    controller.intervene(plant.quad, y);
    if ((y - plant.quad.p).norm() > cfg.stress_threshold) {
      out.max_velocity = speed;
      out.failure_time = t;
      if (k == 0) out.diagnostic = "tracking lost at t=0";
      return out;
    }
    const ControlInput u = controller.command(plant.quad, y, cfg.ts);
    try {
      plant.apply(u, t, cfg.ts, cfg.substeps);
    } catch (const Error& err) {
      out.max_velocity = speed;
      out.failure_time = t;
      out.diagnostic = err.what();
      return out;
    }
  }
}

}  // namespace quadbench

#endif  // QUADBENCH_EVALUATION_HPP
