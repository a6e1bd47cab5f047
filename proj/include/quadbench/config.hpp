#ifndef QUADBENCH_CONFIG_HPP
#define QUADBENCH_CONFIG_HPP

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <openssl/evp.h>

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "quadbench/env.hpp"
#include "quadbench/error.hpp"
#include "quadbench/evaluation.hpp"
#include "quadbench/io.hpp"
#include "quadbench/pid.hpp"
#include "quadbench/sac.hpp"
#include "quadbench/trajectories.hpp"

namespace quadbench {

// Evaluation knobs that are not already part of the environment.
struct EvalSettings {
  double duration = 20.0;
  int runs = 3;
  double init_offset = 0.02;
  bool randomize = false;
  double stress_radius = 1.0;
  double stress_ramp = 0.03;
  double stress_threshold = 0.50;
  double speed_cap = 3.0;
};

// Experiment plan: budgets, seeds and the sets of variants each command runs.
struct PlanConfig {
  std::uint64_t seed = 1;
  long train_steps = 50'000;
  int n_envs = 1;
  long checkpoint_every = 0;
  std::string train_obs = "eW-R-u";
  std::vector<std::string> benchmark_obs = benchmark_config_names();
  std::vector<std::string> scenarios = default_scenarios();
  std::vector<int> window_histories{1, 2, 5, 10, 15};
  std::string window_obs = "eW-R-u";
  std::vector<std::string> input_obs{"eW-vW-R-u", "eW-R-u", "eW-q-u"};
  std::vector<std::string> input_scenarios = default_scenarios();
  std::vector<std::string> stress_obs = benchmark_config_names();
};

struct BenchConfig {
  EnvConfig env;
  SacConfig sac;
  PidGains pid;
  TrajectorySpec trajectory;
  EvalSettings eval;
  PlanConfig plan;

  EvalConfig eval_config() const {
    EvalConfig e;
    e.nominal = env.nominal;
    e.ts = env.ts;
    e.substeps = env.substeps;
    e.duration = eval.duration;
    e.runs = eval.runs;
    e.init_offset = eval.init_offset;
    e.randomize = eval.randomize;
    e.randomization = env.randomization;
    e.reward = env.reward;
    e.stress_threshold = eval.stress_threshold;
    e.speed_cap = eval.speed_cap;
    return e;
  }

  // Environment for a given observation config name and window length.
  EnvConfig env_for(const std::string& obs_name, int history) const {
    EnvConfig e = env;
    e.obs = parse_obs_config(obs_name, history);
    return e;
  }

  void validate() const {
    env.validate();
    sac.validate();
    pid.validate();
    trajectory.validate();
    if (!(eval.duration > 0.0) || eval.runs < 1 || !(eval.stress_radius > 0.0) ||
        !(eval.stress_ramp > 0.0) || !(eval.stress_threshold > 0.0) || !(eval.speed_cap > 0.0)) {
      throw Error(ErrorKind::InvalidConfig, "eval settings must be positive");
    }
    if (plan.train_steps < 0 || plan.n_envs < 1) {
      throw Error(ErrorKind::InvalidConfig, "plan: train_steps >= 0, n_envs >= 1");
    }
    for (int h : plan.window_histories) {
      if (h < 1) throw Error(ErrorKind::InvalidConfig, "plan: window histories must be >= 1");
    }
    for (const auto* list : {&plan.benchmark_obs, &plan.input_obs, &plan.stress_obs}) {
      for (const auto& n : *list) parse_obs_config(n);
    }
    parse_obs_config(plan.train_obs);
    parse_obs_config(plan.window_obs);
    for (const auto* list : {&plan.scenarios, &plan.input_scenarios}) {
      for (const auto& n : *list) parse_scenario(n, trajectory);
    }
  }
};

using KeyValues = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  T value{};
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size() || t.empty()) {
    throw Error(ErrorKind::InvalidConfig, key + ": cannot parse '" + text + "'");
  }
  return value;
}

template <class T>
std::string format_value(const T& v) {
  if constexpr (std::is_same_v<T, double>) {
    return format_double(v);
  } else if constexpr (std::is_same_v<T, bool>) {
    return v ? "true" : "false";
  } else if constexpr (std::is_same_v<T, std::string>) {
    return v;
  } else if constexpr (std::is_same_v<T, Vec3>) {
    return format_double(v.x()) + ", " + format_double(v.y()) + ", " + format_double(v.z());
  } else if constexpr (std::is_same_v<T, std::vector<int>>) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
    return s;
  } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
    return join_names(v);
  } else {
    return std::to_string(v);
  }
}

template <class T>
T parse_value(const std::string& key, const std::string& text) {
  if constexpr (std::is_same_v<T, bool>) {
    const std::string t = trim(text);
    if (t == "true" || t == "1") return true;
    if (t == "false" || t == "0") return false;
    throw Error(ErrorKind::InvalidConfig, key + ": expected true/false, got '" + text + "'");
  } else if constexpr (std::is_same_v<T, std::string>) {
    return trim(text);
  } else if constexpr (std::is_same_v<T, Vec3>) {
    const auto parts = split_list(text);
    if (parts.size() != 3) throw Error(ErrorKind::InvalidConfig, key + ": expected 3 values");
    return Vec3(parse_number<double>(key, parts[0]), parse_number<double>(key, parts[1]),
                parse_number<double>(key, parts[2]));
  } else if constexpr (std::is_same_v<T, std::vector<int>>) {
    std::vector<int> out;
    for (const auto& p : split_list(text)) out.push_back(parse_number<int>(key, p));
    return out;
  } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
    return split_list(text);
  } else {
    return parse_number<T>(key, text);
  }
}

struct Binding {
  std::function<std::string(BenchConfig&)> get;
  std::function<void(BenchConfig&, const std::string&)> set;
};

template <class T, class Access>
Binding bind(const std::string& key, Access access) {
  return {[access](BenchConfig& c) { return format_value<T>(access(c)); },
          [access, key](BenchConfig& c, const std::string& text) {
            access(c) = parse_value<T>(key, text);
          }};
}

#define QB_FIELD(T, key, expr) \
  {key, bind<T>(key, [](BenchConfig& c) -> T& { return expr; })}

inline const std::map<std::string, Binding>& bindings() {
  static const std::map<std::string, Binding> table = {
      QB_FIELD(double, "dynamics.mass", c.env.nominal.m),
      QB_FIELD(Vec3, "dynamics.inertia", c.env.nominal.J),
      QB_FIELD(double, "dynamics.k_f", c.env.nominal.k_f),
      QB_FIELD(Vec3, "dynamics.k_omega", c.env.nominal.k_omega),
      QB_FIELD(Vec3, "dynamics.drag", c.env.nominal.drag),
      QB_FIELD(Vec3, "dynamics.gravity", c.env.nominal.g),
      QB_FIELD(double, "dynamics.f_max", c.env.nominal.f_max),
      QB_FIELD(Vec3, "dynamics.omega_max", c.env.nominal.omega_max),

      QB_FIELD(double, "env.ts", c.env.ts),
      QB_FIELD(int, "env.substeps", c.env.substeps),
      QB_FIELD(int, "env.max_steps", c.env.max_steps),
      QB_FIELD(double, "env.df_max", c.env.df_max),
      QB_FIELD(Vec3, "env.target", c.env.target),
      QB_FIELD(int, "env.history", c.env.obs.history),
      QB_FIELD(double, "env.random_fraction", c.env.randomization.fraction),
      QB_FIELD(double, "env.gravity_bias_max", c.env.randomization.g_bias_max),
      QB_FIELD(double, "env.delay_min", c.env.randomization.delay_min),
      QB_FIELD(double, "env.delay_max", c.env.randomization.delay_max),
      QB_FIELD(double, "env.init_dist_min", c.env.init.dist_min),
      QB_FIELD(double, "env.init_dist_max", c.env.init.dist_max),
      QB_FIELD(double, "env.init_tilt_max", c.env.init.max_tilt),
      QB_FIELD(double, "env.init_yaw_max", c.env.init.max_yaw),
      QB_FIELD(double, "env.init_speed_max", c.env.init.max_speed),
      QB_FIELD(double, "env.init_rate_max", c.env.init.max_rate),

      QB_FIELD(double, "reward.beta", c.env.reward.beta),
      QB_FIELD(double, "reward.k_u", c.env.reward.k_u),
      QB_FIELD(double, "reward.e_m", c.env.reward.e_m),
      QB_FIELD(double, "reward.crash_penalty", c.env.reward.crash_penalty),

      QB_FIELD(double, "sac.gamma", c.sac.gamma),
      QB_FIELD(double, "sac.tau", c.sac.tau),
      QB_FIELD(double, "sac.lr", c.sac.lr),
      QB_FIELD(int, "sac.batch", c.sac.batch),
      QB_FIELD(double, "sac.entropy_target", c.sac.entropy_target),
      QB_FIELD(std::size_t, "sac.buffer_capacity", c.sac.buffer_capacity),
      QB_FIELD(int, "sac.updates_per_step", c.sac.updates_per_step),
      QB_FIELD(int, "sac.warmup_steps", c.sac.warmup_steps),
      QB_FIELD(double, "sac.init_alpha", c.sac.init_alpha),
      QB_FIELD(bool, "sac.learn_alpha", c.sac.learn_alpha),
      QB_FIELD(bool, "sac.twin_critic", c.sac.twin_critic),
      QB_FIELD(bool, "sac.offset_in_training", c.sac.offset_in_training),
      QB_FIELD(std::vector<int>, "sac.actor_hidden", c.sac.actor_hidden),
      QB_FIELD(std::vector<int>, "sac.critic_hidden", c.sac.critic_hidden),

      QB_FIELD(Vec3, "pid.kp_pos", c.pid.kp_pos),
      QB_FIELD(Vec3, "pid.ki_pos", c.pid.ki_pos),
      QB_FIELD(Vec3, "pid.kd_pos", c.pid.kd_pos),
      QB_FIELD(Vec3, "pid.kp_att", c.pid.kp_att),
      QB_FIELD(Vec3, "pid.kd_att", c.pid.kd_att),
      QB_FIELD(Vec3, "pid.integral_limit", c.pid.integral_limit),
      QB_FIELD(double, "pid.tilt_max", c.pid.tilt_max),

      QB_FIELD(Vec3, "trajectories.center", c.trajectory.center),
      QB_FIELD(double, "trajectories.a", c.trajectory.a),
      QB_FIELD(double, "trajectories.b", c.trajectory.b),
      QB_FIELD(double, "trajectories.c_z", c.trajectory.c_z),
      QB_FIELD(double, "trajectories.period", c.trajectory.period),
      QB_FIELD(double, "trajectories.duration", c.eval.duration),
      QB_FIELD(int, "trajectories.runs", c.eval.runs),
      QB_FIELD(double, "trajectories.init_offset", c.eval.init_offset),
      QB_FIELD(bool, "trajectories.randomize", c.eval.randomize),
      QB_FIELD(double, "trajectories.stress_radius", c.eval.stress_radius),
      QB_FIELD(double, "trajectories.stress_ramp", c.eval.stress_ramp),
      QB_FIELD(double, "trajectories.stress_threshold", c.eval.stress_threshold),
      QB_FIELD(double, "trajectories.speed_cap", c.eval.speed_cap),

      QB_FIELD(std::uint64_t, "plan.seed", c.plan.seed),
      QB_FIELD(long, "plan.train_steps", c.plan.train_steps),
      QB_FIELD(int, "plan.n_envs", c.plan.n_envs),
      QB_FIELD(long, "plan.checkpoint_every", c.plan.checkpoint_every),
      QB_FIELD(std::string, "plan.train_obs", c.plan.train_obs),
      QB_FIELD(std::vector<std::string>, "plan.benchmark_obs", c.plan.benchmark_obs),
      QB_FIELD(std::vector<std::string>, "plan.scenarios", c.plan.scenarios),
      QB_FIELD(std::vector<int>, "plan.window_histories", c.plan.window_histories),
      QB_FIELD(std::string, "plan.window_obs", c.plan.window_obs),
      QB_FIELD(std::vector<std::string>, "plan.input_obs", c.plan.input_obs),
      QB_FIELD(std::vector<std::string>, "plan.input_scenarios", c.plan.input_scenarios),
      QB_FIELD(std::vector<std::string>, "plan.stress_obs", c.plan.stress_obs),
  };
  return table;
}

#undef QB_FIELD

}  // namespace detail

inline KeyValues to_key_values(BenchConfig cfg) {
  KeyValues out;
  for (const auto& [key, b] : detail::bindings()) out[key] = b.get(cfg);
  return out;
}

inline void apply_setting(BenchConfig& cfg, const std::string& key, const std::string& value) {
  const auto& table = detail::bindings();
  const auto it = table.find(key);
  if (it == table.end()) throw Error(ErrorKind::InvalidConfig, "unknown config key '" + key + "'");
  it->second.set(cfg, value);
}

// "section.key=value" as given on the command line.
inline void apply_override(BenchConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw Error(ErrorKind::InvalidConfig, "override '" + assignment + "' is not key=value");
  }
  apply_setting(cfg, detail::trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

inline BenchConfig parse_ini(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::InvalidConfig, e.what());
  }
  BenchConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw Error(ErrorKind::InvalidConfig, "key '" + section + "' outside a section");
    }
    for (const auto& [key, value] : body) apply_setting(cfg, section + "." + key, value.data());
  }
  return cfg;
}

inline BenchConfig load_config(const std::filesystem::path& path,
                               const std::vector<std::string>& overrides = {}) {
  BenchConfig cfg = parse_ini(read_file(path));
  for (const auto& o : overrides) apply_override(cfg, o);
  cfg.validate();
  return cfg;
}

// One "section.key = value" line per setting, sorted by key.
inline std::string canonical_text(const BenchConfig& cfg) {
  std::string out;
  for (const auto& [key, value] : to_key_values(cfg)) out += key + " = " + value + "\n";
  return out;
}

// INI rendering of the full effective configuration.
inline std::string to_ini(const BenchConfig& cfg) {
  std::string out;
  std::string current;
  for (const auto& [key, value] : to_key_values(cfg)) {
    const auto dot = key.find('.');
    const std::string section = key.substr(0, dot);
    if (section != current) {
      out += (current.empty() ? "[" : "\n[") + section + "]\n";
      current = section;
    }
    out += key.substr(dot + 1) + " = " + value + "\n";
  }
  return out;
}

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::Io, "sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

inline std::string config_hash(const BenchConfig& cfg) { return sha256_hex(canonical_text(cfg)); }

}  // namespace quadbench

#endif  // QUADBENCH_CONFIG_HPP
