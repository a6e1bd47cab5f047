#ifndef QUADBENCH_OBSERVATION_HPP
#define QUADBENCH_OBSERVATION_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <deque>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "quadbench/dynamics.hpp"
#include "quadbench/error.hpp"

namespace quadbench {

using Vec4 = Eigen::Vector4d;

enum class ErrorFrame { World, Body };
enum class ObsExtras { None, VelocityWorld, Quaternion };

// Which signals the actor sees, and how many past steps.
struct ObsConfig {
  ErrorFrame frame = ErrorFrame::World;
  bool include_R = true;
  bool include_omega = true;
  bool include_prev_action = true;
  ObsExtras extras = ObsExtras::None;
  int history = 10;

  // Width of a single step slice.
  std::size_t step_width() const {
    std::size_t n = 3;
    if (include_R) n += 9;
    if (include_omega) n += 3;
    if (extras == ObsExtras::VelocityWorld) n += 3;
    if (extras == ObsExtras::Quaternion) n += 4;
    if (include_prev_action) n += 4;
    return n;
  }

  std::size_t flat_width() const { return step_width() * static_cast<std::size_t>(history); }

  // Canonical name, e.g. "eW-R-w-u". The history length is not part of it.
  std::string name() const {
    std::string out = frame == ErrorFrame::World ? "eW" : "eB";
    if (extras == ObsExtras::VelocityWorld) out += "-vW";
    if (include_R) out += "-R";
    if (extras == ObsExtras::Quaternion) out += "-q";
    if (include_omega) out += "-w";
    if (include_prev_action) out += "-u";
    return out;
  }

  bool operator==(const ObsConfig&) const = default;
};

// The eight benchmark configurations followed by the two input ablations.
inline const std::vector<std::string>& benchmark_config_names() {
  static const std::vector<std::string> names = {
      "eW-R-w-u", "eW-R-u", "eW-w-u", "eW-u", "eB-R-w-u", "eB-R-u", "eB-w-u", "eB-u"};
  return names;
}

inline const std::vector<std::string>& all_config_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n = benchmark_config_names();
    n.push_back("eW-vW-R-u");
    n.push_back("eW-q-u");
    return n;
  }();
  return names;
}

inline std::string join_names(const std::vector<std::string>& names) {
  std::ostringstream os;
  for (std::size_t i = 0; i < names.size(); ++i) os << (i ? ", " : "") << names[i];
  return os.str();
}

// Parses a canonical name. Tokens must appear in canonical order; the previous
// action is mandatory and at most one extra signal may be present.
inline ObsConfig parse_obs_config(std::string_view name, int history = 10) {
  auto fail = [&] {
    throw Error(ErrorKind::UnknownName, "unknown observation config '" + std::string(name) +
                                            "'; valid names: " + join_names(all_config_names()));
  };
  std::vector<std::string> tokens;
  std::string token;
  std::istringstream is{std::string(name)};
  while (std::getline(is, token, '-')) tokens.push_back(token);
  if (tokens.size() < 2) fail();

  ObsConfig cfg;
  cfg.history = history;
  cfg.include_R = false;
  cfg.include_omega = false;
  cfg.include_prev_action = false;
  if (tokens[0] == "eW") {
    cfg.frame = ErrorFrame::World;
  } else if (tokens[0] == "eB") {
    cfg.frame = ErrorFrame::Body;
  } else {
    fail();
  }
  static const std::vector<std::string> order = {"vW", "R", "q", "w", "u"};
  std::size_t cursor = 0;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    while (cursor < order.size() && order[cursor] != tokens[i]) ++cursor;
    if (cursor == order.size()) fail();
    const std::string& t = order[cursor++];
    if (t == "vW") cfg.extras = ObsExtras::VelocityWorld;
    if (t == "R") cfg.include_R = true;
    if (t == "q") {
      if (cfg.extras != ObsExtras::None) fail();
      cfg.extras = ObsExtras::Quaternion;
    }
    if (t == "w") cfg.include_omega = true;
    if (t == "u") cfg.include_prev_action = true;
  }
  if (!cfg.include_prev_action) fail();
  if (history < 1) throw Error(ErrorKind::InvalidConfig, "history must be >= 1");
  return cfg;
}

inline Vec3 body_frame_error(const Vec3& e_world, const Mat3& R) {
  return R.transpose() * e_world;
}

// Unit quaternion (w, x, y, z) of R with the sign fixed so that w >= 0.
inline Vec4 rotation_to_quaternion(const Mat3& R) {
  Eigen::Quaterniond q(R);
  q.normalize();
  Vec4 out(q.w(), q.x(), q.y(), q.z());
  if (out[0] < 0.0) out = -out;
  return out;
}

// One step of the actor observation in the fixed order
// [e, R row-major, omega, v_W, q, u(k-1)], restricted to the enabled signals.
// prev_action is expected divided by the action bounds, i.e. in [-1, 1].
inline Eigen::VectorXd observation_slice(const QuadState& state, const Vec3& target,
                                         const Vec4& prev_action, const ObsConfig& cfg) {
  Eigen::VectorXd out(cfg.step_width());
  Eigen::Index i = 0;
  const Vec3 e_world = target - state.p;
  const Vec3 e = cfg.frame == ErrorFrame::World ? e_world : body_frame_error(e_world, state.R);
  out.segment<3>(i) = e;
  i += 3;
  if (cfg.include_R) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) out[i++] = state.R(r, c);
  }
  if (cfg.include_omega) {
    out.segment<3>(i) = state.omega;
    i += 3;
  }
  if (cfg.extras == ObsExtras::VelocityWorld) {
    out.segment<3>(i) = state.v;
    i += 3;
  }
  if (cfg.extras == ObsExtras::Quaternion) {
    out.segment<4>(i) = rotation_to_quaternion(state.R);
    i += 4;
  }
  if (cfg.include_prev_action) {
    out.segment<4>(i) = prev_action;
    i += 4;
  }
  return out;
}

// Sliding window of per-step slices, newest first.
class ObservationHistory {
 public:
  ObservationHistory() = default;
  explicit ObservationHistory(ObsConfig cfg) : cfg_(cfg) {}

  const ObsConfig& config() const { return cfg_; }
  std::size_t size() const { return slices_.size(); }

  // Fills the window by repeating the first slice.
  void reset(const Eigen::VectorXd& first) {
    check_width(first);
    slices_.assign(static_cast<std::size_t>(cfg_.history), first);
  }

  void push(const Eigen::VectorXd& slice) {
    check_width(slice);
    slices_.push_front(slice);
    while (slices_.size() > static_cast<std::size_t>(cfg_.history)) slices_.pop_back();
  }

  Eigen::VectorXd flatten() const {
    const auto n = static_cast<Eigen::Index>(cfg_.step_width());
    Eigen::VectorXd out(n * static_cast<Eigen::Index>(slices_.size()));
    for (std::size_t k = 0; k < slices_.size(); ++k) {
      out.segment(static_cast<Eigen::Index>(k) * n, n) = slices_[k];
    }
    return out;
  }

  bool operator==(const ObservationHistory&) const = default;

 private:
  void check_width(const Eigen::VectorXd& slice) const {
    if (static_cast<std::size_t>(slice.size()) != cfg_.step_width()) {
      throw Error(ErrorKind::ShapeError, "observation slice width mismatch");
    }
  }

  ObsConfig cfg_;
  std::deque<Eigen::VectorXd> slices_;
};

// Observation of a vehicle hovering exactly at its target with zero previous
// action, repeated over the whole window.
inline Eigen::VectorXd perfect_hover_observation(const ObsConfig& cfg) {
  QuadState hover;
  const Eigen::VectorXd slice = observation_slice(hover, Vec3::Zero(), Vec4::Zero(), cfg);
  ObservationHistory h(cfg);
  h.reset(slice);
  return h.flatten();
}

}  // namespace quadbench

#endif  // QUADBENCH_OBSERVATION_HPP
