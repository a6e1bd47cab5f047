#ifndef QUADBENCH_DYNAMICS_HPP
#define QUADBENCH_DYNAMICS_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "quadbench/error.hpp"

namespace quadbench {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

constexpr double kGravity = 9.81;

// 19-dimensional simulated state. Position and velocity in the world frame,
// R maps body to world, body rates in the body frame.
struct QuadState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Mat3 R = Mat3::Identity();
  Vec3 omega = Vec3::Zero();
  double f = 0.0;

  bool operator==(const QuadState&) const = default;
};

// Physical parameters. m, J, drag and g_bias are the randomized subset; the
// actuator limits are carried alongside because every consumer needs them.
struct QuadParams {
  double m = 0.75;
  Vec3 J{0.0025, 0.0021, 0.0043};
  double k_f = 20.0;
  Vec3 k_omega{25.0, 25.0, 12.0};
  Vec3 drag{0.10, 0.10, 0.15};
  Vec3 g{0.0, 0.0, -kGravity};
  Vec3 g_bias = Vec3::Zero();
  double f_max = 4.0 * 0.75 * kGravity;
  Vec3 omega_max{5.0, 5.0, 2.0};

  double hover_thrust() const { return m * -g.z(); }

  void validate() const {
    auto bad = [](const char* what) { throw Error(ErrorKind::InvalidConfig, what); };
    if (!(m > 0.0)) bad("mass must be positive");
    if (!(J.array() > 0.0).all()) bad("inertia entries must be positive");
    if (!(k_f > 0.0)) bad("k_f must be positive");
    if (!(k_omega.array() > 0.0).all()) bad("k_omega entries must be positive");
    if (!(drag.array() >= 0.0).all()) bad("drag entries must be non-negative");
    if (!(f_max > 0.0)) bad("f_max must be positive");
    if (!(omega_max.array() > 0.0).all()) bad("omega_max entries must be positive");
  }

  bool operator==(const QuadParams&) const = default;
};

struct ControlInput {
  double f_cmd = 0.0;
  Vec3 omega_cmd = Vec3::Zero();

  bool operator==(const ControlInput&) const = default;
};

struct StateDerivative {
  Vec3 dp = Vec3::Zero();
  Vec3 dv = Vec3::Zero();
  Mat3 dR = Mat3::Zero();
  Vec3 domega = Vec3::Zero();
  double df = 0.0;
};

inline Mat3 skew(const Vec3& w) {
  Mat3 s;
  s << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return s;
}

inline bool is_finite(const QuadState& s) {
  return s.p.allFinite() && s.v.allFinite() && s.R.allFinite() &&
         s.omega.allFinite() && std::isfinite(s.f);
}

// Name of the first non-finite field, or empty when the state is finite.
inline std::string first_non_finite_field(const QuadState& s) {
  if (!s.p.allFinite()) return "p";
  if (!s.v.allFinite()) return "v";
  if (!s.R.allFinite()) return "R";
  if (!s.omega.allFinite()) return "omega";
  if (!std::isfinite(s.f)) return "f";
  return {};
}

inline double orthonormality_error(const Mat3& R) {
  return (R.transpose() * R - Mat3::Identity()).norm();
}

// Nearest rotation in the Frobenius sense (polar factor via SVD).
inline Mat3 orthonormalize(const Mat3& raw) {
  if (!raw.allFinite()) throw Error(ErrorKind::NonFiniteState, "R");
  if (raw.determinant() <= 0.0) {
    throw Error(ErrorKind::DegenerateRotation, "det(R) <= 0");
  }
  // Exact rotations pass through untouched.
  if (orthonormality_error(raw) < 1e-15) return raw;
  Eigen::JacobiSVD<Mat3> svd(raw, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 R = svd.matrixU() * svd.matrixV().transpose();
  if (R.determinant() < 0.0) {
    Mat3 U = svd.matrixU();
    U.col(2) *= -1.0;
    R = U * svd.matrixV().transpose();
  }
  return R;
}

inline Vec3 drag_force(const Vec3& v, const QuadParams& params) {
  return -params.drag.cwiseProduct(v);
}

// Translational acceleration of the current state; independent of the inputs.
inline Vec3 linear_acceleration(const QuadState& state, const QuadParams& params) {
  if (!is_finite(state)) {
    throw Error(ErrorKind::NonFiniteState, first_non_finite_field(state));
  }
  return (state.R.col(2) * state.f + drag_force(state.v, params)) / params.m +
         params.g + params.g_bias;
}

// Continuous-time model. The rate loop is a per-axis first-order response with
// rate k_omega plus the gyroscopic coupling: J domega = J k_omega (w_cmd - w) - w x J w.
inline StateDerivative derivative(const QuadState& state, const ControlInput& input,
                                  const QuadParams& params) {
  if (!is_finite(state)) {
    throw Error(ErrorKind::NonFiniteState, first_non_finite_field(state));
  }
  if (!std::isfinite(input.f_cmd) || !input.omega_cmd.allFinite()) {
    throw Error(ErrorKind::NonFiniteState, "input");
  }
  StateDerivative d;
  d.dp = state.v;
  d.dv = linear_acceleration(state, params);
  d.dR = state.R * skew(state.omega);
  const Vec3 Jw = params.J.cwiseProduct(state.omega);
  const Vec3 rate_torque =
      params.J.cwiseProduct(params.k_omega.cwiseProduct(input.omega_cmd - state.omega));
  d.domega = (rate_torque - state.omega.cross(Jw)).cwiseQuotient(params.J);
  d.df = params.k_f * (input.f_cmd - state.f);
  return d;
}

namespace detail {

inline QuadState advance(const QuadState& s, const StateDerivative& d, double h) {
  QuadState out;
  out.p = s.p + h * d.dp;
  out.v = s.v + h * d.dv;
  out.R = s.R + h * d.dR;
  out.omega = s.omega + h * d.domega;
  out.f = s.f + h * d.df;
  return out;
}

}  // namespace detail

// One classical RK4 step with the input held over [t, t + dt], then projection
// of R onto SO(3) and clamping of the thrust to [0, f_max].
inline QuadState step(const QuadState& state, const ControlInput& input,
                      const QuadParams& params, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidConfig, "dt must be positive");
  const StateDerivative k1 = derivative(state, input, params);
  const StateDerivative k2 = derivative(detail::advance(state, k1, dt / 2), input, params);
  const StateDerivative k3 = derivative(detail::advance(state, k2, dt / 2), input, params);
  const StateDerivative k4 = derivative(detail::advance(state, k3, dt), input, params);

  QuadState next;
  next.p = state.p + dt / 6.0 * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
  next.v = state.v + dt / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
  next.R = state.R + dt / 6.0 * (k1.dR + 2.0 * k2.dR + 2.0 * k3.dR + k4.dR);
  next.omega = state.omega +
               dt / 6.0 * (k1.domega + 2.0 * k2.domega + 2.0 * k3.domega + k4.domega);
  next.f = state.f + dt / 6.0 * (k1.df + 2.0 * k2.df + 2.0 * k3.df + k4.df);

  if (const std::string field = first_non_finite_field(next); !field.empty()) {
    throw Error(ErrorKind::IntegrationDiverged, field);
  }
  try {
    next.R = orthonormalize(next.R);
  } catch (const Error&) {
    throw Error(ErrorKind::IntegrationDiverged, "R");
  }
  next.f = std::clamp(next.f, 0.0, params.f_max);
  return next;
}

// Hover at the given position with the thrust state matching the weight.
inline QuadState hover_state(const QuadParams& params, const Vec3& position = Vec3::Zero()) {
  QuadState s;
  s.p = position;
  s.f = params.hover_thrust();
  return s;
}

inline ControlInput clamp_input(const ControlInput& in, const QuadParams& params) {
  ControlInput out;
  out.f_cmd = std::clamp(in.f_cmd, 0.0, params.f_max);
  out.omega_cmd = in.omega_cmd.cwiseMax(-params.omega_max).cwiseMin(params.omega_max);
  return out;
}

}  // namespace quadbench

#endif  // QUADBENCH_DYNAMICS_HPP
