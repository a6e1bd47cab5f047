#ifndef QUADBENCH_PID_HPP
#define QUADBENCH_PID_HPP

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "quadbench/dynamics.hpp"
#include "quadbench/error.hpp"

namespace quadbench {

// Cascaded gains: outer position PID producing a desired acceleration, inner
// attitude PD producing body-rate commands.
struct PidGains {
  Vec3 kp_pos{12.0, 12.0, 12.0};
  Vec3 ki_pos{0.2, 0.2, 0.2};
  Vec3 kd_pos{5.0, 5.0, 5.0};
  Vec3 kp_att{9.0, 9.0, 4.0};
  Vec3 kd_att{0.0, 0.0, 0.0};
  Vec3 integral_limit{1.0, 1.0, 1.0};  // bound on each position-error integral, m*s
  double tilt_max = std::numbers::pi / 4.0;

  void validate() const {
    const bool ok = (kp_pos.array() >= 0).all() && (ki_pos.array() >= 0).all() &&
                    (kd_pos.array() >= 0).all() && (kp_att.array() >= 0).all() &&
                    (kd_att.array() >= 0).all() && (integral_limit.array() > 0).all() &&
                    tilt_max > 0.0;
    if (!ok) throw Error(ErrorKind::InvalidConfig, "pid gains must be >= 0, limits > 0");
  }
};

struct PidState {
  Vec3 integral = Vec3::Zero();
  double time = 0.0;

  bool operator==(const PidState&) const = default;
};

// Rotation vector of R (axis * angle).
inline Vec3 rotation_log(const Mat3& R) {
  const Eigen::AngleAxisd aa(R);
  return aa.angle() * aa.axis();
}

// Rotation with body z along thrust_dir and zero yaw heading.
inline Mat3 attitude_from_thrust(const Vec3& thrust_dir) {
  const Vec3 z = thrust_dir.normalized();
  Vec3 y = z.cross(Vec3::UnitX());
  if (y.norm() < 1e-9) y = Vec3::UnitY();
  y.normalize();
  const Vec3 x = y.cross(z);
  Mat3 R;
  R.col(0) = x;
  R.col(1) = y;
  R.col(2) = z;
  return R;
}

// One control tick. `model` supplies the mass and actuator limits the
// controller assumes (nominal values, not the randomized plant).
inline std::pair<ControlInput, PidState> pid_control(const QuadState& quad, const Vec3& target,
                                                     const PidGains& gains, const PidState& pid,
                                                     double dt, const QuadParams& model) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidConfig, "dt must be positive");
  PidState next = pid;
  next.time += dt;
  const Vec3 e = target - quad.p;
  next.integral = (pid.integral + e * dt).cwiseMax(-gains.integral_limit).cwiseMin(gains.integral_limit);

  const Vec3 acc_des = gains.kp_pos.cwiseProduct(e) + gains.ki_pos.cwiseProduct(next.integral) -
                       gains.kd_pos.cwiseProduct(quad.v);
  Vec3 thrust_vec = model.m * (acc_des - model.g);

  // Tilt limit: keep the vertical component, shrink the horizontal one.
  const double vertical = std::max(thrust_vec.z(), 1e-3);
  const double max_horizontal = vertical * std::tan(gains.tilt_max);
  const double horizontal = thrust_vec.head<2>().norm();
  if (horizontal > max_horizontal) {
    thrust_vec.head<2>() *= max_horizontal / horizontal;
  }
  thrust_vec.z() = vertical;

  const Mat3 R_des = attitude_from_thrust(thrust_vec);
  const Vec3 att_err = rotation_log(R_des.transpose() * quad.R);

  ControlInput u;
  u.f_cmd = thrust_vec.dot(quad.R.col(2));
  u.omega_cmd = -gains.kp_att.cwiseProduct(att_err) - gains.kd_att.cwiseProduct(quad.omega);
  return {clamp_input(u, model), next};
}

}  // namespace quadbench

#endif  // QUADBENCH_PID_HPP
