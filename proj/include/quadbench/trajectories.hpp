#ifndef QUADBENCH_TRAJECTORIES_HPP
#define QUADBENCH_TRAJECTORIES_HPP

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "quadbench/dynamics.hpp"
#include "quadbench/error.hpp"

namespace quadbench {

enum class TrajectoryKind { Hover, Ellipse, EightPlanar, Eight3d, CircleRamp };

struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::Hover;
  Vec3 center = Vec3::Zero();
  double a = 1.0;
  double b = 0.5;
  double c_z = 0.3;
  double radius = 1.0;
  double period = 20.0;
  double speed_multiplier = 1.0;
  double ramp_accel = 0.05;

  bool periodic() const {
    return kind == TrajectoryKind::Ellipse || kind == TrajectoryKind::EightPlanar ||
           kind == TrajectoryKind::Eight3d;
  }

  // Scenario name used in result tables, e.g. "eight3d-x2".
  std::string name() const {
    std::string base;
    switch (kind) {
      case TrajectoryKind::Hover: base = "hover"; break;
      case TrajectoryKind::Ellipse: base = "ellipse"; break;
      case TrajectoryKind::EightPlanar: base = "eight2d"; break;
      case TrajectoryKind::Eight3d: base = "eight3d"; break;
      case TrajectoryKind::CircleRamp: base = "circle-ramp"; break;
    }
    if (speed_multiplier != 1.0) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "-x%g", speed_multiplier);
      base += buf;
    }
    return base;
  }

  void validate() const {
    if (!(period > 0.0) || !(speed_multiplier > 0.0)) {
      throw Error(ErrorKind::InvalidConfig, "trajectory: period and speed multiplier must be > 0");
    }
    if (kind != TrajectoryKind::Hover &&
        !(a > 0.0 && b > 0.0 && c_z > 0.0 && radius > 0.0 && ramp_accel > 0.0)) {
      throw Error(ErrorKind::InvalidConfig, "trajectory: sizes must be > 0");
    }
  }
};

inline double phase(const TrajectorySpec& s, double t) {
  return 2.0 * std::numbers::pi * s.speed_multiplier * t / s.period;
}

// Angle swept by the ramping circle: the tangential speed grows as ramp_accel * t.
inline double ramp_angle(const TrajectorySpec& s, double t) {
  return s.ramp_accel * t * t / (2.0 * s.radius);
}

inline Vec3 target_at(const TrajectorySpec& s, double t) {
  switch (s.kind) {
    case TrajectoryKind::Hover:
      return s.center;
    case TrajectoryKind::Ellipse: {
      const double th = phase(s, t);
      return s.center + Vec3(s.a * std::cos(th), s.b * std::sin(th), 0.0);
    }
    case TrajectoryKind::EightPlanar: {
      const double th = phase(s, t);
      return s.center + Vec3(s.a * std::sin(th), s.b * std::sin(2.0 * th), 0.0);
    }
    case TrajectoryKind::Eight3d: {
      const double th = phase(s, t);
      return s.center + Vec3(s.a * std::sin(th), s.b * std::sin(2.0 * th),
                             s.c_z * std::sin(2.0 * th));
    }
    case TrajectoryKind::CircleRamp: {
      const double phi = ramp_angle(s, t);
      return s.center + s.radius * Vec3(std::cos(phi), std::sin(phi), 0.0);
    }
  }
  return s.center;
}

// Derivative of the path with respect to the phase angle (periodic kinds).
inline Vec3 path_tangent(const TrajectorySpec& s, double th) {
  switch (s.kind) {
    case TrajectoryKind::Ellipse:
      return {-s.a * std::sin(th), s.b * std::cos(th), 0.0};
    case TrajectoryKind::EightPlanar:
      return {s.a * std::cos(th), 2.0 * s.b * std::cos(2.0 * th), 0.0};
    case TrajectoryKind::Eight3d:
      return {s.a * std::cos(th), 2.0 * s.b * std::cos(2.0 * th), 2.0 * s.c_z * std::cos(2.0 * th)};
    default:
      return Vec3::Zero();
  }
}

inline Vec3 target_velocity(const TrajectorySpec& s, double t) {
  if (s.kind == TrajectoryKind::Hover) return Vec3::Zero();
  if (s.kind == TrajectoryKind::CircleRamp) {
    const double phi = ramp_angle(s, t);
    return s.ramp_accel * t * Vec3(-std::sin(phi), std::cos(phi), 0.0);
  }
  const double rate = 2.0 * std::numbers::pi * s.speed_multiplier / s.period;
  return rate * path_tangent(s, phase(s, t));
}

// Path length of one lap over the time one lap takes.
inline double average_speed(const TrajectorySpec& s) {
  if (!s.periodic()) throw Error(ErrorKind::NotPeriodic, s.name());
  using boost::math::quadrature::gauss_kronrod;
  double error = 0.0;
  const double length = gauss_kronrod<double, 61>::integrate(
      [&](double th) { return path_tangent(s, th).norm(); }, 0.0, 2.0 * std::numbers::pi, 15,
      1e-9, &error);
  return length * s.speed_multiplier / s.period;
}

// Parses "hover", "ellipse", "eight2d", "eight3d", "circle-ramp", each with an
// optional "-x<k>" speed suffix, on top of the given default dimensions.
inline TrajectorySpec parse_scenario(const std::string& name, TrajectorySpec defaults = {}) {
  std::string base = name;
  double mult = 1.0;
  if (const auto pos = name.rfind("-x"); pos != std::string::npos) {
    base = name.substr(0, pos);
    try {
      mult = std::stod(name.substr(pos + 2));
    } catch (const std::exception&) {
      throw Error(ErrorKind::UnknownName, "scenario '" + name + "'");
    }
  }
  TrajectorySpec s = defaults;
  s.speed_multiplier = mult;
  if (base == "hover") {
    s.kind = TrajectoryKind::Hover;
  } else if (base == "ellipse") {
    s.kind = TrajectoryKind::Ellipse;
  } else if (base == "eight2d") {
    s.kind = TrajectoryKind::EightPlanar;
  } else if (base == "eight3d") {
    s.kind = TrajectoryKind::Eight3d;
  } else if (base == "circle-ramp") {
    s.kind = TrajectoryKind::CircleRamp;
  } else {
    throw Error(ErrorKind::UnknownName,
                "scenario '" + name + "'; valid: hover, ellipse, eight2d, eight3d, circle-ramp "
                                      "(optional -x2 suffix)");
  }
  s.validate();
  return s;
}

// Hover, the three shapes, and the three doubled-speed variants.
inline const std::vector<std::string>& default_scenarios() {
  static const std::vector<std::string> names = {
      "hover", "ellipse", "eight2d", "eight3d", "ellipse-x2", "eight2d-x2", "eight3d-x2"};
  return names;
}

}  // namespace quadbench

#endif  // QUADBENCH_TRAJECTORIES_HPP
