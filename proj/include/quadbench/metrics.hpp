#ifndef QUADBENCH_METRICS_HPP
#define QUADBENCH_METRICS_HPP

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "quadbench/dynamics.hpp"
#include "quadbench/error.hpp"
#include "quadbench/io.hpp"

namespace quadbench {

// One logged sample of a closed-loop run.
struct RunSample {
  double t = 0.0;
  Vec3 p = Vec3::Zero();  // actual position, m
  Vec3 y = Vec3::Zero();  // reference position, m
  double df = 0.0;
  Vec3 omega_cmd = Vec3::Zero();
  double reward = 0.0;

  bool operator==(const RunSample&) const = default;
};

struct RunLog {
  std::vector<RunSample> samples;
  bool failed = false;

  std::size_t count() const { return samples.size(); }

  void validate() const {
    for (std::size_t k = 1; k < samples.size(); ++k) {
      if (!(samples[k].t > samples[k - 1].t)) {
        throw Error(ErrorKind::InvalidConfig, "run log times must be strictly increasing");
      }
    }
  }

  bool operator==(const RunLog&) const = default;
};

// Per-axis RMSE and their mean, in centimeters.
struct MetricsReport {
  double px = 0.0;
  double py = 0.0;
  double pz = 0.0;
  double pc = 0.0;

  static MetricsReport from_axes(double px, double py, double pz) {
    return {px, py, pz, (px + py + pz) / 3.0};
  }

  bool operator==(const MetricsReport&) const = default;
};

inline MetricsReport rmse_metrics(const RunLog& log) {
  if (log.samples.empty()) throw Error(ErrorKind::EmptyRun, "run log has no samples");
  double sx = 0.0, sy = 0.0, sz = 0.0;
  for (const auto& s : log.samples) {
    const Vec3 d = s.y - s.p;
    sx += d.x() * d.x();
    sy += d.y() * d.y();
    sz += d.z() * d.z();
  }
  const auto n = static_cast<double>(log.samples.size());
  constexpr double kCm = 100.0;
  return MetricsReport::from_axes(kCm * std::sqrt(sx / n), kCm * std::sqrt(sy / n),
                                  kCm * std::sqrt(sz / n));
}

// Field-wise mean over exactly `expected` runs.
inline MetricsReport aggregate(const std::vector<MetricsReport>& runs, std::size_t expected = 3) {
  if (runs.size() != expected) {
    throw Error(ErrorKind::CountMismatch, "expected " + std::to_string(expected) +
                                              " runs, got " + std::to_string(runs.size()));
  }
  MetricsReport m;
  for (const auto& r : runs) {
    m.px += r.px;
    m.py += r.py;
    m.pz += r.pz;
  }
  const auto n = static_cast<double>(runs.size());
  return MetricsReport::from_axes(m.px / n, m.py / n, m.pz / n);
}

inline constexpr const char* kRunLogHeader = "t,px,py,pz,yx,yy,yz,ex,ey,ez,df,wx,wy,wz,reward";

inline std::string run_log_to_csv(const RunLog& log) {
  std::ostringstream os;
  os << kRunLogHeader << '\n';
  for (const auto& s : log.samples) {
    const Vec3 e = s.y - s.p;
    const double row[] = {s.t,   s.p.x(), s.p.y(), s.p.z(), s.y.x(),         s.y.y(),
                          s.y.z(), e.x(), e.y(),   e.z(),   s.df,            s.omega_cmd.x(),
                          s.omega_cmd.y(), s.omega_cmd.z(), s.reward};
    for (std::size_t i = 0; i < std::size(row); ++i) os << (i ? "," : "") << format_double(row[i]);
    os << '\n';
  }
  return os.str();
}

inline RunLog run_log_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != kRunLogHeader) {
    throw Error(ErrorKind::Io, "run log CSV header mismatch");
  }
  RunLog log;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> v;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() != 15) {
      throw Error(ErrorKind::Io, "run log CSV row has " + std::to_string(v.size()) + " fields");
    }
    RunSample s;
    s.t = v[0];
    s.p = Vec3(v[1], v[2], v[3]);
    s.y = Vec3(v[4], v[5], v[6]);
    s.df = v[10];
    s.omega_cmd = Vec3(v[11], v[12], v[13]);
    s.reward = v[14];
    log.samples.push_back(s);
  }
  return log;
}

}  // namespace quadbench

#endif  // QUADBENCH_METRICS_HPP
