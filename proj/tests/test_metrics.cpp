#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "quadbench/metrics.hpp"

using namespace quadbench;

namespace {

RunLog random_log(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(1, 400);
  std::normal_distribution<double> n(0.0, 0.3);
  RunLog log;
  const int N = len(rng);
  for (int k = 0; k < N; ++k) {
    RunSample s;
    s.t = 0.01 * k;
    s.y = Vec3(std::cos(s.t), std::sin(s.t), 1.0);
    s.p = s.y + Vec3(n(rng), n(rng), n(rng));
    s.df = n(rng);
    s.omega_cmd = Vec3(n(rng), n(rng), n(rng));
    s.reward = n(rng);
    log.samples.push_back(s);
  }
  return log;
}

// Recomputes the per-axis RMSE (cm) from the error columns of the CSV text.
Vec3 brute_force_from_csv(const std::string& csv) {
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  long double sx = 0, sy = 0, sz = 0;
  long n = 0;
  while (std::getline(is, line)) {
    std::vector<double> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(std::stod(cell));
    const double ex = f[4] - f[1], ey = f[5] - f[2], ez = f[6] - f[3];
    sx += (long double)ex * ex;
    sy += (long double)ey * ey;
    sz += (long double)ez * ez;
    ++n;
  }
  return 100.0 * Vec3(std::sqrt(double(sx / n)), std::sqrt(double(sy / n)), std::sqrt(double(sz / n)));
}

}  // namespace

TEST(Metrics, RmseMatchesBruteForceFromCsv) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 100; ++i) {
    const RunLog log = random_log(rng);
    const MetricsReport m = rmse_metrics(log);
    const Vec3 bf = brute_force_from_csv(run_log_to_csv(log));
    EXPECT_NEAR(m.px, bf.x(), 1e-12);
    EXPECT_NEAR(m.py, bf.y(), 1e-12);
    EXPECT_NEAR(m.pz, bf.z(), 1e-12);
    EXPECT_EQ(m.pc, (m.px + m.py + m.pz) / 3.0);
  }
}

TEST(Metrics, ConstantOffsetGivesItsMagnitude) {
  RunLog log;
  for (int k = 0; k < 10; ++k) {
    RunSample s;
    s.t = k;
    s.y = Vec3(1, 1, 1);
    s.p = s.y - Vec3(0.01, -0.02, 0.0);
    log.samples.push_back(s);
  }
  const MetricsReport m = rmse_metrics(log);
  EXPECT_NEAR(m.px, 1.0, 1e-12);
  EXPECT_NEAR(m.py, 2.0, 1e-12);
  EXPECT_EQ(m.pz, 0.0);
  EXPECT_NEAR(m.pc, 1.0, 1e-12);
}

TEST(Metrics, CsvRoundTripIsExact) {
  std::mt19937_64 rng(1);
  const RunLog log = random_log(rng);
  const std::string csv = run_log_to_csv(log);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kRunLogHeader);
  const RunLog back = run_log_from_csv(csv);
  EXPECT_EQ(back, log);
  EXPECT_EQ(rmse_metrics(back), rmse_metrics(log));
  EXPECT_THROW(run_log_from_csv("t,p\n1,2\n"), Error);
  EXPECT_THROW(run_log_from_csv(std::string(kRunLogHeader) + "\n1,2,3\n"), Error);
}

TEST(Metrics, AggregateIsFieldwiseMean) {
  const std::vector<MetricsReport> runs = {MetricsReport::from_axes(1, 2, 3),
                                           MetricsReport::from_axes(3, 4, 5),
                                           MetricsReport::from_axes(2, 0, 1)};
  const MetricsReport m = aggregate(runs);
  EXPECT_DOUBLE_EQ(m.px, 2.0);
  EXPECT_DOUBLE_EQ(m.py, 2.0);
  EXPECT_DOUBLE_EQ(m.pz, 3.0);
  EXPECT_EQ(m.pc, (m.px + m.py + m.pz) / 3.0);
  try {
    aggregate({runs[0], runs[1]});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CountMismatch);
  }
}

TEST(Metrics, EmptyAndUnorderedLogsAreRejected) {
  try {
    rmse_metrics(RunLog{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyRun);
  }
  RunLog log;
  log.samples.resize(2);
  log.samples[0].t = 1.0;
  log.samples[1].t = 1.0;
  EXPECT_THROW(log.validate(), Error);
}
