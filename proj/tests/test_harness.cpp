#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "quadbench/harness.hpp"

using namespace quadbench;

namespace {

std::filesystem::path temp_root(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("quadbench_h_" + name);
  std::filesystem::remove_all(p);
  return p;
}

// Small and fast settings shared by the command tests.
BenchConfig quick_config() {
  BenchConfig c;
  for (const char* o : {"sac.actor_hidden=8", "sac.critic_hidden=8", "sac.batch=8", "sac.warmup_steps=20",
                        "env.max_steps=40", "env.init_dist_max=1", "trajectories.duration=1",
                        "trajectories.runs=2"}) {
    apply_override(c, o);
  }
  c.validate();
  return c;
}

RunLog offset_log(double dx) {
  RunLog log;
  for (int k = 0; k < 5; ++k) {
    RunSample s;
    s.t = 0.01 * k;
    s.y = Vec3(0, 0, 1);
    s.p = s.y + Vec3(dx, 0, 0);
    log.samples.push_back(s);
  }
  return log;
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST(Harness, ExitCodesFollowErrorKinds) {
  EXPECT_EQ(exit_code_for(Error(ErrorKind::UnknownName, "")), kExitUsage);
  EXPECT_EQ(exit_code_for(Error(ErrorKind::InvalidConfig, "")), kExitUsage);
  EXPECT_EQ(exit_code_for(Error(ErrorKind::MissingData, "")), kExitMissing);
  EXPECT_EQ(exit_code_for(Error(ErrorKind::DivergedTraining, "")), kExitDiverged);
  EXPECT_EQ(exit_code_for(Error(ErrorKind::EmptyRun, "")), kExitFailure);
}

TEST(Harness, ReportRanksAndPcIdentity) {
  std::vector<RunIndexEntry> index;
  std::vector<RunLog> logs;
  const std::vector<std::pair<std::string, double>> ctrls{{"a", 0.03}, {"b", 0.01}, {"c", 0.02}};
  for (const auto& [name, dx] : ctrls) {
    for (int r = 0; r < 3; ++r) {
      index.push_back({name, "hover", r, name == "c" && r == 1, ""});
      logs.push_back(offset_log(dx));
    }
  }
  const TrackingReport rep = build_report(index, logs, 3);
  EXPECT_EQ(rep.at("b", "hover").rank, 1);
  EXPECT_EQ(rep.at("c", "hover").rank, 2);
  EXPECT_EQ(rep.at("a", "hover").rank, 3);
  EXPECT_EQ(rep.at("c", "hover").failed_runs, 1);
  for (const auto& [key, cell] : rep.cells) {
    EXPECT_EQ(cell.metrics.pc, (cell.metrics.px + cell.metrics.py + cell.metrics.pz) / 3.0);
  }
  const std::string md = rep.to_markdown("t");
  EXPECT_NE(md.find("| b | 1.00 | 0.00 | 0.00 | 0.33 (1) |"), std::string::npos);
  EXPECT_NE(md.find("(2)! |"), std::string::npos);
  EXPECT_EQ(count_lines(rep.to_csv()), 4u);

  index.pop_back();
  logs.pop_back();
  try {
    build_report(index, logs, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CountMismatch);
  }
}

TEST(Harness, RunIndexRoundTrip) {
  const std::vector<RunIndexEntry> idx{{"PID", "ellipse", 0, false, "PID/ellipse-r0.csv"},
                                       {"eW-u", "hover", 2, true, "eW-u/hover-r2.csv"}};
  const auto back = run_index_from_csv(run_index_to_csv(idx));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].controller, "eW-u");
  EXPECT_TRUE(back[1].failed);
  EXPECT_EQ(back[1].run, 2);
  EXPECT_THROW(run_index_from_csv("x\n"), Error);
}

TEST(Harness, GridReplayIsIdentical) {
  const ResultStore store(temp_root("grid"));
  const BenchConfig cfg = quick_config();
  const TrackingReport rep =
      evaluate_grid(cfg, store, "benchmark", "t", {"PID", "frozen-hover"}, {"hover", "ellipse"}, 2);
  EXPECT_EQ(rep.controllers.size(), 2u);
  EXPECT_TRUE(std::filesystem::exists(store.run_dir("benchmark") / "PID" / "ellipse-r1.csv"));
  std::ostringstream log;
  const auto out = cmd_replay(cfg, store, log);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_TRUE(out[0].identical);
  EXPECT_EQ(replay_report(store, "benchmark", cfg.eval.runs).to_csv(), rep.to_csv());
  // Parallel and serial evaluation agree.
  const ResultStore serial(temp_root("grid_serial"));
  EXPECT_EQ(evaluate_grid(cfg, serial, "benchmark", "t", {"PID", "frozen-hover"}, {"hover", "ellipse"}, 1)
                .to_csv(),
            rep.to_csv());
}

TEST(Harness, ReplayWithoutRunsIsMissingData) {
  const ResultStore store(temp_root("empty"));
  std::ostringstream log;
  try {
    cmd_replay(quick_config(), store, log);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingData);
  }
}

TEST(Harness, BenchmarkRequiresCheckpoints) {
  const ResultStore store(temp_root("missing"));
  std::ostringstream log;
  try {
    cmd_benchmark(quick_config(), store, 1, log);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingData);
    EXPECT_EQ(exit_code_for(e), kExitMissing);
    EXPECT_NE(std::string(e.what()).find("eB-R-w-u"), std::string::npos);
  }
  EXPECT_THROW(make_controller(quick_config(), store, "eW-R-u"), Error);
  try {
    make_controller(quick_config(), store, "magic");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(exit_code_for(e), kExitUsage);
  }
}

TEST(Harness, StressRowsMergeAndRender) {
  const ResultStore store(temp_root("stress"));
  BenchConfig cfg = quick_config();
  apply_override(cfg, "trajectories.stress_ramp=0.5");
  std::ostringstream log;
  cmd_stress(cfg, store, {"teleport-oracle", "frozen-hover"}, log);
  const auto rows = cmd_stress(cfg, store, {"frozen-hover"}, log);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_TRUE(std::isinf(rows[0].velocity));
  // Frozen hover drifts 0.5 m behind after sqrt(2) s of a 0.5 m/s^2 ramp.
  EXPECT_NEAR(rows[1].velocity, 0.5 * std::sqrt(2.0), 0.02);
  const std::string csv = read_file(store.report("stress.csv"));
  EXPECT_NE(csv.find("teleport-oracle,inf"), std::string::npos);
  EXPECT_EQ(stress_rows_to_csv(stress_rows_from_csv(csv)), csv);
  EXPECT_NE(read_file(store.report("stress.md")).find(">= 3.00 (cap)"), std::string::npos);
}

TEST(Harness, TrainStoresCheckpointAndManifest) {
  const ResultStore store(temp_root("train"));
  const BenchConfig cfg = quick_config();
  std::ostringstream log;
  const TrainSummary s = cmd_train(cfg, store, "eW-R-u", 3, 200, log);
  EXPECT_TRUE(std::filesystem::exists(s.checkpoint));
  EXPECT_TRUE(std::filesystem::exists(s.curve));
  EXPECT_NE(log.str().find("eW-R-u-H10-s3"), std::string::npos);
  const auto m = nlohmann::json::parse(read_file(store.manifest()));
  EXPECT_EQ(m["config_hash"], config_hash(cfg));
  EXPECT_EQ(m["tool_version"], kToolVersion);
  EXPECT_EQ(m["command"], "train");
  EXPECT_EQ(config_hash(parse_ini(read_file(store.root() / "config.ini"))), config_hash(cfg));

  BenchConfig seeded = cfg;
  seeded.plan.seed = 3;
  auto policy = make_controller(seeded, store, "eW-R-u");
  EXPECT_EQ(policy->name(), "eW-R-u");
}

TEST(Harness, WindowAblationHasOneSeriesPerLength) {
  const ResultStore store(temp_root("window"));
  const BenchConfig cfg = quick_config();
  std::ostringstream log;
  const WindowAblation w = cmd_ablate_window(cfg, store, 120, 1, log);
  ASSERT_EQ(w.runs.size(), 5u);
  const std::string header = w.merged_csv.substr(0, w.merged_csv.find('\n'));
  EXPECT_EQ(header, "episode,H=1,H=2,H=5,H=10 (default),H=15");
  EXPECT_TRUE(std::filesystem::exists(store.report("ablate_window.md")));
}

TEST(Harness, InputAblationShape) {
  const ResultStore store(temp_root("inputs"));
  BenchConfig cfg = quick_config();
  apply_override(cfg, "plan.input_scenarios=ellipse, eight2d, eight3d");
  std::ostringstream log;
  const TrackingReport rep = cmd_ablate_inputs(cfg, store, 100, 1, log);
  EXPECT_EQ(rep.controllers, (std::vector<std::string>{"eW-vW-R-u", "eW-R-u", "eW-q-u"}));
  EXPECT_EQ(rep.scenarios.size(), 3u);
  const std::string md = read_file(store.report("ablate_inputs.md"));
  // Header row: config column plus four metric columns per scenario.
  const auto hdr = md.substr(md.find("| Config"), md.find('\n', md.find("| Config")) - md.find("| Config"));
  EXPECT_EQ(std::count(hdr.begin(), hdr.end(), '|'), 14);
}

TEST(Harness, ParallelRethrowsFirstError) {
  std::atomic<int> done{0};
  std::vector<std::function<void()>> tasks;
  for (int i = 0; i < 6; ++i) {
    tasks.push_back([&, i] {
      if (i == 3) throw Error(ErrorKind::EmptyRun, "x");
      ++done;
    });
  }
  EXPECT_THROW(run_parallel(3, tasks), Error);
  EXPECT_EQ(done.load(), 5);
}
