#ifndef QUADBENCH_HARNESS_HPP
#define QUADBENCH_HARNESS_HPP

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "quadbench/checkpoint.hpp"
#include "quadbench/config.hpp"
#include "quadbench/evaluation.hpp"
#include "quadbench/metrics.hpp"
#include "quadbench/train.hpp"

#ifndef QUADBENCH_VERSION
#define QUADBENCH_VERSION "0.0.0"
#endif

namespace quadbench {

inline constexpr const char* kToolVersion = QUADBENCH_VERSION;
inline constexpr const char* kOutputEnvVar = "QUADBENCH_OUT";

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2, kExitMissing = 3, kExitDiverged = 4 };

inline int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::InvalidConfig:
    case ErrorKind::UnknownName:
    case ErrorKind::ShapeError:
      return kExitUsage;
    case ErrorKind::MissingData:
    case ErrorKind::Io:
      return kExitMissing;
    case ErrorKind::DivergedTraining:
    case ErrorKind::NonFiniteState:
    case ErrorKind::IntegrationDiverged:
      return kExitDiverged;
    default:
      return kExitFailure;
  }
}

// On-disk layout under one output root:
//   manifest.json, config.ini
//   checkpoints/<obs>-H<h>-s<seed>.qbck, curves/<same>.csv
//   runs/<report>/<controller>/<scenario>-r<run>.csv, runs/<report>/index.csv
//   reports/<name>.csv|.md
class ResultStore {
 public:
  explicit ResultStore(std::filesystem::path root) : root_(std::move(root)) {}

  static std::filesystem::path default_root() {
    const char* env = std::getenv(kOutputEnvVar);
    return (env && *env) ? std::filesystem::path(env) : std::filesystem::path("results");
  }

  const std::filesystem::path& root() const { return root_; }

  static std::string run_id(const std::string& obs, int history, std::uint64_t seed) {
    return obs + "-H" + std::to_string(history) + "-s" + std::to_string(seed);
  }
  std::filesystem::path checkpoint(const std::string& obs, int history, std::uint64_t seed) const {
    return root_ / "checkpoints" / (run_id(obs, history, seed) + ".qbck");
  }
  std::filesystem::path curve(const std::string& obs, int history, std::uint64_t seed) const {
    return root_ / "curves" / (run_id(obs, history, seed) + ".csv");
  }
  std::filesystem::path run_dir(const std::string& report) const { return root_ / "runs" / report; }
  std::filesystem::path run_log(const std::string& report, const std::string& controller,
                                const std::string& scenario, int run) const {
    return run_dir(report) / controller / (scenario + "-r" + std::to_string(run) + ".csv");
  }
  std::filesystem::path report(const std::string& file) const { return root_ / "reports" / file; }
  std::filesystem::path manifest() const { return root_ / "manifest.json"; }

 private:
  std::filesystem::path root_;
};

inline void write_manifest(const ResultStore& store, const BenchConfig& cfg,
                           const std::string& command) {
  nlohmann::json m;
  m["tool"] = "quadbench";
  m["tool_version"] = kToolVersion;
  m["config_hash"] = config_hash(cfg);
  m["command"] = command;
  nlohmann::json values = nlohmann::json::object();
  for (const auto& [k, v] : to_key_values(cfg)) values[k] = v;
  m["config"] = values;
  atomic_write(store.manifest(), m.dump(2) + "\n");
  atomic_write(store.root() / "config.ini", to_ini(cfg));
}

// Runs the tasks on at most `jobs` threads; the first exception is rethrown.
inline void run_parallel(int jobs, const std::vector<std::function<void()>>& tasks) {
  if (tasks.empty()) return;
  const int workers = std::clamp(jobs, 1, static_cast<int>(tasks.size()));
  if (workers == 1) {
    for (const auto& t : tasks) t();
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < tasks.size(); i = next++) {
        try {
          tasks[i]();
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!first) first = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

struct TrainJob {
  std::string obs;
  int history = 10;
  std::uint64_t seed = 1;
  long steps = 0;
};

struct TrainSummary {
  TrainJob job;
  long episodes = 0;
  double head_mean = 0.0;
  double tail_mean = 0.0;
  std::filesystem::path checkpoint;
  std::filesystem::path curve;
};

// Trains one variant and stores its checkpoint and learning curve.
inline TrainSummary run_training(const BenchConfig& cfg, const TrainJob& job,
                                 const ResultStore& store) {
  const EnvConfig env = cfg.env_for(job.obs, job.history);
  TrainSchedule schedule;
  schedule.total_steps = job.steps;
  schedule.n_envs = cfg.plan.n_envs;
  schedule.checkpoint_every = cfg.plan.checkpoint_every;
  schedule.checkpoint_path = store.checkpoint(job.obs, job.history, job.seed);
  TrainResult result = train(env, cfg.sac, schedule, job.seed);

  TrainSummary s;
  s.job = job;
  s.episodes = static_cast<long>(result.curve.episodes.size());
  s.head_mean = result.curve.head_mean(0.1);
  s.tail_mean = result.curve.tail_mean(0.1);
  s.checkpoint = schedule.checkpoint_path;
  s.curve = store.curve(job.obs, job.history, job.seed);
  save_checkpoint(s.checkpoint, make_checkpoint(result.agent, env, result.steps));
  atomic_write(s.curve, result.curve.to_csv());
  return s;
}

inline std::unique_ptr<Controller> load_policy(const BenchConfig& cfg, const ResultStore& store,
                                               const std::string& obs, int history,
                                               std::uint64_t seed) {
  const Checkpoint ck = load_checkpoint(store.checkpoint(obs, history, seed));
  const EnvConfig env = cfg.env_for(obs, history);
  if (ck.obs_config != env.obs.name() || ck.history != history) {
    throw Error(ErrorKind::ShapeError, "checkpoint " + ck.obs_config + "/H" +
                                           std::to_string(ck.history) + " does not match " + obs);
  }
  return std::make_unique<PolicyController>(ck.actor, env.obs, env, obs);
}

// "pid", "frozen-hover", "teleport-oracle" or an observation config name.
inline std::unique_ptr<Controller> make_controller(const BenchConfig& cfg, const ResultStore& store,
                                                   const std::string& name) {
  if (name == "pid" || name == "PID") return std::make_unique<PidController>(cfg.pid, cfg.env.nominal);
  if (name == "frozen-hover") return std::make_unique<FrozenHoverController>(cfg.env.nominal);
  if (name == "teleport-oracle") return std::make_unique<TeleportController>(cfg.env.nominal);
  parse_obs_config(name);
  return load_policy(cfg, store, name, cfg.env.obs.history, cfg.plan.seed);
}

// ---------------------------------------------------------------------------
// Tracking reports

struct ReportCell {
  MetricsReport metrics;
  int failed_runs = 0;
  int rank = 0;  // 1 = lowest P_c within the scenario
};

struct TrackingReport {
  std::vector<std::string> controllers;
  std::vector<std::string> scenarios;
  std::map<std::pair<std::string, std::string>, ReportCell> cells;

  const ReportCell& at(const std::string& controller, const std::string& scenario) const {
    return cells.at({controller, scenario});
  }

  void assign_ranks() {
    for (const auto& sc : scenarios) {
      std::vector<std::string> order = controllers;
      std::stable_sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
        return cells.at({a, sc}).metrics.pc < cells.at({b, sc}).metrics.pc;
      });
      for (std::size_t i = 0; i < order.size(); ++i) {
        cells.at({order[i], sc}).rank = static_cast<int>(i) + 1;
      }
    }
  }

  std::string to_csv() const {
    std::ostringstream os;
    os << "controller,scenario,px_cm,py_cm,pz_cm,pc_cm,rank,failed_runs\n";
    for (const auto& c : controllers) {
      for (const auto& s : scenarios) {
        const ReportCell& cell = at(c, s);
        os << c << ',' << s << ',' << format_double(cell.metrics.px) << ','
           << format_double(cell.metrics.py) << ',' << format_double(cell.metrics.pz) << ','
           << format_double(cell.metrics.pc) << ',' << cell.rank << ',' << cell.failed_runs << '\n';
      }
    }
    return os.str();
  }

  // Configurations x scenarios, four metric columns per scenario. "(k)" is the
  // per-scenario rank by P_c; "!" marks cells with at least one failed run.
  std::string to_markdown(const std::string& title) const {
    std::ostringstream os;
    os << "# " << title << "\n\n";
    os << "Positional RMSE in cm, mean of the evaluation runs. `(k)` is the rank by P_c within a "
          "scenario (1 = best); `!` marks cells where a run left the allowed ball. Scenarios "
          "suffixed `-x2` are the three trajectories at doubled speed.\n\n";
    os << "| Config |";
    for (const auto& s : scenarios) os << " " << s << " Px | Py | Pz | Pc |";
    os << "\n|---|";
    for (std::size_t i = 0; i < scenarios.size(); ++i) os << "---|---|---|---|";
    os << "\n";
    char buf[64];
    for (const auto& c : controllers) {
      os << "| " << c << " |";
      for (const auto& s : scenarios) {
        const ReportCell& cell = at(c, s);
        for (double v : {cell.metrics.px, cell.metrics.py, cell.metrics.pz}) {
          std::snprintf(buf, sizeof(buf), " %.2f |", v);
          os << buf;
        }
        std::snprintf(buf, sizeof(buf), " %.2f (%d)%s |", cell.metrics.pc, cell.rank,
                      cell.failed_runs ? "!" : "");
        os << buf;
      }
      os << "\n";
    }
    return os.str();
  }
};

struct RunIndexEntry {
  std::string controller;
  std::string scenario;
  int run = 0;
  bool failed = false;
  std::string file;  // relative to the report's run directory
};

inline std::string run_index_to_csv(const std::vector<RunIndexEntry>& entries) {
  std::ostringstream os;
  os << "controller,scenario,run,failed,file\n";
  for (const auto& e : entries) {
    os << e.controller << ',' << e.scenario << ',' << e.run << ',' << (e.failed ? 1 : 0) << ','
       << e.file << '\n';
  }
  return os.str();
}

inline std::vector<RunIndexEntry> run_index_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "controller,scenario,run,failed,file") {
    throw Error(ErrorKind::Io, "run index header mismatch");
  }
  std::vector<RunIndexEntry> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 5) {
      throw Error(ErrorKind::Io, "run index row has " + std::to_string(f.size()) + " fields");
    }
    out.push_back({f[0], f[1], std::stoi(f[2]), f[3] == "1", f[4]});
  }
  return out;
}

// Aggregates per-run logs into a report; order follows the index entries.
inline TrackingReport build_report(const std::vector<RunIndexEntry>& index,
                                   const std::vector<RunLog>& logs, int runs) {
  if (index.size() != logs.size()) throw Error(ErrorKind::CountMismatch, "index/log count");
  TrackingReport rep;
  std::map<std::pair<std::string, std::string>, std::vector<MetricsReport>> per_cell;
  for (std::size_t i = 0; i < index.size(); ++i) {
    const auto& e = index[i];
    if (std::find(rep.controllers.begin(), rep.controllers.end(), e.controller) == rep.controllers.end())
      rep.controllers.push_back(e.controller);
    if (std::find(rep.scenarios.begin(), rep.scenarios.end(), e.scenario) == rep.scenarios.end())
      rep.scenarios.push_back(e.scenario);
    per_cell[{e.controller, e.scenario}].push_back(rmse_metrics(logs[i]));
    rep.cells[{e.controller, e.scenario}].failed_runs += e.failed ? 1 : 0;
  }
  for (auto& [key, list] : per_cell) {
    rep.cells[key].metrics = aggregate(list, static_cast<std::size_t>(runs));
  }
  for (const auto& c : rep.controllers)
    for (const auto& s : rep.scenarios)
      if (!rep.cells.count({c, s})) throw Error(ErrorKind::MissingData, "no runs for " + c + " on " + s);
  rep.assign_ranks();
  return rep;
}

// Evaluation seed of run r; shared by all controllers so they face the same
// initial offsets.
inline std::uint64_t eval_seed(std::uint64_t seed, int run) {
  return mix_seed(seed, 70'000 + static_cast<std::uint64_t>(run));
}

// Evaluates every controller on every scenario, stores the RunLogs and the
// index, and writes <report>.csv/.md.
inline TrackingReport evaluate_grid(const BenchConfig& cfg, const ResultStore& store,
                                    const std::string& report, const std::string& title,
                                    const std::vector<std::string>& controllers,
                                    const std::vector<std::string>& scenarios, int jobs) {
  const EvalConfig ec = cfg.eval_config();
  std::vector<RunIndexEntry> index;
  for (const auto& c : controllers)
    for (const auto& s : scenarios)
      for (int r = 0; r < ec.runs; ++r) {
        index.push_back({c, s, r, false, c + "/" + s + "-r" + std::to_string(r) + ".csv"});
      }
  std::vector<RunLog> logs(index.size());
  std::vector<std::function<void()>> tasks;
  for (std::size_t i = 0; i < index.size(); ++i) {
    tasks.push_back([&, i] {
      const auto& e = index[i];
      auto controller = make_controller(cfg, store, e.controller);
      const TrajectorySpec spec = parse_scenario(e.scenario, cfg.trajectory);
      logs[i] = run_episode(*controller, spec, ec, eval_seed(cfg.plan.seed, e.run));
      if (logs[i].samples.empty()) throw Error(ErrorKind::EmptyRun, e.controller + " on " + e.scenario);
      atomic_write(store.run_dir(report) / e.file, run_log_to_csv(logs[i]));
    });
  }
  run_parallel(jobs, tasks);
  for (std::size_t i = 0; i < index.size(); ++i) index[i].failed = logs[i].failed;
  atomic_write(store.run_dir(report) / "index.csv", run_index_to_csv(index));

  TrackingReport rep = build_report(index, logs, ec.runs);
  atomic_write(store.report(report + ".csv"), rep.to_csv());
  atomic_write(store.report(report + ".md"), rep.to_markdown(title));
  return rep;
}

// Recomputes a stored report from its RunLog CSVs only.
inline TrackingReport replay_report(const ResultStore& store, const std::string& report, int runs) {
  const auto index_path = store.run_dir(report) / "index.csv";
  if (!std::filesystem::exists(index_path)) {
    throw Error(ErrorKind::MissingData, "no stored runs for report '" + report + "'");
  }
  const auto index = run_index_from_csv(read_file(index_path));
  std::vector<RunLog> logs;
  for (const auto& e : index) {
    RunLog log = run_log_from_csv(read_file(store.run_dir(report) / e.file));
    log.failed = e.failed;
    logs.push_back(std::move(log));
  }
  return build_report(index, logs, runs);
}

// ---------------------------------------------------------------------------
// Commands. Each returns what it wrote so callers and tests can inspect it.

inline TrainSummary cmd_train(const BenchConfig& cfg, const ResultStore& store,
                              const std::string& obs, std::uint64_t seed, long steps,
                              std::ostream& log) {
  parse_obs_config(obs);
  write_manifest(store, cfg, "train");
  const TrainSummary s = run_training(cfg, {obs, cfg.env.obs.history, seed, steps}, store);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s: %ld episodes, first-10%% mean %.3f, final-10%% mean %.3f\n",
                ResultStore::run_id(obs, cfg.env.obs.history, seed).c_str(), s.episodes,
                s.head_mean, s.tail_mean);
  log << buf << "checkpoint " << s.checkpoint.string() << "\ncurve " << s.curve.string() << "\n";
  return s;
}

inline TrackingReport cmd_benchmark(const BenchConfig& cfg, const ResultStore& store, int jobs,
                                    std::ostream& log) {
  std::vector<std::string> missing;
  for (const auto& obs : cfg.plan.benchmark_obs) {
    const auto p = store.checkpoint(obs, cfg.env.obs.history, cfg.plan.seed);
    if (!std::filesystem::exists(p)) missing.push_back(p.string());
  }
  if (!missing.empty()) {
    std::string msg = "missing checkpoints (run `train` first):";
    for (const auto& m : missing) msg += "\n  " + m;
    throw Error(ErrorKind::MissingData, msg);
  }
  write_manifest(store, cfg, "benchmark");
  std::vector<std::string> controllers{"PID"};
  controllers.insert(controllers.end(), cfg.plan.benchmark_obs.begin(), cfg.plan.benchmark_obs.end());
  TrackingReport rep = evaluate_grid(cfg, store, "benchmark", "Tracking benchmark", controllers,
                                     cfg.plan.scenarios, jobs);
  log << "wrote " << store.report("benchmark.md").string() << "\n";
  return rep;
}

struct WindowAblation {
  std::vector<TrainSummary> runs;
  std::string merged_csv;
};

inline std::string window_series_name(int h, int default_h) {
  return "H=" + std::to_string(h) + (h == default_h ? " (default)" : "");
}

inline WindowAblation cmd_ablate_window(const BenchConfig& cfg, const ResultStore& store, long steps,
                                        int jobs, std::ostream& log) {
  write_manifest(store, cfg, "ablate-window");
  WindowAblation out;
  out.runs.resize(cfg.plan.window_histories.size());
  std::vector<std::function<void()>> tasks;
  for (std::size_t i = 0; i < cfg.plan.window_histories.size(); ++i) {
    tasks.push_back([&, i] {
      out.runs[i] = run_training(
          cfg, {cfg.plan.window_obs, cfg.plan.window_histories[i], cfg.plan.seed, steps}, store);
    });
  }
  run_parallel(jobs, tasks);

  // Wide layout: one column per window length, indexed by episode.
  std::vector<std::vector<std::string>> columns;
  std::size_t rows = 0;
  for (const auto& r : out.runs) {
    std::vector<std::string> col;
    std::istringstream is(read_file(r.curve));
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
      if (!line.empty()) col.push_back(line.substr(line.rfind(',') + 1));
    }
    rows = std::max(rows, col.size());
    columns.push_back(std::move(col));
  }
  std::ostringstream os;
  os << "episode";
  for (int h : cfg.plan.window_histories) os << ',' << window_series_name(h, 10);
  os << '\n';
  for (std::size_t e = 0; e < rows; ++e) {
    os << e;
    for (const auto& col : columns) os << ',' << (e < col.size() ? col[e] : "");
    os << '\n';
  }
  out.merged_csv = os.str();
  atomic_write(store.report("ablate_window.csv"), out.merged_csv);

  std::ostringstream md;
  md << "# Window-length ablation (" << cfg.plan.window_obs << ")\n\n"
     << "| Window | Episodes | First-10% mean reward | Final-10% mean reward |\n|---|---|---|---|\n";
  char buf[160];
  for (std::size_t i = 0; i < out.runs.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "| %s | %ld | %.2f | %.2f |\n",
                  window_series_name(cfg.plan.window_histories[i], 10).c_str(), out.runs[i].episodes,
                  out.runs[i].head_mean, out.runs[i].tail_mean);
    md << buf;
  }
  atomic_write(store.report("ablate_window.md"), md.str());
  log << "wrote " << store.report("ablate_window.csv").string() << "\n";
  return out;
}

inline TrackingReport cmd_ablate_inputs(const BenchConfig& cfg, const ResultStore& store, long steps,
                                        int jobs, std::ostream& log) {
  write_manifest(store, cfg, "ablate-inputs");
  std::vector<std::function<void()>> tasks;
  for (const auto& obs : cfg.plan.input_obs) {
    tasks.push_back([&, obs] {
      run_training(cfg, {obs, cfg.env.obs.history, cfg.plan.seed, steps}, store);
    });
  }
  run_parallel(jobs, tasks);
  TrackingReport rep = evaluate_grid(cfg, store, "ablate_inputs", "Input-variant ablation",
                                     cfg.plan.input_obs, cfg.plan.input_scenarios, jobs);
  log << "wrote " << store.report("ablate_inputs.md").string() << "\n";
  return rep;
}

struct StressRow {
  std::string name;
  double velocity = 0.0;
};

inline std::vector<StressRow> stress_rows_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "name,velocity_mps") {
    throw Error(ErrorKind::Io, "stress report header mismatch");
  }
  std::vector<StressRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    const std::string v = line.substr(comma + 1);
    rows.push_back({line.substr(0, comma),
                    v == "inf" ? std::numeric_limits<double>::infinity() : std::stod(v)});
  }
  return rows;
}

inline std::string stress_rows_to_csv(const std::vector<StressRow>& rows) {
  std::string out = "name,velocity_mps\n";
  for (const auto& r : rows) {
    out += r.name + "," + (std::isinf(r.velocity) ? std::string("inf") : format_double(r.velocity)) + "\n";
  }
  return out;
}

inline std::string stress_rows_to_markdown(const std::vector<StressRow>& rows, double cap) {
  std::ostringstream os;
  os << "# Velocity stress test\n\n| Controller | Max velocity (m/s) |\n|---|---|\n";
  char buf[128];
  for (const auto& r : rows) {
    if (std::isinf(r.velocity)) {
      std::snprintf(buf, sizeof(buf), "| %s | >= %.2f (cap) |\n", r.name.c_str(), cap);
    } else {
      std::snprintf(buf, sizeof(buf), "| %s | %.2f |\n", r.name.c_str(), r.velocity);
    }
    os << buf;
  }
  return os.str();
}

// Stress-tests each named controller and merges the rows into the stored
// report; an existing row with the same name is replaced.
inline std::vector<StressRow> cmd_stress(const BenchConfig& cfg, const ResultStore& store,
                                         const std::vector<std::string>& names, std::ostream& log) {
  for (const auto& n : names) make_controller(cfg, store, n);
  write_manifest(store, cfg, "stress");
  const EvalConfig ec = cfg.eval_config();
  std::vector<StressRow> rows;
  const auto csv_path = store.report("stress.csv");
  if (std::filesystem::exists(csv_path)) rows = stress_rows_from_csv(read_file(csv_path));
  for (const auto& n : names) {
    auto controller = make_controller(cfg, store, n);
    const StressResult r = stress_test(*controller, cfg.eval.stress_radius, cfg.eval.stress_ramp, ec,
                                       eval_seed(cfg.plan.seed, 0));
    const StressRow row{controller->name(), r.max_velocity};
    auto it = std::find_if(rows.begin(), rows.end(), [&](const auto& x) { return x.name == row.name; });
    if (it != rows.end()) {
      *it = row;
    } else {
      rows.push_back(row);
    }
    log << row.name << ": " << (std::isinf(r.max_velocity) ? "cap" : format_double(r.max_velocity))
        << " m/s" << (r.diagnostic.empty() ? "" : " (" + r.diagnostic + ")") << "\n";
  }
  atomic_write(csv_path, stress_rows_to_csv(rows));
  atomic_write(store.report("stress.md"), stress_rows_to_markdown(rows, cfg.eval.speed_cap));
  return rows;
}

struct ReplayOutcome {
  std::string report;
  bool identical = false;
};

// Regenerates every stored tracking report from its RunLogs and compares the
// CSV with the one on disk.
inline std::vector<ReplayOutcome> cmd_replay(const BenchConfig& cfg, const ResultStore& store,
                                             std::ostream& log) {
  std::vector<ReplayOutcome> out;
  for (const std::string name : {"benchmark", "ablate_inputs"}) {
    if (!std::filesystem::exists(store.run_dir(name) / "index.csv")) continue;
    const TrackingReport rep = replay_report(store, name, cfg.eval.runs);
    const auto stored = store.report(name + ".csv");
    const bool same = std::filesystem::exists(stored) && read_file(stored) == rep.to_csv();
    atomic_write(store.report(name + "_replay.csv"), rep.to_csv());
    log << name << ": " << (same ? "identical" : "DIFFERS") << "\n";
    out.push_back({name, same});
  }
  if (out.empty()) throw Error(ErrorKind::MissingData, "no stored run logs under " + store.root().string());
  return out;
}

}  // namespace quadbench

#endif  // QUADBENCH_HARNESS_HPP
