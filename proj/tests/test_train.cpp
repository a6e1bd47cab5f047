#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "quadbench/checkpoint.hpp"
#include "quadbench/train.hpp"

using namespace quadbench;

namespace {

EnvConfig tiny_env() {
  EnvConfig e;
  e.obs = parse_obs_config("eW-R-u", 2);
  e.max_steps = 60;
  e.init.dist_max = 1.0;
  return e;
}

SacConfig tiny_sac() {
  SacConfig s;
  s.actor_hidden = {16};
  s.critic_hidden = {16};
  s.batch = 16;
  s.warmup_steps = 50;
  return s;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("quadbench_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST(Train, SeedStreamsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 20; ++s)
    for (std::uint64_t k = 0; k < 50; ++k) seen.insert(mix_seed(s, k));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_EQ(mix_seed(1, 2), mix_seed(1, 2));
}

TEST(Train, LearningCurveWindows) {
  LearningCurve c;
  for (int i = 0; i < 20; ++i) {
    c.episodes.push_back({i, 10L * (i + 1), double(i), 0.0, 10, Termination::TimeLimit});
  }
  EXPECT_DOUBLE_EQ(c.head_mean(0.1), 0.5);
  EXPECT_DOUBLE_EQ(c.tail_mean(0.1), 18.5);
  EXPECT_EQ(c.to_csv().substr(0, 31), "episode,steps,cumulative_reward");
  LearningCurve empty;
  EXPECT_EQ(empty.tail_mean(0.1), 0.0);
}

TEST(Train, RunsAreDeterministicGivenSeed) {
  TrainSchedule sch;
  sch.total_steps = 600;
  const TrainResult a = train(tiny_env(), tiny_sac(), sch, 5);
  const TrainResult b = train(tiny_env(), tiny_sac(), sch, 5);
  ASSERT_FALSE(a.curve.episodes.empty());
  EXPECT_EQ(a.curve.to_csv(), b.curve.to_csv());
  EXPECT_TRUE(a.agent.actor() == b.agent.actor());
  const TrainResult c = train(tiny_env(), tiny_sac(), sch, 6);
  EXPECT_NE(a.curve.to_csv(), c.curve.to_csv());
}

TEST(Train, EpisodeBookkeeping) {
  TrainSchedule sch;
  sch.total_steps = 500;
  sch.n_envs = 2;
  long calls = 0;
  const TrainResult r = train(tiny_env(), tiny_sac(), sch, 1,
                              [&](long, const EpisodeRecord&, const SacLosses&) { ++calls; });
  EXPECT_EQ(r.steps, 500);
  EXPECT_EQ(calls, static_cast<long>(r.curve.episodes.size()));
  long prev = 0;
  for (const auto& e : r.curve.episodes) {
    EXPECT_GT(e.steps, prev);
    prev = e.steps;
    EXPECT_LE(e.length, tiny_env().max_steps);
    EXPECT_NE(e.cause, Termination::None);
  }
}

TEST(Train, PeriodicCheckpointsAreWritten) {
  const auto dir = temp_dir("ckpt");
  TrainSchedule sch;
  sch.total_steps = 200;
  sch.checkpoint_every = 100;
  sch.checkpoint_path = dir / "run.qbck";
  train(tiny_env(), tiny_sac(), sch, 2);
  const Checkpoint ck = load_checkpoint(sch.checkpoint_path);
  EXPECT_EQ(ck.step, 200);
  EXPECT_EQ(ck.obs_config, "eW-R-u");
  EXPECT_EQ(ck.history, 2);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  TrainSchedule sch;
  sch.total_steps = 300;
  const EnvConfig env = tiny_env();
  const TrainResult r = train(env, tiny_sac(), sch, 3);
  const Checkpoint ck = make_checkpoint(r.agent, env, r.steps);
  const std::string bytes = encode_checkpoint(ck);
  const Checkpoint back = decode_checkpoint(bytes);
  EXPECT_TRUE(back.actor == ck.actor);
  ASSERT_TRUE(back.critic && back.target);
  EXPECT_TRUE(*back.critic == *ck.critic);
  EXPECT_TRUE(*back.target == *ck.target);
  EXPECT_EQ(back.log_alpha, ck.log_alpha);
  EXPECT_EQ(back.sac.actor_hidden, ck.sac.actor_hidden);
  EXPECT_EQ(encode_checkpoint(back), bytes);
  EXPECT_EQ(bytes.substr(0, 8), "QBCKPT01");
}

TEST(Checkpoint, CorruptInputIsRejected) {
  Checkpoint ck;
  ck.obs_config = "eW-u";
  ck.actor = ActorNet<float>::make(7, {4}, Vec4::Ones());
  std::string bytes = encode_checkpoint(ck);
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bad_magic), Error);
  EXPECT_THROW(decode_checkpoint(bytes.substr(0, bytes.size() - 4)), Error);
  EXPECT_THROW(decode_checkpoint(bytes + "xxxx"), Error);
  try {
    load_checkpoint("/nonexistent/x.qbck");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingData);
  }
}

TEST(Train, EvaluationUsesHoverCorrectedPolicy) {
  TrainSchedule sch;
  sch.total_steps = 200;
  const TrainResult r = train(tiny_env(), tiny_sac(), sch, 4);
  const PolicyEvaluation a = evaluate_policy(r.agent.actor(), tiny_env(), 3, 9);
  const PolicyEvaluation b = evaluate_policy(r.agent.actor(), tiny_env(), 3, 9);
  EXPECT_EQ(a.mean_return, b.mean_return);
  EXPECT_GE(a.crashes, 0);
  EXPECT_LE(a.crashes, 3);
}
