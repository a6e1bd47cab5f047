#ifndef QUADBENCH_CHECKPOINT_HPP
#define QUADBENCH_CHECKPOINT_HPP

#include <nlohmann/json.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "quadbench/error.hpp"
#include "quadbench/io.hpp"
#include "quadbench/networks.hpp"
#include "quadbench/sac.hpp"

namespace quadbench {

// Container layout:
//   8 bytes   magic "QBCKPT01"
//   8 bytes   header length n, little-endian uint64
//   n bytes   UTF-8 JSON header
//   payload   little-endian float32 arrays in header order; for every network,
//             every layer stores W row-major (out x in) followed by b.
inline constexpr char kCheckpointMagic[8] = {'Q', 'B', 'C', 'K', 'P', 'T', '0', '1'};

struct Checkpoint {
  std::string obs_config;
  int history = 10;
  long step = 0;
  SacConfig sac;
  double log_alpha = 0.0;
  ActorNet<float> actor;
  std::optional<CriticNet<float>> critic;
  std::optional<CriticNet<float>> target;
};

inline nlohmann::json sac_to_json(const SacConfig& c) {
  return {{"gamma", c.gamma},
          {"tau", c.tau},
          {"lr", c.lr},
          {"batch", c.batch},
          {"entropy_target", c.entropy_target},
          {"buffer_capacity", c.buffer_capacity},
          {"updates_per_step", c.updates_per_step},
          {"warmup_steps", c.warmup_steps},
          {"init_alpha", c.init_alpha},
          {"learn_alpha", c.learn_alpha},
          {"twin_critic", c.twin_critic},
          {"offset_in_training", c.offset_in_training},
          {"actor_hidden", c.actor_hidden},
          {"critic_hidden", c.critic_hidden},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},
          {"adam_eps", c.adam_eps}};
}

inline SacConfig sac_from_json(const nlohmann::json& j) {
  SacConfig c;
  c.gamma = j.at("gamma");
  c.tau = j.at("tau");
  c.lr = j.at("lr");
  c.batch = j.at("batch");
  c.entropy_target = j.at("entropy_target");
  c.buffer_capacity = j.at("buffer_capacity");
  c.updates_per_step = j.at("updates_per_step");
  c.warmup_steps = j.at("warmup_steps");
  c.init_alpha = j.at("init_alpha");
  c.learn_alpha = j.at("learn_alpha");
  c.twin_critic = j.at("twin_critic");
  c.offset_in_training = j.at("offset_in_training");
  c.actor_hidden = j.at("actor_hidden").get<std::vector<int>>();
  c.critic_hidden = j.at("critic_hidden").get<std::vector<int>>();
  c.adam_beta1 = j.at("adam_beta1");
  c.adam_beta2 = j.at("adam_beta2");
  c.adam_eps = j.at("adam_eps");
  return c;
}

namespace detail {

inline void put_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

inline void put_u64_le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

inline std::uint64_t get_u64_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

inline std::uint32_t get_u32_le(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

inline nlohmann::json describe(const std::string& name, const Mlp<float>& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : net.layers()) {
    layers.push_back({{"in", l.in()}, {"out", l.out()}, {"activation", to_string(l.activation)}});
  }
  return {{"name", name}, {"layers", layers}};
}

inline void write_net(std::string& out, const Mlp<float>& net) {
  for (const auto& l : net.layers()) {
    for (Eigen::Index r = 0; r < l.W.rows(); ++r)
      for (Eigen::Index c = 0; c < l.W.cols(); ++c) put_u32_le(out, std::bit_cast<std::uint32_t>(l.W(r, c)));
    for (Eigen::Index r = 0; r < l.b.size(); ++r) put_u32_le(out, std::bit_cast<std::uint32_t>(l.b[r]));
  }
}

class PayloadReader {
 public:
  PayloadReader(const unsigned char* data, std::size_t size) : data_(data), size_(size) {}

  float next() {
    if (pos_ + 4 > size_) throw Error(ErrorKind::Io, "checkpoint payload truncated");
    const float v = std::bit_cast<float>(get_u32_le(data_ + pos_));
    pos_ += 4;
    return v;
  }

  bool exhausted() const { return pos_ == size_; }

 private:
  const unsigned char* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

inline Mlp<float> read_net(const nlohmann::json& desc, PayloadReader& reader) {
  Mlp<float> net;
  for (const auto& ld : desc.at("layers")) {
    DenseLayer<float> l;
    const Eigen::Index in = ld.at("in");
    const Eigen::Index out = ld.at("out");
    l.activation = parse_activation(ld.at("activation").get<std::string>());
    l.W.resize(out, in);
    l.b.resize(out);
    for (Eigen::Index r = 0; r < out; ++r)
      for (Eigen::Index c = 0; c < in; ++c) l.W(r, c) = reader.next();
    for (Eigen::Index r = 0; r < out; ++r) l.b[r] = reader.next();
    net.layers().push_back(std::move(l));
  }
  return net;
}

}  // namespace detail

inline std::string encode_checkpoint(const Checkpoint& ck) {
  nlohmann::json header;
  header["format"] = "quadbench-checkpoint";
  header["version"] = 1;
  header["dtype"] = "float32-le";
  header["obs_config"] = ck.obs_config;
  header["history"] = ck.history;
  header["step"] = ck.step;
  header["log_alpha"] = ck.log_alpha;
  header["sac"] = sac_to_json(ck.sac);
  std::vector<float> scale(ck.actor.scale.data(), ck.actor.scale.data() + kActionDim);
  header["action_scale"] = scale;
  nlohmann::json nets = nlohmann::json::array();
  nets.push_back(detail::describe("actor", ck.actor.net));
  if (ck.critic) {
    nets.push_back(detail::describe("q1", ck.critic->q1));
    nets.push_back(detail::describe("q2", ck.critic->q2));
  }
  if (ck.target) {
    nets.push_back(detail::describe("q1_target", ck.target->q1));
    nets.push_back(detail::describe("q2_target", ck.target->q2));
  }
  header["networks"] = nets;

  const std::string text = header.dump();
  std::string out(kCheckpointMagic, kCheckpointMagic + 8);
  detail::put_u64_le(out, text.size());
  out += text;
  detail::write_net(out, ck.actor.net);
  if (ck.critic) {
    detail::write_net(out, ck.critic->q1);
    detail::write_net(out, ck.critic->q2);
  }
  if (ck.target) {
    detail::write_net(out, ck.target->q1);
    detail::write_net(out, ck.target->q2);
  }
  return out;
}

inline Checkpoint decode_checkpoint(const std::string& bytes) {
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kCheckpointMagic, 8) != 0) {
    throw Error(ErrorKind::Io, "not a quadbench checkpoint");
  }
  const std::uint64_t n = detail::get_u64_le(data + 8);
  if (16 + n > bytes.size()) throw Error(ErrorKind::Io, "checkpoint header truncated");
  const nlohmann::json header = nlohmann::json::parse(bytes.substr(16, n));
  if (header.at("version") != 1) throw Error(ErrorKind::Io, "unsupported checkpoint version");

  Checkpoint ck;
  ck.obs_config = header.at("obs_config");
  ck.history = header.at("history");
  ck.step = header.at("step");
  ck.log_alpha = header.at("log_alpha");
  ck.sac = sac_from_json(header.at("sac"));
  const auto scale = header.at("action_scale").get<std::vector<float>>();
  if (scale.size() != kActionDim) throw Error(ErrorKind::Io, "checkpoint action scale");

  detail::PayloadReader reader(data + 16 + n, bytes.size() - 16 - n);
  std::optional<Mlp<float>> q1, q2, t1, t2;
  for (const auto& desc : header.at("networks")) {
    const std::string name = desc.at("name");
    Mlp<float> net = detail::read_net(desc, reader);
    if (name == "actor") {
      ck.actor.net = std::move(net);
      for (int i = 0; i < kActionDim; ++i) ck.actor.scale[i] = scale[static_cast<std::size_t>(i)];
    } else if (name == "q1") {
      q1 = std::move(net);
    } else if (name == "q2") {
      q2 = std::move(net);
    } else if (name == "q1_target") {
      t1 = std::move(net);
    } else if (name == "q2_target") {
      t2 = std::move(net);
    }
  }
  if (!reader.exhausted()) throw Error(ErrorKind::Io, "checkpoint payload has trailing bytes");
  if (q1 && q2) ck.critic = CriticNet<float>{*q1, *q2, ck.sac.twin_critic};
  if (t1 && t2) ck.target = CriticNet<float>{*t1, *t2, ck.sac.twin_critic};
  return ck;
}

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  atomic_write(path, encode_checkpoint(ck));
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::MissingData, "checkpoint not found: " + path.string());
  }
  return decode_checkpoint(read_file(path));
}

}  // namespace quadbench

#endif  // QUADBENCH_CHECKPOINT_HPP
