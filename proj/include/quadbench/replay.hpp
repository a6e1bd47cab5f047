#ifndef QUADBENCH_REPLAY_HPP
#define QUADBENCH_REPLAY_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <random>
#include <vector>

#include "quadbench/error.hpp"
#include "quadbench/mlp.hpp"

namespace quadbench {

template <typename Scalar>
struct TransitionBatch {
  MatrixX<Scalar> obs;          // actor observation (N*H x B)
  MatrixX<Scalar> critic_obs;   // privileged observation (21 x B)
  MatrixX<Scalar> action;       // 4 x B
  MatrixX<Scalar> reward;       // 1 x B
  MatrixX<Scalar> next_obs;
  MatrixX<Scalar> next_critic_obs;
  MatrixX<Scalar> done;         // 1 x B, 1 for terminal transitions
};

// Fixed-capacity ring of transitions stored column-wise. Oldest entries are
// overwritten first once full.
template <typename Scalar>
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, Eigen::Index obs_width, Eigen::Index critic_width,
               Eigen::Index action_width = 4)
      : capacity_(capacity),
        obs_(obs_width, static_cast<Eigen::Index>(capacity)),
        critic_obs_(critic_width, static_cast<Eigen::Index>(capacity)),
        action_(action_width, static_cast<Eigen::Index>(capacity)),
        reward_(1, static_cast<Eigen::Index>(capacity)),
        next_obs_(obs_width, static_cast<Eigen::Index>(capacity)),
        next_critic_obs_(critic_width, static_cast<Eigen::Index>(capacity)),
        done_(1, static_cast<Eigen::Index>(capacity)) {
    if (capacity == 0) throw Error(ErrorKind::InvalidConfig, "replay capacity must be positive");
  }

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }

  void push(const Eigen::VectorXd& obs, const Eigen::VectorXd& critic_obs,
            const Eigen::VectorXd& action, double reward, const Eigen::VectorXd& next_obs,
            const Eigen::VectorXd& next_critic_obs, bool done) {
    if (obs.size() != obs_.rows() || next_obs.size() != obs_.rows() ||
        critic_obs.size() != critic_obs_.rows() || next_critic_obs.size() != critic_obs_.rows() ||
        action.size() != action_.rows()) {
      throw Error(ErrorKind::ShapeError, "replay push: transition shape");
    }
    const auto i = static_cast<Eigen::Index>(head_);
    obs_.col(i) = obs.cast<Scalar>();
    critic_obs_.col(i) = critic_obs.cast<Scalar>();
    action_.col(i) = action.cast<Scalar>();
    reward_(0, i) = static_cast<Scalar>(reward);
    next_obs_.col(i) = next_obs.cast<Scalar>();
    next_critic_obs_.col(i) = next_critic_obs.cast<Scalar>();
    done_(0, i) = done ? Scalar(1) : Scalar(0);
    head_ = (head_ + 1) % capacity_;
    size_ = std::min(size_ + 1, capacity_);
  }

  // Distinct indices chosen uniformly (Floyd's algorithm), returned sorted.
  std::vector<Eigen::Index> sample_indices(std::size_t batch, std::mt19937_64& rng) const {
    if (batch == 0 || size_ < batch) {
      throw Error(ErrorKind::NotEnoughData, "buffer holds " + std::to_string(size_) +
                                                " transitions, batch needs " +
                                                std::to_string(batch));
    }
    std::vector<Eigen::Index> chosen;
    chosen.reserve(batch);
    for (std::size_t j = size_ - batch; j < size_; ++j) {
      std::uniform_int_distribution<std::size_t> pick(0, j);
      const auto t = static_cast<Eigen::Index>(pick(rng));
      if (std::find(chosen.begin(), chosen.end(), t) == chosen.end()) {
        chosen.push_back(t);
      } else {
        chosen.push_back(static_cast<Eigen::Index>(j));
      }
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
  }

  TransitionBatch<Scalar> gather(const std::vector<Eigen::Index>& idx) const {
    TransitionBatch<Scalar> b;
    b.obs = obs_(Eigen::all, idx);
    b.critic_obs = critic_obs_(Eigen::all, idx);
    b.action = action_(Eigen::all, idx);
    b.reward = reward_(Eigen::all, idx);
    b.next_obs = next_obs_(Eigen::all, idx);
    b.next_critic_obs = next_critic_obs_(Eigen::all, idx);
    b.done = done_(Eigen::all, idx);
    return b;
  }

  TransitionBatch<Scalar> sample(std::size_t batch, std::mt19937_64& rng) const {
    return gather(sample_indices(batch, rng));
  }

 private:
  std::size_t capacity_;
  std::size_t size_ = 0;
  std::size_t head_ = 0;
  MatrixX<Scalar> obs_, critic_obs_, action_, reward_, next_obs_, next_critic_obs_, done_;
};

}  // namespace quadbench

#endif  // QUADBENCH_REPLAY_HPP
