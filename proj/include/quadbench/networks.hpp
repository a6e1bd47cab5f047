#ifndef QUADBENCH_NETWORKS_HPP
#define QUADBENCH_NETWORKS_HPP

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "quadbench/env.hpp"
#include "quadbench/error.hpp"
#include "quadbench/mlp.hpp"

namespace quadbench {

constexpr int kActionDim = 4;
constexpr int kCriticObsDim = 21;
constexpr double kLogStdMin = -20.0;
constexpr double kLogStdMax = 2.0;

// log(1 - tanh(z)^2), evaluated without cancellation for large |z|.
template <typename Scalar>
Scalar log_one_minus_tanh_sq(Scalar z) {
  const Scalar a = std::abs(z);
  return Scalar(2) * (Scalar(std::numbers::ln2) - a - std::log1p(std::exp(Scalar(-2) * a)));
}

// Log density of a = tanh(mu + sigma * eps) in the normalized action space [-1, 1].
inline double tanh_gaussian_logpdf(double a, double mu, double log_std) {
  const double z = std::atanh(a);
  const double sigma = std::exp(log_std);
  const double u = (z - mu) / sigma;
  return -0.5 * u * u - log_std - 0.5 * std::log(2.0 * std::numbers::pi) -
         log_one_minus_tanh_sq(z);
}

template <typename Scalar>
struct ActorBatch {
  MatrixX<Scalar> raw;    // scaled, squashed action (4 x B)
  MatrixX<Scalar> logp;   // 1 x B
  MatrixX<Scalar> mean;   // pre-squash mean (4 x B)
  MatrixX<Scalar> log_std;
  MatrixX<Scalar> eps;
  MatrixX<Scalar> squashed;  // tanh(z) in [-1, 1]
  MlpCache<Scalar> cache;
};

// Gaussian policy with tanh squashing. The Mlp outputs 8 values per sample:
// the means followed by the log standard deviations.
template <typename Scalar>
struct ActorNet {
  Mlp<Scalar> net;
  Eigen::Matrix<Scalar, kActionDim, 1> scale = Eigen::Matrix<Scalar, kActionDim, 1>::Ones();

  static ActorNet make(int input_width, const std::vector<int>& hidden, const Vec4& action_scale) {
    std::vector<int> widths{input_width};
    widths.insert(widths.end(), hidden.begin(), hidden.end());
    widths.push_back(2 * kActionDim);
    std::vector<Activation> acts(hidden.size(), Activation::Tanh);
    acts.push_back(Activation::Linear);
    ActorNet a;
    a.net = Mlp<Scalar>(widths, acts);
    a.scale = action_scale.cast<Scalar>();
    return a;
  }

  void initialize(std::mt19937_64& rng) {
    net.initialize(rng, Scalar(1), Scalar(3e-3));
    net.layers().back().b.tail(kActionDim).setConstant(Scalar(-1));
  }

  Eigen::Index input_width() const { return net.input_width(); }

  // eps == nullptr selects the deterministic (mean) action.
  ActorBatch<Scalar> forward(const MatrixX<Scalar>& obs, const MatrixX<Scalar>* eps) const {
    ActorBatch<Scalar> out;
    const MatrixX<Scalar> head = net.forward(obs, out.cache);
    const Eigen::Index B = obs.cols();
    out.mean = head.topRows(kActionDim);
    out.log_std = head.bottomRows(kActionDim)
                      .cwiseMax(Scalar(kLogStdMin))
                      .cwiseMin(Scalar(kLogStdMax));
    if (eps) {
      if (eps->rows() != kActionDim || eps->cols() != B) {
        throw Error(ErrorKind::ShapeError, "actor noise shape");
      }
      out.eps = *eps;
    } else {
      out.eps = MatrixX<Scalar>::Zero(kActionDim, B);
    }
    const MatrixX<Scalar> z =
        out.mean + (out.log_std.array().exp() * out.eps.array()).matrix();
    out.squashed = z.array().tanh().matrix();
    out.raw = scale.asDiagonal() * out.squashed;
    out.logp.resize(1, B);
    const Scalar half_log_2pi = Scalar(0.5 * std::log(2.0 * std::numbers::pi));
    for (Eigen::Index b = 0; b < B; ++b) {
      Scalar lp = 0;
      for (int i = 0; i < kActionDim; ++i) {
        const Scalar e = out.eps(i, b);
        lp += Scalar(-0.5) * e * e - out.log_std(i, b) - half_log_2pi -
              log_one_minus_tanh_sq(z(i, b));
      }
      out.logp(0, b) = lp;
    }
    return out;
  }

  // Reparameterized backward pass given dL/draw (4 x B) and dL/dlogp (1 x B).
  void backward(const ActorBatch<Scalar>& fwd, const MatrixX<Scalar>& d_raw,
                const MatrixX<Scalar>& d_logp, MlpGradients<Scalar>& grads) const {
    const Eigen::Index B = fwd.raw.cols();
    MatrixX<Scalar> d_head(2 * kActionDim, B);
    const MatrixX<Scalar> head = fwd.cache.outputs.back();
    for (Eigen::Index b = 0; b < B; ++b) {
      for (int i = 0; i < kActionDim; ++i) {
        const Scalar t = fwd.squashed(i, b);
        const Scalar sigma = std::exp(fwd.log_std(i, b));
        const Scalar dlp = d_logp.size() ? d_logp(0, b) : Scalar(0);
        // logp depends on z through -log(1 - tanh^2 z), whose derivative is 2 tanh z.
        const Scalar dz = d_raw(i, b) * scale[i] * (Scalar(1) - t * t) + dlp * Scalar(2) * t;
        d_head(i, b) = dz;
        const Scalar raw_ls = head(kActionDim + i, b);
        const bool clamped = raw_ls < Scalar(kLogStdMin) || raw_ls > Scalar(kLogStdMax);
        d_head(kActionDim + i, b) = clamped ? Scalar(0) : dz * sigma * fwd.eps(i, b) - dlp;
      }
    }
    net.backward(fwd.cache, d_head, grads);
  }

  bool operator==(const ActorNet&) const = default;
};

enum class ActorMode { Deterministic, Sample };

// Single-observation forward pass. Sample mode draws the noise from rng.
template <typename Scalar>
std::pair<Vec4, double> actor_forward(const ActorNet<Scalar>& actor, const Eigen::VectorXd& obs,
                                      ActorMode mode, std::mt19937_64* rng = nullptr) {
  if (obs.size() != actor.input_width()) {
    throw Error(ErrorKind::ShapeError, "actor expects " + std::to_string(actor.input_width()) +
                                           " inputs, got " + std::to_string(obs.size()));
  }
  const MatrixX<Scalar> x = obs.cast<Scalar>();
  ActorBatch<Scalar> out;
  if (mode == ActorMode::Sample) {
    if (!rng) throw Error(ErrorKind::InvalidConfig, "sample mode needs a generator");
    std::normal_distribution<double> normal(0.0, 1.0);
    MatrixX<Scalar> eps(kActionDim, 1);
    for (int i = 0; i < kActionDim; ++i) eps(i, 0) = static_cast<Scalar>(normal(*rng));
    out = actor.forward(x, &eps);
  } else {
    out = actor.forward(x, nullptr);
  }
  return {out.raw.col(0).template cast<double>(), static_cast<double>(out.logp(0, 0))};
}

// Hover-offset corrected deterministic action: u(obs) - u(o0), clamped to bounds.
template <typename Scalar>
PolicyAction act(const ActorNet<Scalar>& actor, const Eigen::VectorXd& obs,
                 const Eigen::VectorXd& o0) {
  const Vec4 u = actor_forward(actor, obs, ActorMode::Deterministic).first;
  const Vec4 u0 = actor_forward(actor, o0, ActorMode::Deterministic).first;
  const Vec4 bounds = actor.scale.template cast<double>();
  return PolicyAction::from_vector((u - u0).cwiseMax(-bounds).cwiseMin(bounds));
}

// Twin Q networks on [critic observation, action].
template <typename Scalar>
struct CriticNet {
  Mlp<Scalar> q1;
  Mlp<Scalar> q2;
  bool twin = true;

  static CriticNet make(const std::vector<int>& hidden, bool twin = true,
                        int obs_width = kCriticObsDim) {
    std::vector<int> widths{obs_width + kActionDim};
    widths.insert(widths.end(), hidden.begin(), hidden.end());
    widths.push_back(1);
    std::vector<Activation> acts(hidden.size(), Activation::Relu);
    acts.push_back(Activation::Linear);
    CriticNet c;
    c.q1 = Mlp<Scalar>(widths, acts);
    c.q2 = Mlp<Scalar>(widths, acts);
    c.twin = twin;
    return c;
  }

  void initialize(std::mt19937_64& rng) {
    q1.initialize(rng, Scalar(std::numbers::sqrt2), Scalar(3e-3));
    q2.initialize(rng, Scalar(std::numbers::sqrt2), Scalar(3e-3));
  }

  Eigen::Index obs_width() const { return q1.input_width() - kActionDim; }

  static MatrixX<Scalar> join(const MatrixX<Scalar>& obs, const MatrixX<Scalar>& action) {
    MatrixX<Scalar> x(obs.rows() + action.rows(), obs.cols());
    x.topRows(obs.rows()) = obs;
    x.bottomRows(action.rows()) = action;
    return x;
  }

  void soft_update_from(const CriticNet& online, Scalar tau) {
    q1.soft_update_from(online.q1, tau);
    q2.soft_update_from(online.q2, tau);
  }

  bool operator==(const CriticNet&) const = default;
};

// Both Q values; `action` is expected divided by the action bounds.
template <typename Scalar>
std::pair<double, double> critic_forward(const CriticNet<Scalar>& critic,
                                         const Eigen::VectorXd& priv_obs, const Vec4& action) {
  if (priv_obs.size() != critic.obs_width()) {
    throw Error(ErrorKind::ShapeError, "critic expects " + std::to_string(critic.obs_width()) +
                                           " observation values, got " +
                                           std::to_string(priv_obs.size()));
  }
  const MatrixX<Scalar> x =
      CriticNet<Scalar>::join(priv_obs.cast<Scalar>(), action.cast<Scalar>());
  const double q1 = static_cast<double>(critic.q1.forward(x)(0, 0));
  const double q2 = critic.twin ? static_cast<double>(critic.q2.forward(x)(0, 0)) : q1;
  return {q1, q2};
}

}  // namespace quadbench

#endif  // QUADBENCH_NETWORKS_HPP
