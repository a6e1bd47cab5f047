#ifndef QUADBENCH_MLP_HPP
#define QUADBENCH_MLP_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "quadbench/error.hpp"

namespace quadbench {

enum class Activation { Tanh, Relu, Linear };

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
    case Activation::Linear: return "linear";
  }
  return "?";
}

inline Activation parse_activation(const std::string& s) {
  if (s == "tanh") return Activation::Tanh;
  if (s == "relu") return Activation::Relu;
  if (s == "linear") return Activation::Linear;
  throw Error(ErrorKind::UnknownName, "activation '" + s + "'");
}

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct DenseLayer {
  MatrixX<Scalar> W;  // out x in
  VectorX<Scalar> b;  // out
  Activation activation = Activation::Linear;

  Eigen::Index in() const { return W.cols(); }
  Eigen::Index out() const { return W.rows(); }
};

// Gradients with the same shapes as the parameters of an Mlp.
template <typename Scalar>
struct MlpGradients {
  std::vector<MatrixX<Scalar>> dW;
  std::vector<VectorX<Scalar>> db;

  void set_zero() {
    for (auto& g : dW) g.setZero();
    for (auto& g : db) g.setZero();
  }
};

// Activations recorded by a forward pass; consumed by backward.
template <typename Scalar>
struct MlpCache {
  std::vector<MatrixX<Scalar>> inputs;   // input of each layer
  std::vector<MatrixX<Scalar>> outputs;  // post-activation output of each layer
  bool valid = false;
};

// Fully connected network operating on column batches (features x batch).
template <typename Scalar>
class Mlp {
 public:
  using Matrix = MatrixX<Scalar>;
  using Vector = VectorX<Scalar>;

  Mlp() = default;

  // widths = {in, h1, ..., out}; one activation per layer.
  Mlp(const std::vector<int>& widths, const std::vector<Activation>& activations) {
    if (widths.size() < 2 || activations.size() + 1 != widths.size()) {
      throw Error(ErrorKind::ShapeError, "mlp: widths/activations mismatch");
    }
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
      DenseLayer<Scalar> l;
      l.W = Matrix::Zero(widths[i + 1], widths[i]);
      l.b = Vector::Zero(widths[i + 1]);
      l.activation = activations[i];
      layers_.push_back(std::move(l));
    }
  }

  std::vector<DenseLayer<Scalar>>& layers() { return layers_; }
  const std::vector<DenseLayer<Scalar>>& layers() const { return layers_; }
  Eigen::Index input_width() const { return layers_.front().in(); }
  Eigen::Index output_width() const { return layers_.back().out(); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.W.size() + l.b.size());
    return n;
  }

  MlpGradients<Scalar> zero_gradients() const {
    MlpGradients<Scalar> g;
    for (const auto& l : layers_) {
      g.dW.push_back(Matrix::Zero(l.W.rows(), l.W.cols()));
      g.db.push_back(Vector::Zero(l.b.size()));
    }
    return g;
  }

  Matrix forward(const Matrix& x) const {
    check_input(x);
    Matrix h = x;
    for (const auto& l : layers_) h = apply(l, h);
    return h;
  }

  Matrix forward(const Matrix& x, MlpCache<Scalar>& cache) const {
    check_input(x);
    cache.inputs.resize(layers_.size());
    cache.outputs.resize(layers_.size());
    const Matrix* h = &x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      cache.inputs[i] = *h;
      cache.outputs[i] = apply(layers_[i], *h);
      h = &cache.outputs[i];
    }
    cache.valid = true;
    return cache.outputs.back();
  }

  // Accumulates dL/dparams into grads and returns dL/dinput.
  Matrix backward(const MlpCache<Scalar>& cache, const Matrix& upstream,
                  MlpGradients<Scalar>& grads) const {
    if (!cache.valid || cache.outputs.size() != layers_.size()) {
      throw Error(ErrorKind::NoForwardCache, "backward called without a matching forward pass");
    }
    if (upstream.rows() != output_width() || upstream.cols() != cache.outputs.back().cols()) {
      throw Error(ErrorKind::ShapeError, "mlp backward: upstream gradient shape");
    }
    Matrix delta = upstream;
    for (std::size_t k = layers_.size(); k-- > 0;) {
      const auto& l = layers_[k];
      const Matrix& y = cache.outputs[k];
      switch (l.activation) {
        case Activation::Tanh:
          delta.array() *= (Scalar(1) - y.array().square());
          break;
        case Activation::Relu:
          delta.array() *= (y.array() > Scalar(0)).template cast<Scalar>();
          break;
        case Activation::Linear:
          break;
      }
      grads.dW[k].noalias() += delta * cache.inputs[k].transpose();
      grads.db[k].noalias() += delta.rowwise().sum();
      Matrix next = l.W.transpose() * delta;
      delta = std::move(next);
    }
    return delta;
  }

  // Orthogonal hidden layers with the given gain, uniform(+-head_scale) output layer.
  void initialize(std::mt19937_64& rng, Scalar hidden_gain, Scalar head_scale) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      auto& l = layers_[i];
      l.b.setZero();
      if (i + 1 == layers_.size()) {
        for (Eigen::Index j = 0; j < l.W.size(); ++j) {
          l.W.data()[j] = static_cast<Scalar>(head_scale * unif(rng));
        }
        for (Eigen::Index j = 0; j < l.b.size(); ++j) {
          l.b[j] = static_cast<Scalar>(head_scale * unif(rng));
        }
        continue;
      }
      const Eigen::Index rows = std::max(l.W.rows(), l.W.cols());
      const Eigen::Index cols = std::min(l.W.rows(), l.W.cols());
      Eigen::MatrixXd a(rows, cols);
      for (Eigen::Index j = 0; j < a.size(); ++j) a.data()[j] = normal(rng);
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
      Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
      const Eigen::MatrixXd r = qr.matrixQR().topRows(cols);
      for (Eigen::Index j = 0; j < cols; ++j) {
        if (r(j, j) < 0.0) q.col(j) *= -1.0;
      }
      if (l.W.rows() < l.W.cols()) q.transposeInPlace();
      l.W = (q * static_cast<double>(hidden_gain)).template cast<Scalar>();
    }
  }

  bool all_finite() const {
    for (const auto& l : layers_) {
      if (!l.W.allFinite() || !l.b.allFinite()) return false;
    }
    return true;
  }

  // target <- tau * source + (1 - tau) * target
  void soft_update_from(const Mlp& source, Scalar tau) {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      layers_[i].W = tau * source.layers_[i].W + (Scalar(1) - tau) * layers_[i].W;
      layers_[i].b = tau * source.layers_[i].b + (Scalar(1) - tau) * layers_[i].b;
    }
  }

  template <typename Other>
  Mlp<Other> cast() const {
    Mlp<Other> out;
    for (const auto& l : layers_) {
      DenseLayer<Other> o;
      o.W = l.W.template cast<Other>();
      o.b = l.b.template cast<Other>();
      o.activation = l.activation;
      out.layers().push_back(std::move(o));
    }
    return out;
  }

  bool operator==(const Mlp& other) const {
    if (layers_.size() != other.layers_.size()) return false;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const auto& a = layers_[i];
      const auto& b = other.layers_[i];
      if (a.activation != b.activation || a.W.rows() != b.W.rows() || a.W.cols() != b.W.cols() ||
          a.W != b.W || a.b != b.b) {
        return false;
      }
    }
    return true;
  }

 private:
  void check_input(const Matrix& x) const {
    if (layers_.empty() || x.rows() != input_width()) {
      throw Error(ErrorKind::ShapeError, "mlp input has " + std::to_string(x.rows()) +
                                             " rows, expected " +
                                             std::to_string(layers_.empty() ? 0 : input_width()));
    }
  }

  static Matrix apply(const DenseLayer<Scalar>& l, const Matrix& x) {
    Matrix z = l.W * x;
    z.colwise() += l.b;
    switch (l.activation) {
      case Activation::Tanh: return z.array().tanh().matrix();
      case Activation::Relu: return z.cwiseMax(Scalar(0));
      case Activation::Linear: return z;
    }
    return z;
  }

  std::vector<DenseLayer<Scalar>> layers_;
};

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam moments for one Mlp.
template <typename Scalar>
class AdamOptimizer {
 public:
  AdamOptimizer() = default;
  AdamOptimizer(const Mlp<Scalar>& net, AdamConfig cfg)
      : cfg_(cfg), m_(net.zero_gradients()), v_(net.zero_gradients()) {}

  void step(Mlp<Scalar>& net, const MlpGradients<Scalar>& g) {
    t_ += 1;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
    const auto lr = static_cast<Scalar>(cfg_.lr * std::sqrt(bc2) / bc1);
    const auto b1 = static_cast<Scalar>(cfg_.beta1);
    const auto b2 = static_cast<Scalar>(cfg_.beta2);
    const auto eps = static_cast<Scalar>(cfg_.eps * std::sqrt(bc2));
    auto& layers = net.layers();
    for (std::size_t i = 0; i < layers.size(); ++i) {
      update(layers[i].W, m_.dW[i], v_.dW[i], g.dW[i], lr, b1, b2, eps);
      update(layers[i].b, m_.db[i], v_.db[i], g.db[i], lr, b1, b2, eps);
    }
  }

  const AdamConfig& config() const { return cfg_; }

 private:
  template <typename P, typename G>
  static void update(P& param, G& m, G& v, const G& g, Scalar lr, Scalar b1, Scalar b2,
                     Scalar eps) {
    m = b1 * m + (Scalar(1) - b1) * g;
    v.array() = b2 * v.array() + (Scalar(1) - b2) * g.array().square();
    param.array() -= lr * m.array() / (v.array().sqrt() + eps);
  }

  AdamConfig cfg_;
  MlpGradients<Scalar> m_;
  MlpGradients<Scalar> v_;
  long t_ = 0;
};

// Adam on a single scalar (the entropy temperature).
class ScalarAdam {
 public:
  ScalarAdam() = default;
  explicit ScalarAdam(AdamConfig cfg) : cfg_(cfg) {}

  double step(double value, double grad) {
    t_ += 1;
    m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
    v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad * grad;
    const double mhat = m_ / (1.0 - std::pow(cfg_.beta1, t_));
    const double vhat = v_ / (1.0 - std::pow(cfg_.beta2, t_));
    return value - cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
  }

 private:
  AdamConfig cfg_;
  double m_ = 0.0;
  double v_ = 0.0;
  long t_ = 0;
};

}  // namespace quadbench

#endif  // QUADBENCH_MLP_HPP
