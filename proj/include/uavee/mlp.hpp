// Dense ReLU multilayer perceptron with reverse-mode gradients and an RMSprop
// optimiser. Samples are stored column-wise so a minibatch is a single matrix.
#pragma once

#include <Eigen/Core>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace uavee {

template <typename Scalar>
struct DenseLayer {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix weights;  // fan_out x fan_in
  Vector bias;     // fan_out

  static DenseLayer zeros(Eigen::Index fan_in, Eigen::Index fan_out) {
    return {Matrix::Zero(fan_out, fan_in), Vector::Zero(fan_out)};
  }
  Eigen::Index fan_in() const { return weights.cols(); }
  Eigen::Index fan_out() const { return weights.rows(); }
  Eigen::Index size() const { return weights.size() + bias.size(); }
};

/// Same shape as the network's parameters; used for gradients and optimiser
/// accumulators.
template <typename Scalar>
using LayerStack = std::vector<DenseLayer<Scalar>>;

template <typename Scalar>
class Mlp {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  /// Activations recorded by a forward pass: entry 0 is the input, the last
  /// entry is the (linear) output, everything between is post-ReLU.
  using Tape = std::vector<Matrix>;

  Mlp() = default;

  /// All-zero network with the given layer widths (input first).
  explicit Mlp(const std::vector<int>& sizes) {
    if (sizes.size() < 2) throw std::invalid_argument("Mlp: need at least input and output sizes");
    for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
      if (sizes[k] <= 0 || sizes[k + 1] <= 0) throw std::invalid_argument("Mlp: layer sizes must be > 0");
      layers_.push_back(DenseLayer<Scalar>::zeros(sizes[k], sizes[k + 1]));
    }
  }

  /// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
  template <typename Urbg>
  static Mlp glorot_uniform(const std::vector<int>& sizes, Urbg& rng) {
    Mlp net(sizes);
    for (auto& layer : net.layers_) {
      const double limit = std::sqrt(6.0 / static_cast<double>(layer.fan_in() + layer.fan_out()));
      std::uniform_real_distribution<double> dist(-limit, limit);
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c)
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) layer.weights(r, c) = Scalar(dist(rng));
    }
    return net;
  }

  Eigen::Index input_size() const { return layers_.front().fan_in(); }
  Eigen::Index output_size() const { return layers_.back().fan_out(); }

  std::vector<int> sizes() const {
    std::vector<int> out;
    if (layers_.empty()) return out;
    out.push_back(static_cast<int>(layers_.front().fan_in()));
    for (const auto& l : layers_) out.push_back(static_cast<int>(l.fan_out()));
    return out;
  }

  const LayerStack<Scalar>& layers() const { return layers_; }
  LayerStack<Scalar>& layers() { return layers_; }

  Matrix forward(const Eigen::Ref<const Matrix>& inputs) const {
    check_input(inputs);
    Matrix a = inputs;
    for (std::size_t k = 0; k < layers_.size(); ++k) {
      Matrix z = layers_[k].weights * a;
      z.colwise() += layers_[k].bias;
      a = k + 1 < layers_.size() ? Matrix(z.cwiseMax(Scalar(0))) : std::move(z);
    }
    return a;
  }

  Vector forward_one(const Eigen::Ref<const Vector>& input) const {
    return forward(Matrix(input));
  }

  Matrix forward(const Eigen::Ref<const Matrix>& inputs, Tape& tape) const {
    check_input(inputs);
    tape.clear();
    tape.reserve(layers_.size() + 1);
    tape.emplace_back(inputs);
    for (std::size_t k = 0; k < layers_.size(); ++k) {
      Matrix z = layers_[k].weights * tape.back();
      z.colwise() += layers_[k].bias;
      if (k + 1 < layers_.size()) z = z.cwiseMax(Scalar(0));
      tape.push_back(std::move(z));
    }
    return tape.back();
  }

  /// Backpropagates dLoss/dOutput (output_size x batch) through a recorded
  /// forward pass and returns dLoss/dParameters.
  LayerStack<Scalar> backward(const Tape& tape, const Eigen::Ref<const Matrix>& output_grad) const {
    if (tape.size() != layers_.size() + 1) throw std::invalid_argument("Mlp::backward: tape does not match network");
    LayerStack<Scalar> grads(layers_.size());
    Matrix delta = output_grad;
    for (std::size_t k = layers_.size(); k-- > 0;) {
      grads[k].weights = delta * tape[k].transpose();
      grads[k].bias = delta.rowwise().sum();
      if (k == 0) break;
      delta = layers_[k].weights.transpose() * delta;
      // ReLU derivative from the stored post-activation: active iff > 0.
      delta = (tape[k].array() > Scalar(0)).select(delta, Scalar(0));
    }
    return grads;
  }

  Eigen::Index parameter_count() const {
    Eigen::Index n = 0;
    for (const auto& l : layers_) n += l.size();
    return n;
  }

  /// Parameters in layer order; each layer is its column-major weights then
  /// its bias.
  Vector flat_parameters() const { return flatten(layers_); }

  void set_flat_parameters(const Eigen::Ref<const Vector>& flat) {
    if (flat.size() != parameter_count()) throw std::invalid_argument("Mlp: flat parameter size mismatch");
    Eigen::Index offset = 0;
    for (auto& l : layers_) {
      l.weights = Eigen::Map<const Matrix>(flat.data() + offset, l.weights.rows(), l.weights.cols());
      offset += l.weights.size();
      l.bias = flat.segment(offset, l.bias.size());
      offset += l.bias.size();
    }
  }

  bool all_finite() const {
    for (const auto& l : layers_)
      if (!l.weights.allFinite() || !l.bias.allFinite()) return false;
    return true;
  }

  static Vector flatten(const LayerStack<Scalar>& stack) {
    Eigen::Index n = 0;
    for (const auto& l : stack) n += l.size();
    Vector flat(n);
    Eigen::Index offset = 0;
    for (const auto& l : stack) {
      flat.segment(offset, l.weights.size()) = Eigen::Map<const Vector>(l.weights.data(), l.weights.size());
      offset += l.weights.size();
      flat.segment(offset, l.bias.size()) = l.bias;
      offset += l.bias.size();
    }
    return flat;
  }

  friend bool operator==(const Mlp& a, const Mlp& b) {
    if (a.layers_.size() != b.layers_.size()) return false;
    for (std::size_t k = 0; k < a.layers_.size(); ++k) {
      const auto& la = a.layers_[k];
      const auto& lb = b.layers_[k];
      if (la.weights.rows() != lb.weights.rows() || la.weights.cols() != lb.weights.cols()) return false;
      if (la.weights != lb.weights || la.bias != lb.bias) return false;
    }
    return true;
  }

 private:
  void check_input(const Eigen::Ref<const Matrix>& inputs) const {
    if (layers_.empty()) throw std::logic_error("Mlp: empty network");
    if (inputs.rows() != input_size()) throw std::invalid_argument("Mlp: input has the wrong dimension");
    if (!inputs.allFinite()) throw std::domain_error("Mlp: non-finite input");
  }

  LayerStack<Scalar> layers_;
};

/// RMSprop in the PyTorch form: v <- rho v + (1 - rho) g^2,
/// theta <- theta - lr g / (sqrt(v) + eps).
template <typename Scalar>
class RmsProp {
 public:
  RmsProp() = default;
  RmsProp(const Mlp<Scalar>& net, double learning_rate, double decay, double epsilon)
      : learning_rate_(learning_rate), decay_(decay), epsilon_(epsilon) {
    for (const auto& l : net.layers())
      square_avg_.push_back(DenseLayer<Scalar>::zeros(l.fan_in(), l.fan_out()));
  }

  void step(Mlp<Scalar>& net, const LayerStack<Scalar>& grads) {
    auto& layers = net.layers();
    if (grads.size() != layers.size() || square_avg_.size() != layers.size())
      throw std::invalid_argument("RmsProp: gradient shape mismatch");
    const Scalar rho(decay_), lr(learning_rate_), eps(epsilon_);
    for (std::size_t k = 0; k < layers.size(); ++k) {
      update(layers[k].weights, square_avg_[k].weights, grads[k].weights, rho, lr, eps);
      update(layers[k].bias, square_avg_[k].bias, grads[k].bias, rho, lr, eps);
    }
  }

  double learning_rate() const { return learning_rate_; }
  double decay() const { return decay_; }
  double epsilon() const { return epsilon_; }
  const LayerStack<Scalar>& square_avg() const { return square_avg_; }
  LayerStack<Scalar>& square_avg() { return square_avg_; }

 private:
  template <typename Param, typename Acc, typename Grad>
  static void update(Param& param, Acc& acc, const Grad& grad, Scalar rho, Scalar lr, Scalar eps) {
    acc.array() = rho * acc.array() + (Scalar(1) - rho) * grad.array().square();
    param.array() -= lr * grad.array() / (acc.array().sqrt() + eps);
  }

  double learning_rate_ = 1e-4;
  double decay_ = 0.99;
  double epsilon_ = 1e-8;
  LayerStack<Scalar> square_avg_;
};

}  // namespace uavee
