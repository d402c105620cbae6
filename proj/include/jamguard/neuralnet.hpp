#pragma once

#include "jamguard/common.hpp"
#include "jamguard/datakit.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace jamguard {

/// Layer widths from input to output, e.g. {4, 2, 2, 1}.
struct NetArchitecture {
  std::vector<int> layer_sizes{kFeatureCount, 2, 2, 1};

  static NetArchitecture with_hidden(const std::vector<int>& hidden);
  std::vector<int> hidden() const;
  void validate() const;

  bool operator==(const NetArchitecture&) const = default;
};

struct NnHyperparams {
  double lambda = 0.01;
  double learning_rate = 0.5;
  int max_epochs = 2000;
  double tolerance = 1e-7;
  std::uint64_t init_seed = 0;

  bool operator==(const NnHyperparams&) const = default;
};

inline constexpr double kLogClamp = 1e-12;

/// Fully connected sigmoid network. weights[l] maps layer l to layer l+1 and
/// has shape (size_{l+1}, size_l + 1); column 0 holds the biases.
template <typename Scalar>
struct NeuralNetT {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  NetArchitecture arch;
  std::vector<Matrix> weights;
  Scaler scaler;
  NnHyperparams hyperparams;
  /// Cost after each accepted epoch (index 0 = initial weights). Not serialized.
  std::vector<double> training_costs;

  static NeuralNetT zeros(const NetArchitecture& arch) {
    arch.validate();
    NeuralNetT net;
    net.arch = arch;
    for (std::size_t l = 0; l + 1 < arch.layer_sizes.size(); ++l)
      net.weights.push_back(Matrix::Zero(arch.layer_sizes[l + 1], arch.layer_sizes[l] + 1));
    return net;
  }

  template <typename Other>
  NeuralNetT<Other> cast() const {
    NeuralNetT<Other> out;
    out.arch = arch;
    out.scaler = scaler;
    out.hyperparams = hyperparams;
    for (const auto& w : weights) out.weights.push_back(w.template cast<Other>());
    return out;
  }

  bool operator==(const NeuralNetT& o) const {
    return arch == o.arch && weights == o.weights && scaler == o.scaler;
  }
};

using NeuralNet = NeuralNetT<double>;

/// Column-wise activations of every layer; acts[0] is the input.
template <typename Scalar>
struct Activations {
  std::vector<typename NeuralNetT<Scalar>::Matrix> layers;

  const auto& output() const { return layers.back(); }
};

template <typename Scalar>
void check_shapes(const NeuralNetT<Scalar>& net) {
  const auto& sizes = net.arch.layer_sizes;
  if (net.weights.size() + 1 != sizes.size())
    throw std::invalid_argument("neural net: layer count does not match architecture");
  for (std::size_t l = 0; l < net.weights.size(); ++l)
    if (net.weights[l].rows() != sizes[l + 1] || net.weights[l].cols() != sizes[l] + 1)
      throw std::invalid_argument("neural net: weight matrix shape mismatch at layer " +
                                  std::to_string(l));
}

/// Recomputes every layer after acts.layers[0] in place, reusing storage.
template <typename Scalar>
void forward_into(const NeuralNetT<Scalar>& net, Activations<Scalar>& acts) {
  check_shapes(net);
  if (acts.layers.empty() || acts.layers[0].rows() != net.arch.layer_sizes.front())
    throw std::invalid_argument("forward: input arity mismatch");
  acts.layers.resize(net.weights.size() + 1);
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const auto& w = net.weights[l];
    auto& z = acts.layers[l + 1];
    z.resize(w.rows(), acts.layers[l].cols());
    z.noalias() = w.rightCols(w.cols() - 1) * acts.layers[l];
    z.colwise() += w.col(0);
    z = (Scalar(1) + (-z.array()).exp()).inverse().matrix();
  }
}

/// Batch forward pass; `inputs` holds one (scaled) sample per column.
template <typename Scalar>
Activations<Scalar> forward_batch(const NeuralNetT<Scalar>& net,
                                  const typename NeuralNetT<Scalar>::Matrix& inputs) {
  Activations<Scalar> acts;
  acts.layers.push_back(inputs);
  forward_into(net, acts);
  return acts;
}

/// Single-sample forward pass; returns every layer's activation vector.
template <typename Scalar, typename Derived>
std::vector<typename NeuralNetT<Scalar>::Vector> forward(const NeuralNetT<Scalar>& net,
                                                         const Eigen::MatrixBase<Derived>& x) {
  typename NeuralNetT<Scalar>::Matrix in = x.template cast<Scalar>();
  if (in.cols() != 1) in.transposeInPlace();
  const auto acts = forward_batch(net, in);
  std::vector<typename NeuralNetT<Scalar>::Vector> out;
  for (const auto& layer : acts.layers) out.push_back(layer.col(0));
  return out;
}

template <typename Scalar, typename Derived>
Scalar output(const NeuralNetT<Scalar>& net, const Eigen::MatrixBase<Derived>& x) {
  return forward(net, x).back()[0];
}

template <typename Scalar>
Scalar regularization_sum(const NeuralNetT<Scalar>& net) {
  Scalar s(0);
  for (const auto& w : net.weights) s += w.rightCols(w.cols() - 1).squaredNorm();
  return s;
}

/// Mean cross-entropy plus (lambda/2m) * sum of squared non-bias weights.
/// `x` holds one scaled sample per row.
template <typename Scalar>
Scalar cost(const NeuralNetT<Scalar>& net, const FeatureMatrix& x, const LabelVector& y,
            Scalar lambda) {
  const auto m = static_cast<Scalar>(x.rows());
  typename NeuralNetT<Scalar>::Matrix in = x.transpose().template cast<Scalar>();
  const auto acts = forward_batch(net, in);
  const auto& h = acts.output();
  const Scalar clamp(kLogClamp);
  Scalar total(0);
  for (Eigen::Index i = 0; i < h.cols(); ++i) {
    const Scalar hi = h(0, i);
    total -= y[i] == 1 ? std::log(std::max(hi, clamp)) : std::log(std::max(Scalar(1) - hi, clamp));
  }
  return total / m + lambda / (Scalar(2) * m) * regularization_sum(net);
}

/// Scratch buffers reused across backprop calls on same-sized batches.
template <typename Scalar>
struct BackpropWorkspace {
  typename NeuralNetT<Scalar>::Matrix delta, back;
};

/// Exact gradient of `cost` (away from the log clamp), written into `grads`.
/// Bias columns carry no regularization term.
template <typename Scalar>
void backprop_into(const NeuralNetT<Scalar>& net, const Activations<Scalar>& acts,
                   const LabelVector& y, Scalar lambda,
                   std::vector<typename NeuralNetT<Scalar>::Matrix>& grads,
                   BackpropWorkspace<Scalar>& ws) {
  const std::size_t layers = net.weights.size();
  const auto m = static_cast<Scalar>(y.size());
  grads.resize(layers);
  // Sigmoid output with cross-entropy: dJ/dz_out = h - y.
  auto& delta = ws.delta;
  delta = acts.output();
  delta.row(0) -= y.transpose().template cast<Scalar>();
  for (std::size_t l = layers; l-- > 0;) {
    const auto& a = acts.layers[l];
    const auto& w = net.weights[l];
    auto& g = grads[l];
    g.resize(w.rows(), w.cols());
    g.col(0) = delta.rowwise().sum() / m;
    g.rightCols(g.cols() - 1) = delta * a.transpose() / m + (lambda / m) * w.rightCols(g.cols() - 1);
    if (l > 0) {
      ws.back.resize(w.cols() - 1, delta.cols());
      ws.back.noalias() = w.rightCols(w.cols() - 1).transpose() * delta;
      delta = ws.back.array() * a.array() * (Scalar(1) - a.array());
    }
  }
}

template <typename Scalar>
std::vector<typename NeuralNetT<Scalar>::Matrix> backprop_gradients(
    const NeuralNetT<Scalar>& net, const Activations<Scalar>& acts, const LabelVector& y,
    Scalar lambda) {
  std::vector<typename NeuralNetT<Scalar>::Matrix> grads;
  BackpropWorkspace<Scalar> ws;
  backprop_into(net, acts, y, lambda, grads, ws);
  return grads;
}

template <typename Scalar>
std::vector<typename NeuralNetT<Scalar>::Matrix> backprop_gradients(const NeuralNetT<Scalar>& net,
                                                                    const FeatureMatrix& x,
                                                                    const LabelVector& y,
                                                                    Scalar lambda) {
  typename NeuralNetT<Scalar>::Matrix in = x.transpose().template cast<Scalar>();
  return backprop_gradients(net, forward_batch(net, in), y, lambda);
}

/// Cost and gradient evaluated on the net's own scaler applied to d.
double cost(const NeuralNet& net, const Dataset& d, double lambda);
std::vector<NeuralNet::Matrix> backprop_gradients(const NeuralNet& net, const Dataset& d,
                                                  double lambda);

/// Glorot-uniform initial weights, seeded.
NeuralNet initial_net(const NetArchitecture& arch, std::uint64_t seed);

/// Full-batch gradient descent with step halving (at most 20 halvings per
/// epoch) so that the accepted cost sequence never increases. Stops at
/// max_epochs or when an accepted epoch improves the cost by less than
/// `tolerance`. Throws TrainingError when no halving yields a non-increasing cost.
NeuralNet fit_nn(const Dataset& train, const NetArchitecture& arch, const NnHyperparams& hp);

inline constexpr int kMaxHalvings = 20;

double nn_output(const NeuralNet& net, const Sample& x);
inline int output_to_class(double h) { return h > 0.5 ? 1 : 0; }
int nn_predict(const NeuralNet& net, const Sample& x);

nlohmann::json to_json(const NeuralNet& net);
NeuralNet nn_from_json(const nlohmann::json& doc);

}  // namespace jamguard
