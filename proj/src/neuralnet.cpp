#include "jamguard/neuralnet.hpp"

#include "jamguard/models.hpp"

#include <limits>

namespace jamguard {

NetArchitecture NetArchitecture::with_hidden(const std::vector<int>& hidden) {
  NetArchitecture a;
  a.layer_sizes = {kFeatureCount};
  a.layer_sizes.insert(a.layer_sizes.end(), hidden.begin(), hidden.end());
  a.layer_sizes.push_back(1);
  a.validate();
  return a;
}

std::vector<int> NetArchitecture::hidden() const {
  if (layer_sizes.size() < 2) return {};
  return {layer_sizes.begin() + 1, layer_sizes.end() - 1};
}

void NetArchitecture::validate() const {
  if (layer_sizes.size() < 3)
    throw std::invalid_argument("architecture: need at least one hidden layer");
  if (layer_sizes.front() != kFeatureCount)
    throw std::invalid_argument("architecture: input layer must have 4 units");
  if (layer_sizes.back() != 1) throw std::invalid_argument("architecture: output layer must have 1 unit");
  for (int s : layer_sizes)
    if (s < 1) throw std::invalid_argument("architecture: layer sizes must be >= 1");
}

double cost(const NeuralNet& net, const Dataset& d, double lambda) {
  return cost<double>(net, scaler_apply(net.scaler, d.features()), d.labels(), lambda);
}

std::vector<NeuralNet::Matrix> backprop_gradients(const NeuralNet& net, const Dataset& d,
                                                  double lambda) {
  return backprop_gradients<double>(net, scaler_apply(net.scaler, d.features()), d.labels(), lambda);
}

NeuralNet initial_net(const NetArchitecture& arch, std::uint64_t seed) {
  NeuralNet net = NeuralNet::zeros(arch);
  Rng rng(derive_seed(seed, streams::kModel));
  for (auto& w : net.weights) {
    const double fan_in = static_cast<double>(w.cols() - 1);
    const double fan_out = static_cast<double>(w.rows());
    const double eps = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> u(-eps, eps);
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = u(rng);
  }
  return net;
}

namespace {

double cost_from_output(const NeuralNet::Matrix& h, const LabelVector& y, double lambda,
                        double reg) {
  const double m = static_cast<double>(y.size());
  double total = 0.0;
  for (Eigen::Index i = 0; i < h.cols(); ++i)
    total -= y[i] == 1 ? std::log(std::max(h(0, i), kLogClamp))
                       : std::log(std::max(1.0 - h(0, i), kLogClamp));
  return total / m + lambda / (2.0 * m) * reg;
}

}  // namespace

NeuralNet fit_nn(const Dataset& train, const NetArchitecture& arch, const NnHyperparams& hp) {
  arch.validate();
  if (train.empty()) throw TrainingError("nn: empty training set");
  if (!(hp.learning_rate > 0) || !(hp.tolerance > 0) || hp.max_epochs < 1 || hp.lambda < 0)
    throw TrainingError("nn: invalid hyperparameters");

  NeuralNet net = initial_net(arch, hp.init_seed);
  net.hyperparams = hp;
  net.scaler = scaler_fit(train);
  const NeuralNet::Matrix inputs = scaler_apply(net.scaler, train.features()).transpose();
  const LabelVector& y = train.labels();

  auto acts = forward_batch(net, inputs);
  double current = cost_from_output(acts.output(), y, hp.lambda, regularization_sum(net));
  net.training_costs = {current};

  NeuralNet trial = net;
  Activations<double> trial_acts = acts;
  std::vector<NeuralNet::Matrix> grads;
  BackpropWorkspace<double> ws;
  for (int epoch = 0; epoch < hp.max_epochs; ++epoch) {
    backprop_into(net, acts, y, hp.lambda, grads, ws);
    double step = hp.learning_rate;
    bool accepted = false;
    double trial_cost = current;
    for (int halving = 0; halving <= kMaxHalvings; ++halving, step *= 0.5) {
      for (std::size_t l = 0; l < net.weights.size(); ++l)
        trial.weights[l] = net.weights[l] - step * grads[l];
      forward_into(trial, trial_acts);
      trial_cost = cost_from_output(trial_acts.output(), y, hp.lambda, regularization_sum(trial));
      if (std::isfinite(trial_cost) && trial_cost <= current) {
        accepted = true;
        std::swap(acts, trial_acts);
        break;
      }
    }
    if (!accepted) {
      // A vanishing step that only loses to rounding means we are at a stationary point.
      if (std::isfinite(trial_cost) &&
          trial_cost - current <= 64 * std::numeric_limits<double>::epsilon() * current)
        break;
      throw TrainingError("nn: diverged at epoch " + std::to_string(epoch) + " after " +
                          std::to_string(kMaxHalvings) + " step halvings");
    }
    std::swap(net.weights, trial.weights);
    const double improvement = current - trial_cost;
    current = trial_cost;
    net.training_costs.push_back(current);
    if (improvement < hp.tolerance) break;
  }
  return net;
}

double nn_output(const NeuralNet& net, const Sample& x) {
  return output(net, scaler_apply(net.scaler, x.features()));
}

int nn_predict(const NeuralNet& net, const Sample& x) { return output_to_class(nn_output(net, x)); }

// ---- serialization --------------------------------------------------------

nlohmann::json to_json(const NeuralNet& net) {
  const NnHyperparams& hp = net.hyperparams;
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& w : net.weights) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < w.cols(); ++c) row.push_back(w(r, c));
      rows.push_back(row);
    }
    layers.push_back(rows);
  }
  nlohmann::json doc = {{"format", kModelFormat},
                        {"version", kModelVersion},
                        {"family", "nn"},
                        {"layer_sizes", net.arch.layer_sizes},
                        {"weights", layers},
                        {"scaler", scaler_to_json(net.scaler)},
                        {"hyperparams",
                         {{"lambda", hp.lambda},
                          {"learning_rate", hp.learning_rate},
                          {"max_epochs", hp.max_epochs},
                          {"tolerance", hp.tolerance},
                          {"init_seed", hp.init_seed}}}};
  return doc;
}

NeuralNet nn_from_json(const nlohmann::json& doc) {
  check_model_header(doc, "nn");
  NeuralNet net;
  try {
    net.arch.layer_sizes = doc.at("layer_sizes").get<std::vector<int>>();
    net.arch.validate();
    for (const auto& layer : doc.at("weights")) {
      const auto rows = static_cast<Eigen::Index>(layer.size());
      const auto cols = rows > 0 ? static_cast<Eigen::Index>(layer[0].size()) : 0;
      NeuralNet::Matrix w(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = layer[static_cast<std::size_t>(r)];
        if (static_cast<Eigen::Index>(row.size()) != cols) throw DataError("nn model: ragged weight matrix");
        for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = row[static_cast<std::size_t>(c)].get<double>();
      }
      net.weights.push_back(std::move(w));
    }
    net.scaler = scaler_from_json(doc.at("scaler"));
    if (doc.contains("hyperparams")) {
      const auto& h = doc["hyperparams"];
      net.hyperparams.lambda = h.at("lambda").get<double>();
      net.hyperparams.learning_rate = h.at("learning_rate").get<double>();
      net.hyperparams.max_epochs = h.at("max_epochs").get<int>();
      net.hyperparams.tolerance = h.at("tolerance").get<double>();
      net.hyperparams.init_seed = h.at("init_seed").get<std::uint64_t>();
    }
    check_shapes(net);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("nn model: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("nn model: ") + e.what());
  }
  return net;
}

}  // namespace jamguard
