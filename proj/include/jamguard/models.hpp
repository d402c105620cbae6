#pragma once

#include "jamguard/datakit.hpp"
#include "jamguard/forest.hpp"
#include "jamguard/neuralnet.hpp"
#include "jamguard/svm.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <variant>

namespace jamguard {

inline constexpr const char* kModelFormat = "jamguard-model";
inline constexpr int kModelVersion = 1;

nlohmann::json scaler_to_json(const Scaler& s);
Scaler scaler_from_json(const nlohmann::json& doc);
/// Throws DataError unless doc is a jamguard model of the given family and version.
void check_model_header(const nlohmann::json& doc, const std::string& family);

struct ForestSpec {
  std::size_t estimators = 100;
  TreeParams tree;
};

struct SvmSpec {
  KernelSpec kernel;
  double C = 1.0;
  SvmOptions options;
};

struct NnSpec {
  NetArchitecture arch;
  NnHyperparams hp;
};

using ModelSpec = std::variant<ForestSpec, SvmSpec, NnSpec>;

/// Short human-readable label, e.g. "forest(M=100)" or "svm(rbf,C=3)".
std::string describe(const ModelSpec& spec);
nlohmann::json to_json(const ModelSpec& spec);

using AnyModel = std::variant<Forest, SvmModel, NeuralNet>;

/// Trains the family named by spec. The seed drives bootstraps, SGD sampling
/// or weight init respectively.
AnyModel fit_model(const ModelSpec& spec, const Dataset& train, std::uint64_t seed,
                   unsigned jobs = 1);

/// Continuous score: vote fraction, SVM decision value or network output.
double model_score(const AnyModel& m, const Sample& x);
/// Score threshold of the native decision rule (predict = score > threshold).
double native_threshold(const AnyModel& m);
int model_predict(const AnyModel& m, const Sample& x);
std::string family_name(const AnyModel& m);

nlohmann::json to_json(const AnyModel& m);
AnyModel model_from_json(const nlohmann::json& doc);
void save_model(const AnyModel& m, const std::filesystem::path& path);
AnyModel load_model(const std::filesystem::path& path);

}  // namespace jamguard
