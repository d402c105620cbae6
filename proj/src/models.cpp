#include "jamguard/models.hpp"

#include "jamguard/format.hpp"

#include <fstream>
#include <sstream>

namespace jamguard {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

nlohmann::json scaler_to_json(const Scaler& s) {
  return {{"means", std::vector<double>(s.means.data(), s.means.data() + kFeatureCount)},
          {"stddevs", std::vector<double>(s.stddevs.data(), s.stddevs.data() + kFeatureCount)}};
}

Scaler scaler_from_json(const nlohmann::json& doc) {
  const auto means = doc.at("means").get<std::vector<double>>();
  const auto sds = doc.at("stddevs").get<std::vector<double>>();
  if (means.size() != kFeatureCount || sds.size() != kFeatureCount)
    throw DataError("scaler: arity mismatch");
  Scaler s;
  for (int j = 0; j < kFeatureCount; ++j) {
    s.means[j] = means[static_cast<std::size_t>(j)];
    s.stddevs[j] = sds[static_cast<std::size_t>(j)];
    if (!(s.stddevs[j] > 0)) throw DataError("scaler: stddev must be > 0");
  }
  return s;
}

void check_model_header(const nlohmann::json& doc, const std::string& family) {
  if (!doc.is_object() || doc.value("format", "") != kModelFormat)
    throw DataError("not a jamguard model document");
  if (doc.value("version", -1) != kModelVersion)
    throw DataError("unsupported model version (expected " + std::to_string(kModelVersion) + ")");
  if (doc.value("family", "") != family)
    throw DataError("model family is '" + doc.value("family", "") + "', expected '" + family + "'");
}

std::string describe(const ModelSpec& spec) {
  return std::visit(
      overloaded{
          [](const ForestSpec& f) { return "forest(M=" + std::to_string(f.estimators) + ")"; },
          [](const SvmSpec& s) {
            return "svm(" + std::string(to_string(s.kernel.kind)) + ",C=" + format_double(s.C) + ")";
          },
          [](const NnSpec& n) {
            std::string h;
            for (int v : n.arch.hidden()) h += (h.empty() ? "" : ",") + std::to_string(v);
            return "nn(hidden=" + h + ")";
          },
      },
      spec);
}

nlohmann::json to_json(const ModelSpec& spec) {
  return std::visit(
      overloaded{
          [](const ForestSpec& f) -> nlohmann::json {
            return {{"family", "forest"},
                    {"estimators", f.estimators},
                    {"max_depth", f.tree.max_depth ? nlohmann::json(*f.tree.max_depth) : nlohmann::json()},
                    {"min_samples_split", f.tree.min_samples_split},
                    {"split_criterion", f.tree.split_criterion == SplitCriterion::gini ? "gini" : "entropy"},
                    {"features_per_split", f.tree.features_per_split}};
          },
          [](const SvmSpec& s) -> nlohmann::json {
            return {{"family", "svm"},
                    {"kernel", std::string(to_string(s.kernel.kind))},
                    {"gamma", s.kernel.gamma ? nlohmann::json(*s.kernel.gamma) : nlohmann::json("auto")},
                    {"coef0", s.kernel.coef0},
                    {"C", s.C},
                    {"epochs", s.options.epochs},
                    {"tolerance", s.options.tolerance},
                    {"burn_in_epochs", s.options.burn_in_epochs}};
          },
          [](const NnSpec& n) -> nlohmann::json {
            return {{"family", "nn"},
                    {"hidden", n.arch.hidden()},
                    {"lambda", n.hp.lambda},
                    {"learning_rate", n.hp.learning_rate},
                    {"max_epochs", n.hp.max_epochs},
                    {"tolerance", n.hp.tolerance}};
          },
      },
      spec);
}

AnyModel fit_model(const ModelSpec& spec, const Dataset& train, std::uint64_t seed, unsigned jobs) {
  return std::visit(
      overloaded{
          [&](const ForestSpec& f) -> AnyModel {
            return fit_forest(train, f.estimators, f.tree, seed, jobs);
          },
          [&](const SvmSpec& s) -> AnyModel { return fit_svm(train, s.kernel, s.C, seed, s.options); },
          [&](const NnSpec& n) -> AnyModel {
            NnHyperparams hp = n.hp;
            hp.init_seed = seed;
            return fit_nn(train, n.arch, hp);
          },
      },
      spec);
}

double model_score(const AnyModel& m, const Sample& x) {
  return std::visit(overloaded{
                        [&](const Forest& f) { return vote_fraction(f, x); },
                        [&](const SvmModel& s) { return svm_decision(s, x); },
                        [&](const NeuralNet& n) { return nn_output(n, x); },
                    },
                    m);
}

double native_threshold(const AnyModel& m) {
  return std::holds_alternative<SvmModel>(m) ? 0.0 : 0.5;
}

int model_predict(const AnyModel& m, const Sample& x) {
  return model_score(m, x) > native_threshold(m) ? 1 : 0;
}

std::string family_name(const AnyModel& m) {
  return std::visit(overloaded{
                        [](const Forest&) { return std::string("forest"); },
                        [](const SvmModel&) { return std::string("svm"); },
                        [](const NeuralNet&) { return std::string("nn"); },
                    },
                    m);
}

nlohmann::json to_json(const AnyModel& m) {
  return std::visit([](const auto& model) { return to_json(model); }, m);
}

AnyModel model_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw DataError("model: document must be a JSON object");
  const std::string family = doc.value("family", "");
  if (family == "forest") return forest_from_json(doc);
  if (family == "svm") return svm_from_json(doc);
  if (family == "nn") return nn_from_json(doc);
  throw DataError("model: unknown family '" + family + "'");
}

void save_model(const AnyModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << to_json(m).dump() << '\n';
}

AnyModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("model " + path.string() + ": " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace jamguard
