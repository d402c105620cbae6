#pragma once

#include "jamguard/datakit.hpp"
#include "jamguard/models.hpp"
#include "jamguard/simkit.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace jamguard {

/// Anything exposing a continuous score whose native decision rule is
/// predict(x) = [score(x) > threshold].
struct ScoredModel {
  std::function<double(const Sample&)> score;
  double threshold = 0.5;

  int predict(const Sample& x) const { return score(x) > threshold ? 1 : 0; }

  static ScoredModel wrap(AnyModel model);
};

struct ConfusionMatrix {
  std::uint64_t tp = 0;  // attacks detected
  std::uint64_t fn = 0;  // attacks missed
  std::uint64_t fp = 0;  // non-attacks flagged
  std::uint64_t tn = 0;  // non-attacks passed

  std::uint64_t positives() const { return tp + fn; }
  std::uint64_t negatives() const { return fp + tn; }
  std::uint64_t total() const { return tp + fn + fp + tn; }
  void add(int label, int predicted);
  ConfusionMatrix& operator+=(const ConfusionMatrix& o);

  bool operator==(const ConfusionMatrix&) const = default;
};

/// Exact count ratio; den == 0 marks an undefined metric.
struct Ratio {
  std::uint64_t num = 0;
  std::uint64_t den = 0;

  bool defined() const { return den > 0; }
  double value() const;  // NaN when undefined

  bool operator==(const Ratio&) const = default;
};

struct EvalReport {
  ConfusionMatrix confusion;
  Ratio pd, pfa, pmd, accuracy;
  std::vector<ConfusionMatrix> folds;
  std::string model;
  std::uint64_t seed = 0;
  std::size_t k = 0;
  /// Out-of-fold score per dataset index (cross_validate only).
  std::vector<double> scores;
  /// Native score threshold of the evaluated family.
  double threshold = 0.5;

  bool operator==(const EvalReport&) const = default;
};

ConfusionMatrix confusion(const ScoredModel& m, const Dataset& test);

/// pd = tp/(tp+fn), pmd = fn/(tp+fn), pfa = fp/(fp+tn), accuracy = correct/total.
EvalReport metrics(const ConfusionMatrix& cm);

using Trainer = std::function<ScoredModel(const Dataset& train, std::uint64_t seed)>;

struct CvOptions {
  bool stratified = true;
  unsigned jobs = 1;
};

/// k-fold CV: each fold's model (and its scaler) is trained on the other
/// k-1 folds; metrics come from the confusion matrix pooled over folds.
EvalReport cross_validate(const Trainer& trainer, const Dataset& d, std::size_t k,
                          std::uint64_t seed, const CvOptions& options = {});
EvalReport cross_validate(const ModelSpec& spec, const Dataset& d, std::size_t k,
                          std::uint64_t seed, const CvOptions& options = {});

struct RocPoint {
  double pfa = 0.0;
  double pd = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

/// Threshold sweep over the distinct scores (descending); tied scores share
/// one operating point. AUC by the trapezoid rule.
RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels);
RocCurve roc_curve(std::span<const double> scores, const LabelVector& labels);
/// The operating point of the rule score > threshold.
RocPoint operating_point(std::span<const double> scores, std::span<const int> labels,
                         double threshold);

struct SweepPoint {
  /// Grid coordinates, e.g. {"estimators": "60", "folds": "10"}.
  std::map<std::string, std::string> grid;
  ModelSpec spec;
  std::size_t folds = 10;
};

struct SweepRow {
  SweepPoint point;
  std::optional<EvalReport> report;
  std::string error;
};

/// One cross_validate per point. Points with equal fold counts share the fold
/// plan (it depends on the dataset, k and seed only). Failures are recorded
/// per row and the sweep continues.
std::vector<SweepRow> sweep(std::span<const SweepPoint> points, const Dataset& d,
                            std::uint64_t seed, unsigned jobs = 1);

std::vector<SweepPoint> forest_estimator_grid(std::span<const std::size_t> estimators,
                                              const ForestSpec& base, std::size_t folds);
std::vector<SweepPoint> svm_grid(std::span<const KernelKind> kernels, std::span<const double> Cs,
                                 const SvmSpec& base, std::size_t folds);
std::vector<SweepPoint> nn_hidden_grid(std::span<const int> neurons, const NnSpec& base,
                                       std::size_t folds);
std::vector<SweepPoint> fold_grid(const ModelSpec& spec, std::span<const std::size_t> folds);

struct BayesOracleResult {
  double accuracy = 0.0;
  std::size_t n_mc = 0;
  std::size_t occupied_cells = 0;
};

inline constexpr int kOracleBins = 16;
inline constexpr std::size_t kOracleMinSamples = 10000;

/// Monte-Carlo estimate of the Bayes-optimal accuracy for a scenario mix:
/// class-conditional histograms (16 bins per feature over the observed
/// range) from one draw, evaluated on a fresh draw of the same size.
BayesOracleResult bayes_oracle(const ScenarioMix& mix, std::size_t n_mc, std::uint64_t seed,
                               unsigned jobs = 1);

/// bayes_oracle(canonical_mix(), 200000, 42).accuracy, computed once and frozen.
inline constexpr double kCanonicalBayesAccuracy = 0.973985;

// ---- report output ----------------------------------------------------------

nlohmann::json to_json(const ConfusionMatrix& cm);
nlohmann::json to_json(const EvalReport& r);
nlohmann::json to_json(const RocCurve& roc);

inline constexpr const char* kReportCsvMetrics = "pd,pfa,pmd,accuracy";

/// CSV cells for the four metrics; undefined metrics print as "nan".
std::string metrics_csv_cells(const EvalReport& r);
void write_roc_csv(const RocCurve& roc, const std::filesystem::path& path);
void write_json(const nlohmann::json& doc, const std::filesystem::path& path);

/// Canonical JSON text: sorted keys, floats at 12 significant digits.
std::string canonical_dump(const nlohmann::json& doc);

}  // namespace jamguard
