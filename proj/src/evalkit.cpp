#include "jamguard/evalkit.hpp"

#include "jamguard/format.hpp"
#include "jamguard/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

namespace jamguard {

ScoredModel ScoredModel::wrap(AnyModel model) {
  const double threshold = native_threshold(model);
  auto shared = std::make_shared<const AnyModel>(std::move(model));
  return ScoredModel{[shared](const Sample& x) { return model_score(*shared, x); }, threshold};
}

void ConfusionMatrix::add(int label, int predicted) {
  if (label == 1)
    (predicted == 1 ? tp : fn) += 1;
  else
    (predicted == 1 ? fp : tn) += 1;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) {
  tp += o.tp;
  fn += o.fn;
  fp += o.fp;
  tn += o.tn;
  return *this;
}

double Ratio::value() const {
  if (!defined()) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(num) / static_cast<double>(den);
}

ConfusionMatrix confusion(const ScoredModel& m, const Dataset& test) {
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const Sample x = test.sample(i);
    cm.add(x.label, m.predict(x));
  }
  return cm;
}

EvalReport metrics(const ConfusionMatrix& cm) {
  EvalReport r;
  r.confusion = cm;
  r.pd = {cm.tp, cm.positives()};
  r.pmd = {cm.fn, cm.positives()};
  r.pfa = {cm.fp, cm.negatives()};
  r.accuracy = {cm.tp + cm.tn, cm.total()};
  return r;
}

EvalReport cross_validate(const Trainer& trainer, const Dataset& d, std::size_t k,
                          std::uint64_t seed, const CvOptions& options) {
  if (d.empty()) throw DataError("cross_validate: empty dataset");
  const FoldPlan plan = kfold_split(d, k, seed, options.stratified);

  std::vector<ConfusionMatrix> folds(k);
  std::vector<double> scores(d.size(), 0.0);
  double threshold = 0.5;
  std::vector<double> thresholds(k, 0.5);

  parallel_for(k, options.jobs, [&](std::size_t fold) {
    const auto train_idx = plan.train_indices(fold);
    const auto test_idx = plan.test_indices(fold);
    ScoredModel model;
    try {
      model = trainer(d.subset(train_idx), derive_seed(seed, streams::kModel, fold));
    } catch (const TrainingError& e) {
      throw TrainingError("fold " + std::to_string(fold) + ": " + e.what());
    }
    thresholds[fold] = model.threshold;
    ConfusionMatrix cm;
    for (auto i : test_idx) {
      const Sample x = d.sample(i);
      const double s = model.score(x);
      scores[i] = s;
      cm.add(x.label, s > model.threshold ? 1 : 0);
    }
    folds[fold] = cm;
  });
  threshold = thresholds.front();

  ConfusionMatrix pooled;
  for (const auto& f : folds) pooled += f;
  EvalReport report = metrics(pooled);
  report.folds = std::move(folds);
  report.scores = std::move(scores);
  report.seed = seed;
  report.k = k;
  report.threshold = threshold;
  return report;
}

EvalReport cross_validate(const ModelSpec& spec, const Dataset& d, std::size_t k,
                          std::uint64_t seed, const CvOptions& options) {
  // Parallelism goes to folds; model training inside a fold stays sequential.
  Trainer trainer = [&spec](const Dataset& train, std::uint64_t s) {
    return ScoredModel::wrap(fit_model(spec, train, s, 1));
  };
  EvalReport r = cross_validate(trainer, d, k, seed, options);
  r.model = describe(spec);
  return r;
}

// ---- ROC --------------------------------------------------------------------

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("roc_curve: length mismatch");
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0)
    throw DataError("roc_curve: both classes must be present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve roc;
  roc.points.push_back({0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == s; ++i) (labels[order[i]] == 1 ? tp : fp) += 1;
    roc.points.push_back({static_cast<double>(fp) / static_cast<double>(negatives),
                          static_cast<double>(tp) / static_cast<double>(positives)});
  }
  for (std::size_t i = 1; i < roc.points.size(); ++i) {
    const auto& a = roc.points[i - 1];
    const auto& b = roc.points[i];
    roc.auc += (b.pfa - a.pfa) * 0.5 * (a.pd + b.pd);
  }
  return roc;
}

RocCurve roc_curve(std::span<const double> scores, const LabelVector& labels) {
  std::vector<int> l(labels.data(), labels.data() + labels.size());
  return roc_curve(scores, std::span<const int>(l));
}

RocPoint operating_point(std::span<const double> scores, std::span<const int> labels,
                         double threshold) {
  std::size_t tp = 0, fp = 0, p = 0, n = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool flagged = scores[i] > threshold;
    if (labels[i] == 1) {
      ++p;
      tp += flagged ? 1 : 0;
    } else {
      ++n;
      fp += flagged ? 1 : 0;
    }
  }
  if (p == 0 || n == 0) throw DataError("operating_point: both classes must be present");
  return {static_cast<double>(fp) / static_cast<double>(n), static_cast<double>(tp) / static_cast<double>(p)};
}

// ---- sweeps -----------------------------------------------------------------

std::vector<SweepRow> sweep(std::span<const SweepPoint> points, const Dataset& d,
                            std::uint64_t seed, unsigned jobs) {
  if (points.empty()) throw UsageError("sweep: empty grid");
  std::vector<SweepRow> rows(points.size());
  // Grid points run in parallel; folds inside each point run sequentially.
  parallel_for(points.size(), jobs, [&](std::size_t i) {
    rows[i].point = points[i];
    try {
      rows[i].report = cross_validate(points[i].spec, d, points[i].folds, seed, CvOptions{true, 1});
    } catch (const std::exception& e) {
      rows[i].error = e.what();
    }
  });
  return rows;
}

std::vector<SweepPoint> forest_estimator_grid(std::span<const std::size_t> estimators,
                                              const ForestSpec& base, std::size_t folds) {
  std::vector<SweepPoint> out;
  for (auto m : estimators) {
    ForestSpec s = base;
    s.estimators = m;
    out.push_back({{{"estimators", std::to_string(m)}, {"folds", std::to_string(folds)}}, s, folds});
  }
  return out;
}

std::vector<SweepPoint> svm_grid(std::span<const KernelKind> kernels, std::span<const double> Cs,
                                 const SvmSpec& base, std::size_t folds) {
  std::vector<SweepPoint> out;
  for (auto kind : kernels)
    for (double c : Cs) {
      SvmSpec s = base;
      s.kernel.kind = kind;
      s.C = c;
      out.push_back({{{"kernel", std::string(to_string(kind))},
                      {"C", format_double(c)},
                      {"folds", std::to_string(folds)}},
                     s,
                     folds});
    }
  return out;
}

std::vector<SweepPoint> nn_hidden_grid(std::span<const int> neurons, const NnSpec& base,
                                       std::size_t folds) {
  std::vector<SweepPoint> out;
  for (int h : neurons) {
    NnSpec s = base;
    s.arch = NetArchitecture::with_hidden({h});
    out.push_back({{{"hidden", std::to_string(h)}, {"folds", std::to_string(folds)}}, s, folds});
  }
  return out;
}

std::vector<SweepPoint> fold_grid(const ModelSpec& spec, std::span<const std::size_t> folds) {
  std::vector<SweepPoint> out;
  for (auto k : folds) out.push_back({{{"folds", std::to_string(k)}}, spec, k});
  return out;
}

// ---- Bayes oracle -------------------------------------------------------------

BayesOracleResult bayes_oracle(const ScenarioMix& mix, std::size_t n_mc, std::uint64_t seed,
                               unsigned jobs) {
  if (n_mc < kOracleMinSamples)
    throw UsageError("bayes_oracle: n_mc must be >= " + std::to_string(kOracleMinSamples));
  const Dataset fit = generate_dataset(mix, n_mc, derive_seed(seed, streams::kOracle, 0), jobs);
  const Dataset eval = generate_dataset(mix, n_mc, derive_seed(seed, streams::kOracle, 1), jobs);

  const Features lo = fit.features().colwise().minCoeff().transpose();
  const Features hi = fit.features().colwise().maxCoeff().transpose();
  auto cell = [&](const Eigen::Ref<const Eigen::RowVector4d>& x) {
    std::size_t index = 0;
    for (int j = 0; j < kFeatureCount; ++j) {
      int bin = 0;
      if (hi[j] > lo[j])
        bin = static_cast<int>(std::floor((x[j] - lo[j]) / (hi[j] - lo[j]) * kOracleBins));
      bin = std::clamp(bin, 0, kOracleBins - 1);
      index = index * kOracleBins + static_cast<std::size_t>(bin);
    }
    return index;
  };

  std::size_t cells = 1;
  for (int j = 0; j < kFeatureCount; ++j) cells *= kOracleBins;
  std::vector<std::array<std::uint32_t, 2>> counts(cells, {0, 0});
  for (Eigen::Index i = 0; i < fit.features().rows(); ++i)
    ++counts[cell(fit.features().row(i))][fit.labels()[i] == 1 ? 1 : 0];

  // Joint counts are proportional to P[Y = y, X in cell]; unseen cells and
  // ties fall back to the overall majority class.
  const int prior_class = 2 * fit.count_label(1) > fit.size() ? 1 : 0;
  BayesOracleResult result;
  result.n_mc = n_mc;
  for (const auto& c : counts) result.occupied_cells += (c[0] + c[1]) > 0 ? 1 : 0;

  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < eval.features().rows(); ++i) {
    const auto& c = counts[cell(eval.features().row(i))];
    const int predicted = c[1] > c[0] ? 1 : (c[0] > c[1] ? 0 : prior_class);
    correct += predicted == eval.labels()[i] ? 1 : 0;
  }
  result.accuracy = static_cast<double>(correct) / static_cast<double>(n_mc);
  return result;
}

// ---- output -------------------------------------------------------------------

namespace {

nlohmann::json ratio_json(const Ratio& r) {
  if (!r.defined()) return nullptr;
  return r.value();
}

nlohmann::json canonicalize(const nlohmann::json& doc) {
  if (doc.is_number_float()) return canonical(doc.get<double>());
  if (doc.is_array()) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& v : doc) out.push_back(canonicalize(v));
    return out;
  }
  if (doc.is_object()) {
    nlohmann::json out = nlohmann::json::object();
    for (auto it = doc.begin(); it != doc.end(); ++it) out[it.key()] = canonicalize(it.value());
    return out;
  }
  return doc;
}

}  // namespace

nlohmann::json to_json(const ConfusionMatrix& cm) {
  return {{"tp", cm.tp}, {"fn", cm.fn}, {"fp", cm.fp}, {"tn", cm.tn}};
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : r.folds) folds.push_back(to_json(f));
  return {{"model", r.model},
          {"seed", r.seed},
          {"folds", r.k},
          {"confusion", to_json(r.confusion)},
          {"pd", ratio_json(r.pd)},
          {"pfa", ratio_json(r.pfa)},
          {"pmd", ratio_json(r.pmd)},
          {"accuracy", ratio_json(r.accuracy)},
          {"per_fold", folds}};
}

nlohmann::json to_json(const RocCurve& roc) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : roc.points) pts.push_back({p.pfa, p.pd});
  return {{"auc", roc.auc}, {"points", pts}};
}

std::string metrics_csv_cells(const EvalReport& r) {
  auto cell = [](const Ratio& q) { return q.defined() ? format_double(q.value()) : std::string("nan"); };
  return cell(r.pd) + "," + cell(r.pfa) + "," + cell(r.pmd) + "," + cell(r.accuracy);
}

void write_roc_csv(const RocCurve& roc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << "pfa,pd\n";
  for (const auto& p : roc.points) out << format_double(p.pfa) << ',' << format_double(p.pd) << '\n';
}

std::string canonical_dump(const nlohmann::json& doc) { return canonicalize(doc).dump(2) + "\n"; }

void write_json(const nlohmann::json& doc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << canonical_dump(doc);
}

}  // namespace jamguard
