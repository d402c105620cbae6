// Acceptance suite: one PASS/FAIL line per criterion on the canonical
// dataset (n = 10000, seed 42). Thresholds and time budgets are pinned below.

#include "cli.hpp"
#include "oracles.hpp"

#include "jamguard/evalkit.hpp"
#include "jamguard/format.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

using namespace jamguard;
namespace fs = std::filesystem;

namespace {

// ---- pinned tolerances --------------------------------------------------------

constexpr double kGradientRelErr = 1e-6;
constexpr double kPsdFloor = -1e-9;
constexpr double kForestMinPd = 0.95;
constexpr double kForestMaxPfa = 0.10;
constexpr double kForestMinAccuracy = 0.93;
constexpr double kBayesGap = 0.03;
constexpr double kEstimatorPlateau = 0.015;
constexpr double kRbfSpread = 0.05;
constexpr double kNnSpread = 0.05;

constexpr std::size_t kFolds = 10;
const std::vector<std::uint64_t> kSeeds{42, 43, 44, 45, 46};

// ---- shared state -------------------------------------------------------------

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * v);
  return buf;
}

std::string num(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

class Lab {
 public:
  Lab() : data_(canonical_dataset()) {}

  const Dataset& data() const { return data_; }

  /// 10-fold report for (spec, seed), computed once.
  const EvalReport& cv(const ModelSpec& spec, std::uint64_t seed) {
    const std::string key = to_json(spec).dump() + "@" + std::to_string(seed);
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, cross_validate(spec, data_, kFolds, seed)).first;
    return it->second;
  }

  double accuracy(const ModelSpec& spec, std::uint64_t seed) { return cv(spec, seed).accuracy.value(); }

  double median_accuracy(const ModelSpec& spec) {
    std::vector<double> v;
    for (auto s : kSeeds) v.push_back(accuracy(spec, s));
    return oracle::median(v);
  }

  RocCurve roc(const ModelSpec& spec, std::uint64_t seed) { return roc_curve(cv(spec, seed).scores, data_.labels()); }

 private:
  Dataset data_;
  std::map<std::string, EvalReport> cache_;
};

ModelSpec forest(std::size_t m) {
  ForestSpec f;
  f.estimators = m;
  return f;
}

ModelSpec svm(KernelKind k, double C = 3.0) {
  SvmSpec s;
  s.kernel.kind = k;
  s.C = C;
  return s;
}

ModelSpec nn(std::vector<int> hidden) {
  NnSpec n;
  n.arch = NetArchitecture::with_hidden(hidden);
  return n;
}

// ---- criteria -----------------------------------------------------------------

Outcome metric_identities(Lab& lab) {
  // A fixed rule gives a real pooled report without training cost.
  Trainer rule = [](const Dataset&, std::uint64_t) {
    return ScoredModel{[](const Sample& x) { return x.cca_busy_ratio - x.pdr; }, -0.5};
  };
  const EvalReport r = cross_validate(rule, lab.data(), kFolds, 42);
  std::vector<EvalReport> reports{r};
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) reports.push_back(metrics({rng() % 1000, rng() % 1000, rng() % 1000, rng() % 1000}));

  std::size_t bad = 0;
  for (const auto& e : reports) {
    const auto& c = e.confusion;
    bad += e.pd != Ratio{c.tp, c.tp + c.fn};
    bad += e.pmd != Ratio{c.fn, c.tp + c.fn};
    bad += e.pfa != Ratio{c.fp, c.fp + c.tn};
    bad += e.accuracy != Ratio{c.tp + c.tn, c.total()};
    if (e.pd.defined()) bad += e.pd.num + e.pmd.num != e.pd.den;
  }
  ConfusionMatrix pooled;
  for (const auto& f : r.folds) pooled += f;
  bad += pooled != r.confusion;
  bad += r.confusion.total() != lab.data().size();
  return {bad == 0, std::to_string(reports.size()) + " reports checked, " + std::to_string(bad) + " violations"};
}

Outcome gradient_check(Lab& lab) {
  struct Config {
    std::vector<int> hidden;
    double lambda;
  };
  const std::vector<Config> configs{{{2, 2}, 0.0}, {{2, 2}, 1.0}, {{1}, 0.0},
                                    {{10}, 1.0},   {{3, 4}, 0.1}, {{5, 2, 3}, 1.0}};
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < 60; ++i) rows.push_back(i * 97);
  const Dataset batch = lab.data().subset(rows);
  const FeatureMatrix x = scaler_apply(scaler_fit(batch), batch.features());
  std::vector<std::vector<long double>> xl;
  std::vector<int> yl;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    xl.push_back({x(i, 0), x(i, 1), x(i, 2), x(i, 3)});
    yl.push_back(batch.labels()[i]);
  }

  double worst = 0.0;
  std::uint64_t seed = 0;
  for (const auto& c : configs) {
    const NeuralNet net = initial_net(NetArchitecture::with_hidden(c.hidden), ++seed);
    const auto grads = backprop_gradients<long double>(net.cast<long double>(), x, batch.labels(), c.lambda);
    oracle::Layers layers;
    for (const auto& w : net.weights) {
      std::vector<std::vector<long double>> m(static_cast<std::size_t>(w.rows()));
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index k = 0; k < w.cols(); ++k) m[static_cast<std::size_t>(r)].push_back(w(r, k));
      layers.push_back(m);
    }
    const auto fd = oracle::net_fd_gradient(layers, xl, yl, c.lambda);
    for (std::size_t l = 0; l < grads.size(); ++l)
      for (Eigen::Index r = 0; r < grads[l].rows(); ++r)
        for (Eigen::Index k = 0; k < grads[l].cols(); ++k)
          worst = std::max(worst, oracle::relative_error(
                                      static_cast<double>(grads[l](r, k)),
                                      static_cast<double>(fd[l][static_cast<std::size_t>(r)][static_cast<std::size_t>(k)])));
  }
  std::ostringstream d;
  d << configs.size() << " configs, max rel err " << std::scientific << worst << " (limit " << kGradientRelErr << ")";
  return {worst < kGradientRelErr, d.str()};
}

Outcome forest_votes(Lab& lab) {
  std::vector<std::size_t> train_idx, test_idx;
  for (std::size_t i = 0; i < 3000; ++i) (i < 1000 ? test_idx : train_idx).push_back(i);
  const Dataset train = lab.data().subset(train_idx);
  const Forest f = fit_forest(train, 100, TreeParams{}, 42);

  // Walk every tree by hand from the flat node array.
  std::size_t mismatches = 0;
  for (auto i : test_idx) {
    const Sample x = lab.data().sample(i);
    const Features z = scaler_apply(f.scaler, x.features());
    std::size_t ones = 0;
    for (const auto& t : f.trees) {
      std::size_t n = 0;
      while (t.nodes[n].feature >= 0)
        n = static_cast<std::size_t>(z[t.nodes[n].feature] <= t.nodes[n].threshold ? t.nodes[n].left : t.nodes[n].right);
      ones += t.nodes[n].leaf_class == 1;
    }
    const int majority = 2 * ones > f.trees.size() ? 1 : 0;
    mismatches += forest_predict(f, x) != majority;
    mismatches += vote_fraction(f, x) != static_cast<double>(ones) / static_cast<double>(f.trees.size());
  }
  return {mismatches == 0, "1000 samples x 100 trees, " + std::to_string(mismatches) + " mismatches"};
}

Outcome kernel_psd(Lab& lab) {
  const FeatureMatrix z = scaler_apply(scaler_fit(lab.data()), lab.data().features());
  Rng rng(42);
  std::uniform_int_distribution<Eigen::Index> pick(0, z.rows() - 1);
  double worst_eig = std::numeric_limits<double>::infinity();
  std::size_t asymmetric = 0;
  for (int set = 0; set < 10; ++set) {
    Eigen::MatrixXd x(20, kFeatureCount);
    for (Eigen::Index r = 0; r < 20; ++r) x.row(r) = z.row(pick(rng));
    for (auto kind : {KernelKind::linear, KernelKind::poly2, KernelKind::poly3, KernelKind::rbf}) {
      KernelSpec k{kind, 0.25};
      Eigen::MatrixXd g(20, 20);
      for (Eigen::Index i = 0; i < 20; ++i)
        for (Eigen::Index j = 0; j < 20; ++j) g(i, j) = kernel_eval(k, x.row(i), x.row(j));
      asymmetric += g != g.transpose();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g, Eigen::EigenvaluesOnly);
      worst_eig = std::min(worst_eig, eig.eigenvalues().minCoeff());
    }
  }
  std::ostringstream d;
  d << "40 Gram matrices, " << asymmetric << " asymmetric, min eigenvalue " << std::scientific << worst_eig;
  return {asymmetric == 0 && worst_eig >= kPsdFloor, d.str()};
}

Outcome fold_plans(Lab& lab) {
  std::size_t bad = 0;
  for (std::size_t k : {2u, 5u, 10u, 20u}) {
    const FoldPlan p = kfold_split(lab.data(), k, 42);
    std::vector<std::size_t> hits(lab.data().size(), 0);
    for (std::size_t f = 0; f < k; ++f)
      for (auto i : p.test_indices(f)) ++hits[i];
    for (auto h : hits) bad += h != 1;
    for (int label : {0, 1}) {
      std::vector<std::size_t> per(k, 0);
      for (std::size_t i = 0; i < lab.data().size(); ++i)
        if (lab.data().labels()[static_cast<Eigen::Index>(i)] == label) ++per[p.assignment[i]];
      bad += *std::max_element(per.begin(), per.end()) - *std::min_element(per.begin(), per.end()) > 1;
    }
  }
  return {bad == 0, "k in {2,5,10,20}, " + std::to_string(bad) + " violations"};
}

Outcome forest_quality(Lab& lab) {
  const EvalReport& r = lab.cv(forest(100), 42);
  const double acc = r.accuracy.value(), pd = r.pd.value(), pfa = r.pfa.value();
  const BayesOracleResult bayes = bayes_oracle(canonical_mix(), 200000, 42);
  const bool frozen = bayes.accuracy == kCanonicalBayesAccuracy;
  const bool pass = pd >= kForestMinPd && pfa <= kForestMaxPfa && acc >= kForestMinAccuracy &&
                    std::abs(acc - kCanonicalBayesAccuracy) <= kBayesGap && frozen;
  return {pass, "pd " + num(pd) + " pfa " + num(pfa) + " acc " + num(acc) + ", Bayes oracle " +
                    num(kCanonicalBayesAccuracy, 6) + (frozen ? " (reproduced)" : " (NOT reproduced: " + num(bayes.accuracy, 6) + ")")};
}

Outcome family_ranking(Lab& lab) {
  const double f = lab.median_accuracy(forest(100));
  const double n = lab.median_accuracy(nn({2, 2}));
  const double p = lab.median_accuracy(svm(KernelKind::poly2));
  return {f >= n && n >= p, "median acc forest " + num(f) + " nn(2,2) " + num(n) + " svm-poly2 " + num(p)};
}

Outcome estimator_trend(Lab& lab) {
  const double a1 = lab.median_accuracy(forest(1));
  const double a5 = lab.median_accuracy(forest(5));
  const double a60 = lab.median_accuracy(forest(60));
  const double a100 = lab.median_accuracy(forest(100));
  const bool pass = a60 >= a5 && a5 >= a1 && std::abs(a100 - a60) <= kEstimatorPlateau;
  return {pass, "median acc M=1 " + num(a1) + " M=5 " + num(a5) + " M=60 " + num(a60) + " M=100 " + num(a100)};
}

Outcome rbf_insensitivity(Lab& lab) {
  std::vector<double> acc;
  std::string d = "rbf acc";
  for (double c : {0.1, 1.0, 3.0, 10.0}) {
    acc.push_back(lab.accuracy(svm(KernelKind::rbf, c), 42));
    d += " C=" + format_double(c) + ":" + num(acc.back());
  }
  const double spread = *std::max_element(acc.begin(), acc.end()) - *std::min_element(acc.begin(), acc.end());
  return {spread <= kRbfSpread, d + ", spread " + pct(spread)};
}

Outcome nn_insensitivity(Lab& lab) {
  std::vector<double> acc;
  std::string d = "nn acc";
  for (int h : {1, 2, 10, 100}) {
    acc.push_back(lab.accuracy(nn({h}), 42));
    d += " h=" + std::to_string(h) + ":" + num(acc.back());
  }
  const double spread = *std::max_element(acc.begin(), acc.end()) - *std::min_element(acc.begin(), acc.end());
  return {spread <= kNnSpread, d + ", spread " + pct(spread)};
}

Outcome roc_dominance(Lab& lab) {
  std::size_t malformed = 0;
  auto check_shape = [&](const RocCurve& c) {
    malformed += c.points.front().pfa != 0.0 || c.points.front().pd != 0.0;
    malformed += c.points.back().pfa != 1.0 || c.points.back().pd != 1.0;
    for (std::size_t i = 1; i < c.points.size(); ++i)
      malformed += c.points[i].pfa < c.points[i - 1].pfa || c.points[i].pd < c.points[i - 1].pd;
  };
  auto median_auc = [&](const ModelSpec& spec) {
    std::vector<double> v;
    for (auto s : kSeeds) {
      const RocCurve c = lab.roc(spec, s);
      check_shape(c);
      v.push_back(c.auc);
    }
    return oracle::median(v);
  };
  const double f = median_auc(forest(100));
  bool dominates = true;
  std::string d = "median auc forest " + num(f);
  for (auto k : {KernelKind::linear, KernelKind::poly2, KernelKind::poly3, KernelKind::rbf, KernelKind::sigmoid}) {
    const double a = median_auc(svm(k));
    d += " " + std::string(to_string(k)) + " " + num(a);
    dominates = dominates && f >= a;
  }
  return {malformed == 0 && dominates, d + ", " + std::to_string(malformed) + " malformed curves"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct PipelineRun {
  int code = 0;
  double seconds = 0.0;
};

PipelineRun pipeline(const fs::path& workdir, const std::string& tag) {
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream out, err;
  const fs::path csv = workdir / tag / "canonical.csv";
  PipelineRun r;
  r.code = cli::run({"generate", "--n", "10000", "--seed", "42", "--out", csv.string()}, out, err);
  if (r.code == 0)
    r.code = cli::run({"compare", "--data", csv.string(), "--seed", "42", "--out", (workdir / tag / "compare").string()},
                      out, err);
  if (r.code != 0) std::cerr << err.str();
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

Outcome reproducible_pipeline(const fs::path& workdir) {
  fs::remove_all(workdir / "run1");
  fs::remove_all(workdir / "run2");
  const PipelineRun a = pipeline(workdir, "run1");
  const PipelineRun b = pipeline(workdir, "run2");
  if (a.code != 0 || b.code != 0) return {false, "pipeline exited with " + std::to_string(a.code) + "/" + std::to_string(b.code)};

  // Paths differ between the runs only through the run directory name.
  std::size_t files = 0, differing = 0;
  for (const auto& entry : fs::recursive_directory_iterator(workdir / "run1")) {
    if (!entry.is_regular_file()) continue;
    ++files;
    const fs::path rel = fs::relative(entry.path(), workdir / "run1");
    std::string x = slurp(entry.path()), y = slurp(workdir / "run2" / rel);
    for (auto* s : {&x, &y}) {
      for (const std::string tag : {"run1", "run2"})
        for (std::size_t at; (at = s->find(tag)) != std::string::npos;) s->replace(at, tag.size(), "runN");
    }
    differing += x != y;
  }
  const bool fast = a.seconds <= 600.0;
  return {differing == 0 && files > 0 && fast,
          std::to_string(files) + " files, " + std::to_string(differing) + " differ; pipeline " + num(a.seconds, 1) +
              " s (limit 600 s)"};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path workdir = fs::temp_directory_path() / "jamguard_acceptance";
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--workdir") workdir = argv[i + 1];
  fs::create_directories(workdir);

  Lab lab;
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> body;
  };
  const std::vector<Criterion> criteria{
      {1, "metric identities", 1, [&] { return metric_identities(lab); }},
      {2, "backprop vs finite differences", 10, [&] { return gradient_check(lab); }},
      {3, "forest vote equivalence", 5, [&] { return forest_votes(lab); }},
      {4, "kernel symmetry and PSD", 5, [&] { return kernel_psd(lab); }},
      {5, "stratified fold plans", 1, [&] { return fold_plans(lab); }},
      {6, "forest M=100 detection quality", 60, [&] { return forest_quality(lab); }},
      {7, "forest >= nn >= poly2 (median of 5 seeds)", 300, [&] { return family_ranking(lab); }},
      {8, "accuracy vs forest size", 180, [&] { return estimator_trend(lab); }},
      {9, "rbf insensitive to C", 180, [&] { return rbf_insensitivity(lab); }},
      {10, "nn insensitive to hidden size", 300, [&] { return nn_insensitivity(lab); }},
      {11, "ROC shape and forest AUC dominance", 180, [&] { return roc_dominance(lab); }},
      {12, "byte-reproducible compare pipeline", 1200, [&] { return reproducible_pipeline(workdir); }},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s criterion %2d: %s | %s | %.2f s (budget %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.budget_s, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
