#include "cli.hpp"

#include "jamguard/evalkit.hpp"
#include "jamguard/format.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>

namespace jamguard::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kManifestVersion = 1;

struct ModelFlags {
  std::string model = "forest";
  std::optional<std::size_t> estimators;
  std::optional<std::string> kernel;
  std::optional<double> C;
  std::optional<std::string> hidden;
  std::optional<double> lambda;
  std::optional<double> lr;
  std::optional<int> epochs;
};

struct Common {
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  std::string out;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  const char* env = std::getenv("JAMGUARD_SEED");
  if (env == nullptr || *env == '\0') return kDefaultSeed;
  std::uint64_t value = 0;
  const std::string_view text(env);
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size())
    throw UsageError("JAMGUARD_SEED is not an unsigned integer: '" + std::string(text) + "'");
  return value;
}

std::vector<int> parse_hidden(const std::string& text) {
  std::vector<int> sizes;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int v = 0;
    const auto [end, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || end != item.data() + item.size() || v < 1)
      throw UsageError("--hidden expects positive integers separated by commas, got '" + text + "'");
    sizes.push_back(v);
  }
  if (sizes.empty()) throw UsageError("--hidden needs at least one layer size");
  return sizes;
}

void reject(bool present, const char* flag, const std::string& family) {
  if (present) throw UsageError(std::string(flag) + " does not apply to --model " + family);
}

ForestSpec forest_spec(const ModelFlags& f) {
  ForestSpec s;
  if (f.estimators) {
    if (*f.estimators < 1) throw UsageError("--estimators must be >= 1");
    s.estimators = *f.estimators;
  }
  return s;
}

SvmSpec svm_spec(const ModelFlags& f) {
  SvmSpec s;
  s.kernel.kind = kernel_kind_from_string(f.kernel.value_or("rbf"));
  if (f.C) {
    if (!(*f.C > 0)) throw UsageError("--C must be > 0");
    s.C = *f.C;
  }
  if (f.epochs) {
    if (*f.epochs < 1) throw UsageError("--epochs must be >= 1");
    s.options.epochs = *f.epochs;
  }
  return s;
}

NnSpec nn_spec(const ModelFlags& f) {
  NnSpec s;
  if (f.hidden) s.arch = NetArchitecture::with_hidden(parse_hidden(*f.hidden));
  if (f.lambda) {
    if (!(*f.lambda >= 0)) throw UsageError("--lambda must be >= 0");
    s.hp.lambda = *f.lambda;
  }
  if (f.lr) {
    if (!(*f.lr > 0)) throw UsageError("--lr must be > 0");
    s.hp.learning_rate = *f.lr;
  }
  if (f.epochs) {
    if (*f.epochs < 1) throw UsageError("--epochs must be >= 1");
    s.hp.max_epochs = *f.epochs;
  }
  return s;
}

ModelSpec build_spec(const ModelFlags& f) {
  if (f.model == "forest") {
    reject(f.kernel.has_value(), "--kernel", f.model);
    reject(f.C.has_value(), "--C", f.model);
    reject(f.hidden.has_value(), "--hidden", f.model);
    reject(f.lambda.has_value(), "--lambda", f.model);
    reject(f.lr.has_value(), "--lr", f.model);
    reject(f.epochs.has_value(), "--epochs", f.model);
    return forest_spec(f);
  }
  if (f.model == "svm") {
    reject(f.estimators.has_value(), "--estimators", f.model);
    reject(f.hidden.has_value(), "--hidden", f.model);
    reject(f.lambda.has_value(), "--lambda", f.model);
    reject(f.lr.has_value(), "--lr", f.model);
    return svm_spec(f);
  }
  if (f.model == "nn") {
    reject(f.estimators.has_value(), "--estimators", f.model);
    reject(f.kernel.has_value(), "--kernel", f.model);
    reject(f.C.has_value(), "--C", f.model);
    return nn_spec(f);
  }
  throw UsageError("unknown model family '" + f.model + "' (expected forest, svm or nn)");
}

void add_model_flags(CLI::App& cmd, ModelFlags& f) {
  cmd.add_option("--model", f.model, "Classifier family")
      ->check(CLI::IsMember({"forest", "svm", "nn"}))
      ->capture_default_str();
  cmd.add_option("--estimators", f.estimators, "Forest size (trees)");
  cmd.add_option("--kernel", f.kernel, "SVM kernel")
      ->check(CLI::IsMember({"linear", "poly2", "poly3", "rbf", "sigmoid"}));
  cmd.add_option("--C", f.C, "SVM regularization factor");
  cmd.add_option("--hidden", f.hidden, "NN hidden layer sizes, e.g. 2,2");
  cmd.add_option("--lambda", f.lambda, "NN regularization strength");
  cmd.add_option("--lr", f.lr, "NN learning rate");
  cmd.add_option("--epochs", f.epochs, "Training passes (SVM) or max epochs (NN)");
}

void add_common(CLI::App& cmd, Common& c, const char* out_help, bool out_required = true) {
  cmd.add_option("--seed", c.seed, "Random seed (falls back to JAMGUARD_SEED, then 42)");
  cmd.add_option("--jobs", c.jobs, "Worker threads")->check(CLI::Range(1u, 1024u))->capture_default_str();
  auto* opt = cmd.add_option("--out", c.out, out_help);
  if (out_required) opt->required();
}

// ---- files -------------------------------------------------------------------

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw DataError("cannot create output directory " + dir.string());
}

void ensure_parent(const fs::path& file) {
  if (file.has_parent_path()) ensure_dir(file.parent_path());
}

struct LoadedData {
  Dataset data;
  json provenance;
};

LoadedData load_data(const std::string& path) {
  const std::string bytes = read_bytes(path);
  std::istringstream in(bytes);
  Dataset d;
  try {
    d = csv_read(in);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
  json provenance = {{"path", path}, {"fnv1a", fnv1a_hex(bytes)}, {"rows", d.size()}};
  return {std::move(d), std::move(provenance)};
}

json manifest(const std::string& command, std::uint64_t seed, unsigned jobs, json config,
              json inputs, std::vector<std::string> outputs) {
  return {{"tool", "jamguard"},
          {"manifest_version", kManifestVersion},
          {"command", command},
          {"seed", seed},
          {"jobs", jobs},
          {"config", std::move(config)},
          {"inputs", std::move(inputs)},
          {"outputs", std::move(outputs)}};
}

// ---- reports -----------------------------------------------------------------

std::string metric_text(const Ratio& r) {
  return r.defined() ? format_double(r.value()) : std::string("nan");
}

std::string summary_line(const std::string& label, const EvalReport& r) {
  return label + ": pd " + metric_text(r.pd) + " pfa " + metric_text(r.pfa) + " pmd " +
         metric_text(r.pmd) + " accuracy " + metric_text(r.accuracy);
}

// Quotes cells that hold the delimiter, e.g. a hidden-layer list "2,2".
std::string csv_cell(const std::string& text) {
  if (text.find_first_of(",\"") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char c : text) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
  return quoted + "\"";
}

std::string fold_csv(const EvalReport& r) {
  std::string csv = std::string("fold,") + kReportCsvMetrics + "\n";
  for (std::size_t i = 0; i < r.folds.size(); ++i)
    csv += std::to_string(i) + "," + metrics_csv_cells(metrics(r.folds[i])) + "\n";
  csv += "pooled," + metrics_csv_cells(r) + "\n";
  return csv;
}

json roc_json(const RocCurve& roc, const RocPoint& native, double threshold) {
  json doc = to_json(roc);
  doc["operating_point"] = {{"pfa", native.pfa}, {"pd", native.pd}, {"threshold", threshold}};
  return doc;
}

// ---- commands ----------------------------------------------------------------

struct GenerateArgs {
  Common common;
  std::string config;
  std::size_t n = 10000;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  const std::uint64_t seed = resolve_seed(a.common.seed);
  if (a.n < 1) throw UsageError("--n must be >= 1");
  const ScenarioMix mix = a.config.empty() ? canonical_mix() : load_mix(a.config);
  const Dataset d = generate_dataset(mix, a.n, seed, a.common.jobs);

  const fs::path path(a.common.out);
  ensure_parent(path);
  std::ostringstream csv;
  csv_write(d, csv);
  write_text(path, csv.str());

  json inputs = {{"scenario_mix", a.config.empty() ? json("canonical") : json(a.config)},
                 {"generator_config_hash", mix_hash(mix)}};
  json config = {{"n", a.n}, {"mix", to_json(mix)}};
  write_json(manifest("generate", seed, a.common.jobs, std::move(config), std::move(inputs),
                      {path.filename().string()}),
             path.string() + ".manifest.json");
  out << "wrote " << d.size() << " samples (" << d.count_label(1) << " under attack) to "
      << path.string() << "\n";
  return kExitOk;
}

struct TrainArgs {
  Common common;
  ModelFlags model;
  std::string data;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const std::uint64_t seed = resolve_seed(a.common.seed);
  const ModelSpec spec = build_spec(a.model);
  const LoadedData in = load_data(a.data);
  const AnyModel model = fit_model(spec, in.data, seed, a.common.jobs);
  const EvalReport train_report = metrics(confusion(ScoredModel::wrap(model), in.data));

  const fs::path path(a.common.out);
  ensure_parent(path);
  save_model(model, path);
  write_json(manifest("train", seed, a.common.jobs, {{"model", to_json(spec)}},
                      {{"data", in.provenance}}, {path.filename().string()}),
             path.string() + ".manifest.json");
  out << summary_line("trained " + describe(spec) + " on " + std::to_string(in.data.size()) +
                          " samples, training set",
                      train_report)
      << "\n";
  return kExitOk;
}

struct EvaluateArgs {
  Common common;
  std::string data;
  std::string model_file;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const std::uint64_t seed = resolve_seed(a.common.seed);
  const std::string model_bytes = read_bytes(a.model_file);
  json doc;
  try {
    doc = json::parse(model_bytes);
  } catch (const json::exception& e) {
    throw DataError(a.model_file + ": not valid JSON: " + e.what());
  }
  const AnyModel model = model_from_json(doc);
  const LoadedData in = load_data(a.data);
  const ScoredModel scored = ScoredModel::wrap(model);
  EvalReport report = metrics(confusion(scored, in.data));
  report.model = family_name(model);
  report.seed = seed;
  report.threshold = native_threshold(model);

  const fs::path dir(a.common.out);
  ensure_dir(dir);
  write_json(to_json(report), dir / "report.json");
  write_text(dir / "report.csv",
             std::string(kReportCsvMetrics) + "\n" + metrics_csv_cells(report) + "\n");
  json inputs = {{"data", in.provenance},
                 {"model", {{"path", a.model_file}, {"fnv1a", fnv1a_hex(model_bytes)}}}};
  write_json(manifest("evaluate", seed, a.common.jobs, {{"family", family_name(model)}},
                      std::move(inputs), {"report.json", "report.csv"}),
             dir / "manifest.json");
  out << summary_line("evaluated " + family_name(model) + " on " +
                          std::to_string(in.data.size()) + " samples",
                      report)
      << "\n";
  return kExitOk;
}

struct CvArgs {
  Common common;
  ModelFlags model;
  std::string data;
  std::size_t folds = 10;
};

int cmd_cv(const CvArgs& a, std::ostream& out, bool roc_only) {
  const std::uint64_t seed = resolve_seed(a.common.seed);
  const ModelSpec spec = build_spec(a.model);
  const LoadedData in = load_data(a.data);
  const EvalReport report =
      cross_validate(spec, in.data, a.folds, seed, CvOptions{.stratified = true, .jobs = a.common.jobs});
  const RocCurve roc = roc_curve(report.scores, in.data.labels());
  const RocPoint native = operating_point(
      report.scores, std::span<const int>(in.data.labels().data(), in.data.labels().size()),
      report.threshold);

  const fs::path dir(a.common.out);
  ensure_dir(dir);
  std::vector<std::string> outputs;
  if (roc_only) {
    write_roc_csv(roc, dir / "roc.csv");
    write_json(roc_json(roc, native, report.threshold), dir / "roc.json");
    outputs = {"roc.csv", "roc.json"};
  } else {
    json doc = to_json(report);
    doc["auc"] = roc.auc;
    write_json(doc, dir / "report.json");
    write_text(dir / "report.csv", fold_csv(report));
    outputs = {"report.json", "report.csv"};
  }
  json config = {{"model", to_json(spec)}, {"folds", a.folds}, {"stratified", true}};
  write_json(manifest(roc_only ? "roc" : "cv", seed, a.common.jobs, std::move(config),
                      {{"data", in.provenance}}, outputs),
             dir / "manifest.json");
  if (roc_only)
    out << describe(spec) << ": " << roc.points.size() << " operating points, auc "
        << format_double(roc.auc) << "\n";
  else
    out << summary_line(describe(spec) + " " + std::to_string(a.folds) + "-fold", report)
        << " auc " << format_double(roc.auc) << "\n";
  return kExitOk;
}

struct SweepArgs {
  Common common;
  std::string model = "forest";
  std::vector<std::size_t> estimators;
  std::vector<std::string> kernels;
  std::vector<double> Cs;
  std::vector<std::string> hidden;
  std::optional<double> lambda;
  std::optional<double> lr;
  std::optional<int> epochs;
  std::vector<std::size_t> folds;
  std::string data;
};

std::vector<SweepPoint> sweep_points(const SweepArgs& a) {
  ModelFlags base;
  base.model = a.model;
  base.lambda = a.lambda;
  base.lr = a.lr;
  base.epochs = a.epochs;
  const std::vector<std::size_t> folds = a.folds.empty() ? std::vector<std::size_t>{10} : a.folds;
  std::vector<SweepPoint> points;
  auto append = [&](std::vector<SweepPoint> more) {
    points.insert(points.end(), std::make_move_iterator(more.begin()),
                  std::make_move_iterator(more.end()));
  };

  if (a.model == "forest") {
    reject(!a.kernels.empty(), "--kernel", a.model);
    reject(!a.Cs.empty(), "--C", a.model);
    reject(!a.hidden.empty(), "--hidden", a.model);
    const ForestSpec spec = std::get<ForestSpec>(build_spec(base));
    const std::vector<std::size_t> ms =
        a.estimators.empty() ? std::vector<std::size_t>{1, 5, 10, 20, 40, 60, 80, 100} : a.estimators;
    for (std::size_t m : ms)
      if (m < 1) throw UsageError("--estimators must be >= 1");
    for (std::size_t k : folds) append(forest_estimator_grid(ms, spec, k));
  } else if (a.model == "svm") {
    reject(!a.estimators.empty(), "--estimators", a.model);
    reject(!a.hidden.empty(), "--hidden", a.model);
    const SvmSpec spec = std::get<SvmSpec>(build_spec(base));
    std::vector<KernelKind> kernels;
    for (const auto& k : a.kernels.empty()
                             ? std::vector<std::string>{"linear", "poly2", "poly3", "rbf", "sigmoid"}
                             : a.kernels)
      kernels.push_back(kernel_kind_from_string(k));
    const std::vector<double> Cs = a.Cs.empty() ? std::vector<double>{0.1, 1, 3, 10} : a.Cs;
    for (double c : Cs)
      if (!(c > 0)) throw UsageError("--C must be > 0");
    for (std::size_t k : folds) append(svm_grid(kernels, Cs, spec, k));
  } else if (a.model == "nn") {
    reject(!a.estimators.empty(), "--estimators", a.model);
    reject(!a.kernels.empty(), "--kernel", a.model);
    reject(!a.Cs.empty(), "--C", a.model);
    const NnSpec spec = std::get<NnSpec>(build_spec(base));
    if (a.hidden.empty()) {
      const std::vector<int> neurons{1, 2, 10, 100};
      for (std::size_t k : folds) append(nn_hidden_grid(neurons, spec, k));
    } else {
      for (std::size_t k : folds)
        for (const auto& h : a.hidden) {
          NnSpec s = spec;
          s.arch = NetArchitecture::with_hidden(parse_hidden(h));
          points.push_back(SweepPoint{{{"hidden", h}, {"folds", std::to_string(k)}}, s, k});
        }
    }
  } else {
    throw UsageError("unknown model family '" + a.model + "' (expected forest, svm or nn)");
  }
  for (std::size_t k : folds)
    if (k < 2) throw UsageError("--folds must be >= 2");
  return points;
}

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  const std::uint64_t seed = resolve_seed(a.common.seed);
  const std::vector<SweepPoint> points = sweep_points(a);
  const LoadedData in = load_data(a.data);
  const std::vector<SweepRow> rows = sweep(points, in.data, seed, a.common.jobs);

  std::vector<std::string> axes;
  for (const auto& [name, value] : points.front().grid) axes.push_back(name);

  std::string csv;
  for (const auto& axis : axes) csv += axis + ",";
  csv += std::string(kReportCsvMetrics) + ",status\n";
  json results = json::array();
  std::size_t failed = 0;
  for (const auto& row : rows) {
    for (const auto& axis : axes) csv += csv_cell(row.point.grid.at(axis)) + ",";
    json entry = {{"grid", row.point.grid}, {"model", to_json(row.point.spec)}};
    if (row.report) {
      csv += metrics_csv_cells(*row.report) + ",ok\n";
      entry["report"] = to_json(*row.report);
      out << summary_line(describe(row.point.spec) + " k=" + std::to_string(row.point.folds),
                          *row.report)
          << "\n";
    } else {
      ++failed;
      csv += "nan,nan,nan,nan,failed\n";
      entry["error"] = row.error;
      out << describe(row.point.spec) << " k=" << row.point.folds << ": failed: " << row.error
          << "\n";
    }
    results.push_back(std::move(entry));
  }

  const fs::path dir(a.common.out);
  ensure_dir(dir);
  write_json({{"rows", results}}, dir / "sweep.json");
  write_text(dir / "sweep.csv", csv);
  json grid = json::array();
  for (const auto& p : points) grid.push_back({{"grid", p.grid}, {"model", to_json(p.spec)}});
  write_json(manifest("sweep", seed, a.common.jobs, {{"family", a.model}, {"points", grid}},
                      {{"data", in.provenance}}, {"sweep.json", "sweep.csv"}),
             dir / "manifest.json");
  return failed == rows.size() ? kExitTraining : kExitOk;
}

struct CompareArgs {
  Common common;
  std::string data;
  std::size_t folds = 10;
};

/// The seven-row comparison: five SVM kernels at C = 3, the two-by-two
/// network and a 100-tree forest.
std::vector<std::pair<std::string, ModelSpec>> comparison_models() {
  std::vector<std::pair<std::string, ModelSpec>> models;
  for (KernelKind k : {KernelKind::linear, KernelKind::poly2, KernelKind::poly3, KernelKind::rbf,
                       KernelKind::sigmoid}) {
    SvmSpec s;
    s.kernel.kind = k;
    s.C = 3.0;
    models.emplace_back("svm-" + std::string(to_string(k)), s);
  }
  models.emplace_back("nn", NnSpec{});
  models.emplace_back("forest", ForestSpec{});
  return models;
}

int cmd_compare(const CompareArgs& a, std::ostream& out) {
  const std::uint64_t seed = resolve_seed(a.common.seed);
  if (a.folds < 2) throw UsageError("--folds must be >= 2");
  const LoadedData in = load_data(a.data);
  const auto models = comparison_models();
  std::vector<SweepPoint> points;
  for (const auto& [name, spec] : models)
    points.push_back(SweepPoint{{{"model", name}}, spec, a.folds});
  const std::vector<SweepRow> rows = sweep(points, in.data, seed, a.common.jobs);

  const fs::path dir(a.common.out);
  ensure_dir(dir);
  std::vector<std::string> outputs{"compare.json", "compare.csv"};
  std::string csv = std::string("model,") + kReportCsvMetrics + ",auc,status\n";
  json table = json::array();
  std::size_t failed = 0;
  out << std::left << std::setw(14) << "model" << std::setw(16) << "pd" << std::setw(16) << "pfa"
      << std::setw(16) << "pmd" << std::setw(16) << "accuracy" << "auc\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string& name = models[i].first;
    json entry = {{"name", name}, {"model", to_json(models[i].second)}};
    if (!rows[i].report) {
      ++failed;
      csv += name + ",nan,nan,nan,nan,nan,failed\n";
      entry["error"] = rows[i].error;
      out << std::setw(14) << name << "failed: " << rows[i].error << "\n";
      table.push_back(std::move(entry));
      continue;
    }
    const EvalReport& r = *rows[i].report;
    const RocCurve roc = roc_curve(r.scores, in.data.labels());
    const std::string roc_file = "roc_" + name + ".csv";
    write_roc_csv(roc, dir / roc_file);
    outputs.push_back(roc_file);
    csv += name + "," + metrics_csv_cells(r) + "," + format_double(roc.auc) + ",ok\n";
    entry["report"] = to_json(r);
    entry["auc"] = roc.auc;
    table.push_back(std::move(entry));
    out << std::setw(14) << name << std::setw(16) << metric_text(r.pd) << std::setw(16)
        << metric_text(r.pfa) << std::setw(16) << metric_text(r.pmd) << std::setw(16)
        << metric_text(r.accuracy) << format_double(roc.auc) << "\n";
  }
  write_json({{"folds", a.folds}, {"seed", seed}, {"rows", table}}, dir / "compare.json");
  write_text(dir / "compare.csv", csv);
  json config = json::array();
  for (const auto& [name, spec] : models) config.push_back({{"name", name}, {"model", to_json(spec)}});
  write_json(manifest("compare", seed, a.common.jobs, {{"folds", a.folds}, {"models", config}},
                      {{"data", in.provenance}}, outputs),
             dir / "manifest.json");
  return failed == rows.size() ? kExitTraining : kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Jamming-attack detection workbench", "jamguard"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Simulate a labeled telemetry dataset (CSV)");
  generate->add_option("--config", gen.config, "Scenario-mix JSON (default: canonical mix)");
  generate->add_option("--n", gen.n, "Number of observation windows")->capture_default_str();
  add_common(*generate, gen.common, "Output CSV path");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Fit one model on a dataset and save it as JSON");
  train_cmd->add_option("--data", train.data, "Dataset CSV")->required();
  add_model_flags(*train_cmd, train.model);
  add_common(*train_cmd, train.common, "Output model JSON path");

  EvaluateArgs eval;
  auto* evaluate = app.add_subcommand("evaluate", "Score a saved model on a dataset");
  evaluate->add_option("--data", eval.data, "Dataset CSV")->required();
  evaluate->add_option("--model-file", eval.model_file, "Model JSON from 'train'")->required();
  add_common(*evaluate, eval.common, "Output directory");

  CvArgs cv;
  auto* cv_cmd = app.add_subcommand("cv", "Stratified k-fold cross-validation of one model");
  cv_cmd->add_option("--data", cv.data, "Dataset CSV")->required();
  cv_cmd->add_option("--folds", cv.folds, "Number of folds")->capture_default_str();
  add_model_flags(*cv_cmd, cv.model);
  add_common(*cv_cmd, cv.common, "Output directory");

  CvArgs roc;
  auto* roc_cmd = app.add_subcommand("roc", "Cross-validated ROC curve of one model");
  roc_cmd->add_option("--data", roc.data, "Dataset CSV")->required();
  roc_cmd->add_option("--folds", roc.folds, "Number of folds")->capture_default_str();
  add_model_flags(*roc_cmd, roc.model);
  add_common(*roc_cmd, roc.common, "Output directory");

  SweepArgs sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "Cross-validate over a hyperparameter grid");
  sweep_cmd->add_option("--data", sw.data, "Dataset CSV")->required();
  sweep_cmd->add_option("--model", sw.model, "Classifier family")
      ->check(CLI::IsMember({"forest", "svm", "nn"}))
      ->capture_default_str();
  sweep_cmd->add_option("--estimators", sw.estimators, "Forest sizes, e.g. 1,5,60")->delimiter(',');
  sweep_cmd->add_option("--kernel", sw.kernels, "SVM kernels, e.g. rbf,linear")
      ->delimiter(',')
      ->check(CLI::IsMember({"linear", "poly2", "poly3", "rbf", "sigmoid"}));
  sweep_cmd->add_option("--C", sw.Cs, "SVM C values, e.g. 0.1,1,3,10")->delimiter(',');
  sweep_cmd->add_option("--hidden", sw.hidden,
                        "NN architecture per occurrence, e.g. --hidden 1 --hidden 2,2");
  sweep_cmd->add_option("--lambda", sw.lambda, "NN regularization strength");
  sweep_cmd->add_option("--lr", sw.lr, "NN learning rate");
  sweep_cmd->add_option("--epochs", sw.epochs, "Training passes (SVM) or max epochs (NN)");
  sweep_cmd->add_option("--folds", sw.folds, "Fold counts, e.g. 5,10,20")->delimiter(',');
  add_common(*sweep_cmd, sw.common, "Output directory");

  CompareArgs cmp;
  auto* compare = app.add_subcommand("compare", "Cross-validate the seven reference models");
  compare->add_option("--data", cmp.data, "Dataset CSV")->required();
  compare->add_option("--folds", cmp.folds, "Number of folds")->capture_default_str();
  add_common(*compare, cmp.common, "Output directory");

  std::vector<const char*> argv{"jamguard"};
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*generate) return cmd_generate(gen, out);
    if (*train_cmd) return cmd_train(train, out);
    if (*evaluate) return cmd_evaluate(eval, out);
    if (*cv_cmd) return cmd_cv(cv, out, false);
    if (*roc_cmd) return cmd_cv(roc, out, true);
    if (*sweep_cmd) return cmd_sweep(sw, out);
    if (*compare) return cmd_compare(cmp, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const TrainingError& e) {
    err << "training failed: " << e.what() << "\n";
    return kExitTraining;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace jamguard::cli
