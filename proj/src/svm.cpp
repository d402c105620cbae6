#include "jamguard/svm.hpp"

#include "jamguard/models.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <vector>

namespace jamguard {

namespace {

constexpr std::array<std::pair<KernelKind, std::string_view>, 5> kKernelNames{{
    {KernelKind::linear, "linear"},
    {KernelKind::poly2, "poly2"},
    {KernelKind::poly3, "poly3"},
    {KernelKind::rbf, "rbf"},
    {KernelKind::sigmoid, "sigmoid"},
}};

int poly_degree(KernelKind kind) {
  switch (kind) {
    case KernelKind::linear: return 1;
    case KernelKind::poly2: return 2;
    case KernelKind::poly3: return 3;
    default: return 0;
  }
}

// Exponent tuples (e_0 .. e_arity) summing to `degree`; e_0 belongs to the
// constant 1 term of (x.y + 1)^d.
void exponent_tuples(int arity, int degree, std::vector<int>& current,
                     std::vector<std::vector<int>>& out) {
  if (static_cast<int>(current.size()) == arity) {
    const int used = std::accumulate(current.begin(), current.end(), 0);
    std::vector<int> e{degree - used};
    e.insert(e.end(), current.begin(), current.end());
    out.push_back(std::move(e));
    return;
  }
  const int used = std::accumulate(current.begin(), current.end(), 0);
  for (int p = 0; p <= degree - used; ++p) {
    current.push_back(p);
    exponent_tuples(arity, degree, current, out);
    current.pop_back();
  }
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

std::string_view to_string(KernelKind kind) {
  for (const auto& [k, name] : kKernelNames)
    if (k == kind) return name;
  return "unknown";
}

KernelKind kernel_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKernelNames)
    if (n == name) return k;
  throw UsageError("unknown kernel '" + std::string(name) + "'");
}

Eigen::MatrixXd gram_matrix(const KernelSpec& k, const Eigen::Ref<const Eigen::MatrixXd>& x) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) g(i, j) = g(j, i) = kernel_eval(k, x.row(i), x.row(j));
  return g;
}

bool has_feature_map(KernelKind kind) { return poly_degree(kind) > 0; }

Eigen::MatrixXd feature_map(KernelKind kind, const Eigen::Ref<const Eigen::MatrixXd>& x) {
  const int degree = poly_degree(kind);
  if (degree == 0) throw std::invalid_argument("feature_map: kernel has no finite feature map");
  if (kind == KernelKind::linear) return x;

  const int arity = static_cast<int>(x.cols());
  std::vector<std::vector<int>> tuples;
  std::vector<int> scratch;
  exponent_tuples(arity, degree, scratch, tuples);

  Eigen::MatrixXd phi(x.rows(), static_cast<Eigen::Index>(tuples.size()));
  for (std::size_t t = 0; t < tuples.size(); ++t) {
    double multinomial = factorial(degree);
    for (int e : tuples[t]) multinomial /= factorial(e);
    const double scale = std::sqrt(multinomial);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      double v = scale;
      for (int f = 0; f < arity; ++f) v *= std::pow(x(r, f), tuples[t][static_cast<std::size_t>(f + 1)]);
      phi(r, static_cast<Eigen::Index>(t)) = v;
    }
  }
  return phi;
}

double fit_hinge_bias(const Eigen::Ref<const Eigen::VectorXd>& g,
                      const Eigen::Ref<const Eigen::VectorXd>& y) {
  // Positive i contributes max(0, a_i - b), a_i = 1 - g_i; negative i
  // contributes max(0, b - c_i), c_i = -1 - g_i. Convex piecewise linear, so
  // the minimum is attained on a breakpoint.
  std::vector<double> pos, neg;
  for (Eigen::Index i = 0; i < g.size(); ++i)
    (y[i] > 0 ? pos : neg).push_back(y[i] > 0 ? 1.0 - g[i] : -1.0 - g[i]);
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  std::vector<double> pos_suffix(pos.size() + 1, 0.0), neg_prefix(neg.size() + 1, 0.0);
  for (std::size_t i = pos.size(); i-- > 0;) pos_suffix[i] = pos_suffix[i + 1] + pos[i];
  for (std::size_t i = 0; i < neg.size(); ++i) neg_prefix[i + 1] = neg_prefix[i] + neg[i];

  auto loss = [&](double b) {
    const auto p = static_cast<std::size_t>(std::upper_bound(pos.begin(), pos.end(), b) - pos.begin());
    const auto q = static_cast<std::size_t>(std::lower_bound(neg.begin(), neg.end(), b) - neg.begin());
    return (pos_suffix[p] - static_cast<double>(pos.size() - p) * b) +
           (static_cast<double>(q) * b - neg_prefix[q]);
  };

  std::vector<double> candidates(pos);
  candidates.insert(candidates.end(), neg.begin(), neg.end());
  if (candidates.empty()) return 0.0;
  std::sort(candidates.begin(), candidates.end());
  double best = std::numeric_limits<double>::infinity();
  double lo = 0.0, hi = 0.0;
  for (double b : candidates) {
    const double l = loss(b);
    const double slack = std::isfinite(best) ? 1e-12 * std::max(1.0, std::abs(best)) : 0.0;
    if (l < best - slack) {
      best = l;
      lo = hi = b;
    } else if (l <= best + slack) {
      hi = b;
    }
  }
  return 0.5 * (lo + hi);
}

namespace {

// Decision-value bookkeeping for Pegasos. For a coefficient vector alpha
// (update counts), raw(i) = sum_j alpha_j y_j K(x_j, x_i); the step-t model
// is raw / (lambda t). The averaged iterate is tracked in closed form: an
// update of j at step t contributes to every later model t' >= t with weight
// 1/t', so sum_{t'=t..T} 1/t' = H_T - H_{t-1}.
class PegasosEngine {
 public:
  virtual ~PegasosEngine() = default;
  virtual double raw(std::size_t i) const = 0;
  virtual void add(std::size_t i, double y_i, double harmonic_before) = 0;
  /// Restarts the running average at the current step; `harmonic` = H_{t-1}.
  virtual void restart_average(double harmonic) = 0;
  /// Averaged-iterate decision values on all training points, given the
  /// averaged coefficients, H_T and lambda*T.
  virtual Eigen::VectorXd averaged(const Eigen::VectorXd& coef, double harmonic,
                                   double scale) const = 0;
};

class FeatureMapEngine final : public PegasosEngine {
 public:
  FeatureMapEngine(KernelKind kind, const Eigen::MatrixXd& z)
      : phi_(feature_map(kind, z)), v_(Eigen::VectorXd::Zero(phi_.cols())) {}

  double raw(std::size_t i) const override { return phi_.row(static_cast<Eigen::Index>(i)).dot(v_); }
  void add(std::size_t i, double y_i, double) override {
    v_.noalias() += y_i * phi_.row(static_cast<Eigen::Index>(i)).transpose();
  }
  void restart_average(double) override {}
  Eigen::VectorXd averaged(const Eigen::VectorXd& coef, double, double) const override {
    const Eigen::VectorXd w = phi_.transpose() * coef;
    return phi_ * w;
  }

 private:
  Eigen::MatrixXd phi_;
  Eigen::VectorXd v_;
};

class KernelRowEngine final : public PegasosEngine {
 public:
  KernelRowEngine(const KernelSpec& k, const Eigen::MatrixXd& z, std::size_t cache_bytes)
      : k_(k), z_(z), n_(static_cast<std::size_t>(z.rows())),
        g_(Eigen::VectorXd::Zero(z.rows())), q_(Eigen::VectorXd::Zero(z.rows())),
        rows_(n_) {
    const std::size_t row_bytes = std::max<std::size_t>(1, n_ * sizeof(float));
    max_rows_ = cache_bytes / row_bytes;
  }

  double raw(std::size_t i) const override { return g_[static_cast<Eigen::Index>(i)]; }

  void add(std::size_t i, double y_i, double harmonic_before) override {
    const Eigen::VectorXf& row = kernel_row(i);
    g_ += y_i * row.cast<double>();
    q_ += (y_i * harmonic_before) * row.cast<double>();
  }

  void restart_average(double harmonic) override { q_ = harmonic * g_; }
  Eigen::VectorXd averaged(const Eigen::VectorXd&, double harmonic, double scale) const override {
    return (harmonic * g_ - q_) / scale;
  }

 private:
  const Eigen::VectorXf& kernel_row(std::size_t i) {
    if (rows_[i]) return *rows_[i];
    Eigen::VectorXf row(static_cast<Eigen::Index>(n_));
    const auto zi = z_.row(static_cast<Eigen::Index>(i));
    for (std::size_t j = 0; j < n_; ++j)
      row[static_cast<Eigen::Index>(j)] =
          static_cast<float>(kernel_eval(k_, zi, z_.row(static_cast<Eigen::Index>(j))));
    if (cached_ < max_rows_) {
      rows_[i] = std::make_unique<Eigen::VectorXf>(std::move(row));
      ++cached_;
      return *rows_[i];
    }
    scratch_ = std::move(row);
    return scratch_;
  }

  KernelSpec k_;
  const Eigen::MatrixXd& z_;
  std::size_t n_;
  Eigen::VectorXd g_, q_;
  std::vector<std::unique_ptr<Eigen::VectorXf>> rows_;
  std::size_t max_rows_ = 0;
  std::size_t cached_ = 0;
  Eigen::VectorXf scratch_;
};

KernelSpec resolve_kernel(KernelSpec k, const Eigen::MatrixXd& z) {
  if (k.gamma) {
    if (!(*k.gamma > 0)) throw TrainingError("svm: gamma must be > 0");
    return k;
  }
  if (k.kind == KernelKind::rbf) {
    const double mean = z.mean();
    const double var = (z.array() - mean).square().mean();
    k.gamma = 1.0 / (static_cast<double>(kFeatureCount) * (var > 0 ? var : 1.0));
  } else if (k.kind == KernelKind::sigmoid) {
    k.gamma = 1.0 / kFeatureCount;
  }
  return k;
}

}  // namespace

SvmModel fit_svm(const Dataset& train, const KernelSpec& kernel, double C, int epochs,
                 std::uint64_t seed) {
  SvmOptions opt;
  opt.epochs = epochs;
  return fit_svm(train, kernel, C, seed, opt);
}

SvmModel fit_svm(const Dataset& train, const KernelSpec& kernel, double C, std::uint64_t seed,
                 const SvmOptions& options) {
  if (!(C > 0)) throw TrainingError("svm: C must be > 0");
  if (options.epochs < 1) throw TrainingError("svm: epochs must be >= 1");
  if (options.burn_in_epochs < 0) throw TrainingError("svm: burn_in_epochs must be >= 0");
  const std::size_t n = train.size();
  if (n == 0) throw TrainingError("svm: empty training set");
  const std::size_t positives = train.count_label(1);
  if (positives == 0 || positives == n)
    throw TrainingError("svm: training set holds a single class");

  SvmModel model;
  model.C = C;
  model.scaler = scaler_fit(train);
  const Eigen::MatrixXd z = scaler_apply(model.scaler, train.features());
  model.kernel = resolve_kernel(kernel, z);

  const Eigen::VectorXd y = (2 * train.labels().array() - 1).cast<double>();
  const double lambda = 1.0 / (C * static_cast<double>(n));

  std::unique_ptr<PegasosEngine> engine;
  if (has_feature_map(model.kernel.kind))
    engine = std::make_unique<FeatureMapEngine>(model.kernel.kind, z);
  else
    engine = std::make_unique<KernelRowEngine>(model.kernel, z, options.cache_bytes);

  Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::VectorXd harmonic_marks = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));

  Rng rng(derive_seed(seed, streams::kModel));
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  double harmonic = 0.0;  // H_{t-1} before step t
  std::size_t t = 0;
  double previous = std::numeric_limits<double>::infinity();
  Eigen::VectorXd coef, avg;

  std::size_t t_start = 1;  // first step inside the averaging window

  auto averaged_state = [&] {
    const double scale = lambda * static_cast<double>(t - t_start + 1);
    coef = (y.array() * (harmonic * counts.array() - harmonic_marks.array())).matrix() / scale;
    avg = engine->averaged(coef, harmonic, scale);
  };

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    if (epoch > 0 && epoch == std::min(options.burn_in_epochs, options.epochs - 1)) {
      t_start = t + 1;
      harmonic_marks = harmonic * counts;
      engine->restart_average(harmonic);
      previous = std::numeric_limits<double>::infinity();
    }
    for (std::size_t step = 0; step < n; ++step) {
      ++t;
      const std::size_t i = pick(rng);
      const double margin = y[static_cast<Eigen::Index>(i)] * engine->raw(i) /
                            (lambda * static_cast<double>(t));
      if (margin < 1.0) {
        engine->add(i, y[static_cast<Eigen::Index>(i)], harmonic);
        counts[static_cast<Eigen::Index>(i)] += 1.0;
        harmonic_marks[static_cast<Eigen::Index>(i)] += harmonic;
      }
      harmonic += 1.0 / static_cast<double>(t);
    }
    model.epochs_run = epoch + 1;
    averaged_state();
    const double norm2 = coef.dot(avg);
    const double hinge = (1.0 - (y.array() * avg.array())).max(0.0).mean();
    const double objective = 0.5 * lambda * norm2 + hinge;
    if (!std::isfinite(objective)) throw TrainingError("svm: objective diverged");
    if (previous - objective < options.tolerance) break;
    previous = objective;
  }

  model.bias = fit_hinge_bias(avg, y);

  std::vector<Eigen::Index> support;
  for (Eigen::Index j = 0; j < coef.size(); ++j)
    if (coef[j] != 0.0) support.push_back(j);
  model.support_vectors.resize(static_cast<Eigen::Index>(support.size()), kFeatureCount);
  model.coefficients.resize(static_cast<Eigen::Index>(support.size()));
  for (std::size_t s = 0; s < support.size(); ++s) {
    model.support_vectors.row(static_cast<Eigen::Index>(s)) = z.row(support[s]);
    model.coefficients[static_cast<Eigen::Index>(s)] = coef[support[s]];
  }
  return model;
}

double svm_decision_scaled(const SvmModel& m, const Features& z) {
  double f = m.bias;
  for (Eigen::Index i = 0; i < m.coefficients.size(); ++i)
    f += m.coefficients[i] * kernel_eval(m.kernel, m.support_vectors.row(i), z.transpose());
  return f;
}

double svm_decision(const SvmModel& m, const Sample& x) {
  return svm_decision_scaled(m, scaler_apply(m.scaler, x.features()));
}

int svm_predict(const SvmModel& m, const Sample& x) { return decision_to_class(svm_decision(m, x)); }

Features linear_weights(const SvmModel& m) {
  if (m.kernel.kind != KernelKind::linear)
    throw std::invalid_argument("linear_weights: model kernel is not linear");
  if (m.coefficients.size() == 0) return Features::Zero();
  return (m.support_vectors.transpose() * m.coefficients);
}

double hinge_objective(const SvmModel& m, const Dataset& d) {
  double norm2 = 0.0;
  const Eigen::Index s = m.coefficients.size();
  for (Eigen::Index i = 0; i < s; ++i)
    for (Eigen::Index j = 0; j < s; ++j)
      norm2 += m.coefficients[i] * m.coefficients[j] *
               kernel_eval(m.kernel, m.support_vectors.row(i), m.support_vectors.row(j));
  double hinge = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Sample x = d.sample(i);
    const double y = x.label == 1 ? 1.0 : -1.0;
    hinge += std::max(0.0, 1.0 - y * svm_decision(m, x));
  }
  return norm2 + m.C * hinge;
}

double zero_model_objective(double C, const Dataset& d) { return C * static_cast<double>(d.size()); }

// ---- serialization --------------------------------------------------------

nlohmann::json to_json(const SvmModel& m) {
  nlohmann::json sv = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.support_vectors.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.support_vectors.cols(); ++j) row.push_back(m.support_vectors(i, j));
    sv.push_back(row);
  }
  nlohmann::json coef = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.coefficients.size(); ++i) coef.push_back(m.coefficients[i]);
  return {{"format", kModelFormat},
          {"version", kModelVersion},
          {"family", "svm"},
          {"kernel",
           {{"kind", std::string(to_string(m.kernel.kind))},
            {"gamma", m.kernel.gamma ? nlohmann::json(*m.kernel.gamma) : nlohmann::json()},
            {"coef0", m.kernel.coef0}}},
          {"C", m.C},
          {"bias", m.bias},
          {"epochs_run", m.epochs_run},
          {"support_vectors", sv},
          {"coefficients", coef},
          {"scaler", scaler_to_json(m.scaler)}};
}

SvmModel svm_from_json(const nlohmann::json& doc) {
  check_model_header(doc, "svm");
  SvmModel m;
  try {
    const auto& k = doc.at("kernel");
    m.kernel.kind = kernel_kind_from_string(k.at("kind").get<std::string>());
    if (!k.at("gamma").is_null()) m.kernel.gamma = k.at("gamma").get<double>();
    m.kernel.coef0 = k.at("coef0").get<double>();
    m.C = doc.at("C").get<double>();
    m.bias = doc.at("bias").get<double>();
    m.epochs_run = doc.value("epochs_run", 0);
    const auto& sv = doc.at("support_vectors");
    const auto& coef = doc.at("coefficients");
    if (sv.size() != coef.size()) throw DataError("svm model: support vector / coefficient count mismatch");
    m.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), kFeatureCount);
    m.coefficients.resize(static_cast<Eigen::Index>(coef.size()));
    for (std::size_t i = 0; i < sv.size(); ++i) {
      if (sv[i].size() != kFeatureCount) throw DataError("svm model: support vector arity");
      for (int j = 0; j < kFeatureCount; ++j)
        m.support_vectors(static_cast<Eigen::Index>(i), j) = sv[i][static_cast<std::size_t>(j)].get<double>();
      m.coefficients[static_cast<Eigen::Index>(i)] = coef[i].get<double>();
    }
    m.scaler = scaler_from_json(doc.at("scaler"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("svm model: ") + e.what());
  }
  return m;
}

}  // namespace jamguard
