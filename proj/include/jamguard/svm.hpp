#pragma once

#include "jamguard/common.hpp"
#include "jamguard/datakit.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>

namespace jamguard {

enum class KernelKind { linear, poly2, poly3, rbf, sigmoid };

std::string_view to_string(KernelKind kind);
KernelKind kernel_kind_from_string(std::string_view name);

struct KernelSpec {
  KernelKind kind = KernelKind::rbf;
  /// rbf width / sigmoid slope. Unset resolves at fit time: rbf uses
  /// 1/(arity * variance of the scaled training features), sigmoid 1/arity.
  std::optional<double> gamma{};
  double coef0 = 0.0;  // sigmoid offset

  bool operator==(const KernelSpec&) const = default;
};

/// linear: x.y, poly_d: (x.y + 1)^d, rbf: exp(-gamma |x-y|^2),
/// sigmoid: tanh(gamma x.y + coef0).
template <typename DerivedX, typename DerivedY>
double kernel_eval(const KernelSpec& k, const Eigen::MatrixBase<DerivedX>& x,
                   const Eigen::MatrixBase<DerivedY>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("kernel_eval: arity mismatch");
  switch (k.kind) {
    case KernelKind::linear: return x.dot(y);
    case KernelKind::poly2: {
      const double s = x.dot(y) + 1.0;
      return s * s;
    }
    case KernelKind::poly3: {
      const double s = x.dot(y) + 1.0;
      return s * s * s;
    }
    case KernelKind::rbf: return std::exp(-k.gamma.value_or(1.0) * (x - y).squaredNorm());
    case KernelKind::sigmoid: return std::tanh(k.gamma.value_or(0.25) * x.dot(y) + k.coef0);
  }
  return 0.0;
}

/// Symmetric Gram matrix over the rows of x.
Eigen::MatrixXd gram_matrix(const KernelSpec& k, const Eigen::Ref<const Eigen::MatrixXd>& x);

/// Explicit feature map phi with phi(x).phi(y) = K(x, y); only the linear and
/// polynomial kernels have one. Rows of the result are phi(x_i).
bool has_feature_map(KernelKind kind);
Eigen::MatrixXd feature_map(KernelKind kind, const Eigen::Ref<const Eigen::MatrixXd>& x);

struct SvmModel {
  KernelSpec kernel;
  double C = 1.0;
  /// Rows are support vectors in scaled feature space.
  Eigen::MatrixXd support_vectors;
  /// alpha_i * y_i of the averaged iterate.
  Eigen::VectorXd coefficients;
  double bias = 0.0;
  Scaler scaler;
  int epochs_run = 0;

  bool operator==(const SvmModel& o) const {
    return kernel == o.kernel && C == o.C && support_vectors == o.support_vectors &&
           coefficients == o.coefficients && bias == o.bias && scaler == o.scaler;
  }
};

struct SvmOptions {
  int epochs = 50;
  /// Early stop once the per-pass objective improves by less than this.
  double tolerance = 1e-6;
  /// Iterates of the first passes are excluded from the running average.
  int burn_in_epochs = 1;
  /// Upper bound on cached kernel rows (bytes) for kernels without a feature map.
  std::size_t cache_bytes = std::size_t{1} << 30;
};

/// Kernelized Pegasos on the soft-margin hinge objective with
/// lambda = 1/(C n), uniform seeded index sampling and iterate averaging.
/// The bias is fit afterwards by an exact 1-D hinge minimization.
SvmModel fit_svm(const Dataset& train, const KernelSpec& kernel, double C, int epochs,
                 std::uint64_t seed);
SvmModel fit_svm(const Dataset& train, const KernelSpec& kernel, double C, std::uint64_t seed,
                 const SvmOptions& options);

/// Decision value on an already scaled feature vector.
double svm_decision_scaled(const SvmModel& m, const Features& z);
double svm_decision(const SvmModel& m, const Sample& x);
int svm_predict(const SvmModel& m, const Sample& x);
inline int decision_to_class(double decision) { return decision > 0.0 ? 1 : 0; }

/// w = sum_i coef_i sv_i (linear kernel only).
Features linear_weights(const SvmModel& m);

/// ||w||^2 + C * sum_i max(0, 1 - y_i f(x_i)), labels mapped to -1/+1.
double hinge_objective(const SvmModel& m, const Dataset& d);
/// The same objective for the all-zero model (f = 0): C * n.
double zero_model_objective(double C, const Dataset& d);

/// Minimizer of sum_i max(0, 1 - y_i (g_i + b)) over b; y in {-1,+1}.
double fit_hinge_bias(const Eigen::Ref<const Eigen::VectorXd>& g,
                      const Eigen::Ref<const Eigen::VectorXd>& y);

nlohmann::json to_json(const SvmModel& m);
SvmModel svm_from_json(const nlohmann::json& doc);

}  // namespace jamguard
