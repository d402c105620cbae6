#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace jamguard {

inline constexpr int kFeatureCount = 4;

/// Feature order everywhere: pdr, bpr, rss_dbm, cca_busy_ratio.
using Features = Eigen::Matrix<double, kFeatureCount, 1>;
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, kFeatureCount, Eigen::RowMajor>;
using LabelVector = Eigen::VectorXi;

using Rng = std::mt19937_64;

// Errors are grouped by how the CLI reports them (exit codes 1, 2, 3).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public DataError {
 public:
  using DataError::DataError;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Child seed for stream `stream`, item `index` of a parent seed. Derived
/// seeds never depend on the order in which children are consumed.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream,
                                    std::uint64_t index = 0) {
  return mix64(mix64(parent ^ mix64(stream + 0x632be59bd9b4e019ULL)) + index);
}

// Streams used with derive_seed; kept distinct so that e.g. fold plans and
// model seeds never collide.
namespace streams {
inline constexpr std::uint64_t kWindow = 1;
inline constexpr std::uint64_t kScenario = 2;
inline constexpr std::uint64_t kShuffle = 3;
inline constexpr std::uint64_t kFolds = 4;
inline constexpr std::uint64_t kTree = 5;
inline constexpr std::uint64_t kModel = 6;
inline constexpr std::uint64_t kOracle = 7;
}  // namespace streams

}  // namespace jamguard
