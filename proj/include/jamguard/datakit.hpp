#pragma once

#include "jamguard/common.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace jamguard {

/// One observation window reduced to its four link features plus the
/// ground-truth label (1 = jammed).
struct Sample {
  double pdr = 0.0;
  double bpr = 0.0;
  double rss_dbm = 0.0;
  double cca_busy_ratio = 0.0;
  int label = 0;

  Features features() const { return Features(pdr, bpr, rss_dbm, cca_busy_ratio); }
  static Sample from_features(const Features& f, int label);

  bool operator==(const Sample&) const = default;
};

/// Ordered labeled collection. Rows of `features` follow the Sample feature
/// order; `meta` carries provenance (generator hash, seed, ...).
class Dataset {
 public:
  Dataset() = default;
  Dataset(FeatureMatrix features, LabelVector labels,
          std::map<std::string, std::string> meta = {});
  explicit Dataset(std::span<const Sample> samples);

  std::size_t size() const { return static_cast<std::size_t>(labels_.size()); }
  bool empty() const { return size() == 0; }

  const FeatureMatrix& features() const { return features_; }
  const LabelVector& labels() const { return labels_; }
  Sample sample(std::size_t i) const;
  std::vector<Sample> samples() const;

  std::size_t count_label(int label) const;

  Dataset subset(std::span<const std::size_t> indices) const;

  std::map<std::string, std::string>& meta() { return meta_; }
  const std::map<std::string, std::string>& meta() const { return meta_; }

  /// Sample-wise equality; provenance metadata is ignored.
  bool operator==(const Dataset& other) const;

 private:
  FeatureMatrix features_;
  LabelVector labels_;
  std::map<std::string, std::string> meta_;
};

/// Fisher-Yates permutation of the samples, deterministic per seed.
Dataset shuffle(const Dataset& d, std::uint64_t seed);

/// Per-feature z-score transform. Zero-variance features get stddev 1.
struct Scaler {
  Features means = Features::Zero();
  Features stddevs = Features::Ones();

  bool operator==(const Scaler&) const = default;
};

Scaler scaler_fit(const Dataset& d);
Scaler scaler_fit(const FeatureMatrix& x);
Dataset scaler_apply(const Scaler& s, const Dataset& d);
FeatureMatrix scaler_apply(const Scaler& s, const FeatureMatrix& x);
Features scaler_apply(const Scaler& s, const Features& x);
FeatureMatrix scaler_inverse(const Scaler& s, const FeatureMatrix& z);

/// Assigns every sample index to one of k test folds.
struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::size_t> assignment;

  std::vector<std::size_t> test_indices(std::size_t fold) const;
  std::vector<std::size_t> train_indices(std::size_t fold) const;
  std::vector<std::size_t> fold_sizes() const;
};

/// Random k-fold partition. With `stratified`, each label stratum is dealt
/// round-robin over the folds after shuffling, so per-stratum fold sizes
/// differ by at most one.
FoldPlan kfold_split(const Dataset& d, std::size_t k, std::uint64_t seed, bool stratified = true);

inline constexpr const char* kCsvHeader = "pdr,bpr,rss_dbm,cca_busy_ratio,label";

void csv_write(const Dataset& d, const std::filesystem::path& path);
void csv_write(const Dataset& d, std::ostream& out);
Dataset csv_read(const std::filesystem::path& path);
Dataset csv_read(std::istream& in);

}  // namespace jamguard
