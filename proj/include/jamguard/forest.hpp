#pragma once

#include "jamguard/common.hpp"
#include "jamguard/datakit.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace jamguard {

enum class SplitCriterion { gini, entropy };

struct TreeParams {
  std::optional<int> max_depth;  // nullopt = unlimited
  int min_samples_split = 2;
  SplitCriterion split_criterion = SplitCriterion::gini;
  int features_per_split = 2;
  std::uint64_t seed = 0;

  bool operator==(const TreeParams&) const = default;
};

/// Impurity of a node holding `positives` class-1 samples out of `total`.
double gini_impurity(std::size_t positives, std::size_t total);
double entropy_impurity(std::size_t positives, std::size_t total);
double impurity(SplitCriterion c, std::size_t positives, std::size_t total);

/// Flat array tree. Node 0 is the root; a node with feature < 0 is a leaf.
/// Internal nodes send x left iff x[feature] <= threshold.
struct DecisionTree {
  struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int leaf_class = 0;
    double leaf_fraction = 0.0;  // class-1 fraction of training samples in the leaf
    std::size_t samples = 0;
    double impurity = 0.0;

    bool is_leaf() const { return feature < 0; }
    bool operator==(const Node&) const = default;
  };

  std::vector<Node> nodes;

  const Node& leaf_for(const Features& x) const;
  int predict(const Features& x) const { return leaf_for(x).leaf_class; }
  double leaf_fraction(const Features& x) const { return leaf_for(x).leaf_fraction; }
  int depth() const;

  bool operator==(const DecisionTree&) const = default;
};

/// Greedy CART on (already scaled) features. Split candidates are midpoints
/// between consecutive distinct values; ties go to the lowest feature index,
/// then the smallest threshold.
DecisionTree build_tree(const FeatureMatrix& x, const LabelVector& y, const TreeParams& p,
                        std::uint64_t seed);
DecisionTree build_tree(const Dataset& train, const TreeParams& p, std::uint64_t seed);

struct Forest {
  std::vector<DecisionTree> trees;
  TreeParams params;
  Scaler scaler;

  bool operator==(const Forest&) const = default;
};

/// M trees on bootstrap resamples of the (z-scored) training set. Tree j is
/// seeded from (seed, j), so the result does not depend on `jobs`.
Forest fit_forest(const Dataset& train, std::size_t trees, const TreeParams& p,
                  std::uint64_t seed, unsigned jobs = 1);

/// Bootstrap row indices used for tree `tree_index`.
std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed,
                                           std::size_t tree_index);

/// Mean of the trees' 0/1 votes.
double vote_fraction(std::span<const int> votes);
double vote_fraction(const Forest& f, const Sample& x);
double vote_fraction_scaled(const Forest& f, const Features& z);

/// 1 iff more than half the trees vote 1.
int majority_vote(double fraction);
int forest_predict(const Forest& f, const Sample& x);

nlohmann::json to_json(const Forest& f);
Forest forest_from_json(const nlohmann::json& doc);

}  // namespace jamguard
