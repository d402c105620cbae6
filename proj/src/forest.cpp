#include "jamguard/forest.hpp"

#include "jamguard/models.hpp"
#include "jamguard/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace jamguard {

double gini_impurity(std::size_t positives, std::size_t total) {
  if (total == 0) return 0.0;
  const double p = static_cast<double>(positives) / static_cast<double>(total);
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

double entropy_impurity(std::size_t positives, std::size_t total) {
  if (total == 0 || positives == 0 || positives == total) return 0.0;
  const double p = static_cast<double>(positives) / static_cast<double>(total);
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double impurity(SplitCriterion c, std::size_t positives, std::size_t total) {
  return c == SplitCriterion::gini ? gini_impurity(positives, total)
                                   : entropy_impurity(positives, total);
}

const DecisionTree::Node& DecisionTree::leaf_for(const Features& x) const {
  const Node* node = &nodes.front();
  while (!node->is_leaf())
    node = &nodes[static_cast<std::size_t>(x[node->feature] <= node->threshold ? node->left
                                                                                : node->right)];
  return *node;
}

int DecisionTree::depth() const {
  // Nodes are appended parent-before-child.
  std::vector<int> level(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].is_leaf()) continue;
    for (int c : {nodes[i].left, nodes[i].right}) {
      level[static_cast<std::size_t>(c)] = level[i] + 1;
      deepest = std::max(deepest, level[i] + 1);
    }
  }
  return deepest;
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double weighted_impurity = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& x, const LabelVector& y, const TreeParams& p, std::uint64_t seed)
      : x_(x), y_(y), p_(p), rng_(seed) {
    if (p.features_per_split < 1 || p.features_per_split > kFeatureCount)
      throw TrainingError("features_per_split must lie in [1, 4]");
    if (p.min_samples_split < 2) throw TrainingError("min_samples_split must be >= 2");
  }

  DecisionTree build() {
    std::vector<std::size_t> rows(static_cast<std::size_t>(y_.size()));
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    if (rows.empty()) throw TrainingError("build_tree: empty training set");
    tree_.nodes.clear();
    grow(rows, 0);
    return std::move(tree_);
  }

 private:
  std::size_t positives(std::span<const std::size_t> rows) const {
    std::size_t n = 0;
    for (auto r : rows) n += y_[static_cast<Eigen::Index>(r)] == 1 ? 1 : 0;
    return n;
  }

  std::vector<int> draw_features() {
    std::array<int, kFeatureCount> all{0, 1, 2, 3};
    // Partial Fisher-Yates, then sort so ties resolve to the lowest index.
    for (int i = 0; i < p_.features_per_split; ++i) {
      std::uniform_int_distribution<int> pick(i, kFeatureCount - 1);
      std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(rng_))]);
    }
    std::vector<int> chosen(all.begin(), all.begin() + p_.features_per_split);
    std::sort(chosen.begin(), chosen.end());
    return chosen;
  }

  std::optional<Split> best_split(std::span<const std::size_t> rows, std::size_t total_pos) {
    const std::size_t n = rows.size();
    std::optional<Split> best;
    std::vector<std::pair<double, int>> column(n);
    for (int f : draw_features()) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(rows[i]);
        column[i] = {x_(r, f), y_[r]};
      }
      std::sort(column.begin(), column.end());
      std::size_t left_pos = 0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_pos += column[i].second == 1 ? 1 : 0;
        if (column[i].first == column[i + 1].first) continue;
        const std::size_t nl = i + 1;
        const std::size_t nr = n - nl;
        const double w = (static_cast<double>(nl) * impurity(p_.split_criterion, left_pos, nl) +
                          static_cast<double>(nr) *
                              impurity(p_.split_criterion, total_pos - left_pos, nr)) /
                         static_cast<double>(n);
        // Strict improvement only: features are visited in ascending order and
        // thresholds ascending, which realizes the tie-break.
        if (!best || w < best->weighted_impurity) {
          const double mid = 0.5 * (column[i].first + column[i + 1].first);
          best = Split{f, mid, w};
        }
      }
    }
    return best;
  }

  int grow(std::span<const std::size_t> rows, int depth) {
    const std::size_t n = rows.size();
    const std::size_t pos = positives(rows);
    const int index = static_cast<int>(tree_.nodes.size());
    DecisionTree::Node node;
    node.samples = n;
    node.impurity = impurity(p_.split_criterion, pos, n);
    node.leaf_fraction = static_cast<double>(pos) / static_cast<double>(n);
    node.leaf_class = 2 * pos > n ? 1 : 0;
    tree_.nodes.push_back(node);

    const bool pure = pos == 0 || pos == n;
    const bool depth_capped = p_.max_depth && depth >= *p_.max_depth;
    if (pure || depth_capped || n < static_cast<std::size_t>(p_.min_samples_split)) return index;

    const auto split = best_split(rows, pos);
    // Gini and entropy are concave, so any split satisfies child <= parent;
    // the guard only absorbs rounding.
    if (!split || split->weighted_impurity > node.impurity + 1e-12) return index;

    std::vector<std::size_t> left, right;
    left.reserve(n);
    right.reserve(n);
    for (auto r : rows)
      (x_(static_cast<Eigen::Index>(r), split->feature) <= split->threshold ? left : right)
          .push_back(r);

    auto& self = tree_.nodes[static_cast<std::size_t>(index)];
    self.feature = split->feature;
    self.threshold = split->threshold;
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    tree_.nodes[static_cast<std::size_t>(index)].left = l;
    tree_.nodes[static_cast<std::size_t>(index)].right = r;
    return index;
  }

  const FeatureMatrix& x_;
  const LabelVector& y_;
  const TreeParams& p_;
  Rng rng_;
  DecisionTree tree_;
};

}  // namespace

DecisionTree build_tree(const FeatureMatrix& x, const LabelVector& y, const TreeParams& p,
                        std::uint64_t seed) {
  return TreeBuilder(x, y, p, seed).build();
}

DecisionTree build_tree(const Dataset& train, const TreeParams& p, std::uint64_t seed) {
  return build_tree(train.features(), train.labels(), p, seed);
}

std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed,
                                           std::size_t tree_index) {
  Rng rng(derive_seed(seed, streams::kTree, 2 * tree_index));
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::size_t> rows(n);
  for (auto& r : rows) r = pick(rng);
  return rows;
}

Forest fit_forest(const Dataset& train, std::size_t trees, const TreeParams& p, std::uint64_t seed,
                  unsigned jobs) {
  if (trees < 1) throw TrainingError("fit_forest: need at least one tree");
  if (train.empty()) throw TrainingError("fit_forest: empty training set");
  Forest forest;
  forest.params = p;
  forest.params.seed = seed;
  forest.scaler = scaler_fit(train);
  const FeatureMatrix z = scaler_apply(forest.scaler, train.features());
  forest.trees.resize(trees);
  parallel_for(trees, jobs, [&](std::size_t j) {
    const auto rows = bootstrap_indices(train.size(), seed, j);
    FeatureMatrix bx(static_cast<Eigen::Index>(rows.size()), kFeatureCount);
    LabelVector by(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      bx.row(static_cast<Eigen::Index>(i)) = z.row(static_cast<Eigen::Index>(rows[i]));
      by[static_cast<Eigen::Index>(i)] = train.labels()[static_cast<Eigen::Index>(rows[i])];
    }
    forest.trees[j] = build_tree(bx, by, p, derive_seed(seed, streams::kTree, 2 * j + 1));
  });
  return forest;
}

double vote_fraction(std::span<const int> votes) {
  if (votes.empty()) return 0.0;
  const auto ones = std::count(votes.begin(), votes.end(), 1);
  return static_cast<double>(ones) / static_cast<double>(votes.size());
}

double vote_fraction_scaled(const Forest& f, const Features& z) {
  std::size_t ones = 0;
  for (const auto& t : f.trees) ones += t.predict(z) == 1 ? 1 : 0;
  return static_cast<double>(ones) / static_cast<double>(f.trees.size());
}

double vote_fraction(const Forest& f, const Sample& x) {
  return vote_fraction_scaled(f, scaler_apply(f.scaler, x.features()));
}

int majority_vote(double fraction) { return fraction > 0.5 ? 1 : 0; }

int forest_predict(const Forest& f, const Sample& x) { return majority_vote(vote_fraction(f, x)); }

// ---- serialization --------------------------------------------------------

nlohmann::json to_json(const Forest& f) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : f.trees) {
    nlohmann::json feature = nlohmann::json::array(), threshold = nlohmann::json::array(),
                   left = nlohmann::json::array(), right = nlohmann::json::array(),
                   leaf_class = nlohmann::json::array(), leaf_fraction = nlohmann::json::array();
    for (const auto& n : t.nodes) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      leaf_class.push_back(n.leaf_class);
      leaf_fraction.push_back(n.leaf_fraction);
    }
    trees.push_back({{"feature", feature},
                     {"threshold", threshold},
                     {"left", left},
                     {"right", right},
                     {"leaf_class", leaf_class},
                     {"leaf_fraction", leaf_fraction}});
  }
  nlohmann::json params = {
      {"max_depth", f.params.max_depth ? nlohmann::json(*f.params.max_depth) : nlohmann::json()},
      {"min_samples_split", f.params.min_samples_split},
      {"split_criterion", f.params.split_criterion == SplitCriterion::gini ? "gini" : "entropy"},
      {"features_per_split", f.params.features_per_split},
      {"seed", f.params.seed},
  };
  return {{"format", kModelFormat},
          {"version", kModelVersion},
          {"family", "forest"},
          {"params", params},
          {"scaler", scaler_to_json(f.scaler)},
          {"trees", trees}};
}

Forest forest_from_json(const nlohmann::json& doc) {
  check_model_header(doc, "forest");
  Forest f;
  try {
    const auto& p = doc.at("params");
    if (!p.at("max_depth").is_null()) f.params.max_depth = p.at("max_depth").get<int>();
    f.params.min_samples_split = p.at("min_samples_split").get<int>();
    f.params.split_criterion =
        p.at("split_criterion").get<std::string>() == "entropy" ? SplitCriterion::entropy
                                                                : SplitCriterion::gini;
    f.params.features_per_split = p.at("features_per_split").get<int>();
    f.params.seed = p.at("seed").get<std::uint64_t>();
    f.scaler = scaler_from_json(doc.at("scaler"));
    for (const auto& t : doc.at("trees")) {
      DecisionTree tree;
      const auto& feature = t.at("feature");
      tree.nodes.resize(feature.size());
      for (std::size_t i = 0; i < feature.size(); ++i) {
        auto& n = tree.nodes[i];
        n.feature = feature[i].get<int>();
        n.threshold = t.at("threshold")[i].get<double>();
        n.left = t.at("left")[i].get<int>();
        n.right = t.at("right")[i].get<int>();
        n.leaf_class = t.at("leaf_class")[i].get<int>();
        n.leaf_fraction = t.at("leaf_fraction")[i].get<double>();
        const int count = static_cast<int>(feature.size());
        if (n.feature >= kFeatureCount ||
            (n.feature >= 0 && (n.left <= static_cast<int>(i) || n.right <= static_cast<int>(i) ||
                                n.left >= count || n.right >= count)))
          throw DataError("forest model: malformed node array");
      }
      if (tree.nodes.empty()) throw DataError("forest model: empty tree");
      f.trees.push_back(std::move(tree));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("forest model: ") + e.what());
  }
  if (f.trees.empty()) throw DataError("forest model: no trees");
  return f;
}

}  // namespace jamguard
