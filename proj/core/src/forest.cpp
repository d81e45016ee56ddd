#include "sensauth/forest.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sensauth/rng.hpp"

namespace sensauth {

void ForestParams::validate() const {
  if (n_trees < 1) throw ValidationError("n_trees: must be >= 1");
  if (max_depth < 1) throw ValidationError("max_depth: must be >= 1");
  if (min_leaf < 1) throw ValidationError("min_leaf: must be >= 1");
  if (feature_subsample < 0) {
    throw ValidationError("feature_subsample: must be >= 0");
  }
}

int DecisionTree::predict(const Eigen::VectorXd& x) const {
  int i = 0;
  for (;;) {
    const TreeNode& node = nodes[static_cast<std::size_t>(i)];
    if (node.feature < 0) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < node.counts.size(); ++c) {
        if (node.counts[c] > node.counts[best]) best = c;
      }
      return static_cast<int>(best);
    }
    i = x[node.feature] < node.threshold ? node.left : node.right;
  }
}

namespace {

struct TreeBuilder {
  const Eigen::MatrixXd& X;
  const std::vector<int>& y;
  int n_classes;
  const ForestParams& params;
  int mtry;
  Rng& rng;
  std::vector<TreeNode> nodes;

  std::vector<std::size_t> class_counts(const std::vector<int>& idx) const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes), 0);
    for (int i : idx) ++counts[static_cast<std::size_t>(y[static_cast<std::size_t>(i)])];
    return counts;
  }

  static double gini(const std::vector<std::size_t>& counts, double n) {
    double g = 1.0;
    for (std::size_t c : counts) {
      const double p = static_cast<double>(c) / n;
      g -= p * p;
    }
    return g;
  }

  int make_leaf(const std::vector<int>& idx) {
    TreeNode leaf;
    leaf.counts = class_counts(idx);
    nodes.push_back(std::move(leaf));
    return static_cast<int>(nodes.size() - 1);
  }

  int grow(std::vector<int> idx, int depth) {
    const auto counts = class_counts(idx);
    const std::size_t n_present =
        static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(),
                                               [](std::size_t c) { return c > 0; }));
    if (depth >= params.max_depth || n_present <= 1 ||
        idx.size() < 2 * static_cast<std::size_t>(params.min_leaf)) {
      return make_leaf(idx);
    }

    // Candidate features: mtry distinct indices via partial Fisher-Yates.
    std::vector<int> features(static_cast<std::size_t>(X.cols()));
    std::iota(features.begin(), features.end(), 0);
    for (int i = 0; i < mtry; ++i) {
      const auto j = i + static_cast<int>(rng.uniform_index(
                             features.size() - static_cast<std::size_t>(i)));
      std::swap(features[static_cast<std::size_t>(i)],
                features[static_cast<std::size_t>(j)]);
    }

    const double n = static_cast<double>(idx.size());
    double best_impurity = gini(counts, n);
    int best_feature = -1;
    double best_threshold = 0.0;

    std::vector<std::pair<double, int>> order(idx.size());
    for (int f = 0; f < mtry; ++f) {
      const int feat = features[static_cast<std::size_t>(f)];
      for (std::size_t i = 0; i < idx.size(); ++i) {
        order[i] = {X(idx[i], feat), y[static_cast<std::size_t>(idx[i])]};
      }
      std::sort(order.begin(), order.end());

      std::vector<std::size_t> left(static_cast<std::size_t>(n_classes), 0);
      std::vector<std::size_t> right = counts;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        const auto c = static_cast<std::size_t>(order[i].second);
        ++left[c];
        --right[c];
        if (order[i].first == order[i + 1].first) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = n - nl;
        if (nl < params.min_leaf || nr < params.min_leaf) continue;
        const double impurity = (nl * gini(left, nl) + nr * gini(right, nr)) / n;
        if (impurity < best_impurity - 1e-12) {
          best_impurity = impurity;
          best_feature = feat;
          best_threshold = 0.5 * (order[i].first + order[i + 1].first);
        }
      }
    }

    if (best_feature < 0) return make_leaf(idx);

    std::vector<int> left_idx;
    std::vector<int> right_idx;
    for (int i : idx) {
      (X(i, best_feature) < best_threshold ? left_idx : right_idx).push_back(i);
    }
    if (left_idx.empty() || right_idx.empty()) return make_leaf(idx);

    TreeNode split;
    split.feature = best_feature;
    split.threshold = best_threshold;
    nodes.push_back(std::move(split));
    const auto self = static_cast<int>(nodes.size() - 1);
    const int l = grow(std::move(left_idx), depth + 1);
    const int r = grow(std::move(right_idx), depth + 1);
    nodes[static_cast<std::size_t>(self)].left = l;
    nodes[static_cast<std::size_t>(self)].right = r;
    return self;
  }
};

}  // namespace

RandomForest RandomForest::train(const Eigen::MatrixXd& X,
                                 const std::vector<int>& labels, int n_classes,
                                 const ForestParams& params) {
  params.validate();
  if (X.rows() < 1) throw ValidationError("X: need at least one example");
  if (labels.size() != static_cast<std::size_t>(X.rows())) {
    throw ValidationError("labels: size mismatch with X rows");
  }
  if (n_classes < 2) throw ValidationError("n_classes: must be >= 2");
  for (int l : labels) {
    if (l < 0 || l >= n_classes) throw ValidationError("labels: out of range");
  }
  if (!X.allFinite()) throw ValidationError("X: non-finite entry");

  RandomForest forest;
  forest.params_ = params;
  forest.n_features_ = static_cast<int>(X.cols());
  forest.n_classes_ = n_classes;

  std::vector<bool> seen(static_cast<std::size_t>(n_classes), false);
  for (int l : labels) seen[static_cast<std::size_t>(l)] = true;
  forest.single_class_ =
      std::count(seen.begin(), seen.end(), true) == 1;

  int mtry = params.feature_subsample;
  if (mtry <= 0) {
    mtry = static_cast<int>(std::floor(std::sqrt(static_cast<double>(X.cols()))));
  }
  mtry = std::clamp(mtry, 1, static_cast<int>(X.cols()));

  // Canonical example order: invariant to the caller's row permutation.
  std::vector<int> canon(static_cast<std::size_t>(X.rows()));
  std::iota(canon.begin(), canon.end(), 0);
  std::sort(canon.begin(), canon.end(), [&](int a, int b) {
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
      if (X(a, c) != X(b, c)) return X(a, c) < X(b, c);
    }
    return labels[static_cast<std::size_t>(a)] < labels[static_cast<std::size_t>(b)];
  });

  const std::size_t n = static_cast<std::size_t>(X.rows());
  forest.trees_.reserve(static_cast<std::size_t>(params.n_trees));
  for (int t = 0; t < params.n_trees; ++t) {
    Rng rng(Rng::mix(params.seed, 0x7265657301ULL + static_cast<std::uint64_t>(t)));
    std::vector<int> bootstrap(n);
    for (auto& i : bootstrap) i = canon[rng.uniform_index(n)];

    TreeBuilder builder{X, labels, n_classes, params, mtry, rng, {}};
    builder.grow(std::move(bootstrap), 0);
    forest.trees_.push_back(DecisionTree{std::move(builder.nodes)});
  }
  return forest;
}

std::vector<std::size_t> RandomForest::votes(const Eigen::VectorXd& x) const {
  if (x.size() != n_features_) {
    throw ValidationError("x: dimension mismatch with trained forest");
  }
  std::vector<std::size_t> out(static_cast<std::size_t>(n_classes_), 0);
  for (const auto& tree : trees_) {
    ++out[static_cast<std::size_t>(tree.predict(x))];
  }
  return out;
}

std::pair<int, double> RandomForest::predict(const Eigen::VectorXd& x) const {
  const auto v = votes(x);
  std::size_t best = 0;
  for (std::size_t c = 1; c < v.size(); ++c) {
    if (v[c] > v[best]) best = c;
  }
  return {static_cast<int>(best),
          static_cast<double>(v[best]) / static_cast<double>(trees_.size())};
}

namespace {

nlohmann::json node_to_json(const std::vector<TreeNode>& nodes, int i) {
  const TreeNode& node = nodes[static_cast<std::size_t>(i)];
  nlohmann::json j;
  if (node.feature < 0) {
    j["counts"] = node.counts;
  } else {
    j["feature"] = node.feature;
    j["threshold"] = node.threshold;
    j["left"] = node_to_json(nodes, node.left);
    j["right"] = node_to_json(nodes, node.right);
  }
  return j;
}

int node_from_json(const nlohmann::json& j, std::vector<TreeNode>& nodes) {
  TreeNode node;
  const auto self = static_cast<int>(nodes.size());
  nodes.push_back(node);
  if (j.contains("counts")) {
    nodes[static_cast<std::size_t>(self)].counts =
        j.at("counts").get<std::vector<std::size_t>>();
  } else {
    nodes[static_cast<std::size_t>(self)].feature = j.at("feature").get<int>();
    nodes[static_cast<std::size_t>(self)].threshold =
        j.at("threshold").get<double>();
    const int l = node_from_json(j.at("left"), nodes);
    const int r = node_from_json(j.at("right"), nodes);
    nodes[static_cast<std::size_t>(self)].left = l;
    nodes[static_cast<std::size_t>(self)].right = r;
  }
  return self;
}

constexpr int kForestSchemaVersion = 1;

}  // namespace

std::string RandomForest::to_json_string() const {
  nlohmann::json j;
  j["schema_version"] = kForestSchemaVersion;
  j["type"] = "random_forest";
  j["n_features"] = n_features_;
  j["n_classes"] = n_classes_;
  j["single_class"] = single_class_;
  j["params"] = {{"n_trees", params_.n_trees},
                 {"max_depth", params_.max_depth},
                 {"min_leaf", params_.min_leaf},
                 {"feature_subsample", params_.feature_subsample},
                 {"seed", params_.seed}};
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : trees_) trees.push_back(node_to_json(tree.nodes, 0));
  j["trees"] = std::move(trees);
  return j.dump();
}

RandomForest RandomForest::from_json_string(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const int version = j.at("schema_version").get<int>();
  if (version > kForestSchemaVersion) {
    throw ValidationError("schema_version: model written by a newer major (" +
                          std::to_string(version) + ")");
  }
  if (j.at("type").get<std::string>() != "random_forest") {
    throw ValidationError("type: expected random_forest");
  }
  RandomForest forest;
  forest.n_features_ = j.at("n_features").get<int>();
  forest.n_classes_ = j.at("n_classes").get<int>();
  forest.single_class_ = j.value("single_class", false);
  const auto& p = j.at("params");
  forest.params_.n_trees = p.at("n_trees").get<int>();
  forest.params_.max_depth = p.at("max_depth").get<int>();
  forest.params_.min_leaf = p.at("min_leaf").get<int>();
  forest.params_.feature_subsample = p.at("feature_subsample").get<int>();
  forest.params_.seed = p.at("seed").get<std::uint64_t>();
  for (const auto& tj : j.at("trees")) {
    DecisionTree tree;
    node_from_json(tj, tree.nodes);
    forest.trees_.push_back(std::move(tree));
  }
  return forest;
}

}  // namespace sensauth
