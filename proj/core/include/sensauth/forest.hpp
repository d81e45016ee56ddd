#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sensauth/sensor.hpp"

namespace sensauth {

struct ForestParams {
  int n_trees = 100;
  int max_depth = 12;
  int min_leaf = 2;
  int feature_subsample = 0;  // 0 selects floor(sqrt(n_features))
  std::uint64_t seed = 0;

  void validate() const;
};

// Axis-aligned threshold tree. feature < 0 marks a leaf; leaves carry the
// training class counts.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<std::size_t> counts;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  int predict(const Eigen::VectorXd& x) const;
};

// Bagged forest with Gini splits and per-split feature subsampling.
// Deterministic given the seed; training examples are canonically ordered
// internally, so the result is invariant to input row permutation.
class RandomForest {
 public:
  RandomForest() = default;

  // X holds one example per row. labels are in [0, n_classes).
  static RandomForest train(const Eigen::MatrixXd& X,
                            const std::vector<int>& labels, int n_classes,
                            const ForestParams& params);

  // (majority label, fraction of trees voting for it). Ties resolve to the
  // lowest class index.
  std::pair<int, double> predict(const Eigen::VectorXd& x) const;

  std::vector<std::size_t> votes(const Eigen::VectorXd& x) const;

  int n_features() const { return n_features_; }
  int n_classes() const { return n_classes_; }
  const ForestParams& params() const { return params_; }
  const std::vector<DecisionTree>& trees() const { return trees_; }
  // True when training saw a single class; the forest then constantly
  // predicts it.
  bool single_class() const { return single_class_; }

  std::string to_json_string() const;
  static RandomForest from_json_string(const std::string& text);

 private:
  std::vector<DecisionTree> trees_;
  ForestParams params_;
  int n_features_ = 0;
  int n_classes_ = 0;
  bool single_class_ = false;
};

}  // namespace sensauth
