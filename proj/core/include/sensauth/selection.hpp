#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sensauth/sensor.hpp"

namespace sensauth {

struct SelectionConfig {
  double alpha = 0.05;           // KS significance level
  double corr_threshold = 0.85;  // |r| at or above which a pair is redundant
  double drop_rule = 0.5;        // drop when > this fraction of pairs is non-significant

  void validate() const;
};

// Per-user value matrices for selection analysis. Each matrix holds one
// user's windows as rows and the named features as columns.
struct LabeledFeatureSet {
  std::vector<std::string> user_ids;
  std::vector<std::string> feature_names;
  std::vector<Eigen::MatrixXd> per_user;

  void validate() const;  // >= 2 users, >= 2 rows each, matching columns
};

// Between-class over within-class scatter ratio. Classes with distinct means
// and all-zero within-class variance report +infinity.
double fisher_score(const std::vector<std::vector<double>>& classes);
double fisher_score(const LabeledFeatureSet& set, std::size_t feature);

struct KsResult {
  double d = 0.0;  // sup |F_a - F_b| over pooled points
  double p = 1.0;  // asymptotic two-sample p-value
};

// Two-sample Kolmogorov-Smirnov test. Inputs need >= 2 values each.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

struct ScreenVerdict {
  std::size_t feature = 0;
  bool keep = true;
  double frac_nonsignificant = 0.0;  // share of pairwise p-values above alpha
};

// Keep/drop per feature from its pairwise p-values: drop when more than
// drop_rule of the pairs are non-significant at alpha.
std::vector<ScreenVerdict> ks_feature_screen(
    const std::vector<std::vector<double>>& pvalues_per_feature,
    const SelectionConfig& config);

// Product-moment correlation. Throws ValidationError for constant input.
double pearson(std::span<const double> a, std::span<const double> b);

// Greedy redundancy pruning on a symmetric unit-diagonal correlation matrix:
// while any pair reaches |r| >= corr_threshold, drop the member with the
// higher mean absolute correlation to all other surviving features (ties drop
// the higher index). Returns dropped column indices in drop order.
std::vector<std::size_t> redundancy_prune(const Eigen::MatrixXd& corr,
                                          const SelectionConfig& config);

struct SelectionReport {
  std::vector<std::string> feature_names;
  std::vector<double> fisher;                        // per feature
  std::vector<std::array<double, 3>> p_quartiles;    // {Q1, median, Q3}
  std::vector<ScreenVerdict> screen;
  Eigen::MatrixXd mean_corr;                         // over screened-in features
  std::vector<std::size_t> corr_kept;                // indices into feature_names
  std::vector<std::size_t> pruned;                   // indices into feature_names
  std::vector<std::string> kept;                     // final feature list

  std::string to_json_string() const;
};

// Full selection pass: Fisher score per feature, pairwise KS screen, then
// correlation pruning (correlations averaged over users) on the survivors.
SelectionReport run_selection(const LabeledFeatureSet& set,
                              const SelectionConfig& config);

}  // namespace sensauth
