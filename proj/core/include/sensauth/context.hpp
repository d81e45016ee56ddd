#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "sensauth/features.hpp"
#include "sensauth/forest.hpp"
#include "sensauth/metrics.hpp"

namespace sensauth {

enum class ContextLabel { Stationary = 0, Moving = 1 };

std::string_view to_string(ContextLabel c);
ContextLabel context_from_string(std::string_view s);

struct ContextDecision {
  ContextLabel label = ContextLabel::Stationary;
  double vote_fraction = 1.0;
};

// User-agnostic stationary/moving classifier over the 14-dim phone vector.
// Vote ties resolve to Stationary.
class ContextDetector {
 public:
  ContextDetector() = default;
  explicit ContextDetector(RandomForest forest);

  // X holds one 14-dim phone vector per row.
  static ContextDetector train(const Eigen::MatrixXd& X,
                               const std::vector<ContextLabel>& labels,
                               const ForestParams& params = {});

  ContextDecision detect(const FeatureVector& phone14) const;
  ContextDecision detect(const Eigen::VectorXd& phone14) const;

  const RandomForest& forest() const { return forest_; }
  bool single_class() const { return forest_.single_class(); }

  std::string to_json_string() const;
  static ContextDetector from_json_string(const std::string& text);

 private:
  RandomForest forest_;
};

struct ConfusionMatrix {
  // counts[true][predicted]
  std::array<std::array<std::size_t, 2>, 2> counts{{{0, 0}, {0, 0}}};

  std::size_t row_total(std::size_t truth) const;
  double per_class_rate(std::size_t truth) const;  // diagonal / row total
  RateCi per_class_rate_ci(std::size_t truth) const;
  double accuracy() const;
};

ConfusionMatrix confusion(const ContextDetector& detector,
                          const Eigen::MatrixXd& X,
                          const std::vector<ContextLabel>& labels);

}  // namespace sensauth
