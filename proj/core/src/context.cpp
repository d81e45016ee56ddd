#include "sensauth/context.hpp"

namespace sensauth {

std::string_view to_string(ContextLabel c) {
  return c == ContextLabel::Stationary ? "stationary" : "moving";
}

ContextLabel context_from_string(std::string_view s) {
  if (s == "stationary") return ContextLabel::Stationary;
  if (s == "moving") return ContextLabel::Moving;
  throw ValidationError("context: unknown value '" + std::string(s) + "'");
}

ContextDetector::ContextDetector(RandomForest forest)
    : forest_(std::move(forest)) {
  if (forest_.n_classes() != 2) {
    throw ValidationError("forest: context detector needs exactly 2 classes");
  }
}

ContextDetector ContextDetector::train(const Eigen::MatrixXd& X,
                                       const std::vector<ContextLabel>& labels,
                                       const ForestParams& params) {
  if (X.cols() !=
      static_cast<Eigen::Index>(FeatureLayout::device14(Device::Phone).dim())) {
    throw ValidationError("X: expected 14-dim phone feature vectors");
  }
  std::vector<int> y;
  y.reserve(labels.size());
  for (ContextLabel l : labels) y.push_back(static_cast<int>(l));
  return ContextDetector(RandomForest::train(X, y, 2, params));
}

ContextDecision ContextDetector::detect(const Eigen::VectorXd& phone14) const {
  const auto v = forest_.votes(phone14);
  // Majority vote; ties fall back to Stationary (class 0 wins equal votes
  // because the comparison is strict).
  const bool moving = v[1] > v[0];
  const std::size_t winner = moving ? v[1] : v[0];
  return {moving ? ContextLabel::Moving : ContextLabel::Stationary,
          static_cast<double>(winner) / static_cast<double>(v[0] + v[1])};
}

ContextDecision ContextDetector::detect(const FeatureVector& phone14) const {
  if (phone14.layout != LayoutKind::Phone14) {
    throw ValidationError("phone14: expected the 14-dim phone layout");
  }
  return detect(phone14.values);
}

std::string ContextDetector::to_json_string() const {
  return forest_.to_json_string();
}

ContextDetector ContextDetector::from_json_string(const std::string& text) {
  return ContextDetector(RandomForest::from_json_string(text));
}

std::size_t ConfusionMatrix::row_total(std::size_t truth) const {
  return counts[truth][0] + counts[truth][1];
}

double ConfusionMatrix::per_class_rate(std::size_t truth) const {
  const auto total = row_total(truth);
  return total == 0 ? 0.0
                    : static_cast<double>(counts[truth][truth]) /
                          static_cast<double>(total);
}

RateCi ConfusionMatrix::per_class_rate_ci(std::size_t truth) const {
  return wilson_interval(counts[truth][truth], row_total(truth));
}

double ConfusionMatrix::accuracy() const {
  const auto total = row_total(0) + row_total(1);
  if (total == 0) return 0.0;
  return static_cast<double>(counts[0][0] + counts[1][1]) /
         static_cast<double>(total);
}

ConfusionMatrix confusion(const ContextDetector& detector,
                          const Eigen::MatrixXd& X,
                          const std::vector<ContextLabel>& labels) {
  if (X.rows() == 0) throw ValidationError("X: empty test set");
  if (labels.size() != static_cast<std::size_t>(X.rows())) {
    throw ValidationError("labels: size mismatch with X rows");
  }
  ConfusionMatrix cm;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const auto truth = static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]);
    const auto pred =
        static_cast<std::size_t>(detector.detect(Eigen::VectorXd(X.row(i))).label);
    ++cm.counts[truth][pred];
  }
  return cm;
}

}  // namespace sensauth
