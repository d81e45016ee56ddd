#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>

#include "sensauth/context.hpp"
#include "sensauth/features.hpp"

namespace sensauth {

// Per-feature z-score transform fitted on training data and carried inside
// the model, so test vectors are normalized identically. Zero-variance
// features keep scale 1.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  // X holds one example per column.
  static Standardizer fit(const Eigen::MatrixXd& X);
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd apply_columns(const Eigen::MatrixXd& X) const;
};

// Labeled training matrix: columns are feature vectors, labels are +1 for
// the legitimate owner and -1 for impostors.
struct TrainingSet {
  Eigen::MatrixXd X;  // M x N
  Eigen::VectorXd y;  // N

  void validate() const;  // finite, consistent, both labels present
};

enum class Solver { Primal = 0, Dual = 1 };
std::string_view to_string(Solver s);

// Ridge-regression authenticator with the confidence score CS = x^T w.
struct AuthModel {
  Eigen::VectorXd w;
  double rho = 1.0;
  ContextLabel context = ContextLabel::Stationary;
  LayoutKind layout = LayoutKind::Combined28;
  std::optional<Standardizer> norm;

  struct Meta {
    int n_train = 0;
    Solver solver = Solver::Primal;
    int version = 1;
    std::string trained_at;  // informational only; empty by default
  } meta;

  // Applies the stored normalization (when present), then returns x^T w.
  double score(const Eigen::VectorXd& x) const;
  // Accept iff score(x) > threshold (strict; the boundary rejects).
  bool classify(const Eigen::VectorXd& x, double threshold = 0.0) const;

  std::string to_json_string() const;
  static AuthModel from_json_string(const std::string& text);
};

// Closed-form ridge solve on the M x M system: w = (X X^T + rho I)^{-1} X y,
// via Cholesky. Cost is governed by M, not N.
AuthModel train_primal(const TrainingSet& ts, double rho);

// Equivalent N x N form: w = X (X^T X + rho I)^{-1} y.
AuthModel train_dual(const TrainingSet& ts, double rho);

AuthModel train_auth(const TrainingSet& ts, double rho,
                     Solver solver = Solver::Primal);

// Full enrollment fit from raw class matrices (columns are vectors):
// impostors are evenly downsampled to the legitimate count, a standardizer
// is fitted on the combined set and stored in the model.
AuthModel fit_auth_model(const Eigen::MatrixXd& legit,
                         const Eigen::MatrixXd& impostors, double rho,
                         ContextLabel context, LayoutKind layout,
                         Solver solver = Solver::Primal);

// Value of the regularized least-squares objective and its gradient,
// exposed for optimality checks.
double ridge_objective(const TrainingSet& ts, double rho,
                       const Eigen::VectorXd& w);
Eigen::VectorXd ridge_gradient(const TrainingSet& ts, double rho,
                               const Eigen::VectorXd& w);

// --- Baselines for the comparison harness ---

enum class BaselineKind { LinearRegression = 0, GaussianNaiveBayes = 1 };

// Minimum-norm least squares (the rho -> 0 pseudo-solution).
struct LinearRegressionModel {
  Eigen::VectorXd w;
  double score(const Eigen::VectorXd& x) const { return w.dot(x); }
};
LinearRegressionModel train_linreg(const TrainingSet& ts);

// Per-class diagonal Gaussians; score is the log posterior odds of the
// legitimate class. Degenerate variances are floored at 1e-9.
struct GaussianNbModel {
  Eigen::VectorXd mean_pos, var_pos;
  Eigen::VectorXd mean_neg, var_neg;
  double log_prior_pos = 0.0;
  double log_prior_neg = 0.0;
  bool variance_floored = false;

  double score(const Eigen::VectorXd& x) const;
};
GaussianNbModel train_gnb(const TrainingSet& ts);

// --- Unified trainer for evaluation ---

enum class ClassifierKind {
  KrrPrimal = 0,
  KrrDual = 1,
  LinearRegression = 2,
  GaussianNaiveBayes = 3,
};
std::string_view to_string(ClassifierKind k);
ClassifierKind classifier_from_string(std::string_view s);

using ScoreFn = std::function<double(const Eigen::VectorXd&)>;

// Fits the standardizer on ts, trains the requested classifier on the
// standardized data and returns a scorer that normalizes its input the same
// way. rho only applies to the KRR kinds.
ScoreFn train_classifier(ClassifierKind kind, const TrainingSet& ts,
                         double rho);

}  // namespace sensauth
