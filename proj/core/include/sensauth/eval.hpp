#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sensauth/krr.hpp"
#include "sensauth/metrics.hpp"
#include "sensauth/pipeline.hpp"
#include "sensauth/synth.hpp"

namespace sensauth {

struct EvalCounts {
  std::size_t legit_total = 0;
  std::size_t legit_rejected = 0;
  std::size_t imp_total = 0;
  std::size_t imp_accepted = 0;

  EvalCounts& operator+=(const EvalCounts& o);
};

// FRR = misclassified legitimate fraction, FAR = misclassified impostor
// fraction; accuracy follows exactly from the raw counts.
struct EvalMetrics {
  EvalCounts counts;
  double frr = 0.0;
  double far = 0.0;
  double accuracy = 0.0;
  RateCi frr_ci, far_ci, acc_ci;

  static EvalMetrics from_counts(const EvalCounts& c);
};

struct CrossvalOptions {
  int folds = 10;
  int iterations = 50;
  std::uint64_t seed = 0;
  ClassifierKind kind = ClassifierKind::KrrPrimal;
  double rho = 1.0;
  double threshold = 0.0;
};

using TrainerFn = std::function<ScoreFn(const TrainingSet&)>;

// Stratified k-fold cross-validation of legit-vs-impostor windows (columns),
// fold assignments reshuffled per iteration, counts pooled. Deterministic
// given the seed. Impostor training columns are downsampled to the
// legitimate training count.
EvalMetrics crossval(const Eigen::MatrixXd& legit,
                     const Eigen::MatrixXd& impostor,
                     const CrossvalOptions& options);

// Same protocol with an injected trainer (used with stub classifiers).
EvalMetrics crossval_with(const Eigen::MatrixXd& legit,
                          const Eigen::MatrixXd& impostor,
                          const CrossvalOptions& options,
                          const TrainerFn& trainer);

// Extracted per-window features for one synthetic user.
struct UserWindows {
  std::string user_id;
  Eigen::MatrixXd phone14;     // 14 x N, one column per window
  Eigen::MatrixXd combined28;  // 28 x N
  std::vector<ContextLabel> truth;
  std::vector<ContextLabel> detected;
};

struct PopulationFeatures {
  std::vector<UserWindows> users;
  ContextDetector detector;  // user-agnostic, trained on the whole population
  double window_s = 6.0;
  double sample_rate_hz = 50.0;
};

// Generates every user's streams, extracts per-window vectors, trains the
// shared context detector on ground truth and records its per-window
// predictions.
PopulationFeatures extract_population(const std::vector<UserProfile>& profiles,
                                      const SessionScript& script,
                                      double window_s, double sample_rate_hz,
                                      const ForestParams& forest_params = {});

// Enrollment: per-context (and per device set) models for one victim against
// the pooled other users. Windows are grouped by detected context.
ModelBank enroll_bank(const PopulationFeatures& pop, std::size_t victim,
                      double rho);

// Impostor pools per bank key for retraining runs.
RetrainSource make_retrain_source(const PopulationFeatures& pop,
                                  std::size_t victim, double rho);

struct AblationReport {
  EvalMetrics phone_ctxfree;
  EvalMetrics phone_ctx;
  EvalMetrics combined_ctxfree;
  EvalMetrics combined_ctx;

  std::string to_json_string() const;
};

// {PhoneOnly, PhoneAndWatch} x {context-free, context-aware} grid for one
// victim. Context-aware runs one cross-validation per detected context and
// pools the counts.
AblationReport ablation(const PopulationFeatures& pop, std::size_t victim,
                        const CrossvalOptions& options);

struct SweepPoint {
  double param = 0.0;
  EvalMetrics metrics;
};

std::string sweep_to_csv(const std::vector<SweepPoint>& points,
                         const std::string& param_name);
std::string sweep_to_json_string(const std::vector<SweepPoint>& points,
                                 const std::string& param_name);

// Re-windows the population at each size and evaluates the context-aware
// combined configuration for the victim.
std::vector<SweepPoint> sweep_window_size(
    const std::vector<UserProfile>& profiles, const SessionScript& script,
    const std::vector<double>& window_sizes_s, double sample_rate_hz,
    const CrossvalOptions& options, std::size_t victim = 0);

// Varies the training-set size with a fixed holdout; sizes are clamped to
// the available training pool.
std::vector<SweepPoint> sweep_data_size(const PopulationFeatures& pop,
                                        const std::vector<int>& sizes,
                                        const CrossvalOptions& options,
                                        std::size_t victim = 0);

struct MasqueradeOptions {
  std::vector<double> lambdas{0.0, 0.25, 0.5, 0.75, 1.0};
  int n_attackers = 20;
  int horizon = 12;  // windows
  std::uint64_t seed = 0;
};

struct SurvivalCurve {
  double lambda = 0.0;
  double p_hat = 0.0;                // fitted per-window accept probability
  std::vector<double> survival;      // fraction with access after n windows
  std::vector<double> predicted;     // p_hat^n
  bool within_3sigma = true;         // survival within binomial 3 sigma of p^n
  int n_attackers = 0;
};

struct MasqueradeReport {
  std::vector<SurvivalCurve> curves;

  std::string to_json_string() const;
};

// Mimicry sweep: attackers blended toward the victim at each fidelity
// lambda; survival measured per window against the victim's bank.
MasqueradeReport masquerade_eval(const ModelBank& victim_bank,
                                 const UserProfile& victim,
                                 const std::vector<UserProfile>& attacker_pool,
                                 const SessionScript& script,
                                 const MasqueradeOptions& options,
                                 const PipelineConfig& pipeline);

std::string eval_metrics_to_json_string(const EvalMetrics& m);

}  // namespace sensauth
