#include "sensauth/eval.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sensauth/rng.hpp"

namespace sensauth {

EvalCounts& EvalCounts::operator+=(const EvalCounts& o) {
  legit_total += o.legit_total;
  legit_rejected += o.legit_rejected;
  imp_total += o.imp_total;
  imp_accepted += o.imp_accepted;
  return *this;
}

EvalMetrics EvalMetrics::from_counts(const EvalCounts& c) {
  EvalMetrics m;
  m.counts = c;
  m.frr = c.legit_total == 0
              ? 0.0
              : static_cast<double>(c.legit_rejected) /
                    static_cast<double>(c.legit_total);
  m.far = c.imp_total == 0 ? 0.0
                           : static_cast<double>(c.imp_accepted) /
                                 static_cast<double>(c.imp_total);
  const std::size_t total = c.legit_total + c.imp_total;
  m.accuracy = total == 0
                   ? 0.0
                   : 1.0 - static_cast<double>(c.legit_rejected +
                                               c.imp_accepted) /
                               static_cast<double>(total);
  m.frr_ci = wilson_interval(c.legit_rejected, c.legit_total);
  m.far_ci = wilson_interval(c.imp_accepted, c.imp_total);
  m.acc_ci = wilson_interval(total - c.legit_rejected - c.imp_accepted, total);
  return m;
}

namespace {

std::vector<Eigen::Index> shuffled_indices(Eigen::Index n, Rng& rng) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::swap(idx[i - 1], idx[rng.uniform_index(i)]);
  }
  return idx;
}

Eigen::MatrixXd take_columns(const Eigen::MatrixXd& X,
                             const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out.col(static_cast<Eigen::Index>(i)) = X.col(cols[i]);
  }
  return out;
}

}  // namespace

EvalMetrics crossval_with(const Eigen::MatrixXd& legit,
                          const Eigen::MatrixXd& impostor,
                          const CrossvalOptions& options,
                          const TrainerFn& trainer) {
  if (options.folds < 2) throw ValidationError("folds: must be >= 2");
  if (options.iterations < 1) {
    throw ValidationError("iterations: must be >= 1");
  }
  if (legit.cols() < options.folds || impostor.cols() < options.folds) {
    throw ValidationError(
        "dataset: need at least `folds` windows on each side");
  }
  if (legit.rows() != impostor.rows()) {
    throw ValidationError("dataset: feature dimension mismatch");
  }

  EvalCounts pooled;
  for (int it = 0; it < options.iterations; ++it) {
    Rng rng(Rng::mix(options.seed, 0xCF01DULL + static_cast<std::uint64_t>(it)));
    const auto order_l = shuffled_indices(legit.cols(), rng);
    const auto order_i = shuffled_indices(impostor.cols(), rng);

    for (int fold = 0; fold < options.folds; ++fold) {
      std::vector<Eigen::Index> train_l, test_l, train_i, test_i;
      for (std::size_t p = 0; p < order_l.size(); ++p) {
        (static_cast<int>(p % static_cast<std::size_t>(options.folds)) == fold
             ? test_l
             : train_l)
            .push_back(order_l[p]);
      }
      for (std::size_t p = 0; p < order_i.size(); ++p) {
        (static_cast<int>(p % static_cast<std::size_t>(options.folds)) == fold
             ? test_i
             : train_i)
            .push_back(order_i[p]);
      }

      // Impostor training windows downsampled to the legitimate count.
      if (train_i.size() > train_l.size()) {
        std::vector<Eigen::Index> sub;
        sub.reserve(train_l.size());
        for (std::size_t i = 0; i < train_l.size(); ++i) {
          sub.push_back(train_i[i * train_i.size() / train_l.size()]);
        }
        train_i = std::move(sub);
      }

      TrainingSet ts;
      const auto nl = static_cast<Eigen::Index>(train_l.size());
      const auto ni = static_cast<Eigen::Index>(train_i.size());
      ts.X.resize(legit.rows(), nl + ni);
      ts.X << take_columns(legit, train_l), take_columns(impostor, train_i);
      ts.y.resize(nl + ni);
      ts.y.head(nl).setConstant(1.0);
      ts.y.tail(ni).setConstant(-1.0);

      const ScoreFn scorer = trainer(ts);
      EvalCounts c;
      c.legit_total = test_l.size();
      c.imp_total = test_i.size();
      for (const auto col : test_l) {
        if (!(scorer(legit.col(col)) > options.threshold)) ++c.legit_rejected;
      }
      for (const auto col : test_i) {
        if (scorer(impostor.col(col)) > options.threshold) ++c.imp_accepted;
      }
      pooled += c;
    }
  }
  return EvalMetrics::from_counts(pooled);
}

EvalMetrics crossval(const Eigen::MatrixXd& legit,
                     const Eigen::MatrixXd& impostor,
                     const CrossvalOptions& options) {
  return crossval_with(legit, impostor, options,
                       [&options](const TrainingSet& ts) {
                         return train_classifier(options.kind, ts,
                                                 options.rho);
                       });
}

PopulationFeatures extract_population(const std::vector<UserProfile>& profiles,
                                      const SessionScript& script,
                                      double window_s, double sample_rate_hz,
                                      const ForestParams& forest_params) {
  if (profiles.size() < 2) throw ValidationError("profiles: need >= 2 users");

  PopulationFeatures pop;
  pop.window_s = window_s;
  pop.sample_rate_hz = sample_rate_hz;

  const auto truth = window_truth(script, window_s, sample_rate_hz);
  for (const auto& profile : profiles) {
    const UserData data = generate_user(profile, script, sample_rate_hz);
    const auto pa = segment(data.phone.acc, window_s);
    const auto pg = segment(data.phone.gyr, window_s);
    const auto wa = segment(data.watch.acc, window_s);
    const auto wg = segment(data.watch.gyr, window_s);
    const std::size_t n = std::min({pa.size(), pg.size(), wa.size(),
                                    wg.size(), truth.size()});

    UserWindows uw;
    uw.user_id = profile.user_id;
    uw.phone14.resize(14, static_cast<Eigen::Index>(n));
    uw.combined28.resize(28, static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
      const FeatureVector phone =
          device_features(pa[k], pg[k], sample_rate_hz, Device::Phone);
      const FeatureVector watch =
          device_features(wa[k], wg[k], sample_rate_hz, Device::Watch);
      uw.phone14.col(static_cast<Eigen::Index>(k)) = phone.values;
      uw.combined28.col(static_cast<Eigen::Index>(k)) =
          auth_vector(phone, watch).values;
      uw.truth.push_back(truth[k]);
    }
    pop.users.push_back(std::move(uw));
  }

  // User-agnostic context detector over the whole population.
  std::size_t total = 0;
  for (const auto& u : pop.users) total += u.truth.size();
  Eigen::MatrixXd X(static_cast<Eigen::Index>(total), 14);
  std::vector<ContextLabel> y;
  y.reserve(total);
  Eigen::Index row = 0;
  for (const auto& u : pop.users) {
    for (std::size_t k = 0; k < u.truth.size(); ++k) {
      X.row(row++) = u.phone14.col(static_cast<Eigen::Index>(k)).transpose();
      y.push_back(u.truth[k]);
    }
  }
  pop.detector = ContextDetector::train(X, y, forest_params);

  for (auto& u : pop.users) {
    u.detected.reserve(u.truth.size());
    for (Eigen::Index k = 0; k < u.phone14.cols(); ++k) {
      u.detected.push_back(pop.detector.detect(Eigen::VectorXd(u.phone14.col(k))).label);
    }
  }
  return pop;
}

namespace {

Eigen::MatrixXd select_context(const Eigen::MatrixXd& X,
                               const std::vector<ContextLabel>& detected,
                               ContextLabel wanted) {
  std::vector<Eigen::Index> cols;
  for (Eigen::Index i = 0; i < X.cols(); ++i) {
    if (detected[static_cast<std::size_t>(i)] == wanted) cols.push_back(i);
  }
  return take_columns(X, cols);
}

Eigen::MatrixXd pool_impostors(const PopulationFeatures& pop,
                               std::size_t victim, bool combined,
                               std::optional<ContextLabel> ctx) {
  std::vector<Eigen::MatrixXd> parts;
  Eigen::Index total = 0;
  for (std::size_t u = 0; u < pop.users.size(); ++u) {
    if (u == victim) continue;
    const auto& m = combined ? pop.users[u].combined28 : pop.users[u].phone14;
    Eigen::MatrixXd part =
        ctx ? select_context(m, pop.users[u].detected, *ctx) : m;
    total += part.cols();
    parts.push_back(std::move(part));
  }
  Eigen::MatrixXd out(combined ? 28 : 14, total);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleCols(at, p.cols()) = p;
    at += p.cols();
  }
  return out;
}

}  // namespace

ModelBank enroll_bank(const PopulationFeatures& pop, std::size_t victim,
                      double rho) {
  if (victim >= pop.users.size()) {
    throw ValidationError("victim: index out of range");
  }
  ModelBank bank;
  bank.owner_id = pop.users[victim].user_id;
  bank.detector = pop.detector;

  for (ContextLabel ctx : {ContextLabel::Stationary, ContextLabel::Moving}) {
    for (DeviceSet ds : {DeviceSet::PhoneOnly, DeviceSet::PhoneAndWatch}) {
      const bool combined = ds == DeviceSet::PhoneAndWatch;
      const auto& vm =
          combined ? pop.users[victim].combined28 : pop.users[victim].phone14;
      Eigen::MatrixXd legit =
          select_context(vm, pop.users[victim].detected, ctx);
      Eigen::MatrixXd imp = pool_impostors(pop, victim, combined, ctx);
      if (legit.cols() < 2 || imp.cols() < 2) continue;

      bank.models.emplace(
          BankKey{ctx, ds},
          fit_auth_model(legit, imp, rho, ctx,
                         combined ? LayoutKind::Combined28
                                  : LayoutKind::Phone14));
    }
  }
  bank.validate();
  return bank;
}

RetrainSource make_retrain_source(const PopulationFeatures& pop,
                                  std::size_t victim, double rho) {
  RetrainSource source;
  source.rho = rho;
  for (ContextLabel ctx : {ContextLabel::Stationary, ContextLabel::Moving}) {
    for (DeviceSet ds : {DeviceSet::PhoneOnly, DeviceSet::PhoneAndWatch}) {
      source.impostors[BankKey{ctx, ds}] = pool_impostors(
          pop, victim, ds == DeviceSet::PhoneAndWatch, ctx);
    }
  }
  return source;
}

namespace {

EvalMetrics eval_cell(const PopulationFeatures& pop, std::size_t victim,
                      bool combined, bool context_aware,
                      const CrossvalOptions& options) {
  const auto& vm =
      combined ? pop.users[victim].combined28 : pop.users[victim].phone14;
  if (!context_aware) {
    return crossval(vm, pool_impostors(pop, victim, combined, std::nullopt),
                    options);
  }
  EvalCounts pooled;
  for (ContextLabel ctx : {ContextLabel::Stationary, ContextLabel::Moving}) {
    const Eigen::MatrixXd legit =
        select_context(vm, pop.users[victim].detected, ctx);
    const Eigen::MatrixXd imp = pool_impostors(pop, victim, combined, ctx);
    pooled += crossval(legit, imp, options).counts;
  }
  return EvalMetrics::from_counts(pooled);
}

}  // namespace

AblationReport ablation(const PopulationFeatures& pop, std::size_t victim,
                        const CrossvalOptions& options) {
  if (victim >= pop.users.size()) {
    throw ValidationError("victim: index out of range");
  }
  AblationReport report;
  report.phone_ctxfree = eval_cell(pop, victim, false, false, options);
  report.phone_ctx = eval_cell(pop, victim, false, true, options);
  report.combined_ctxfree = eval_cell(pop, victim, true, false, options);
  report.combined_ctx = eval_cell(pop, victim, true, true, options);
  return report;
}

std::vector<SweepPoint> sweep_window_size(
    const std::vector<UserProfile>& profiles, const SessionScript& script,
    const std::vector<double>& window_sizes_s, double sample_rate_hz,
    const CrossvalOptions& options, std::size_t victim) {
  std::vector<SweepPoint> points;
  for (double w : window_sizes_s) {
    const PopulationFeatures pop =
        extract_population(profiles, script, w, sample_rate_hz);
    SweepPoint p;
    p.param = w;
    p.metrics = eval_cell(pop, victim, true, true, options);
    points.push_back(std::move(p));
  }
  return points;
}

std::vector<SweepPoint> sweep_data_size(const PopulationFeatures& pop,
                                        const std::vector<int>& sizes,
                                        const CrossvalOptions& options,
                                        std::size_t victim) {
  if (victim >= pop.users.size()) {
    throw ValidationError("victim: index out of range");
  }
  const auto& legit_all = pop.users[victim].combined28;
  const Eigen::MatrixXd imp_all =
      pool_impostors(pop, victim, true, std::nullopt);

  std::vector<SweepPoint> points;
  for (int size : sizes) {
    if (size < 2) throw ValidationError("data size: must be >= 2");
    EvalCounts pooled;
    for (int it = 0; it < options.iterations; ++it) {
      Rng rng(Rng::mix(options.seed,
                       0xD57AULL + static_cast<std::uint64_t>(it) * 131 +
                           static_cast<std::uint64_t>(size)));
      const auto order_l = shuffled_indices(legit_all.cols(), rng);
      const auto order_i = shuffled_indices(imp_all.cols(), rng);

      // Fixed 25% holdout; the training pool is clamped to the remainder.
      const auto test_n_l = std::max<std::size_t>(1, order_l.size() / 4);
      const auto test_n_i = std::max<std::size_t>(1, order_i.size() / 4);
      const auto train_n = std::min(order_l.size() - test_n_l,
                                    static_cast<std::size_t>(size));

      std::vector<Eigen::Index> test_l(order_l.begin(),
                                       order_l.begin() + static_cast<long>(test_n_l));
      std::vector<Eigen::Index> train_l(
          order_l.begin() + static_cast<long>(test_n_l),
          order_l.begin() + static_cast<long>(test_n_l + train_n));
      std::vector<Eigen::Index> test_i(order_i.begin(),
                                       order_i.begin() + static_cast<long>(test_n_i));
      const auto train_n_i =
          std::min(order_i.size() - test_n_i, train_n);
      std::vector<Eigen::Index> train_i(
          order_i.begin() + static_cast<long>(test_n_i),
          order_i.begin() + static_cast<long>(test_n_i + train_n_i));

      TrainingSet ts;
      const auto nl = static_cast<Eigen::Index>(train_l.size());
      const auto ni = static_cast<Eigen::Index>(train_i.size());
      ts.X.resize(legit_all.rows(), nl + ni);
      ts.X << take_columns(legit_all, train_l), take_columns(imp_all, train_i);
      ts.y.resize(nl + ni);
      ts.y.head(nl).setConstant(1.0);
      ts.y.tail(ni).setConstant(-1.0);

      const ScoreFn scorer = train_classifier(options.kind, ts, options.rho);
      EvalCounts c;
      c.legit_total = test_l.size();
      c.imp_total = test_i.size();
      for (const auto col : test_l) {
        if (!(scorer(legit_all.col(col)) > options.threshold)) {
          ++c.legit_rejected;
        }
      }
      for (const auto col : test_i) {
        if (scorer(imp_all.col(col)) > options.threshold) ++c.imp_accepted;
      }
      pooled += c;
    }
    points.push_back({static_cast<double>(size),
                      EvalMetrics::from_counts(pooled)});
  }
  return points;
}

MasqueradeReport masquerade_eval(const ModelBank& victim_bank,
                                 const UserProfile& victim,
                                 const std::vector<UserProfile>& attacker_pool,
                                 const SessionScript& script,
                                 const MasqueradeOptions& options,
                                 const PipelineConfig& pipeline) {
  if (options.horizon < 3) throw ValidationError("horizon: must be >= 3");
  if (options.n_attackers < 1) {
    throw ValidationError("n_attackers: must be >= 1");
  }
  if (attacker_pool.empty()) {
    throw ValidationError("attacker_pool: must not be empty");
  }

  MasqueradeReport report;
  for (double lambda : options.lambdas) {
    SurvivalCurve curve;
    curve.lambda = lambda;
    curve.n_attackers = options.n_attackers;

    std::size_t accepts = 0;
    std::size_t windows = 0;
    std::vector<std::size_t> alive(static_cast<std::size_t>(options.horizon),
                                   0);
    for (int a = 0; a < options.n_attackers; ++a) {
      UserProfile attacker =
          attacker_pool[static_cast<std::size_t>(a) % attacker_pool.size()];
      attacker.seed = Rng::mix(options.seed,
                               0xA77ACULL + static_cast<std::uint64_t>(a));
      const UserData data = inject_mimicry(attacker, victim, lambda, script,
                                           pipeline.sample_rate_hz);

      const auto pa = segment(data.phone.acc, pipeline.window_s);
      const auto pg = segment(data.phone.gyr, pipeline.window_s);
      const auto wa = segment(data.watch.acc, pipeline.window_s);
      const auto wg = segment(data.watch.gyr, pipeline.window_s);
      const std::size_t n =
          std::min({pa.size(), pg.size(), wa.size(), wg.size(),
                    static_cast<std::size_t>(options.horizon)});

      bool still_in = true;
      for (std::size_t k = 0; k < n; ++k) {
        const WindowBundle bundle{pa[k], pg[k], wa[k], wg[k]};
        const Decision d = authenticate_window(victim_bank, bundle, pipeline);
        ++windows;
        if (d.accept) ++accepts;
        still_in = still_in && d.accept;
        if (still_in) ++alive[k];
      }
    }

    curve.p_hat = windows == 0 ? 0.0
                               : static_cast<double>(accepts) /
                                     static_cast<double>(windows);
    const double k_attackers = static_cast<double>(options.n_attackers);
    for (int n = 1; n <= options.horizon; ++n) {
      const double surv = static_cast<double>(alive[static_cast<std::size_t>(n - 1)]) /
                          k_attackers;
      const double pred = std::pow(curve.p_hat, n);
      curve.survival.push_back(surv);
      curve.predicted.push_back(pred);
      const double sd = std::sqrt(k_attackers * pred * (1.0 - pred));
      if (std::abs(surv * k_attackers - pred * k_attackers) > 3.0 * sd + 1e-9) {
        curve.within_3sigma = false;
      }
    }
    report.curves.push_back(std::move(curve));
  }
  return report;
}

namespace {

nlohmann::json rate_ci_json(const RateCi& ci) {
  return {{"value", ci.value}, {"lo", ci.lo}, {"hi", ci.hi}};
}

nlohmann::json metrics_json(const EvalMetrics& m) {
  return {{"frr", m.frr},
          {"far", m.far},
          {"accuracy", m.accuracy},
          {"frr_ci", rate_ci_json(m.frr_ci)},
          {"far_ci", rate_ci_json(m.far_ci)},
          {"accuracy_ci", rate_ci_json(m.acc_ci)},
          {"counts",
           {{"legit_total", m.counts.legit_total},
            {"legit_rejected", m.counts.legit_rejected},
            {"impostor_total", m.counts.imp_total},
            {"impostor_accepted", m.counts.imp_accepted}}}};
}

}  // namespace

std::string eval_metrics_to_json_string(const EvalMetrics& m) {
  return metrics_json(m).dump(2);
}

std::string AblationReport::to_json_string() const {
  nlohmann::json j;
  j["phone_context_free"] = metrics_json(phone_ctxfree);
  j["phone_context_aware"] = metrics_json(phone_ctx);
  j["combined_context_free"] = metrics_json(combined_ctxfree);
  j["combined_context_aware"] = metrics_json(combined_ctx);
  return j.dump(2);
}

std::string sweep_to_csv(const std::vector<SweepPoint>& points,
                         const std::string& param_name) {
  std::ostringstream out;
  out << param_name << ",frr,far,accuracy\n";
  for (const auto& p : points) {
    out << p.param << ',' << p.metrics.frr << ',' << p.metrics.far << ','
        << p.metrics.accuracy << '\n';
  }
  return out.str();
}

std::string sweep_to_json_string(const std::vector<SweepPoint>& points,
                                 const std::string& param_name) {
  nlohmann::json j;
  j["param"] = param_name;
  for (const auto& p : points) {
    j["points"].push_back({{param_name, p.param}, {"metrics", metrics_json(p.metrics)}});
  }
  return j.dump(2);
}

std::string MasqueradeReport::to_json_string() const {
  nlohmann::json j;
  for (const auto& c : curves) {
    j["curves"].push_back({{"lambda", c.lambda},
                           {"p_hat", c.p_hat},
                           {"survival", c.survival},
                           {"predicted", c.predicted},
                           {"within_3sigma", c.within_3sigma},
                           {"n_attackers", c.n_attackers}});
  }
  return j.dump(2);
}

}  // namespace sensauth
