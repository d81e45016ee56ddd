#include "cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "sensauth/config.hpp"
#include "sensauth/eval.hpp"
#include "sensauth/io.hpp"
#include "sensauth/krr.hpp"
#include "sensauth/pipeline.hpp"
#include "sensauth/selection.hpp"
#include "sensauth/synth.hpp"

namespace sensauth::cli {

namespace {

namespace fs = std::filesystem;

Config load_base_config(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] == "--config") return Config::from_json_file(args[i + 1]);
  }
  return {};
}

std::string results_dir(const Config& cfg) {
  if (const char* env = std::getenv("SENSAUTH_RESULTS_DIR")) return env;
  return cfg.results_dir;
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  if (out.empty()) throw ValidationError("list: no values given");
  return out;
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  for (double v : parse_double_list(csv)) out.push_back(static_cast<int>(v));
  return out;
}

// Feature CSV -> per-user matrices (columns are windows) plus detected or
// known contexts.
struct LoadedFeatures {
  std::vector<std::string> columns;
  std::map<std::string, std::vector<FeatureRow>> by_user;
  Eigen::Index dim() const { return static_cast<Eigen::Index>(columns.size()); }
};

LoadedFeatures load_features(const std::vector<std::string>& paths) {
  LoadedFeatures out;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw ValidationError("features: cannot open '" + path + "'");
    FeatureFile file = read_features_csv(in);
    if (out.columns.empty()) {
      out.columns = file.columns;
    } else if (out.columns != file.columns) {
      throw ValidationError("features: column sets differ between files");
    }
    for (auto& row : file.rows) {
      out.by_user[row.user_id].push_back(std::move(row));
    }
  }
  if (out.by_user.empty()) throw ValidationError("features: no rows");
  return out;
}

Eigen::MatrixXd rows_to_matrix(const std::vector<FeatureRow>& rows) {
  if (rows.empty()) throw ValidationError("features: user has no rows");
  Eigen::MatrixXd m(rows.front().values.size(),
                    static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    m.col(static_cast<Eigen::Index>(i)) = rows[i].values;
  }
  return m;
}

nlohmann::json metrics_json_from(const EvalMetrics& m) {
  return nlohmann::json::parse(eval_metrics_to_json_string(m));
}

// --- generate ---------------------------------------------------------------

int cmd_generate(const std::string& preset, int users, std::uint64_t seed,
                 double total_s, double segment_s, double rate,
                 double window_s, const std::string& format,
                 const std::string& out_dir) {
  fs::create_directories(out_dir);
  const auto profiles =
      make_population(preset_from_string(preset), users, seed);
  const auto script = SessionScript::alternating(total_s, segment_s);
  const auto truth = window_truth(script, window_s, rate);

  for (const auto& profile : profiles) {
    const UserData data = generate_user(profile, script, rate);
    const std::string base = out_dir + "/" + profile.user_id;
    write_sensor_file(base + ".sensors." + format,
                      user_data_to_streams(data));
    std::vector<TruthRow> rows;
    for (std::size_t k = 0; k < truth.size(); ++k) {
      rows.push_back({k, profile.user_id, truth[k]});
    }
    std::ofstream tf(base + ".truth.csv");
    write_truth_csv(tf, rows);
  }
  write_text_file(out_dir + "/population.json",
                  population_to_json_string(profiles));
  std::cerr << "generated " << profiles.size() << " users under " << out_dir
            << "\n";
  return 0;
}

// --- extract ----------------------------------------------------------------

int cmd_extract(const std::string& in_path, const std::string& truth_path,
                const std::string& user_id, double window_s, double rate,
                bool candidate, const std::string& out_path) {
  const auto streams = read_sensor_file(in_path, rate);
  const UserData data = streams_to_user_data(streams);
  const bool watch_present = !data.watch.acc.samples.empty() &&
                             !data.watch.gyr.samples.empty();

  const auto pa = segment(data.phone.acc, window_s);
  const auto pg = segment(data.phone.gyr, window_s);
  std::size_t n = std::min(pa.size(), pg.size());
  std::vector<Window> wa, wg;
  if (watch_present) {
    wa = segment(data.watch.acc, window_s);
    wg = segment(data.watch.gyr, window_s);
    n = std::min({n, wa.size(), wg.size()});
  }

  std::map<std::size_t, ContextLabel> truth;
  if (!truth_path.empty()) {
    std::ifstream tf(truth_path);
    if (!tf) throw ValidationError("truth: cannot open '" + truth_path + "'");
    for (const auto& row : read_truth_csv(tf)) truth[row.k] = row.context;
  }

  const FeatureLayout& layout =
      candidate ? (watch_present ? FeatureLayout::candidate36()
                                 : FeatureLayout::candidate18(Device::Phone))
                : (watch_present ? FeatureLayout::combined28()
                                 : FeatureLayout::device14(Device::Phone));

  std::vector<FeatureRow> rows;
  rows.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    FeatureRow row;
    row.k = k;
    row.user_id = user_id;
    if (const auto it = truth.find(k); it != truth.end()) {
      row.context = it->second;
    }
    auto extract_one = [&](const Window& a, const Window& g, Device d) {
      return candidate ? candidate_features(a, g, rate, d)
                       : device_features(a, g, rate, d);
    };
    const FeatureVector phone = extract_one(pa[k], pg[k], Device::Phone);
    if (watch_present) {
      const FeatureVector watch = extract_one(wa[k], wg[k], Device::Watch);
      row.values.resize(phone.values.size() + watch.values.size());
      row.values << phone.values, watch.values;
    } else {
      row.values = phone.values;
    }
    rows.push_back(std::move(row));
  }

  std::ofstream out(out_path);
  if (!out) throw ValidationError("out: cannot open '" + out_path + "'");
  write_features_csv(out, layout, rows);
  std::cerr << "extracted " << rows.size() << " windows to " << out_path
            << "\n";
  return 0;
}

// --- select -----------------------------------------------------------------

int cmd_select(const std::vector<std::string>& feature_files, double alpha,
               double corr_threshold, double drop_rule,
               const std::string& out_path) {
  const LoadedFeatures loaded = load_features(feature_files);

  LabeledFeatureSet set;
  set.feature_names = loaded.columns;
  for (const auto& [user, rows] : loaded.by_user) {
    set.user_ids.push_back(user);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), loaded.dim());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      m.row(static_cast<Eigen::Index>(i)) = rows[i].values.transpose();
    }
    set.per_user.push_back(std::move(m));
  }

  SelectionConfig cfg{alpha, corr_threshold, drop_rule};
  const SelectionReport report = run_selection(set, cfg);
  write_text_file(out_path, report.to_json_string() + "\n");
  std::cerr << "selection report: kept " << report.kept.size() << " of "
            << report.feature_names.size() << " features\n";
  return 0;
}

// --- train-context ----------------------------------------------------------

int cmd_train_context(const std::vector<std::string>& feature_files,
                      int n_trees, int max_depth, int min_leaf,
                      std::uint64_t seed, const std::string& out_path) {
  const LoadedFeatures loaded = load_features(feature_files);
  if (loaded.dim() != 14 && loaded.dim() != 28) {
    throw ValidationError(
        "features: context training expects the 14- or 28-dim layout "
        "(the phone block is used)");
  }
  const auto phone_names = FeatureLayout::device14(Device::Phone).names();
  for (std::size_t i = 0; i < phone_names.size(); ++i) {
    if (loaded.columns[i] != phone_names[i]) {
      throw ValidationError("features: columns do not start with the phone "
                            "layout (got '" + loaded.columns[i] + "')");
    }
  }

  std::size_t total = 0;
  for (const auto& [user, rows] : loaded.by_user) total += rows.size();
  Eigen::MatrixXd X(static_cast<Eigen::Index>(total), 14);
  std::vector<ContextLabel> y;
  y.reserve(total);
  Eigen::Index at = 0;
  for (const auto& [user, rows] : loaded.by_user) {
    for (const auto& row : rows) {
      if (!row.context) {
        throw ValidationError("features: context column required for training");
      }
      X.row(at++) = row.values.head(14).transpose();
      y.push_back(*row.context);
    }
  }

  ForestParams params;
  params.n_trees = n_trees;
  params.max_depth = max_depth;
  params.min_leaf = min_leaf;
  params.seed = seed;
  const ContextDetector detector = ContextDetector::train(X, y, params);
  write_text_file(out_path, detector.to_json_string() + "\n");
  std::cerr << "context model written to " << out_path << "\n";
  return 0;
}

// --- detect-context (debugging aid for the context model) -------------------

int cmd_detect_context(const std::string& model_path,
                       const std::vector<std::string>& feature_files) {
  const ContextDetector detector =
      ContextDetector::from_json_string(read_text_file(model_path));
  const LoadedFeatures loaded = load_features(feature_files);
  for (const auto& [user, rows] : loaded.by_user) {
    for (const auto& row : rows) {
      Eigen::VectorXd phone14 = row.values.head(14);
      const ContextDecision d = detector.detect(phone14);
      std::cout << user << ',' << row.k << ',' << to_string(d.label) << ','
                << d.vote_fraction << '\n';
    }
  }
  return 0;
}

// --- train-auth -------------------------------------------------------------

int cmd_train_auth(const std::vector<std::string>& feature_files,
                   const std::string& owner, const std::string& context_model,
                   double rho, const std::string& contexts,
                   const std::string& solver_name,
                   const std::string& out_path) {
  const LoadedFeatures loaded = load_features(feature_files);
  if (loaded.dim() != 14 && loaded.dim() != 28) {
    throw ValidationError("features: expected the 14- or 28-dim layout");
  }
  if (!loaded.by_user.contains(owner)) {
    throw ValidationError("owner: no rows for '" + owner + "'");
  }
  const bool combined = loaded.dim() == 28;
  const Solver solver =
      solver_name == "dual" ? Solver::Dual : Solver::Primal;

  ModelBank bank;
  bank.owner_id = owner;
  bank.detector =
      ContextDetector::from_json_string(read_text_file(context_model));

  // Group every row by the detected context, exactly as the running system
  // would see it.
  auto detected = [&](const FeatureRow& row) {
    Eigen::VectorXd phone14 = row.values.head(14);
    return bank.detector.detect(phone14).label;
  };

  std::vector<ContextLabel> wanted;
  if (contexts == "both") {
    wanted = {ContextLabel::Stationary, ContextLabel::Moving};
  } else {
    wanted = {context_from_string(contexts)};
  }

  for (ContextLabel ctx : wanted) {
    std::vector<Eigen::VectorXd> legit_cols, imp_cols;
    for (const auto& [user, rows] : loaded.by_user) {
      for (const auto& row : rows) {
        if (detected(row) != ctx) continue;
        (user == owner ? legit_cols : imp_cols).push_back(row.values);
      }
    }
    if (legit_cols.size() < 2 || imp_cols.size() < 2) {
      throw ValidationError("features: not enough windows for context '" +
                            std::string(to_string(ctx)) + "'");
    }
    auto to_matrix = [](const std::vector<Eigen::VectorXd>& cols) {
      Eigen::MatrixXd m(cols.front().size(),
                        static_cast<Eigen::Index>(cols.size()));
      for (std::size_t i = 0; i < cols.size(); ++i) {
        m.col(static_cast<Eigen::Index>(i)) = cols[i];
      }
      return m;
    };
    const Eigen::MatrixXd legit = to_matrix(legit_cols);
    const Eigen::MatrixXd imp = to_matrix(imp_cols);

    if (combined) {
      bank.models.emplace(
          BankKey{ctx, DeviceSet::PhoneAndWatch},
          fit_auth_model(legit, imp, rho, ctx, LayoutKind::Combined28,
                         solver));
      bank.models.emplace(
          BankKey{ctx, DeviceSet::PhoneOnly},
          fit_auth_model(legit.topRows(14), imp.topRows(14), rho, ctx,
                         LayoutKind::Phone14, solver));
    } else {
      bank.models.emplace(
          BankKey{ctx, DeviceSet::PhoneOnly},
          fit_auth_model(legit, imp, rho, ctx, LayoutKind::Phone14, solver));
    }
  }

  if (contexts == "both") bank.validate();
  bank.save(out_path);
  std::cerr << "model bank (" << bank.models.size() << " models) written to "
            << out_path << "\n";
  return 0;
}

// --- run --------------------------------------------------------------------

int cmd_run(const std::string& bank_path, const std::string& sensors_path,
            double window_s, double rate, double threshold, int lockout_after,
            double epsilon_cs, int t_windows, int data_size,
            const std::string& retrain_features, double rho,
            const std::string& out_path) {
  const ModelBank bank = ModelBank::load(bank_path);
  const UserData data =
      streams_to_user_data(read_sensor_file(sensors_path, rate));

  RunOptions options;
  options.pipeline = {window_s, rate, threshold, 3.0};
  options.policy.lockout_after_rejections = lockout_after;
  options.retrain = {epsilon_cs, t_windows, data_size};

  RetrainSource source;
  const bool with_source = !retrain_features.empty();
  if (with_source) {
    source.rho = rho;
    const LoadedFeatures pool = load_features({retrain_features});
    std::map<BankKey, std::vector<Eigen::VectorXd>> grouped;
    for (const auto& [user, rows] : pool.by_user) {
      if (user == bank.owner_id) continue;
      for (const auto& row : rows) {
        Eigen::VectorXd phone14 = row.values.head(14);
        const ContextLabel ctx = bank.detector.detect(phone14).label;
        if (row.values.size() == 28) {
          grouped[{ctx, DeviceSet::PhoneAndWatch}].push_back(row.values);
        }
        grouped[{ctx, DeviceSet::PhoneOnly}].push_back(phone14);
      }
    }
    for (const auto& [key, cols] : grouped) {
      Eigen::MatrixXd m(cols.front().size(),
                        static_cast<Eigen::Index>(cols.size()));
      for (std::size_t i = 0; i < cols.size(); ++i) {
        m.col(static_cast<Eigen::Index>(i)) = cols[i];
      }
      source.impostors.emplace(key, std::move(m));
    }
  }

  const RunResult result =
      run_stream(bank, data, options, with_source ? &source : nullptr);

  std::ofstream out(out_path);
  if (!out) throw ValidationError("out: cannot open '" + out_path + "'");
  write_decision_log(out, result.decisions, result.events);

  std::size_t accepts = 0;
  for (const auto& d : result.decisions) accepts += d.accept ? 1 : 0;
  std::cerr << "processed " << result.decisions.size() << " windows, "
            << accepts << " accepted, " << result.events.size() << " events, "
            << result.retrain_count << " retrains\n";
  return 0;
}

// --- evaluate ---------------------------------------------------------------

int cmd_evaluate(const std::string& preset, const std::string& population_file,
                 int users, std::uint64_t seed, double total_s,
                 double segment_s, double window_s, double rate,
                 std::size_t victim, int folds, int iterations, double rho,
                 const std::string& classifier, bool do_ablation,
                 const std::vector<std::string>& feature_files,
                 const std::string& owner, double min_accuracy,
                 const std::string& out_path) {
  const auto t0 = std::chrono::steady_clock::now();
  nlohmann::json report;
  double headline_accuracy = 0.0;

  CrossvalOptions options;
  options.folds = folds;
  options.iterations = iterations;
  options.seed = seed;
  options.rho = rho;
  options.kind = classifier_from_string(classifier);

  if (!feature_files.empty()) {
    const LoadedFeatures loaded = load_features(feature_files);
    if (!loaded.by_user.contains(owner)) {
      throw ValidationError("owner: no rows for '" + owner + "'");
    }
    Eigen::MatrixXd legit = rows_to_matrix(loaded.by_user.at(owner));
    std::vector<Eigen::MatrixXd> imp_parts;
    Eigen::Index total = 0;
    for (const auto& [user, rows] : loaded.by_user) {
      if (user == owner) continue;
      imp_parts.push_back(rows_to_matrix(rows));
      total += imp_parts.back().cols();
    }
    Eigen::MatrixXd imp(legit.rows(), total);
    Eigen::Index at = 0;
    for (const auto& p : imp_parts) {
      imp.middleCols(at, p.cols()) = p;
      at += p.cols();
    }
    const EvalMetrics m = crossval(legit, imp, options);
    headline_accuracy = m.accuracy;
    report["mode"] = "features";
    report["owner"] = owner;
    report["metrics"] = metrics_json_from(m);
  } else {
    std::vector<UserProfile> profiles;
    if (!population_file.empty()) {
      profiles = population_from_json_string(read_text_file(population_file));
    } else {
      profiles = make_population(preset_from_string(preset), users, seed);
    }
    const auto script = SessionScript::alternating(total_s, segment_s);
    const PopulationFeatures pop =
        extract_population(profiles, script, window_s, rate);

    report["mode"] = "synthetic";
    report["preset"] = preset;
    report["users"] = profiles.size();
    report["victim"] = pop.users.at(victim).user_id;

    if (do_ablation) {
      const AblationReport ar = ablation(pop, victim, options);
      report["ablation"] = nlohmann::json::parse(ar.to_json_string());
      headline_accuracy = ar.combined_ctx.accuracy;
      report["metrics"] = metrics_json_from(ar.combined_ctx);
    } else {
      EvalCounts pooled;
      for (ContextLabel ctx :
           {ContextLabel::Stationary, ContextLabel::Moving}) {
        std::vector<Eigen::Index> cols;
        const auto& u = pop.users.at(victim);
        Eigen::MatrixXd legit(28, 0), imp(28, 0);
        {
          std::vector<Eigen::MatrixXd> imp_parts;
          Eigen::Index total = 0;
          for (std::size_t i = 0; i < pop.users.size(); ++i) {
            const auto& other = pop.users[i];
            std::vector<Eigen::Index> keep;
            for (Eigen::Index c = 0; c < other.combined28.cols(); ++c) {
              if (other.detected[static_cast<std::size_t>(c)] == ctx) {
                keep.push_back(c);
              }
            }
            Eigen::MatrixXd sub(28, static_cast<Eigen::Index>(keep.size()));
            for (std::size_t c = 0; c < keep.size(); ++c) {
              sub.col(static_cast<Eigen::Index>(c)) =
                  other.combined28.col(keep[c]);
            }
            if (i == victim) {
              legit = std::move(sub);
            } else {
              total += sub.cols();
              imp_parts.push_back(std::move(sub));
            }
          }
          imp.resize(28, total);
          Eigen::Index at = 0;
          for (const auto& p : imp_parts) {
            imp.middleCols(at, p.cols()) = p;
            at += p.cols();
          }
        }
        pooled += crossval(legit, imp, options).counts;
        (void)cols;
        (void)u;
      }
      const EvalMetrics m = EvalMetrics::from_counts(pooled);
      headline_accuracy = m.accuracy;
      report["metrics"] = metrics_json_from(m);
    }
  }

  const double seconds = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
  report["runtime"] = {{"wall_seconds", seconds}};
  write_text_file(out_path, report.dump(2) + "\n");
  std::cerr << "evaluate: accuracy " << headline_accuracy << ", report at "
            << out_path << "\n";

  if (min_accuracy > 0.0 && headline_accuracy < min_accuracy) {
    std::cerr << "evaluate: accuracy " << headline_accuracy
              << " below required bound " << min_accuracy << "\n";
    return 1;
  }
  return 0;
}

// --- sweep ------------------------------------------------------------------

int cmd_sweep(const std::string& kind, const std::string& preset,
              const std::string& population_file, int users,
              std::uint64_t seed, double total_s, double segment_s,
              double window_s, double rate, std::size_t victim, int folds,
              int iterations, double rho, const std::string& sizes_csv,
              const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::vector<UserProfile> profiles;
  if (!population_file.empty()) {
    profiles = population_from_json_string(read_text_file(population_file));
  } else {
    profiles = make_population(preset_from_string(preset), users, seed);
  }
  const auto script = SessionScript::alternating(total_s, segment_s);

  CrossvalOptions options;
  options.folds = folds;
  options.iterations = iterations;
  options.seed = seed;
  options.rho = rho;

  std::vector<SweepPoint> points;
  std::string param_name;
  if (kind == "window") {
    param_name = "window_s";
    points = sweep_window_size(profiles, script,
                               parse_double_list(sizes_csv), rate, options,
                               victim);
  } else if (kind == "data") {
    param_name = "data_size";
    const PopulationFeatures pop =
        extract_population(profiles, script, window_s, rate);
    points = sweep_data_size(pop, parse_int_list(sizes_csv), options, victim);
  } else {
    throw ValidationError("kind: expected 'window' or 'data'");
  }

  write_text_file(out_dir + "/sweep_" + kind + ".csv",
                  sweep_to_csv(points, param_name));
  write_text_file(out_dir + "/sweep_" + kind + ".json",
                  sweep_to_json_string(points, param_name) + "\n");
  std::cerr << "sweep over " << points.size() << " sizes written to "
            << out_dir << "\n";
  return 0;
}

// --- masquerade -------------------------------------------------------------

int cmd_masquerade(const std::string& preset,
                   const std::string& population_file, int users,
                   std::uint64_t seed, double total_s, double segment_s,
                   double window_s, double rate, std::size_t victim,
                   double rho, const std::string& lambdas_csv, int n_attackers,
                   int horizon, const std::string& out_path) {
  std::vector<UserProfile> profiles;
  if (!population_file.empty()) {
    profiles = population_from_json_string(read_text_file(population_file));
  } else {
    profiles = make_population(preset_from_string(preset), users, seed);
  }
  if (victim >= profiles.size()) {
    throw ValidationError("victim: index out of range");
  }
  const auto script = SessionScript::alternating(total_s, segment_s);
  const PopulationFeatures pop =
      extract_population(profiles, script, window_s, rate);
  const ModelBank bank = enroll_bank(pop, victim, rho);

  std::vector<UserProfile> pool;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    if (i != victim) pool.push_back(profiles[i]);
  }

  MasqueradeOptions options;
  options.lambdas = parse_double_list(lambdas_csv);
  options.n_attackers = n_attackers;
  options.horizon = horizon;
  options.seed = seed;

  const PipelineConfig pipeline{window_s, rate, 0.0, 3.0};
  // Attack sessions are moving-context: the attacker is actively using the
  // stolen device.
  const auto attack_script = SessionScript::constant(
      ContextLabel::Moving, horizon * window_s + window_s);
  const MasqueradeReport report = masquerade_eval(
      bank, profiles[victim], pool, attack_script, options, pipeline);

  write_text_file(out_path, report.to_json_string() + "\n");

  bool ok = true;
  for (const auto& c : report.curves) ok = ok && c.within_3sigma;
  std::cerr << "masquerade: " << report.curves.size() << " curves, 3-sigma "
            << (ok ? "ok" : "VIOLATED") << ", report at " << out_path << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"sensauth - continuous implicit authentication toolkit"};
  app.require_subcommand(1);

  Config base;
  try {
    base = load_base_config(args);
    base.validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file");

  // Shared knobs, defaulted from the config file; explicit flags win.
  std::string preset = "separable";
  std::string population_file;
  int users = 10;
  std::uint64_t seed = base.seed;
  double total_s = 960.0;
  double segment_s = 60.0;
  double rate = base.sample_rate_hz;
  double window_s = base.window_s;
  double rho = base.rho;
  std::size_t victim = 0;

  // generate
  auto* generate = app.add_subcommand("generate", "Emit synthetic sensor data");
  std::string gen_format = "csv";
  std::string gen_out = base.data_dir;
  generate->add_option("--preset", preset, "separable|overlapping");
  generate->add_option("--users", users);
  generate->add_option("--seed", seed);
  generate->add_option("--total-s", total_s);
  generate->add_option("--segment-s", segment_s);
  generate->add_option("--rate", rate);
  generate->add_option("--window-s", window_s);
  generate->add_option("--format", gen_format, "csv|jsonl");
  generate->add_option("--out-dir", gen_out);

  // extract
  auto* extract = app.add_subcommand("extract", "Sensor file -> feature CSV");
  std::string ex_in, ex_truth, ex_user = "user_00", ex_out = "features.csv";
  bool ex_candidate = false;
  extract->add_option("--in", ex_in)->required();
  extract->add_option("--truth", ex_truth);
  extract->add_option("--user-id", ex_user);
  extract->add_option("--window-s", window_s);
  extract->add_option("--rate", rate);
  extract->add_flag("--candidate", ex_candidate,
                    "emit all nine candidate features per sensor");
  extract->add_option("--out", ex_out);

  // select
  auto* select = app.add_subcommand("select", "Feature selection report");
  std::vector<std::string> sel_features;
  double alpha = base.alpha;
  double corr_threshold = base.corr_threshold;
  double drop_rule = 0.5;
  std::string sel_out;
  select->add_option("--features", sel_features)->required()->expected(-1);
  select->add_option("--alpha", alpha);
  select->add_option("--corr-threshold", corr_threshold);
  select->add_option("--drop-rule", drop_rule);
  select->add_option("--out", sel_out);

  // train-context
  auto* trainctx = app.add_subcommand("train-context",
                                      "Train the context detector");
  std::vector<std::string> ctx_features;
  int n_trees = 100, max_depth = 12, min_leaf = 2;
  std::string ctx_out = "context_model.json";
  trainctx->add_option("--features", ctx_features)->required()->expected(-1);
  trainctx->add_option("--trees", n_trees);
  trainctx->add_option("--depth", max_depth);
  trainctx->add_option("--min-leaf", min_leaf);
  trainctx->add_option("--seed", seed);
  trainctx->add_option("--out", ctx_out);

  // detect-context
  auto* detectctx = app.add_subcommand("detect-context",
                                       "Classify windows with a context model");
  std::string dc_model;
  std::vector<std::string> dc_features;
  detectctx->add_option("--model", dc_model)->required();
  detectctx->add_option("--features", dc_features)->required()->expected(-1);

  // train-auth
  auto* trainauth = app.add_subcommand("train-auth",
                                       "Train per-context KRR models");
  std::vector<std::string> ta_features;
  std::string ta_owner, ta_ctx_model, ta_contexts = "both";
  std::string ta_solver = "primal";
  std::string ta_out = base.model_dir + "/bank.json";
  trainauth->add_option("--features", ta_features)->required()->expected(-1);
  trainauth->add_option("--owner", ta_owner)->required();
  trainauth->add_option("--context-model", ta_ctx_model)->required();
  trainauth->add_option("--rho", rho);
  trainauth->add_option("--context", ta_contexts, "both|stationary|moving");
  trainauth->add_option("--solver", ta_solver, "primal|dual");
  trainauth->add_option("--out", ta_out);

  // run
  auto* runcmd = app.add_subcommand("run", "Stream authentication");
  std::string run_bank, run_sensors, run_retrain;
  std::string run_out = "decisions.jsonl";
  double threshold = 0.0;
  int lockout_after = base.lockout_after;
  double epsilon_cs = base.epsilon_cs;
  int t_windows = base.t_windows;
  int data_size = base.data_size;
  runcmd->add_option("--bank", run_bank)->required();
  runcmd->add_option("--sensors", run_sensors)->required();
  runcmd->add_option("--window-s", window_s);
  runcmd->add_option("--rate", rate);
  runcmd->add_option("--threshold", threshold);
  runcmd->add_option("--lockout-after", lockout_after);
  runcmd->add_option("--epsilon-cs", epsilon_cs);
  runcmd->add_option("--t-windows", t_windows);
  runcmd->add_option("--data-size", data_size);
  runcmd->add_option("--retrain-features", run_retrain,
                     "impostor pool enabling mid-stream retraining");
  runcmd->add_option("--rho", rho);
  runcmd->add_option("--out", run_out);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Cross-validated FRR/FAR");
  int folds = 10, iterations = 5;
  std::string ev_classifier = "krr";
  bool ev_ablation = false;
  std::vector<std::string> ev_features;
  std::string ev_owner;
  double min_accuracy = -1.0;
  std::string ev_out = results_dir(base) + "/evaluate.json";
  evaluate->add_option("--preset", preset, "separable|overlapping");
  evaluate->add_option("--population", population_file);
  evaluate->add_option("--users", users);
  evaluate->add_option("--seed", seed);
  evaluate->add_option("--total-s", total_s);
  evaluate->add_option("--segment-s", segment_s);
  evaluate->add_option("--window-s", window_s);
  evaluate->add_option("--rate", rate);
  evaluate->add_option("--victim", victim);
  evaluate->add_option("--folds", folds);
  evaluate->add_option("--iterations", iterations);
  evaluate->add_option("--rho", rho);
  evaluate->add_option("--classifier", ev_classifier,
                       "krr|krr_dual|linreg|naive_bayes");
  evaluate->add_flag("--ablation", ev_ablation,
                     "device-set x context-mode grid");
  evaluate->add_option("--features", ev_features)->expected(-1);
  evaluate->add_option("--owner", ev_owner);
  evaluate->add_option("--min-accuracy", min_accuracy,
                       "fail (exit 1) below this accuracy; defaults to 0.95 "
                       "for --preset separable");
  evaluate->add_option("--out", ev_out);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Window- or data-size sweep");
  std::string sweep_kind = "window", sweep_sizes;
  std::string sweep_out = results_dir(base);
  sweep->add_option("--kind", sweep_kind, "window|data")->required();
  sweep->add_option("--sizes", sweep_sizes,
                    "comma-separated sizes (seconds or window counts)");
  sweep->add_option("--preset", preset);
  sweep->add_option("--population", population_file);
  sweep->add_option("--users", users);
  sweep->add_option("--seed", seed);
  sweep->add_option("--total-s", total_s);
  sweep->add_option("--segment-s", segment_s);
  sweep->add_option("--window-s", window_s);
  sweep->add_option("--rate", rate);
  sweep->add_option("--victim", victim);
  sweep->add_option("--folds", folds);
  sweep->add_option("--iterations", iterations);
  sweep->add_option("--rho", rho);
  sweep->add_option("--out-dir", sweep_out);

  // masquerade
  auto* masq = app.add_subcommand("masquerade", "Mimicry attack evaluation");
  std::string mq_lambdas = "0,0.25,0.5,0.75,1";
  int n_attackers = 20, horizon = 12;
  std::string mq_out = results_dir(base) + "/masquerade.json";
  masq->add_option("--preset", preset);
  masq->add_option("--population", population_file);
  masq->add_option("--users", users);
  masq->add_option("--seed", seed);
  masq->add_option("--total-s", total_s);
  masq->add_option("--segment-s", segment_s);
  masq->add_option("--window-s", window_s);
  masq->add_option("--rate", rate);
  masq->add_option("--victim", victim);
  masq->add_option("--rho", rho);
  masq->add_option("--lambdas", mq_lambdas);
  masq->add_option("--attackers", n_attackers);
  masq->add_option("--horizon", horizon);
  masq->add_option("--out", mq_out);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*generate) {
      return cmd_generate(preset, users, seed, total_s, segment_s, rate,
                          window_s, gen_format, gen_out);
    }
    if (*extract) {
      return cmd_extract(ex_in, ex_truth, ex_user, window_s, rate,
                         ex_candidate, ex_out);
    }
    if (*select) {
      if (sel_out.empty()) sel_out = results_dir(base) + "/selection.json";
      fs::create_directories(fs::path(sel_out).parent_path().empty()
                                 ? "."
                                 : fs::path(sel_out).parent_path().string());
      return cmd_select(sel_features, alpha, corr_threshold, drop_rule,
                        sel_out);
    }
    if (*trainctx) {
      return cmd_train_context(ctx_features, n_trees, max_depth, min_leaf,
                               seed, ctx_out);
    }
    if (*detectctx) return cmd_detect_context(dc_model, dc_features);
    if (*trainauth) {
      const auto parent = fs::path(ta_out).parent_path();
      if (!parent.empty()) fs::create_directories(parent);
      return cmd_train_auth(ta_features, ta_owner, ta_ctx_model, rho,
                            ta_contexts, ta_solver, ta_out);
    }
    if (*runcmd) {
      return cmd_run(run_bank, run_sensors, window_s, rate, threshold,
                     lockout_after, epsilon_cs, t_windows, data_size,
                     run_retrain, rho, run_out);
    }
    if (*evaluate) {
      if (min_accuracy < 0.0) {
        min_accuracy = (ev_features.empty() && population_file.empty() &&
                        preset == "separable")
                           ? 0.95
                           : 0.0;
      }
      const auto parent = fs::path(ev_out).parent_path();
      if (!parent.empty()) fs::create_directories(parent);
      return cmd_evaluate(preset, population_file, users, seed, total_s,
                          segment_s, window_s, rate, victim, folds,
                          iterations, rho, ev_classifier, ev_ablation,
                          ev_features, ev_owner, min_accuracy, ev_out);
    }
    if (*sweep) {
      if (sweep_sizes.empty()) {
        sweep_sizes = sweep_kind == "window" ? "2,4,6,8" : "100,200,400,800";
      }
      return cmd_sweep(sweep_kind, preset, population_file, users, seed,
                       total_s, segment_s, window_s, rate, victim, folds,
                       iterations, rho, sweep_sizes, sweep_out);
    }
    if (*masq) {
      const auto parent = fs::path(mq_out).parent_path();
      if (!parent.empty()) fs::create_directories(parent);
      return cmd_masquerade(preset, population_file, users, seed, total_s,
                            segment_s, window_s, rate, victim, rho,
                            mq_lambdas, n_attackers, horizon, mq_out);
    }
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const NoModelError& e) {
    std::cerr << "no-model error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace sensauth::cli
