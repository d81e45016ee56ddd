#include "sensauth/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <fstream>

namespace sensauth {

std::string_view to_string(DeviceSet d) {
  return d == DeviceSet::PhoneOnly ? "phone" : "phone_watch";
}

DeviceSet device_set_from_string(std::string_view s) {
  if (s == "phone") return DeviceSet::PhoneOnly;
  if (s == "phone_watch") return DeviceSet::PhoneAndWatch;
  throw ValidationError("device_set: unknown value '" + std::string(s) + "'");
}

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::Lockout: return "lockout";
    case EventKind::Reinstated: return "reinstated";
    case EventKind::RetrainTrigger: return "retrain_trigger";
    case EventKind::RetrainCompleted: return "retrain_completed";
    case EventKind::RetrainDeferred: return "retrain_deferred";
    case EventKind::WindowGap: return "window_gap";
  }
  return "?";
}

void ResponsePolicy::validate() const {
  if (lockout_after_rejections < 1) {
    throw ValidationError("lockout_after_rejections: must be >= 1");
  }
}

void RetrainConfig::validate() const {
  if (!(epsilon_cs > 0.0)) throw ValidationError("epsilon_cs: must be > 0");
  if (t_windows < 1) throw ValidationError("t_windows: must be >= 1");
  if (data_size < 2) throw ValidationError("data_size: must be >= 2");
}

void ModelBank::validate() const {
  for (DeviceSet d : {DeviceSet::PhoneOnly, DeviceSet::PhoneAndWatch}) {
    if (find(ContextLabel::Stationary, d) != nullptr &&
        find(ContextLabel::Moving, d) != nullptr) {
      return;
    }
  }
  throw ValidationError(
      "models: need both contexts for at least one device set");
}

const AuthModel* ModelBank::find(ContextLabel c, DeviceSet d) const {
  const auto it = models.find(BankKey{c, d});
  return it == models.end() ? nullptr : &it->second;
}

namespace {

constexpr int kBankSchemaVersion = 1;

}  // namespace

std::string ModelBank::to_json_string() const {
  nlohmann::json j;
  j["schema_version"] = kBankSchemaVersion;
  j["type"] = "model_bank";
  j["owner_id"] = owner_id;
  j["version"] = version;
  j["context_model"] = nlohmann::json::parse(detector.to_json_string());
  nlohmann::json ms = nlohmann::json::array();
  for (const auto& [key, model] : models) {
    ms.push_back({{"context", std::string(to_string(key.context))},
                  {"device_set", std::string(to_string(key.device_set))},
                  {"model", nlohmann::json::parse(model.to_json_string())}});
  }
  j["models"] = std::move(ms);
  nlohmann::json ar = nlohmann::json::array();
  for (const auto& [ver, model] : archived) {
    ar.push_back({{"bank_version", ver},
                  {"model", nlohmann::json::parse(model.to_json_string())}});
  }
  j["archived"] = std::move(ar);
  return j.dump();
}

ModelBank ModelBank::from_json_string(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const int version = j.at("schema_version").get<int>();
  if (version > kBankSchemaVersion) {
    throw ValidationError("schema_version: bank written by a newer major (" +
                          std::to_string(version) + ")");
  }
  if (j.at("type").get<std::string>() != "model_bank") {
    throw ValidationError("type: expected model_bank");
  }
  ModelBank bank;
  bank.owner_id = j.at("owner_id").get<std::string>();
  bank.version = j.at("version").get<int>();
  bank.detector = ContextDetector::from_json_string(j.at("context_model").dump());
  for (const auto& entry : j.at("models")) {
    BankKey key{context_from_string(entry.at("context").get<std::string>()),
                device_set_from_string(entry.at("device_set").get<std::string>())};
    bank.models.emplace(key,
                        AuthModel::from_json_string(entry.at("model").dump()));
  }
  for (const auto& entry : j.value("archived", nlohmann::json::array())) {
    bank.archived.emplace_back(
        entry.at("bank_version").get<int>(),
        AuthModel::from_json_string(entry.at("model").dump()));
  }
  return bank;
}

void ModelBank::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ValidationError("path: cannot open '" + path + "' for write");
  out << to_json_string() << "\n";
}

ModelBank ModelBank::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("path: cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json_string(text);
}

Decision authenticate_window(const ModelBank& bank, const WindowBundle& bundle,
                             const PipelineConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();

  if (bundle.phone_acc.index_k != bundle.phone_gyr.index_k) {
    throw ValidationError("bundle: phone window indices disagree");
  }
  const bool watch_present =
      bundle.watch_acc.has_value() && bundle.watch_gyr.has_value();
  if (watch_present &&
      (bundle.watch_acc->index_k != bundle.phone_acc.index_k ||
       bundle.watch_gyr->index_k != bundle.phone_acc.index_k)) {
    throw ValidationError("bundle: watch window indices disagree");
  }

  const FeatureVector phone14 =
      device_features(bundle.phone_acc, bundle.phone_gyr,
                      config.sample_rate_hz, Device::Phone);
  const ContextDecision ctx = bank.detector.detect(phone14);

  const AuthModel* model = nullptr;
  DeviceSet ds = DeviceSet::PhoneOnly;
  Eigen::VectorXd x;
  if (watch_present) {
    if (const AuthModel* m = bank.find(ctx.label, DeviceSet::PhoneAndWatch)) {
      model = m;
      ds = DeviceSet::PhoneAndWatch;
      const FeatureVector watch14 =
          device_features(*bundle.watch_acc, *bundle.watch_gyr,
                          config.sample_rate_hz, Device::Watch);
      x = auth_vector(phone14, watch14).values;
    }
  }
  if (model == nullptr) {
    model = bank.find(ctx.label, DeviceSet::PhoneOnly);
    if (model == nullptr) {
      throw NoModelError("no model for context '" +
                         std::string(to_string(ctx.label)) +
                         "' with the available device set");
    }
    ds = DeviceSet::PhoneOnly;
    x = phone14.values;
  }

  Decision d;
  d.k = bundle.phone_acc.index_k;
  d.context = ctx.label;
  d.cs = model->score(x);
  d.accept = d.cs > config.threshold;
  d.device_set = ds;
  d.latency_ms = std::chrono::duration<double, std::milli>(
                     std::chrono::steady_clock::now() - t0)
                     .count();
  return d;
}

ModelBank retrain(const ModelBank& bank,
                  const std::map<BankKey, Eigen::MatrixXd>& recent_legit,
                  const RetrainSource& source) {
  ModelBank next = bank;
  bool any = false;
  for (const auto& [key, legit] : recent_legit) {
    const AuthModel* old = bank.find(key.context, key.device_set);
    const auto imp_it = source.impostors.find(key);
    if (old == nullptr || imp_it == source.impostors.end()) continue;
    if (legit.cols() < 2 || imp_it->second.cols() < 1) continue;

    AuthModel fresh = fit_auth_model(legit, imp_it->second, source.rho,
                                     key.context, old->layout);
    fresh.meta.version = old->meta.version + 1;

    next.archived.emplace_back(bank.version, *old);
    next.models[key] = std::move(fresh);
    any = true;
  }
  if (any) ++next.version;
  return next;
}

std::optional<std::size_t> monitor_cs(std::span<const Decision> decisions,
                                      const RetrainConfig& config) {
  config.validate();
  const auto t = static_cast<std::size_t>(config.t_windows);
  if (decisions.size() < t) return std::nullopt;
  for (std::size_t i = decisions.size() - t; i < decisions.size(); ++i) {
    const double cs = decisions[i].cs;
    if (!(cs > 0.0 && cs < config.epsilon_cs)) return std::nullopt;
  }
  return decisions.back().k;
}

RunResult run_stream(const ModelBank& bank, const UserData& streams,
                     const RunOptions& options, const RetrainSource* source,
                     const ReinstateHook& reinstate) {
  options.policy.validate();
  options.retrain.validate();
  bank.validate();

  const auto phone_acc = segment(streams.phone.acc, options.pipeline.window_s);
  const auto phone_gyr = segment(streams.phone.gyr, options.pipeline.window_s);
  const auto watch_acc = segment(streams.watch.acc, options.pipeline.window_s);
  const auto watch_gyr = segment(streams.watch.gyr, options.pipeline.window_s);

  const std::size_t n_windows = std::min(phone_acc.size(), phone_gyr.size());
  const std::size_t n_watch = std::min(watch_acc.size(), watch_gyr.size());
  const double nominal_dt = 1.0 / options.pipeline.sample_rate_hz;
  const double max_dt = options.pipeline.gap_factor * nominal_dt;

  RunResult result;
  result.bank = bank;

  int consecutive_rejects = 0;
  int cs_run = 0;  // consecutive decisions with 0 < CS < epsilon
  std::map<BankKey, std::deque<Eigen::VectorXd>> recent;

  for (std::size_t k = 0; k < n_windows; ++k) {
    WindowBundle bundle{phone_acc[k], phone_gyr[k], std::nullopt, std::nullopt};
    if (k < n_watch) {
      bundle.watch_acc = watch_acc[k];
      bundle.watch_gyr = watch_gyr[k];
    }

    double window_gap = std::max(bundle.phone_acc.max_dt,
                                 bundle.phone_gyr.max_dt);
    if (bundle.watch_acc) {
      window_gap = std::max({window_gap, bundle.watch_acc->max_dt,
                             bundle.watch_gyr->max_dt});
    }
    if (window_gap > max_dt) {
      result.events.push_back({EventKind::WindowGap, k,
                               "max sample gap " + std::to_string(window_gap) +
                                   " s"});
      continue;
    }

    const Decision d =
        authenticate_window(result.bank, bundle, options.pipeline);
    result.decisions.push_back(d);

    if (d.accept) {
      consecutive_rejects = 0;
      // Accepted vectors feed the retraining buffer.
      const BankKey key{d.context, d.device_set};
      auto& buf = recent[key];
      const FeatureVector phone14 =
          device_features(bundle.phone_acc, bundle.phone_gyr,
                          options.pipeline.sample_rate_hz, Device::Phone);
      if (d.device_set == DeviceSet::PhoneAndWatch) {
        const FeatureVector watch14 =
            device_features(*bundle.watch_acc, *bundle.watch_gyr,
                            options.pipeline.sample_rate_hz, Device::Watch);
        buf.push_back(auth_vector(phone14, watch14).values);
      } else {
        buf.push_back(phone14.values);
      }
      while (buf.size() > static_cast<std::size_t>(options.retrain.data_size)) {
        buf.pop_front();
      }
    } else {
      ++consecutive_rejects;
      if (consecutive_rejects >= options.policy.lockout_after_rejections) {
        result.events.push_back({EventKind::Lockout, k, ""});
        if (reinstate && reinstate(k)) {
          result.events.push_back({EventKind::Reinstated, k, ""});
          consecutive_rejects = 0;
        } else {
          break;
        }
      }
    }

    const bool in_band = d.cs > 0.0 && d.cs < options.retrain.epsilon_cs;
    cs_run = in_band ? cs_run + 1 : 0;
    if (cs_run >= options.retrain.t_windows) {
      cs_run = 0;
      result.events.push_back({EventKind::RetrainTrigger, k, ""});
      if (source != nullptr) {
        std::map<BankKey, Eigen::MatrixXd> ready;
        for (const auto& [key, buf] : recent) {
          if (buf.size() < static_cast<std::size_t>(options.retrain.data_size)) {
            continue;
          }
          Eigen::MatrixXd m(buf.front().size(),
                            static_cast<Eigen::Index>(buf.size()));
          Eigen::Index col = 0;
          for (const auto& v : buf) m.col(col++) = v;
          ready.emplace(key, std::move(m));
        }
        if (ready.empty()) {
          result.events.push_back(
              {EventKind::RetrainDeferred, k, "insufficient recent data"});
        } else {
          result.bank = retrain(result.bank, ready, *source);
          ++result.retrain_count;
          result.events.push_back({EventKind::RetrainCompleted, k, ""});
        }
      } else {
        result.events.push_back(
            {EventKind::RetrainDeferred, k, "no retrain source"});
      }
    }
  }
  return result;
}

}  // namespace sensauth
