#pragma once

#include <compare>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sensauth/context.hpp"
#include "sensauth/krr.hpp"
#include "sensauth/synth.hpp"

namespace sensauth {

enum class DeviceSet { PhoneOnly = 0, PhoneAndWatch = 1 };
std::string_view to_string(DeviceSet d);
DeviceSet device_set_from_string(std::string_view s);

struct BankKey {
  ContextLabel context = ContextLabel::Stationary;
  DeviceSet device_set = DeviceSet::PhoneOnly;
  auto operator<=>(const BankKey&) const = default;
};

// Thrown when no authentication model exists for the (context, device-set)
// in effect; a window is never silently accepted.
class NoModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Per-user model collection: one shared context detector plus per
// (context, device-set) authenticators. Immutable between retrains;
// retraining produces a new bank with version + 1 and the replaced models
// archived.
struct ModelBank {
  std::string owner_id;
  int version = 1;
  ContextDetector detector;
  std::map<BankKey, AuthModel> models;
  std::vector<std::pair<int, AuthModel>> archived;  // (bank version, model)

  void validate() const;  // both contexts present for >= 1 device set
  const AuthModel* find(ContextLabel c, DeviceSet d) const;

  std::string to_json_string() const;
  static ModelBank from_json_string(const std::string& text);
  void save(const std::string& path) const;
  static ModelBank load(const std::string& path);
};

struct PipelineConfig {
  double window_s = 6.0;
  double sample_rate_hz = 50.0;
  double threshold = 0.0;   // accept iff CS > threshold
  double gap_factor = 3.0;  // skip windows whose max dt exceeds this x nominal
};

struct Decision {
  std::size_t k = 0;
  ContextLabel context = ContextLabel::Stationary;
  double cs = 0.0;
  bool accept = false;
  DeviceSet device_set = DeviceSet::PhoneOnly;
  double latency_ms = 0.0;  // wall time; excluded from determinism comparisons
};

enum class ResponseAction { Lock = 0, DenySensitive = 1, Log = 2 };

struct ResponsePolicy {
  int lockout_after_rejections = 1;
  ResponseAction action = ResponseAction::Lock;

  void validate() const;
};

struct RetrainConfig {
  double epsilon_cs = 0.2;  // retrain band is 0 < CS < epsilon_cs
  int t_windows = 100;      // consecutive windows in band to trigger
  int data_size = 800;      // vectors per (context, device-set) for a retrain

  void validate() const;
};

enum class EventKind {
  Lockout = 0,
  Reinstated,
  RetrainTrigger,
  RetrainCompleted,
  RetrainDeferred,
  WindowGap,
};
std::string_view to_string(EventKind k);

struct StreamEvent {
  EventKind kind = EventKind::Lockout;
  std::size_t k = 0;
  std::string detail;
};

struct WindowBundle {
  Window phone_acc;
  Window phone_gyr;
  std::optional<Window> watch_acc;
  std::optional<Window> watch_gyr;
};

// One full authentication step: context detection on the phone vector, then
// the matching model scores the 14- or 28-dim auth vector. Prefers the
// PhoneAndWatch model when watch data is present, falls back to PhoneOnly
// (for the data or the model being absent), and throws NoModelError when
// neither applies.
Decision authenticate_window(const ModelBank& bank, const WindowBundle& bundle,
                             const PipelineConfig& config);

// Impostor pool for retraining, keyed like the bank.
struct RetrainSource {
  std::map<BankKey, Eigen::MatrixXd> impostors;  // columns are raw vectors
  double rho = 1.0;
};

// Retrains every key present in recent_legit that has a bank model and an
// impostor pool; other models are kept. Old models are archived under the
// outgoing bank version.
ModelBank retrain(const ModelBank& bank,
                  const std::map<BankKey, Eigen::MatrixXd>& recent_legit,
                  const RetrainSource& source);

// Pure form of the retrain monitor: fires iff the latest t_windows decisions
// all have confidence in (0, epsilon_cs). A rejected window (CS <= 0) breaks
// the run, so impostors cannot trigger retraining.
std::optional<std::size_t> monitor_cs(std::span<const Decision> decisions,
                                      const RetrainConfig& config);

using ReinstateHook = std::function<bool(std::size_t window_k)>;

struct RunOptions {
  PipelineConfig pipeline;
  ResponsePolicy policy;
  RetrainConfig retrain;
};

struct RunResult {
  std::vector<Decision> decisions;
  std::vector<StreamEvent> events;
  ModelBank bank;  // final bank (retrains applied)
  int retrain_count = 0;
};

// Processes windows strictly in index order. Consecutive rejections trigger
// the lockout policy (the reject counter resets on any accept); processing
// stops at an un-reinstated lockout. Windows containing recording gaps are
// skipped with an event. When source is provided, the CS monitor can
// retrain mid-stream; the new bank takes effect at the next window boundary.
RunResult run_stream(const ModelBank& bank, const UserData& streams,
                     const RunOptions& options,
                     const RetrainSource* source = nullptr,
                     const ReinstateHook& reinstate = nullptr);

}  // namespace sensauth
