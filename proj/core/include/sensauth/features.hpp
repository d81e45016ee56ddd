#pragma once

#include <Eigen/Core>
#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sensauth/sensor.hpp"

namespace sensauth {

enum class FeatureId {
  Mean = 0,
  Var,
  Max,
  Min,
  Ran,
  Peak,
  PeakF,
  Peak2,
  Peak2F,
};

std::string_view feature_name(FeatureId f);

// Production per-sensor subset: the candidate set minus Ran and Peak2_f,
// which the selection analysis flags as redundant / non-discriminative.
inline constexpr std::array<FeatureId, 7> kProductionFeatures = {
    FeatureId::Mean, FeatureId::Var,   FeatureId::Max,  FeatureId::Min,
    FeatureId::Peak, FeatureId::PeakF, FeatureId::Peak2};

inline constexpr std::array<FeatureId, 9> kCandidateFeatures = {
    FeatureId::Mean,  FeatureId::Var,   FeatureId::Max,
    FeatureId::Min,   FeatureId::Ran,   FeatureId::Peak,
    FeatureId::PeakF, FeatureId::Peak2, FeatureId::Peak2F};

struct TimeFeatures {
  double mean = 0.0;
  double var = 0.0;  // population variance (divide by n)
  double max = 0.0;
  double min = 0.0;
  double ran = 0.0;  // max - min
};

struct SpectrumBin {
  double frequency_hz = 0.0;
  double amplitude = 0.0;
};

struct FreqFeatures {
  double peak = 0.0;
  double peak_f = 0.0;
  double peak2 = 0.0;
  double peak2_f = 0.0;
};

// All nine per-window statistics of one sensor stream.
struct WindowFeatures {
  double mean = 0.0, var = 0.0, max = 0.0, min = 0.0, ran = 0.0;
  double peak = 0.0, peak_f = 0.0, peak2 = 0.0, peak2_f = 0.0;
  double get(FeatureId f) const;
};

TimeFeatures time_features(const Window& window);

// DFT amplitudes for bins in (0, Nyquist]; DC excluded. amplitude =
// 2/n * |coefficient|. Amplitudes below 1e-12 * max|magnitude| snap to exact
// zero so constant windows produce an exactly-zero spectrum.
std::vector<SpectrumBin> spectrum(const Window& window, double sample_rate_hz);

// Largest and second-largest amplitude bins; ties resolve to the lower
// frequency.
FreqFeatures freq_features(std::span<const SpectrumBin> spec);

WindowFeatures window_features(const Window& window, double sample_rate_hz);

enum class LayoutKind {
  Phone14 = 0,
  Watch14,
  Combined28,
  PhoneCandidate18,
  WatchCandidate18,
  CombinedCandidate36,
};

struct SlotDesc {
  Device device;
  SensorKind sensor;
  FeatureId feature;
  std::string name() const;  // e.g. "phone_acc_mean"
};

// Ordered slot descriptors for one of the canonical vector shapes. Per
// device, slots run accelerometer block then gyroscope block, each block in
// production (or candidate) feature order.
class FeatureLayout {
 public:
  static const FeatureLayout& of(LayoutKind kind);
  static const FeatureLayout& device14(Device d);
  static const FeatureLayout& combined28();
  static const FeatureLayout& candidate18(Device d);
  static const FeatureLayout& candidate36();

  LayoutKind kind() const { return kind_; }
  std::size_t dim() const { return slots_.size(); }
  std::span<const SlotDesc> slots() const { return slots_; }
  std::vector<std::string> names() const;

  FeatureLayout(LayoutKind kind, std::vector<SlotDesc> slots)
      : kind_(kind), slots_(std::move(slots)) {}

 private:
  LayoutKind kind_;
  std::vector<SlotDesc> slots_;
};

struct FeatureVector {
  LayoutKind layout = LayoutKind::Phone14;
  Eigen::VectorXd values;

  const FeatureLayout& layout_ref() const { return FeatureLayout::of(layout); }
};

// 14-dim production vector for one device: [acc 7 | gyr 7]. The two windows
// must carry the same index k.
FeatureVector device_features(const Window& acc, const Window& gyr,
                              double sample_rate_hz, Device device);

// 18-dim candidate vector (all nine features per sensor) for selection work.
FeatureVector candidate_features(const Window& acc, const Window& gyr,
                                 double sample_rate_hz, Device device);

// [phone | watch] when the watch vector is present, else the phone vector
// unchanged. Layouts are validated.
FeatureVector auth_vector(const FeatureVector& phone,
                          const std::optional<FeatureVector>& watch);

}  // namespace sensauth
