#include "sensauth/features.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>

namespace sensauth {

std::string_view feature_name(FeatureId f) {
  switch (f) {
    case FeatureId::Mean: return "mean";
    case FeatureId::Var: return "var";
    case FeatureId::Max: return "max";
    case FeatureId::Min: return "min";
    case FeatureId::Ran: return "ran";
    case FeatureId::Peak: return "peak";
    case FeatureId::PeakF: return "peak_f";
    case FeatureId::Peak2: return "peak2";
    case FeatureId::Peak2F: return "peak2_f";
  }
  return "?";
}

double WindowFeatures::get(FeatureId f) const {
  switch (f) {
    case FeatureId::Mean: return mean;
    case FeatureId::Var: return var;
    case FeatureId::Max: return max;
    case FeatureId::Min: return min;
    case FeatureId::Ran: return ran;
    case FeatureId::Peak: return peak;
    case FeatureId::PeakF: return peak_f;
    case FeatureId::Peak2: return peak2;
    case FeatureId::Peak2F: return peak2_f;
  }
  return 0.0;
}

TimeFeatures time_features(const Window& window) {
  const auto& m = window.magnitudes;
  if (m.empty()) throw ValidationError("window: empty magnitude series");

  TimeFeatures tf;
  double sum = 0.0;
  tf.max = m.front();
  tf.min = m.front();
  for (double v : m) {
    sum += v;
    tf.max = std::max(tf.max, v);
    tf.min = std::min(tf.min, v);
  }
  tf.mean = sum / static_cast<double>(m.size());
  double ss = 0.0;
  for (double v : m) {
    const double d = v - tf.mean;
    ss += d * d;
  }
  tf.var = ss / static_cast<double>(m.size());
  tf.ran = tf.max - tf.min;
  return tf;
}

std::vector<SpectrumBin> spectrum(const Window& window,
                                  double sample_rate_hz) {
  const auto& m = window.magnitudes;
  if (m.size() < 2) throw ValidationError("window: need at least 2 samples");
  if (!(sample_rate_hz > 0.0)) {
    throw ValidationError("sample_rate_hz: must be positive");
  }

  const std::size_t n = m.size();
  std::vector<std::complex<double>> coeffs;
  Eigen::FFT<double> fft;
  fft.fwd(coeffs, m);

  double linf = 0.0;
  for (double v : m) linf = std::max(linf, std::abs(v));
  const double floor_amp = 1e-12 * linf;

  std::vector<SpectrumBin> bins;
  bins.reserve(n / 2);
  const double scale = 2.0 / static_cast<double>(n);
  for (std::size_t k = 1; k <= n / 2; ++k) {
    double amp = scale * std::abs(coeffs[k]);
    if (amp < floor_amp) amp = 0.0;
    bins.push_back({static_cast<double>(k) * sample_rate_hz /
                        static_cast<double>(n),
                    amp});
  }
  return bins;
}

FreqFeatures freq_features(std::span<const SpectrumBin> spec) {
  if (spec.empty()) throw ValidationError("spectrum: empty");

  // Bins arrive frequency-ascending, so a strict '>' keeps the lower
  // frequency on ties.
  std::size_t best = 0;
  for (std::size_t i = 1; i < spec.size(); ++i) {
    if (spec[i].amplitude > spec[best].amplitude) best = i;
  }
  std::size_t second = best == 0 ? 1 : 0;
  if (spec.size() == 1) second = best;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (i == best) continue;
    if (spec[i].amplitude > spec[second].amplitude) second = i;
  }

  FreqFeatures ff;
  ff.peak = spec[best].amplitude;
  ff.peak_f = spec[best].frequency_hz;
  ff.peak2 = spec[second].amplitude;
  ff.peak2_f = spec[second].frequency_hz;
  return ff;
}

WindowFeatures window_features(const Window& window, double sample_rate_hz) {
  const TimeFeatures tf = time_features(window);
  const auto spec = spectrum(window, sample_rate_hz);
  const FreqFeatures ff = freq_features(spec);
  return {tf.mean, tf.var, tf.max,   tf.min,    tf.ran,
          ff.peak, ff.peak_f, ff.peak2, ff.peak2_f};
}

std::string SlotDesc::name() const {
  std::string out(to_string(device));
  out += '_';
  out += to_string(sensor);
  out += '_';
  out += feature_name(feature);
  return out;
}

namespace {

std::vector<SlotDesc> device_slots(Device d, std::span<const FeatureId> set) {
  std::vector<SlotDesc> slots;
  for (SensorKind s : {SensorKind::Accelerometer, SensorKind::Gyroscope}) {
    for (FeatureId f : set) slots.push_back({d, s, f});
  }
  return slots;
}

std::vector<SlotDesc> concat(std::vector<SlotDesc> a,
                             const std::vector<SlotDesc>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

FeatureLayout make_layout(LayoutKind kind) {
  switch (kind) {
    case LayoutKind::Phone14:
      return {kind, device_slots(Device::Phone, kProductionFeatures)};
    case LayoutKind::Watch14:
      return {kind, device_slots(Device::Watch, kProductionFeatures)};
    case LayoutKind::Combined28:
      return {kind, concat(device_slots(Device::Phone, kProductionFeatures),
                           device_slots(Device::Watch, kProductionFeatures))};
    case LayoutKind::PhoneCandidate18:
      return {kind, device_slots(Device::Phone, kCandidateFeatures)};
    case LayoutKind::WatchCandidate18:
      return {kind, device_slots(Device::Watch, kCandidateFeatures)};
    case LayoutKind::CombinedCandidate36:
      return {kind, concat(device_slots(Device::Phone, kCandidateFeatures),
                           device_slots(Device::Watch, kCandidateFeatures))};
  }
  throw ValidationError("layout: unknown kind");
}

}  // namespace

const FeatureLayout& FeatureLayout::of(LayoutKind kind) {
  static const std::map<LayoutKind, FeatureLayout> layouts = [] {
    std::map<LayoutKind, FeatureLayout> m;
    for (LayoutKind k :
         {LayoutKind::Phone14, LayoutKind::Watch14, LayoutKind::Combined28,
          LayoutKind::PhoneCandidate18, LayoutKind::WatchCandidate18,
          LayoutKind::CombinedCandidate36}) {
      m.emplace(k, make_layout(k));
    }
    return m;
  }();
  return layouts.at(kind);
}

const FeatureLayout& FeatureLayout::device14(Device d) {
  return of(d == Device::Phone ? LayoutKind::Phone14 : LayoutKind::Watch14);
}

const FeatureLayout& FeatureLayout::combined28() {
  return of(LayoutKind::Combined28);
}

const FeatureLayout& FeatureLayout::candidate18(Device d) {
  return of(d == Device::Phone ? LayoutKind::PhoneCandidate18
                               : LayoutKind::WatchCandidate18);
}

const FeatureLayout& FeatureLayout::candidate36() {
  return of(LayoutKind::CombinedCandidate36);
}

std::vector<std::string> FeatureLayout::names() const {
  std::vector<std::string> out;
  out.reserve(slots_.size());
  for (const auto& s : slots_) out.push_back(s.name());
  return out;
}

namespace {

FeatureVector assemble(const Window& acc, const Window& gyr, double rate,
                       Device device, std::span<const FeatureId> set,
                       LayoutKind kind) {
  if (acc.index_k != gyr.index_k) {
    throw ValidationError("window.index_k: accelerometer and gyroscope "
                          "windows must share the same index");
  }
  const WindowFeatures wf_acc = window_features(acc, rate);
  const WindowFeatures wf_gyr = window_features(gyr, rate);

  FeatureVector v;
  v.layout = kind;
  v.values.resize(static_cast<Eigen::Index>(2 * set.size()));
  Eigen::Index i = 0;
  for (FeatureId f : set) v.values[i++] = wf_acc.get(f);
  for (FeatureId f : set) v.values[i++] = wf_gyr.get(f);
  (void)device;
  return v;
}

}  // namespace

FeatureVector device_features(const Window& acc, const Window& gyr,
                              double sample_rate_hz, Device device) {
  return assemble(acc, gyr, sample_rate_hz, device, kProductionFeatures,
                  device == Device::Phone ? LayoutKind::Phone14
                                          : LayoutKind::Watch14);
}

FeatureVector candidate_features(const Window& acc, const Window& gyr,
                                 double sample_rate_hz, Device device) {
  return assemble(acc, gyr, sample_rate_hz, device, kCandidateFeatures,
                  device == Device::Phone ? LayoutKind::PhoneCandidate18
                                          : LayoutKind::WatchCandidate18);
}

FeatureVector auth_vector(const FeatureVector& phone,
                          const std::optional<FeatureVector>& watch) {
  if (phone.layout != LayoutKind::Phone14 ||
      phone.values.size() != static_cast<Eigen::Index>(
                                 FeatureLayout::of(phone.layout).dim())) {
    throw ValidationError("phone: expected a 14-dim phone feature vector");
  }
  if (!watch.has_value()) return phone;
  if (watch->layout != LayoutKind::Watch14 ||
      watch->values.size() != static_cast<Eigen::Index>(
                                  FeatureLayout::of(watch->layout).dim())) {
    throw ValidationError("watch: expected a 14-dim watch feature vector");
  }
  FeatureVector v;
  v.layout = LayoutKind::Combined28;
  v.values.resize(phone.values.size() + watch->values.size());
  v.values << phone.values, watch->values;
  return v;
}

}  // namespace sensauth
