#include "sensauth/sensor.hpp"

#include <cmath>

namespace sensauth {

std::string_view to_string(Device d) {
  return d == Device::Phone ? "phone" : "watch";
}

std::string_view to_string(SensorKind s) {
  return s == SensorKind::Accelerometer ? "acc" : "gyr";
}

Device device_from_string(std::string_view s) {
  if (s == "phone") return Device::Phone;
  if (s == "watch") return Device::Watch;
  throw ValidationError("device: unknown value '" + std::string(s) + "'");
}

SensorKind sensor_from_string(std::string_view s) {
  if (s == "acc" || s == "accelerometer") return SensorKind::Accelerometer;
  if (s == "gyr" || s == "gyroscope") return SensorKind::Gyroscope;
  throw ValidationError("sensor: unknown value '" + std::string(s) + "'");
}

double magnitude(const SensorSample& sample) {
  if (!std::isfinite(sample.t) || !std::isfinite(sample.x) ||
      !std::isfinite(sample.y) || !std::isfinite(sample.z)) {
    throw ValidationError("sample: non-finite field");
  }
  return std::sqrt(sample.x * sample.x + sample.y * sample.y +
                   sample.z * sample.z);
}

void SensorStream::validate() const {
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
    throw ValidationError("sample_rate_hz: must be positive and finite");
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (!std::isfinite(s.t) || !std::isfinite(s.x) || !std::isfinite(s.y) ||
        !std::isfinite(s.z)) {
      throw ValidationError("samples[" + std::to_string(i) +
                            "]: non-finite field");
    }
    if (i > 0 && !(s.t > samples[i - 1].t)) {
      throw ValidationError("samples[" + std::to_string(i) +
                            "].t: timestamps must be strictly increasing");
    }
  }
}

std::vector<double> SensorStream::magnitude_series() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(magnitude(s));
  return out;
}

std::vector<Window> segment(const SensorStream& stream, double duration_s,
                            double hop_s) {
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) {
    throw ValidationError("duration_s: must be positive and finite");
  }
  stream.validate();

  const auto n = static_cast<std::size_t>(
      std::llround(duration_s * stream.sample_rate_hz));
  if (n == 0) {
    throw ValidationError("duration_s: shorter than one sample period");
  }
  std::size_t hop = n;
  if (hop_s > 0.0) {
    hop = static_cast<std::size_t>(std::llround(hop_s * stream.sample_rate_hz));
    if (hop == 0) throw ValidationError("hop_s: shorter than one sample period");
  }

  std::vector<Window> windows;
  const auto total = stream.samples.size();
  std::size_t k = 0;
  for (std::size_t begin = 0; begin + n <= total; begin += hop, ++k) {
    Window w;
    w.index_k = k;
    w.duration_s = duration_s;
    w.start_t = stream.samples[begin].t;
    w.magnitudes.reserve(n);
    for (std::size_t i = begin; i < begin + n; ++i) {
      w.magnitudes.push_back(magnitude(stream.samples[i]));
      if (i > begin) {
        w.max_dt =
            std::max(w.max_dt, stream.samples[i].t - stream.samples[i - 1].t);
      }
    }
    windows.push_back(std::move(w));
  }
  return windows;
}

}  // namespace sensauth
