#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sensauth {

// Thrown when an input violates a documented precondition. The message names
// the offending field.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Device { Phone = 0, Watch = 1 };
enum class SensorKind { Accelerometer = 0, Gyroscope = 1 };

std::string_view to_string(Device d);
std::string_view to_string(SensorKind s);
Device device_from_string(std::string_view s);
SensorKind sensor_from_string(std::string_view s);

// One tri-axial reading. Units: m/s^2 for accelerometer, rad/s for gyroscope,
// t in seconds.
struct SensorSample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

// m = sqrt(x^2 + y^2 + z^2). Throws ValidationError on non-finite input.
double magnitude(const SensorSample& sample);

struct SensorStream {
  Device device = Device::Phone;
  SensorKind sensor = SensorKind::Accelerometer;
  double sample_rate_hz = 50.0;
  std::vector<SensorSample> samples;

  // Checks rate > 0, finite fields, timestamps strictly increasing.
  void validate() const;

  std::vector<double> magnitude_series() const;
};

// Fixed-duration segment of per-sample magnitudes. max_dt tracks the largest
// timestamp step inside the window so downstream stages can detect recording
// gaps without going back to the raw stream.
struct Window {
  std::size_t index_k = 0;
  double duration_s = 6.0;
  double start_t = 0.0;
  double max_dt = 0.0;
  std::vector<double> magnitudes;
};

// Segments a stream into consecutive windows of round(duration_s * rate)
// samples. hop_s <= 0 means hop = duration (non-overlapping). A trailing
// partial window is discarded. Empty stream yields an empty result;
// duration_s <= 0 is a ValidationError.
std::vector<Window> segment(const SensorStream& stream, double duration_s,
                            double hop_s = 0.0);

}  // namespace sensauth
