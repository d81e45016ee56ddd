#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sensauth/context.hpp"
#include "sensauth/sensor.hpp"

namespace sensauth {

// Sinusoid-plus-noise motion model for one (device, sensor, context) cell:
// s(t) = offset + A1 sin(2 pi f t + p1) + A2 sin(4 pi f t + p2) + noise.
// This is an analytically tractable stand-in for real gait data (known
// ground-truth peak frequencies), with no claim of physiological realism.
struct MotionParams {
  double gait_freq_hz = 1.5;
  double amp_primary = 0.0;
  double amp_secondary = 0.0;  // at twice the gait frequency
  double phase_primary = 0.0;
  double phase_secondary = 0.0;
  double offset = 0.0;
  double noise_std = 0.0;

  void validate(double nyquist_hz) const;
};

struct UserProfile {
  std::string user_id;
  std::uint64_t seed = 0;
  // indexed [device][sensor][context]
  std::array<std::array<std::array<MotionParams, 2>, 2>, 2> params{};

  const MotionParams& motion(Device d, SensorKind s, ContextLabel c) const;
  MotionParams& motion(Device d, SensorKind s, ContextLabel c);
};

// Ordered (context, duration) segments of one recording session.
struct SessionScript {
  std::vector<std::pair<ContextLabel, double>> segments;

  static SessionScript constant(ContextLabel c, double total_s);
  // Alternating stationary/moving segments, stationary first.
  static SessionScript alternating(double total_s, double segment_s);

  double total_s() const;
  ContextLabel context_at(double t) const;
  void validate() const;
};

struct DeviceStreams {
  SensorStream acc;
  SensorStream gyr;
};

struct UserData {
  DeviceStreams phone;
  DeviceStreams watch;
};

// Deterministic given profile.seed: the four streams use independent noise
// substreams derived from it.
UserData generate_user(const UserProfile& profile, const SessionScript& script,
                       double sample_rate_hz);

// Ground-truth context per window index (label taken at the window's first
// sample), matching segment() boundaries.
std::vector<ContextLabel> window_truth(const SessionScript& script,
                                       double duration_s,
                                       double sample_rate_hz);

// Mimicry blend: every motion parameter moves to
// (1 - lambda) * attacker + lambda * victim; the noise realization (seed)
// stays the attacker's.
UserProfile blend_profiles(const UserProfile& attacker,
                           const UserProfile& victim, double lambda);

// Convenience wrapper: streams of an attacker imitating the victim with the
// given fidelity.
UserData inject_mimicry(const UserProfile& attacker, const UserProfile& victim,
                        double lambda, const SessionScript& script,
                        double sample_rate_hz);

// Population presets. Separable spreads user parameters far apart (phone
// parameters deliberately collide for user pairs so the watch adds
// information); Overlapping pushes all users close together.
enum class Preset { Separable = 0, Overlapping = 1 };
Preset preset_from_string(std::string_view s);
std::string_view to_string(Preset p);

std::vector<UserProfile> make_population(Preset preset, int n_users,
                                         std::uint64_t seed);

// Profile persistence, so attack and sweep runs can reuse a generated
// population.
std::string population_to_json_string(const std::vector<UserProfile>& users);
std::vector<UserProfile> population_from_json_string(const std::string& text);

}  // namespace sensauth
