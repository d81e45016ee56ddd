#include "sensauth/synth.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

#include "sensauth/rng.hpp"

namespace sensauth {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
// Fixed unit embedding of the scalar motion signal into the three axes;
// exact: (2/3)^2 + (1/3)^2 + (2/3)^2 = 1.
constexpr double kDirX = 2.0 / 3.0;
constexpr double kDirY = 1.0 / 3.0;
constexpr double kDirZ = 2.0 / 3.0;

}  // namespace

void MotionParams::validate(double nyquist_hz) const {
  if (!(gait_freq_hz > 0.0) || !(gait_freq_hz < nyquist_hz)) {
    throw ValidationError("gait_freq_hz: must lie in (0, nyquist)");
  }
  if (amp_primary < 0.0 || amp_secondary < 0.0) {
    throw ValidationError("amplitude: must be >= 0");
  }
  if (noise_std < 0.0) throw ValidationError("noise_std: must be >= 0");
}

const MotionParams& UserProfile::motion(Device d, SensorKind s,
                                        ContextLabel c) const {
  return params[static_cast<std::size_t>(d)][static_cast<std::size_t>(s)]
               [static_cast<std::size_t>(c)];
}

MotionParams& UserProfile::motion(Device d, SensorKind s, ContextLabel c) {
  return params[static_cast<std::size_t>(d)][static_cast<std::size_t>(s)]
               [static_cast<std::size_t>(c)];
}

SessionScript SessionScript::constant(ContextLabel c, double total_s) {
  return {{{c, total_s}}};
}

SessionScript SessionScript::alternating(double total_s, double segment_s) {
  SessionScript script;
  ContextLabel c = ContextLabel::Stationary;
  for (double used = 0.0; used + 1e-9 < total_s; used += segment_s) {
    script.segments.emplace_back(c, std::min(segment_s, total_s - used));
    c = c == ContextLabel::Stationary ? ContextLabel::Moving
                                      : ContextLabel::Stationary;
  }
  return script;
}

double SessionScript::total_s() const {
  double t = 0.0;
  for (const auto& [c, d] : segments) t += d;
  return t;
}

ContextLabel SessionScript::context_at(double t) const {
  double acc = 0.0;
  for (const auto& [c, d] : segments) {
    acc += d;
    if (t < acc) return c;
  }
  return segments.back().first;
}

void SessionScript::validate() const {
  if (segments.empty()) throw ValidationError("script: no segments");
  for (const auto& [c, d] : segments) {
    if (!(d > 0.0)) throw ValidationError("script: segment duration must be > 0");
  }
}

namespace {

SensorStream generate_stream(const UserProfile& profile, Device device,
                             SensorKind sensor, const SessionScript& script,
                             double rate) {
  const double nyquist = rate / 2.0;
  for (ContextLabel c : {ContextLabel::Stationary, ContextLabel::Moving}) {
    profile.motion(device, sensor, c).validate(nyquist);
  }

  const auto n = static_cast<std::size_t>(std::llround(script.total_s() * rate));
  const auto tag = static_cast<std::uint64_t>(device) * 2 +
                   static_cast<std::uint64_t>(sensor);
  Rng rng(Rng::mix(profile.seed, 0xA11CE5ULL + tag));

  SensorStream stream;
  stream.device = device;
  stream.sensor = sensor;
  stream.sample_rate_hz = rate;
  stream.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    const MotionParams& p =
        profile.motion(device, sensor, script.context_at(t));
    const double s =
        p.offset +
        p.amp_primary * std::sin(kTwoPi * p.gait_freq_hz * t + p.phase_primary) +
        p.amp_secondary *
            std::sin(kTwoPi * 2.0 * p.gait_freq_hz * t + p.phase_secondary) +
        p.noise_std * rng.normal();
    stream.samples.push_back({t, s * kDirX, s * kDirY, s * kDirZ});
  }
  return stream;
}

}  // namespace

UserData generate_user(const UserProfile& profile, const SessionScript& script,
                       double sample_rate_hz) {
  script.validate();
  if (!(sample_rate_hz > 0.0)) {
    throw ValidationError("sample_rate_hz: must be positive");
  }
  UserData data;
  data.phone.acc = generate_stream(profile, Device::Phone,
                                   SensorKind::Accelerometer, script,
                                   sample_rate_hz);
  data.phone.gyr = generate_stream(profile, Device::Phone,
                                   SensorKind::Gyroscope, script,
                                   sample_rate_hz);
  data.watch.acc = generate_stream(profile, Device::Watch,
                                   SensorKind::Accelerometer, script,
                                   sample_rate_hz);
  data.watch.gyr = generate_stream(profile, Device::Watch,
                                   SensorKind::Gyroscope, script,
                                   sample_rate_hz);
  return data;
}

std::vector<ContextLabel> window_truth(const SessionScript& script,
                                       double duration_s,
                                       double sample_rate_hz) {
  script.validate();
  const auto per_window = static_cast<std::size_t>(
      std::llround(duration_s * sample_rate_hz));
  const auto total = static_cast<std::size_t>(
      std::llround(script.total_s() * sample_rate_hz));
  std::vector<ContextLabel> truth;
  for (std::size_t start = 0; start + per_window <= total;
       start += per_window) {
    truth.push_back(
        script.context_at(static_cast<double>(start) / sample_rate_hz));
  }
  return truth;
}

UserProfile blend_profiles(const UserProfile& attacker,
                           const UserProfile& victim, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ValidationError("lambda: must lie in [0, 1]");
  }
  UserProfile out = attacker;
  for (std::size_t d = 0; d < 2; ++d) {
    for (std::size_t s = 0; s < 2; ++s) {
      for (std::size_t c = 0; c < 2; ++c) {
        const MotionParams& a = attacker.params[d][s][c];
        const MotionParams& v = victim.params[d][s][c];
        MotionParams& o = out.params[d][s][c];
        auto mixp = [lambda](double av, double vv) {
          return (1.0 - lambda) * av + lambda * vv;
        };
        o.gait_freq_hz = mixp(a.gait_freq_hz, v.gait_freq_hz);
        o.amp_primary = mixp(a.amp_primary, v.amp_primary);
        o.amp_secondary = mixp(a.amp_secondary, v.amp_secondary);
        o.phase_primary = mixp(a.phase_primary, v.phase_primary);
        o.phase_secondary = mixp(a.phase_secondary, v.phase_secondary);
        o.offset = mixp(a.offset, v.offset);
        o.noise_std = mixp(a.noise_std, v.noise_std);
      }
    }
  }
  return out;
}

UserData inject_mimicry(const UserProfile& attacker, const UserProfile& victim,
                        double lambda, const SessionScript& script,
                        double sample_rate_hz) {
  return generate_user(blend_profiles(attacker, victim, lambda), script,
                       sample_rate_hz);
}

Preset preset_from_string(std::string_view s) {
  if (s == "separable") return Preset::Separable;
  if (s == "overlapping") return Preset::Overlapping;
  throw ValidationError("preset: unknown value '" + std::string(s) + "'");
}

std::string_view to_string(Preset p) {
  return p == Preset::Separable ? "separable" : "overlapping";
}

std::vector<UserProfile> make_population(Preset preset, int n_users,
                                         std::uint64_t seed) {
  if (n_users < 2) throw ValidationError("n_users: need >= 2");

  // Gait frequencies sit on the 1/6 Hz grid so a 6 s window at 50 Hz puts
  // them bin-center; that keeps peak_f a crisp per-user feature.
  const double grid = 1.0 / 6.0;
  const bool tight = preset == Preset::Overlapping;
  const int half = (n_users + 1) / 2;

  std::vector<UserProfile> users;
  users.reserve(static_cast<std::size_t>(n_users));
  for (int u = 0; u < n_users; ++u) {
    UserProfile profile;
    profile.user_id = "user_" + std::string(u < 10 ? "0" : "") + std::to_string(u);
    profile.seed = Rng::mix(seed, 0x5EEDULL + static_cast<std::uint64_t>(u));

    // Phone parameters depend on the pair index p (two users share a pair),
    // watch parameters on u itself, so the watch disambiguates pair mates.
    const int p = u % half;
    const int rev_p = half - 1 - p;
    const int rev_u = n_users - 1 - u;

    // Moving and stationary frequencies follow reversed user orderings, so
    // no single context-free hyperplane can exploit peak_f for identity in
    // both contexts at once.
    const double fp = tight ? 10.0 * grid : (9.0 + p) * grid;
    const double fp_sta = tight ? 17.0 * grid : (16.0 + rev_p) * grid;
    const double fw = tight ? 10.0 * grid : (9.0 + u % 14) * grid;
    const double fw_sta = tight ? 17.0 * grid : (16.0 + rev_u % 9) * grid;
    const double step = tight ? 0.015 : 1.0;

    auto& ph_acc_mov = profile.motion(Device::Phone, SensorKind::Accelerometer,
                                      ContextLabel::Moving);
    ph_acc_mov = {fp, 1.8 + 0.30 * step * p, 0.35 * (1.8 + 0.30 * step * p),
                  0.0, 0.0, 9.72 + 0.040 * step * p, tight ? 0.5 : 0.35};

    auto& ph_gyr_mov = profile.motion(Device::Phone, SensorKind::Gyroscope,
                                      ContextLabel::Moving);
    ph_gyr_mov = {fp, 0.60 + 0.10 * step * p, 0.30 * (0.60 + 0.10 * step * p),
                  0.0, 0.0, 0.20 + 0.020 * step * p, tight ? 0.18 : 0.12};

    auto& ph_acc_sta = profile.motion(Device::Phone, SensorKind::Accelerometer,
                                      ContextLabel::Stationary);
    ph_acc_sta = {fp_sta, 0.040 + 0.012 * step * rev_p, 0.012 * (1 + rev_p % 3),
                  0.0, 0.0, 9.76 + 0.030 * step * rev_p, tight ? 0.08 : 0.05};

    auto& ph_gyr_sta = profile.motion(Device::Phone, SensorKind::Gyroscope,
                                      ContextLabel::Stationary);
    ph_gyr_sta = {fp_sta, 0.015 + 0.005 * step * rev_p, 0.004,
                  0.0, 0.0, 0.12 + 0.010 * step * rev_p, tight ? 0.025 : 0.015};

    auto& wa_acc_mov = profile.motion(Device::Watch, SensorKind::Accelerometer,
                                      ContextLabel::Moving);
    wa_acc_mov = {fw, 1.5 + 0.28 * step * u, 0.30 * (1.5 + 0.28 * step * u),
                  0.0, 0.0, 9.68 + 0.035 * step * u, tight ? 0.55 : 0.40};

    auto& wa_gyr_mov = profile.motion(Device::Watch, SensorKind::Gyroscope,
                                      ContextLabel::Moving);
    wa_gyr_mov = {fw, 0.50 + 0.09 * step * u, 0.30 * (0.50 + 0.09 * step * u),
                  0.0, 0.0, 0.25 + 0.018 * step * u, tight ? 0.22 : 0.15};

    auto& wa_acc_sta = profile.motion(Device::Watch, SensorKind::Accelerometer,
                                      ContextLabel::Stationary);
    wa_acc_sta = {fw_sta, 0.050 + 0.014 * step * rev_u, 0.015,
                  0.0, 0.0, 9.74 + 0.028 * step * rev_u, tight ? 0.09 : 0.06};

    auto& wa_gyr_sta = profile.motion(Device::Watch, SensorKind::Gyroscope,
                                      ContextLabel::Stationary);
    wa_gyr_sta = {fw_sta, 0.020 + 0.004 * step * rev_u, 0.003,
                  0.0, 0.0, 0.10 + 0.008 * step * rev_u, tight ? 0.030 : 0.018};

    // Independent phases per stream and context.
    Rng phase_rng(Rng::mix(profile.seed, 0x9A5E5ULL));
    for (std::size_t d = 0; d < 2; ++d) {
      for (std::size_t s = 0; s < 2; ++s) {
        for (std::size_t c = 0; c < 2; ++c) {
          profile.params[d][s][c].phase_primary = phase_rng.uniform(0.0, kTwoPi);
          profile.params[d][s][c].phase_secondary =
              phase_rng.uniform(0.0, kTwoPi);
        }
      }
    }
    users.push_back(std::move(profile));
  }
  return users;
}

namespace {

nlohmann::json motion_to_json(const MotionParams& p) {
  return {{"gait_freq_hz", p.gait_freq_hz},
          {"amp_primary", p.amp_primary},
          {"amp_secondary", p.amp_secondary},
          {"phase_primary", p.phase_primary},
          {"phase_secondary", p.phase_secondary},
          {"offset", p.offset},
          {"noise_std", p.noise_std}};
}

MotionParams motion_from_json(const nlohmann::json& j) {
  MotionParams p;
  p.gait_freq_hz = j.at("gait_freq_hz").get<double>();
  p.amp_primary = j.at("amp_primary").get<double>();
  p.amp_secondary = j.at("amp_secondary").get<double>();
  p.phase_primary = j.at("phase_primary").get<double>();
  p.phase_secondary = j.at("phase_secondary").get<double>();
  p.offset = j.at("offset").get<double>();
  p.noise_std = j.at("noise_std").get<double>();
  return p;
}

}  // namespace

std::string population_to_json_string(const std::vector<UserProfile>& users) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["type"] = "population";
  for (const auto& u : users) {
    nlohmann::json cells;
    for (Device d : {Device::Phone, Device::Watch}) {
      for (SensorKind s : {SensorKind::Accelerometer, SensorKind::Gyroscope}) {
        for (ContextLabel c : {ContextLabel::Stationary, ContextLabel::Moving}) {
          const std::string key = std::string(to_string(d)) + "_" +
                                  std::string(to_string(s)) + "_" +
                                  std::string(to_string(c));
          cells[key] = motion_to_json(u.motion(d, s, c));
        }
      }
    }
    j["users"].push_back(
        {{"user_id", u.user_id}, {"seed", u.seed}, {"params", cells}});
  }
  return j.dump(2);
}

std::vector<UserProfile> population_from_json_string(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (j.value("type", std::string{}) != "population") {
    throw ValidationError("type: expected population");
  }
  std::vector<UserProfile> users;
  for (const auto& uj : j.at("users")) {
    UserProfile u;
    u.user_id = uj.at("user_id").get<std::string>();
    u.seed = uj.at("seed").get<std::uint64_t>();
    for (Device d : {Device::Phone, Device::Watch}) {
      for (SensorKind s : {SensorKind::Accelerometer, SensorKind::Gyroscope}) {
        for (ContextLabel c : {ContextLabel::Stationary, ContextLabel::Moving}) {
          const std::string key = std::string(to_string(d)) + "_" +
                                  std::string(to_string(s)) + "_" +
                                  std::string(to_string(c));
          u.motion(d, s, c) = motion_from_json(uj.at("params").at(key));
        }
      }
    }
    users.push_back(std::move(u));
  }
  return users;
}

}  // namespace sensauth
