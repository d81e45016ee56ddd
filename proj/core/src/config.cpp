#include "sensauth/config.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <set>

#include "sensauth/sensor.hpp"

namespace sensauth {

void Config::validate() const {
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
    throw ValidationError("sample_rate_hz: must be positive");
  }
  if (!(window_s > 0.0) || !std::isfinite(window_s)) {
    throw ValidationError("window_s: must be positive");
  }
  if (data_size < 2) throw ValidationError("data_size: must be >= 2");
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw ValidationError("rho: must be positive");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValidationError("alpha: must lie in (0, 1)");
  }
  if (!(corr_threshold > 0.0 && corr_threshold <= 1.0)) {
    throw ValidationError("corr_threshold: must lie in (0, 1]");
  }
  if (!(epsilon_cs > 0.0)) throw ValidationError("epsilon_cs: must be > 0");
  if (t_windows < 1) throw ValidationError("t_windows: must be >= 1");
  if (lockout_after < 1) throw ValidationError("lockout_after: must be >= 1");
}

std::string Config::to_json_string() const {
  nlohmann::json j{{"sample_rate_hz", sample_rate_hz},
                   {"window_s", window_s},
                   {"data_size", data_size},
                   {"rho", rho},
                   {"alpha", alpha},
                   {"corr_threshold", corr_threshold},
                   {"epsilon_cs", epsilon_cs},
                   {"t_windows", t_windows},
                   {"lockout_after", lockout_after},
                   {"seed", seed},
                   {"data_dir", data_dir},
                   {"model_dir", model_dir},
                   {"results_dir", results_dir}};
  return j.dump(2);
}

Config Config::from_json_string(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (!j.is_object()) throw ValidationError("config: expected a JSON object");

  static const std::set<std::string> known{
      "sample_rate_hz", "window_s",   "data_size",  "rho",
      "alpha",          "corr_threshold", "epsilon_cs", "t_windows",
      "lockout_after",  "seed",       "data_dir",   "model_dir",
      "results_dir"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) {
      throw ValidationError("config: unknown key '" + key + "'");
    }
  }

  Config c;
  c.sample_rate_hz = j.value("sample_rate_hz", c.sample_rate_hz);
  c.window_s = j.value("window_s", c.window_s);
  c.data_size = j.value("data_size", c.data_size);
  c.rho = j.value("rho", c.rho);
  c.alpha = j.value("alpha", c.alpha);
  c.corr_threshold = j.value("corr_threshold", c.corr_threshold);
  c.epsilon_cs = j.value("epsilon_cs", c.epsilon_cs);
  c.t_windows = j.value("t_windows", c.t_windows);
  c.lockout_after = j.value("lockout_after", c.lockout_after);
  c.seed = j.value("seed", c.seed);
  c.data_dir = j.value("data_dir", c.data_dir);
  c.model_dir = j.value("model_dir", c.model_dir);
  c.results_dir = j.value("results_dir", c.results_dir);
  c.validate();
  return c;
}

Config Config::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json_string(text);
}

}  // namespace sensauth
