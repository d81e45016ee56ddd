#pragma once

#include <cstdint>
#include <string>

namespace sensauth {

// Pipeline-wide knobs with the standard operating defaults: 50 Hz sampling,
// 6 s windows, 800 training measurements, rho = 1. Unknown keys in a config
// file are rejected.
struct Config {
  double sample_rate_hz = 50.0;
  double window_s = 6.0;
  int data_size = 800;
  double rho = 1.0;
  double alpha = 0.05;
  double corr_threshold = 0.85;
  double epsilon_cs = 0.2;
  int t_windows = 100;
  int lockout_after = 1;
  std::uint64_t seed = 42;
  std::string data_dir = "data";
  std::string model_dir = "models";
  std::string results_dir = "results";

  void validate() const;

  std::string to_json_string() const;
  static Config from_json_string(const std::string& text);
  static Config from_json_file(const std::string& path);
};

}  // namespace sensauth
