#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sensauth/context.hpp"
#include "sensauth/features.hpp"
#include "sensauth/pipeline.hpp"
#include "sensauth/sensor.hpp"

namespace sensauth {

// Sensor file schema: rows device,sensor,t,x,y,z (CSV with header, or JSONL
// with the same keys). Rows group into one stream per (device, sensor).

void write_sensor_csv(std::ostream& out,
                      const std::vector<SensorStream>& streams);
std::vector<SensorStream> read_sensor_csv(std::istream& in,
                                          double sample_rate_hz = 50.0);

void write_sensor_jsonl(std::ostream& out,
                        const std::vector<SensorStream>& streams);
std::vector<SensorStream> read_sensor_jsonl(std::istream& in,
                                            double sample_rate_hz = 50.0);

// Dispatches on the ".csv" / ".jsonl" extension.
void write_sensor_file(const std::string& path,
                       const std::vector<SensorStream>& streams);
std::vector<SensorStream> read_sensor_file(const std::string& path,
                                           double sample_rate_hz = 50.0);

std::vector<SensorStream> user_data_to_streams(const UserData& data);
UserData streams_to_user_data(const std::vector<SensorStream>& streams);

// Feature file: one row per window, layout slot columns plus window index,
// user id and (optionally known) context.
struct FeatureRow {
  std::size_t k = 0;
  Eigen::VectorXd values;
  std::string user_id;
  std::optional<ContextLabel> context;
};

void write_features_csv(std::ostream& out, const FeatureLayout& layout,
                        const std::vector<FeatureRow>& rows);
struct FeatureFile {
  std::vector<std::string> columns;
  std::vector<FeatureRow> rows;
};
FeatureFile read_features_csv(std::istream& in);

// Ground-truth sidecar: k,user_id,context per window.
struct TruthRow {
  std::size_t k = 0;
  std::string user_id;
  ContextLabel context = ContextLabel::Stationary;
};
void write_truth_csv(std::ostream& out, const std::vector<TruthRow>& rows);
std::vector<TruthRow> read_truth_csv(std::istream& in);

// Decision log: one JSONL line per decision with its same-window events;
// wall-clock latency is isolated under "meta".
void write_decision_log(std::ostream& out,
                        const std::vector<Decision>& decisions,
                        const std::vector<StreamEvent>& events);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace sensauth
