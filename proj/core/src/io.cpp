#include "sensauth/io.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace sensauth {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, const char* field) {
  double v = 0.0;
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw ValidationError(std::string(field) + ": not a number '" + s + "'");
  }
  return v;
}

std::vector<SensorStream> group_rows(
    std::vector<std::tuple<Device, SensorKind, SensorSample>> rows,
    double sample_rate_hz) {
  std::map<std::pair<int, int>, SensorStream> streams;
  for (auto& [d, s, sample] : rows) {
    auto& stream = streams[{static_cast<int>(d), static_cast<int>(s)}];
    stream.device = d;
    stream.sensor = s;
    stream.sample_rate_hz = sample_rate_hz;
    stream.samples.push_back(sample);
  }
  std::vector<SensorStream> out;
  out.reserve(streams.size());
  for (auto& [key, stream] : streams) {
    stream.validate();
    out.push_back(std::move(stream));
  }
  return out;
}

}  // namespace

void write_sensor_csv(std::ostream& out,
                      const std::vector<SensorStream>& streams) {
  out << "device,sensor,t,x,y,z\n";
  out.precision(17);
  for (const auto& stream : streams) {
    for (const auto& s : stream.samples) {
      out << to_string(stream.device) << ',' << to_string(stream.sensor) << ','
          << s.t << ',' << s.x << ',' << s.y << ',' << s.z << '\n';
    }
  }
}

std::vector<SensorStream> read_sensor_csv(std::istream& in,
                                          double sample_rate_hz) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("csv: empty file");
  const auto header = split_csv(line);
  const std::vector<std::string> expected{"device", "sensor", "t",
                                          "x",      "y",      "z"};
  if (header != expected) {
    throw ValidationError("csv: header must be device,sensor,t,x,y,z");
  }

  std::vector<std::tuple<Device, SensorKind, SensorSample>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 6) throw ValidationError("csv: row needs 6 fields");
    rows.emplace_back(device_from_string(f[0]), sensor_from_string(f[1]),
                      SensorSample{parse_double(f[2], "t"),
                                   parse_double(f[3], "x"),
                                   parse_double(f[4], "y"),
                                   parse_double(f[5], "z")});
  }
  return group_rows(std::move(rows), sample_rate_hz);
}

void write_sensor_jsonl(std::ostream& out,
                        const std::vector<SensorStream>& streams) {
  for (const auto& stream : streams) {
    for (const auto& s : stream.samples) {
      nlohmann::json j{{"device", std::string(to_string(stream.device))},
                       {"sensor", std::string(to_string(stream.sensor))},
                       {"t", s.t},
                       {"x", s.x},
                       {"y", s.y},
                       {"z", s.z}};
      out << j.dump() << '\n';
    }
  }
}

std::vector<SensorStream> read_sensor_jsonl(std::istream& in,
                                            double sample_rate_hz) {
  std::vector<std::tuple<Device, SensorKind, SensorSample>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    rows.emplace_back(device_from_string(j.at("device").get<std::string>()),
                      sensor_from_string(j.at("sensor").get<std::string>()),
                      SensorSample{j.at("t").get<double>(),
                                   j.at("x").get<double>(),
                                   j.at("y").get<double>(),
                                   j.at("z").get<double>()});
  }
  return group_rows(std::move(rows), sample_rate_hz);
}

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

void write_sensor_file(const std::string& path,
                       const std::vector<SensorStream>& streams) {
  std::ofstream out(path);
  if (!out) throw ValidationError("path: cannot open '" + path + "' for write");
  if (ends_with(path, ".jsonl")) {
    write_sensor_jsonl(out, streams);
  } else if (ends_with(path, ".csv")) {
    write_sensor_csv(out, streams);
  } else {
    throw ValidationError("path: expected .csv or .jsonl extension");
  }
}

std::vector<SensorStream> read_sensor_file(const std::string& path,
                                           double sample_rate_hz) {
  std::ifstream in(path);
  if (!in) throw ValidationError("path: cannot open '" + path + "'");
  if (ends_with(path, ".jsonl")) return read_sensor_jsonl(in, sample_rate_hz);
  if (ends_with(path, ".csv")) return read_sensor_csv(in, sample_rate_hz);
  throw ValidationError("path: expected .csv or .jsonl extension");
}

std::vector<SensorStream> user_data_to_streams(const UserData& data) {
  return {data.phone.acc, data.phone.gyr, data.watch.acc, data.watch.gyr};
}

UserData streams_to_user_data(const std::vector<SensorStream>& streams) {
  UserData data;
  bool pa = false, pg = false, wa = false, wg = false;
  for (const auto& s : streams) {
    const bool phone = s.device == Device::Phone;
    const bool acc = s.sensor == SensorKind::Accelerometer;
    if (phone && acc) {
      data.phone.acc = s;
      pa = true;
    } else if (phone) {
      data.phone.gyr = s;
      pg = true;
    } else if (acc) {
      data.watch.acc = s;
      wa = true;
    } else {
      data.watch.gyr = s;
      wg = true;
    }
  }
  if (!pa || !pg) {
    throw ValidationError("streams: phone accelerometer and gyroscope are required");
  }
  // Watch streams may be absent; leave them empty.
  (void)wa;
  (void)wg;
  return data;
}

void write_features_csv(std::ostream& out, const FeatureLayout& layout,
                        const std::vector<FeatureRow>& rows) {
  out << "k";
  for (const auto& name : layout.names()) out << ',' << name;
  out << ",user_id,context\n";
  out.precision(17);
  for (const auto& row : rows) {
    if (row.values.size() != static_cast<Eigen::Index>(layout.dim())) {
      throw ValidationError("row: value count mismatch with layout");
    }
    out << row.k;
    for (Eigen::Index i = 0; i < row.values.size(); ++i) {
      out << ',' << row.values[i];
    }
    out << ',' << row.user_id << ','
        << (row.context ? to_string(*row.context) : "") << '\n';
  }
}

FeatureFile read_features_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("csv: empty file");
  auto header = split_csv(line);
  if (header.size() < 4 || header.front() != "k" ||
      header[header.size() - 2] != "user_id" || header.back() != "context") {
    throw ValidationError(
        "csv: header must be k,<feature columns>,user_id,context");
  }

  FeatureFile file;
  file.columns.assign(header.begin() + 1, header.end() - 2);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != header.size()) {
      throw ValidationError("csv: row width mismatch with header");
    }
    FeatureRow row;
    row.k = static_cast<std::size_t>(parse_double(f[0], "k"));
    row.values.resize(static_cast<Eigen::Index>(file.columns.size()));
    for (std::size_t i = 0; i < file.columns.size(); ++i) {
      row.values[static_cast<Eigen::Index>(i)] =
          parse_double(f[i + 1], file.columns[i].c_str());
    }
    row.user_id = f[f.size() - 2];
    if (!f.back().empty()) row.context = context_from_string(f.back());
    file.rows.push_back(std::move(row));
  }
  return file;
}

void write_truth_csv(std::ostream& out, const std::vector<TruthRow>& rows) {
  out << "k,user_id,context\n";
  for (const auto& row : rows) {
    out << row.k << ',' << row.user_id << ',' << to_string(row.context)
        << '\n';
  }
}

std::vector<TruthRow> read_truth_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("csv: empty file");
  if (split_csv(line) != std::vector<std::string>{"k", "user_id", "context"}) {
    throw ValidationError("csv: header must be k,user_id,context");
  }
  std::vector<TruthRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 3) throw ValidationError("csv: row needs 3 fields");
    rows.push_back({static_cast<std::size_t>(parse_double(f[0], "k")), f[1],
                    context_from_string(f[2])});
  }
  return rows;
}

void write_decision_log(std::ostream& out,
                        const std::vector<Decision>& decisions,
                        const std::vector<StreamEvent>& events) {
  std::multimap<std::size_t, const StreamEvent*> by_window;
  for (const auto& e : events) by_window.emplace(e.k, &e);

  for (const auto& d : decisions) {
    nlohmann::json j{{"k", d.k},
                     {"context", std::string(to_string(d.context))},
                     {"cs", d.cs},
                     {"verdict", d.accept ? "accept" : "reject"},
                     {"device_set", std::string(to_string(d.device_set))}};
    nlohmann::json evs = nlohmann::json::array();
    const auto [lo, hi] = by_window.equal_range(d.k);
    for (auto it = lo; it != hi; ++it) {
      evs.push_back({{"event", std::string(to_string(it->second->kind))},
                     {"detail", it->second->detail}});
    }
    j["events"] = std::move(evs);
    j["meta"] = {{"latency_ms", d.latency_ms}};
    out << j.dump() << '\n';
  }
  // Events on windows without a decision (gaps) still appear in the log.
  for (const auto& e : events) {
    if (e.kind != EventKind::WindowGap) continue;
    nlohmann::json j{{"k", e.k},
                     {"event", std::string(to_string(e.kind))},
                     {"detail", e.detail}};
    out << j.dump() << '\n';
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("path: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw ValidationError("path: cannot open '" + path + "' for write");
  out << content;
}

}  // namespace sensauth
