#include "geoctx/sensors.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "geoctx/csv.hpp"
#include "geoctx/error.hpp"

namespace geoctx {

SensorSet::SensorSet(std::vector<Sensor> sensors) : sensors_(std::move(sensors)) {
  index_.reserve(sensors_.size());
  for (std::size_t i = 0; i < sensors_.size(); ++i) {
    if (!index_.emplace(sensors_[i].id, i).second) {
      throw Error(ErrorKind::DuplicateSensorId, "sensor id '" + sensors_[i].id + "'");
    }
  }
}

std::optional<std::size_t> SensorSet::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SensorSet parse_sensors(std::string_view text) {
  const CsvTable t = parse_csv(text);
  t.require_header({"sensor_id", "lon", "lat"}, "sensors csv");
  std::vector<Sensor> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (row.size() < 3) {
      throw Error(ErrorKind::BadNumericCell, "row " + std::to_string(r + 1) + ": too few cells");
    }
    Sensor s{row[0], parse_double_cell(row[1], r + 1, "lon"), parse_double_cell(row[2], r + 1, "lat")};
    if (s.lon < -180.0 || s.lon > 180.0 || s.lat < -90.0 || s.lat > 90.0) {
      throw Error(ErrorKind::BadNumericCell,
                  "row " + std::to_string(r + 1) + ": coordinates out of range");
    }
    out.push_back(std::move(s));
  }
  return SensorSet(std::move(out));
}

SensorSet load_sensors(const std::filesystem::path& csv) {
  return parse_sensors(read_text_file(csv));
}

void write_sensors(const SensorSet& sensors, const std::filesystem::path& csv) {
  CsvTable t;
  t.header = {"sensor_id", "lon", "lat"};
  for (const auto& s : sensors) t.rows.push_back({s.id, format_double(s.lon), format_double(s.lat)});
  write_csv(csv, t);
}

SpeedSeries SpeedSeries::slice(std::size_t begin, std::size_t end) const {
  SpeedSeries out;
  out.n_sensors = n_sensors;
  out.timestamps.assign(timestamps.begin() + static_cast<std::ptrdiff_t>(begin),
                        timestamps.begin() + static_cast<std::ptrdiff_t>(end));
  out.values.assign(values.begin() + static_cast<std::ptrdiff_t>(begin * n_sensors),
                    values.begin() + static_cast<std::ptrdiff_t>(end * n_sensors));
  return out;
}

bool same_values(const SpeedSeries& a, const SpeedSeries& b) {
  if (a.n_sensors != b.n_sensors || a.timestamps != b.timestamps ||
      a.values.size() != b.values.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const bool ma = is_missing(a.values[i]);
    const bool mb = is_missing(b.values[i]);
    if (ma != mb || (!ma && a.values[i] != b.values[i])) return false;
  }
  return true;
}

SpeedSeries parse_speeds(std::string_view text, const SensorSet& sensors) {
  const CsvTable t = parse_csv(text);
  t.require_header({"timestamp"}, "speeds csv");
  const std::size_t n = sensors.size();
  std::vector<std::size_t> target(t.header.size(), 0);
  std::vector<bool> seen(n, false);
  for (std::size_t c = 1; c < t.header.size(); ++c) {
    auto idx = sensors.index_of(t.header[c]);
    if (!idx) {
      throw Error(ErrorKind::UnknownSensorColumn, "column '" + t.header[c] + "'");
    }
    if (seen[*idx]) {
      throw Error(ErrorKind::UnknownSensorColumn, "duplicate column '" + t.header[c] + "'");
    }
    seen[*idx] = true;
    target[c] = *idx;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!seen[i]) throw Error(ErrorKind::MissingColumn, "no speed column for sensor '" + sensors[i].id + "'");
  }

  SpeedSeries out;
  out.n_sensors = n;
  out.timestamps.reserve(t.rows.size());
  out.values.assign(t.rows.size() * n, kMissing);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    auto ts = row.empty() ? std::nullopt : parse_iso8601(row[0]);
    if (!ts) {
      throw Error(ErrorKind::BadNumericCell,
                  "row " + std::to_string(r + 1) + ": bad timestamp '" + (row.empty() ? "" : row[0]) + "'");
    }
    out.timestamps.push_back(*ts);
    for (std::size_t c = 1; c < t.header.size(); ++c) {
      const std::string cell = c < row.size() ? row[c] : std::string();
      if (cell.empty() || cell == "nan" || cell == "NaN" || cell == "NA") continue;
      out.at(r, target[c]) = parse_double_cell(cell, r + 1, t.header[c]);
    }
  }
  if (out.timestamps.size() >= 2) {
    const std::int64_t step = out.timestamps[1] - out.timestamps[0];
    for (std::size_t i = 1; i < out.timestamps.size(); ++i) {
      const std::int64_t d = out.timestamps[i] - out.timestamps[i - 1];
      if (d <= 0 || d != step) {
        throw Error(ErrorKind::NonUniformTimestep,
                    "row " + std::to_string(i + 1) + ": step " + std::to_string(d) + "s, expected " +
                        std::to_string(step) + "s");
      }
    }
  }
  return out;
}

SpeedSeries load_speeds(const std::filesystem::path& csv, const SensorSet& sensors) {
  return parse_speeds(read_text_file(csv), sensors);
}

void write_speeds(const SpeedSeries& series, const SensorSet& sensors,
                  const std::filesystem::path& csv) {
  CsvTable t;
  t.header.push_back("timestamp");
  for (const auto& s : sensors) t.header.push_back(s.id);
  t.rows.reserve(series.length());
  for (std::size_t r = 0; r < series.length(); ++r) {
    std::vector<std::string> row;
    row.reserve(series.n_sensors + 1);
    row.push_back(format_iso8601(series.timestamps[r]));
    for (std::size_t n = 0; n < series.n_sensors; ++n) {
      const double v = series.at(r, n);
      row.push_back(is_missing(v) ? std::string() : format_double(v));
    }
    t.rows.push_back(std::move(row));
  }
  write_csv(csv, t);
}

void SplitSpec::validate() const {
  if (!(train > 0.0) || !(val > 0.0) || !(test > 0.0) ||
      std::abs(train + val + test - 1.0) > 1e-12) {
    throw Error(ErrorKind::ParameterOutOfRange,
                "split fractions must be positive and sum to 1");
  }
}

SplitSizes split_sizes(std::size_t total, const SplitSpec& spec) {
  spec.validate();
  if (total < 3) throw Error(ErrorKind::TooShort, "series of length " + std::to_string(total));
  // The small offset keeps products such as 0.7 * 30 = 20.999... on the intended floor.
  auto part = [total](double frac) {
    return static_cast<std::size_t>(std::floor(frac * static_cast<double>(total) + 1e-9));
  };
  SplitSizes s;
  s.train = part(spec.train);
  s.val = part(spec.val);
  s.test = total - std::min(total, s.train + s.val);
  if (s.train == 0 || s.val == 0 || s.test == 0) {
    throw Error(ErrorKind::TooShort, "split of length " + std::to_string(total) +
                                         " leaves an empty part (" + std::to_string(s.train) + "/" +
                                         std::to_string(s.val) + "/" + std::to_string(s.test) + ")");
  }
  return s;
}

TemporalSplit temporal_split(const SpeedSeries& series, const SplitSpec& spec) {
  const SplitSizes s = split_sizes(series.length(), spec);
  TemporalSplit out;
  out.train = series.slice(0, s.train);
  out.val = series.slice(s.train, s.train + s.val);
  out.test = series.slice(s.train + s.val, series.length());
  return out;
}

std::optional<std::int64_t> parse_iso8601(std::string_view text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  std::string t(text);
  while (!t.empty() && (t.back() == ' ' || t.back() == 'Z')) t.pop_back();
  char sep = 0;
  int consumed = 0;
  if (std::sscanf(t.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d%n", &y, &mo, &d, &sep, &h, &mi, &s,
                  &consumed) != 7 ||
      (sep != 'T' && sep != ' ') || static_cast<std::size_t>(consumed) != t.size()) {
    return std::nullopt;
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60 || h < 0 || mi < 0 || s < 0) return std::nullopt;
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 86400 + h * 3600 + mi * 60 + s;
}

std::string format_iso8601(std::int64_t seconds) {
  using namespace std::chrono;
  std::int64_t days = seconds / 86400;
  std::int64_t rem = seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60),
                static_cast<int>(rem % 60));
  return buf;
}

}  // namespace geoctx
