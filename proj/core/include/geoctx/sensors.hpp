#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace geoctx {

struct Sensor {
  std::string id;
  double lon = 0.0;
  double lat = 0.0;

  friend bool operator==(const Sensor&, const Sensor&) = default;
};

// Ordered sensor list. File order is canonical and every per-sensor array
// downstream (quotient rows, features, embeddings, speed columns) uses it.
class SensorSet {
 public:
  SensorSet() = default;
  explicit SensorSet(std::vector<Sensor> sensors);  // throws DuplicateSensorId

  std::size_t size() const { return sensors_.size(); }
  bool empty() const { return sensors_.empty(); }
  const Sensor& operator[](std::size_t i) const { return sensors_[i]; }
  const std::vector<Sensor>& sensors() const { return sensors_; }
  std::optional<std::size_t> index_of(std::string_view id) const;

  auto begin() const { return sensors_.begin(); }
  auto end() const { return sensors_.end(); }

  friend bool operator==(const SensorSet& a, const SensorSet& b) { return a.sensors_ == b.sensors_; }

 private:
  std::vector<Sensor> sensors_;
  std::unordered_map<std::string, std::size_t> index_;
};

// `sensor_id,lon,lat`
SensorSet load_sensors(const std::filesystem::path& csv);
SensorSet parse_sensors(std::string_view text);
void write_sensors(const SensorSet& sensors, const std::filesystem::path& csv);

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return v != v; }

// Speeds on a fixed time step. values is row-major T x N, NaN for missing.
struct SpeedSeries {
  std::vector<std::int64_t> timestamps;  // seconds since the Unix epoch, UTC
  std::size_t n_sensors = 0;
  std::vector<double> values;

  std::size_t length() const { return timestamps.size(); }
  double at(std::size_t t, std::size_t n) const { return values[t * n_sensors + n]; }
  double& at(std::size_t t, std::size_t n) { return values[t * n_sensors + n]; }

  // Rows [begin, end).
  SpeedSeries slice(std::size_t begin, std::size_t end) const;
};

bool same_values(const SpeedSeries& a, const SpeedSeries& b);  // NaN-aware equality

// Wide CSV: `timestamp,<sensor_id>...`. Columns are reordered to `sensors`.
// Throws UnknownSensorColumn, MissingColumn (sensor without a column),
// NonUniformTimestep, BadNumericCell.
SpeedSeries load_speeds(const std::filesystem::path& csv, const SensorSet& sensors);
SpeedSeries parse_speeds(std::string_view text, const SensorSet& sensors);
void write_speeds(const SpeedSeries& series, const SensorSet& sensors,
                  const std::filesystem::path& csv);

struct SplitSpec {
  double train = 0.7;
  double val = 0.1;
  double test = 0.2;

  void validate() const;  // ParameterOutOfRange

  friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

struct TemporalSplit {
  SpeedSeries train;
  SpeedSeries val;
  SpeedSeries test;
};

struct SplitSizes {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

// floor(train*T), floor(val*T), remainder. Throws TooShort when any part is empty.
SplitSizes split_sizes(std::size_t total, const SplitSpec& spec);
TemporalSplit temporal_split(const SpeedSeries& series, const SplitSpec& spec = {});

// ISO-8601 "YYYY-MM-DDTHH:MM:SS" with optional trailing Z; a space may replace T.
std::optional<std::int64_t> parse_iso8601(std::string_view text);
std::string format_iso8601(std::int64_t seconds);

}  // namespace geoctx
