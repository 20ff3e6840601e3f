#include "rideprobe/domain.hpp"

#include <algorithm>

#include "rideprobe/error.hpp"

namespace rideprobe {

namespace {
std::string describe_fields(const std::map<std::string, std::string>& fields) {
  std::string out = "invalid input:";
  for (const auto& [field, message] : fields) out += " " + field + " (" + message + ");";
  if (!fields.empty()) out.pop_back();
  return out;
}
}  // namespace

ValidationError::ValidationError(std::map<std::string, std::string> fields)
    : InputError(describe_fields(fields)), fields_(std::move(fields)) {}

ValidationError::ValidationError(const std::string& field, const std::string& message)
    : ValidationError(std::map<std::string, std::string>{{field, message}}) {}

std::string_view source_name(TripSource source) noexcept {
  return source == TripSource::personal ? "personal" : "city";
}

const Neighborhood* NeighborhoodSet::find(std::string_view id) const noexcept {
  for (const auto& entry : entries) {
    if (entry.id == id) return &entry;
  }
  return nullptr;
}

const WeatherRecord* WeatherSeries::at_hour(LocalTime hour_ts) const noexcept {
  auto it = std::lower_bound(records.begin(), records.end(), hour_ts,
                             [](const WeatherRecord& r, LocalTime t) { return r.hour_ts < t; });
  if (it == records.end() || it->hour_ts != hour_ts) return nullptr;
  return &*it;
}

std::optional<std::string> ColumnMap::column(const std::string& field) const {
  auto it = columns.find(field);
  if (it == columns.end()) return std::nullopt;
  return it->second;
}

void ColumnMap::validate_for_trips() const {
  if (!maps("start_ts")) throw ConfigError("column map must map start_ts");
  if (!maps("fare")) throw ConfigError("column map must map fare");
  if (!maps("duration_s") && !maps("end_ts")) {
    throw ConfigError("column map must map duration_s or end_ts");
  }
}

ColumnMap chicago_tnp_columns() {
  ColumnMap map;
  map.columns = {
      {"trip_id", "Trip ID"},
      {"start_ts", "Trip Start Timestamp"},
      {"end_ts", "Trip End Timestamp"},
      {"duration_s", "Trip Seconds"},
      {"miles", "Trip Miles"},
      {"fare", "Fare"},
      {"tip", "Tip"},
      {"additional_charges", "Additional Charges"},
      {"total", "Trip Total"},
      {"shared", "Shared Trip Authorized"},
      {"pickup_lat", "Pickup Centroid Latitude"},
      {"pickup_lon", "Pickup Centroid Longitude"},
      {"dropoff_lat", "Dropoff Centroid Latitude"},
      {"dropoff_lon", "Dropoff Centroid Longitude"},
  };
  map.timestamp_format = "%m/%d/%Y %I:%M:%S %p";
  map.timezone = "America/Chicago";
  return map;
}

ColumnMap personal_export_columns() {
  ColumnMap map;
  map.columns = {
      {"trip_id", "Trip UUID"},
      {"start_ts", "Begin Trip Time"},
      {"end_ts", "Dropoff Time"},
      {"miles", "Distance (miles)"},
      {"fare", "Fare Amount"},
      {"tip", "Tip Amount"},
      {"status", "Status"},
      {"pickup_lat", "Begin Trip Lat"},
      {"pickup_lon", "Begin Trip Lng"},
      {"dropoff_lat", "Dropoff Lat"},
      {"dropoff_lon", "Dropoff Lng"},
  };
  map.timestamp_format = "%Y-%m-%d %H:%M:%S %z %Z";
  map.timezone = "America/Chicago";
  return map;
}

ColumnMap location_ping_columns() {
  ColumnMap map;
  map.columns = {{"ts", "Timestamp"}, {"lat", "Latitude"}, {"lon", "Longitude"}};
  map.timestamp_format = "%Y-%m-%d %H:%M:%S %z %Z";
  return map;
}

ColumnMap weather_columns() {
  ColumnMap map;
  map.columns = {{"ts", "datetime"}, {"temp_f", "temp"}, {"precip_in", "precip"}};
  map.timestamp_format = "%Y-%m-%dT%H:%M:%S";
  return map;
}

}  // namespace rideprobe
