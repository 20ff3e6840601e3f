#include "rideprobe/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "rideprobe/csv.hpp"
#include "rideprobe/error.hpp"

namespace rideprobe {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

CsvReader open_csv(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("file not found: " + path.string());
  CsvReader reader = CsvReader::from_file(path);
  if (reader.header().empty()) throw EmptyInputError("empty file: " + path.string());
  return reader;
}

/// Header positions of every mapped field, resolved once per file.
class ResolvedColumns {
 public:
  ResolvedColumns(const CsvReader& reader, const ColumnMap& map, const fs::path& path) {
    for (const auto& [field, column] : map.columns) {
      auto index = reader.column_index(column);
      if (!index) {
        throw SchemaError(path.string() + ": missing column '" + column + "' (mapped from " +
                          field + ")");
      }
      index_[field] = *index;
    }
  }

  bool has(const std::string& field) const { return index_.count(field) != 0; }

  /// Field text, or nullopt when unmapped or the row is too short.
  std::optional<std::string_view> get(const std::vector<std::string>& row,
                                      const std::string& field) const {
    auto it = index_.find(field);
    if (it == index_.end() || it->second >= row.size()) return std::nullopt;
    return trim(row[it->second]);
  }

 private:
  std::map<std::string, std::size_t> index_;
};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

enum class Parsed { ok, blank, bad };

/// Non-negative amount. Blank cells are reported separately from garbage.
Parsed read_amount(std::optional<std::string_view> text, double& out) {
  if (!text || text->empty()) return Parsed::blank;
  auto value = parse_double(*text);
  if (!value || *value < 0.0) return Parsed::bad;
  out = *value;
  return Parsed::ok;
}

Parsed read_point(const ResolvedColumns& cols, const std::vector<std::string>& row,
                  const std::string& lat_field, const std::string& lon_field,
                  std::optional<GeoPoint>& out) {
  auto lat_text = cols.get(row, lat_field);
  auto lon_text = cols.get(row, lon_field);
  if (!lat_text || !lon_text || lat_text->empty() || lon_text->empty()) return Parsed::blank;
  auto lat = parse_double(*lat_text);
  auto lon = parse_double(*lon_text);
  if (!lat || !lon || *lat < -90.0 || *lat > 90.0 || *lon < -180.0 || *lon > 180.0) {
    return Parsed::bad;
  }
  out = GeoPoint{*lat, *lon};
  return Parsed::ok;
}

bool truthy(std::string_view text) {
  return iequals(text, "true") || iequals(text, "t") || iequals(text, "yes") || text == "1";
}

enum class RowOutcome { loaded, skipped, excluded_status };

RowOutcome parse_trip_row(const ResolvedColumns& cols, const TimestampParser& clock,
                          const ColumnMap& map, const std::vector<std::string>& row,
                          std::size_t line, TripSource source, Trip& trip) {
  trip = Trip{};
  trip.source = source;

  if (cols.has("status")) {
    auto status = cols.get(row, "status");
    if (!status) return RowOutcome::skipped;
    if (!iequals(*status, map.completed_status)) return RowOutcome::excluded_status;
  }

  auto id = cols.get(row, "trip_id");
  trip.trip_id = (id && !id->empty()) ? std::string(*id)
                                      : std::string(source_name(source)) + "-" +
                                            std::to_string(line);

  auto start_text = cols.get(row, "start_ts");
  if (!start_text) return RowOutcome::skipped;
  auto start = clock.parse(*start_text);
  if (!start) return RowOutcome::skipped;
  trip.start_ts = *start;

  std::optional<LocalTime> end;
  if (auto end_text = cols.get(row, "end_ts"); end_text && !end_text->empty()) {
    end = clock.parse(*end_text);
    if (!end) return RowOutcome::skipped;
  }
  double duration = 0.0;
  switch (read_amount(cols.get(row, "duration_s"), duration)) {
    case Parsed::ok:
      trip.duration_s = duration;
      trip.end_ts = end ? *end : *start + std::chrono::seconds{static_cast<long long>(duration)};
      break;
    case Parsed::blank:
      if (!end) return RowOutcome::skipped;
      trip.end_ts = *end;
      trip.duration_s = static_cast<double>((*end - *start).count());
      break;
    case Parsed::bad:
      return RowOutcome::skipped;
  }
  if (trip.end_ts < trip.start_ts || trip.duration_s < 0.0) return RowOutcome::skipped;

  if (read_amount(cols.get(row, "fare"), trip.fare) != Parsed::ok) return RowOutcome::skipped;
  for (auto [field, target] : {std::pair{"tip", &trip.tip},
                               std::pair{"additional_charges", &trip.additional_charges},
                               std::pair{"miles", &trip.miles}}) {
    if (read_amount(cols.get(row, field), *target) == Parsed::bad) return RowOutcome::skipped;
  }
  switch (read_amount(cols.get(row, "total"), trip.total)) {
    case Parsed::ok:
      break;
    case Parsed::blank:
      trip.total = trip.fare + trip.tip + trip.additional_charges;
      break;
    case Parsed::bad:
      return RowOutcome::skipped;
  }

  if (read_point(cols, row, "pickup_lat", "pickup_lon", trip.pickup_point) == Parsed::bad ||
      read_point(cols, row, "dropoff_lat", "dropoff_lon", trip.dropoff_point) == Parsed::bad) {
    return RowOutcome::skipped;
  }
  if (auto area = cols.get(row, "pickup_area"); area && !area->empty()) {
    trip.pickup_area = std::string(*area);
  }
  if (auto area = cols.get(row, "dropoff_area"); area && !area->empty()) {
    trip.dropoff_area = std::string(*area);
  }
  if (auto shared = cols.get(row, "shared")) trip.shared = truthy(*shared);
  return RowOutcome::loaded;
}

TripLoad load_trips(const fs::path& path, const ColumnMap& map, TripSource source,
                    std::optional<YearMonth> month) {
  map.validate_for_trips();
  CsvReader reader = open_csv(path);
  ResolvedColumns cols(reader, map, path);
  TimestampParser clock(map.timestamp_format, map.timezone);

  TripLoad load;
  auto& diag = load.diagnostics;
  std::vector<std::string> row;
  Trip trip;
  while (reader.next(row)) {
    ++diag.raw_rows;
    switch (parse_trip_row(cols, clock, map, row, reader.line(), source, trip)) {
      case RowOutcome::skipped:
        ++diag.skipped;
        continue;
      case RowOutcome::excluded_status:
        ++diag.excluded_by_status;
        continue;
      case RowOutcome::loaded:
        break;
    }
    if (month && !month->contains(date_of(trip.start_ts))) {
      ++diag.excluded_by_month;
      continue;
    }
    if (!trip.pickup_point && !trip.pickup_area) ++diag.missing_location;
    load.trips.push_back(std::move(trip));
  }
  diag.loaded = load.trips.size();

  if (diag.loaded + diag.excluded_by_month + diag.excluded_by_status == 0) {
    throw EmptyInputError(path.string() + ": no parseable rows (" +
                          std::to_string(diag.skipped) + " skipped)");
  }
  if (diag.skipped > 0) {
    diag.warnings.push_back(path.filename().string() + ": skipped " + std::to_string(diag.skipped) +
                            " malformed rows");
  }
  if (diag.missing_location > 0) {
    diag.warnings.push_back(path.filename().string() + ": " + std::to_string(diag.missing_location) +
                            " trips have no pickup location");
  }
  return load;
}

Ring read_ring(const json& coords, const std::string& feature) {
  if (!coords.is_array()) throw GeometryError("feature '" + feature + "': ring is not an array");
  Ring ring;
  ring.reserve(coords.size());
  for (const auto& pos : coords) {
    if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
      throw GeometryError("feature '" + feature + "': bad coordinate");
    }
    ring.push_back(GeoPoint{pos[1].get<double>(), pos[0].get<double>()});
  }
  if (ring.size() < 4) {
    throw GeometryError("feature '" + feature + "': ring has fewer than 4 vertices");
  }
  if (ring.front() != ring.back()) {
    throw GeometryError("feature '" + feature + "': ring is not closed");
  }
  return ring;
}

std::vector<Ring> read_geometry(const json& geometry, const std::string& feature) {
  if (!geometry.is_object()) throw GeometryError("feature '" + feature + "': missing geometry");
  const std::string type = geometry.value("type", "");
  const json& coords = geometry.value("coordinates", json());
  std::vector<Ring> rings;
  if (type == "Polygon" && coords.is_array()) {
    for (const auto& ring : coords) rings.push_back(read_ring(ring, feature));
  } else if (type == "MultiPolygon" && coords.is_array()) {
    for (const auto& polygon : coords) {
      if (!polygon.is_array()) throw GeometryError("feature '" + feature + "': bad polygon");
      for (const auto& ring : polygon) rings.push_back(read_ring(ring, feature));
    }
  } else {
    throw GeometryError("feature '" + feature + "': unsupported geometry type '" + type + "'");
  }
  if (rings.empty()) throw GeometryError("feature '" + feature + "': no rings");
  return rings;
}

}  // namespace

std::string slugify(std::string_view name) {
  std::string out;
  bool pending_sep = false;
  for (char c : name) {
    auto uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc)) {
      if (pending_sep && !out.empty()) out.push_back('_');
      pending_sep = false;
      out.push_back(static_cast<char>(std::tolower(uc)));
    } else {
      pending_sep = true;
    }
  }
  return out;
}

TripLoad load_city_trips(const fs::path& path, const ColumnMap& map,
                         std::optional<YearMonth> month) {
  return load_trips(path, map, TripSource::city, month);
}

TripLoad load_personal_trips(const fs::path& path, const ColumnMap& map) {
  return load_trips(path, map, TripSource::personal, std::nullopt);
}

BoundaryLoad load_boundaries(const fs::path& path, const std::string& name_property) {
  if (!fs::exists(path)) throw IoError("file not found: " + path.string());
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("features") || !doc["features"].is_array()) {
    throw SchemaError(path.string() + ": expected a FeatureCollection with a features array");
  }

  BoundaryLoad load;
  std::set<std::string> used_ids;
  std::size_t index = 0;
  for (const auto& feature : doc["features"]) {
    ++index;
    const json props = feature.value("properties", json::object());
    std::string name;
    if (!name_property.empty()) {
      if (props.contains(name_property) && props[name_property].is_string()) {
        name = props[name_property].get<std::string>();
      }
    } else {
      for (const char* key : {"name", "pri_neigh", "community"}) {
        if (props.contains(key) && props[key].is_string()) {
          name = props[key].get<std::string>();
          break;
        }
      }
    }
    if (trim(name).empty()) {
      throw SchemaError(path.string() + ": feature " + std::to_string(index) + " has no name");
    }

    Neighborhood entry;
    entry.name = std::string(trim(name));
    entry.rings = read_geometry(feature.value("geometry", json()), entry.name);

    std::string base = slugify(entry.name);
    if (base.empty()) base = "area";
    std::string id = base;
    for (int suffix = 2; used_ids.count(id) != 0; ++suffix) {
      id = base + "_" + std::to_string(suffix);
    }
    if (id != base) {
      load.warnings.push_back("duplicate neighborhood '" + entry.name + "' stored as id '" + id +
                              "'");
    }
    used_ids.insert(id);
    entry.id = std::move(id);
    load.set.entries.push_back(std::move(entry));
  }
  if (load.set.entries.empty()) throw EmptyInputError(path.string() + ": no features");
  return load;
}

WeatherLoad load_weather(const fs::path& path, const ColumnMap& map) {
  for (const char* field : {"ts", "temp_f", "precip_in"}) {
    if (!map.maps(field)) throw ConfigError(std::string("weather column map must map ") + field);
  }
  CsvReader reader = open_csv(path);
  ResolvedColumns cols(reader, map, path);
  TimestampParser clock(map.timestamp_format, map.timezone);

  WeatherLoad load;
  auto& diag = load.diagnostics;
  std::vector<WeatherRecord> rows;
  std::vector<std::string> row;
  while (reader.next(row)) {
    ++diag.raw_rows;
    auto ts_text = cols.get(row, "ts");
    auto ts = ts_text ? clock.parse(*ts_text) : std::nullopt;
    auto temp = parse_double(cols.get(row, "temp_f").value_or(""));
    double precip = 0.0;
    if (!ts || !temp || read_amount(cols.get(row, "precip_in"), precip) == Parsed::bad) {
      ++diag.skipped;
      continue;
    }
    rows.push_back(WeatherRecord{floor_to_hour(*ts), *temp, precip});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.hour_ts < b.hour_ts; });
  for (auto& record : rows) {
    auto& out = load.series.records;
    if (!out.empty() && out.back().hour_ts == record.hour_ts) {
      out.back() = record;  // later row wins
      ++diag.duplicates_replaced;
    } else {
      out.push_back(record);
    }
  }
  diag.loaded = load.series.records.size();
  if (diag.loaded == 0) throw EmptyInputError(path.string() + ": no parseable weather rows");
  return load;
}

PingLoad load_location_pings(const fs::path& path, const ColumnMap& map) {
  for (const char* field : {"ts", "lat", "lon"}) {
    if (!map.maps(field)) throw ConfigError(std::string("ping column map must map ") + field);
  }
  CsvReader reader = open_csv(path);
  ResolvedColumns cols(reader, map, path);
  TimestampParser clock(map.timestamp_format, map.timezone);

  PingLoad load;
  auto& diag = load.diagnostics;
  auto& pings = load.series.pings;
  std::vector<std::string> row;
  while (reader.next(row)) {
    ++diag.raw_rows;
    auto ts_text = cols.get(row, "ts");
    auto ts = ts_text ? clock.parse(*ts_text) : std::nullopt;
    std::optional<GeoPoint> point;
    if (!ts || read_point(cols, row, "lat", "lon", point) != Parsed::ok) {
      ++diag.skipped;
      continue;
    }
    pings.push_back(Ping{*ts, *point});
  }
  if (pings.empty()) throw EmptyInputError(path.string() + ": no pings");

  std::stable_sort(pings.begin(), pings.end(),
                   [](const Ping& a, const Ping& b) { return a.ts < b.ts; });
  const LocalTime cutoff = pings.back().ts - std::chrono::days{kPingWindowDays};
  auto first_kept = std::lower_bound(pings.begin(), pings.end(), cutoff,
                                     [](const Ping& p, LocalTime t) { return p.ts < t; });
  diag.dropped_old = static_cast<std::size_t>(first_kept - pings.begin());
  pings.erase(pings.begin(), first_kept);
  if (diag.dropped_old > 0) {
    diag.warnings.push_back(path.filename().string() + ": dropped " + std::to_string(diag.dropped_old) +
                            " pings older than " + std::to_string(kPingWindowDays) +
                            " days before the newest");
  }
  diag.loaded = pings.size();
  return load;
}

}  // namespace rideprobe
