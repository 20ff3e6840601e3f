#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rideprobe/domain.hpp"

namespace rideprobe {

/// Tally of what happened to each input row.
struct LoadDiagnostics {
  std::size_t raw_rows = 0;
  std::size_t loaded = 0;
  std::size_t skipped = 0;             // numeric/timestamp parse failures
  std::size_t excluded_by_month = 0;
  std::size_t excluded_by_status = 0;  // non-completed personal trips
  std::size_t missing_location = 0;    // kept, but no pickup point or area
  std::size_t dropped_old = 0;         // pings outside the trailing window
  std::size_t duplicates_replaced = 0;
  std::vector<std::string> warnings;

  bool operator==(const LoadDiagnostics&) const = default;
};

struct TripLoad {
  std::vector<Trip> trips;
  LoadDiagnostics diagnostics;
};

struct BoundaryLoad {
  NeighborhoodSet set;
  std::vector<std::string> warnings;
};

struct WeatherLoad {
  WeatherSeries series;
  LoadDiagnostics diagnostics;
};

struct PingLoad {
  PingSeries series;
  LoadDiagnostics diagnostics;
};

/// Pings older than this before the newest ping are dropped, matching the
/// export window platforms give drivers.
inline constexpr int kPingWindowDays = 30;

TripLoad load_city_trips(const std::filesystem::path& path, const ColumnMap& map,
                         std::optional<YearMonth> month = std::nullopt);

TripLoad load_personal_trips(const std::filesystem::path& path, const ColumnMap& map);

/// GeoJSON FeatureCollection of Polygon/MultiPolygon features. The display
/// name comes from `name_property`, or the first of "name", "pri_neigh",
/// "community" present when empty. Ids are lowercase slugs of the name.
BoundaryLoad load_boundaries(const std::filesystem::path& path,
                             const std::string& name_property = {});

WeatherLoad load_weather(const std::filesystem::path& path,
                         const ColumnMap& map = weather_columns());

PingLoad load_location_pings(const std::filesystem::path& path,
                             const ColumnMap& map = location_ping_columns());

/// Lowercase, runs of non-alphanumerics collapsed to '_'.
std::string slugify(std::string_view name);

}  // namespace rideprobe
