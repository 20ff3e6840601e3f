#pragma once

// Synthetic Chicago-shaped data: a jittered grid of neighborhoods, city and
// personal trip tables, hourly weather and location pings, written in the
// same layouts the real exports use.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rideprobe/domain.hpp"

namespace rideprobe::synth {

struct Bbox {
  double lat0 = 41.65;
  double lat1 = 42.02;
  double lon0 = -87.94;
  double lon1 = -87.52;
};

/// rows x cols quads over `box` with interior vertices jittered, so cells
/// tile the box exactly but are not rectangles. Ids "zone_01".. in row order.
NeighborhoodSet grid_neighborhoods(int rows, int cols, std::mt19937_64& rng, Bbox box = {});

void write_geojson(const std::filesystem::path& path, const NeighborhoodSet& set,
                   const std::string& name_property = "pri_neigh");

struct TripOptions {
  Date first = std::chrono::year{2022} / 6 / 1;
  Date last = std::chrono::year{2022} / 6 / 30;
  Bbox box;
  double zero_duration_rate = 0.02;
  double outside_rate = 0.03;   // point outside the box
  double missing_rate = 0.01;   // no coordinates at all
  TripSource source = TripSource::city;
};

/// Trips with cent-rounded money and no areas; start times local wall clock.
std::vector<Trip> random_trips(std::mt19937_64& rng, std::size_t n, const TripOptions& options = {});

/// Chicago TNP layout, 12-hour local timestamps.
void write_city_csv(const std::filesystem::path& path, const std::vector<Trip>& trips);

/// Personal export layout, UTC timestamps. `cancelled` extra rows are
/// appended with a non-completed status.
void write_personal_csv(const std::filesystem::path& path, const std::vector<Trip>& trips,
                        std::size_t cancelled = 0);

/// Hourly rows from `first` 00:00 through `last` 23:00; roughly one hour in
/// eight is wet.
WeatherSeries random_weather(std::mt19937_64& rng, Date first, Date last);
void write_weather_csv(const std::filesystem::path& path, const WeatherSeries& weather);

/// One ping a minute between 08:00 and 12:00 on each date, with a 20-minute
/// silence starting 10:00.
PingSeries random_pings(std::mt19937_64& rng, const std::vector<Date>& dates, Bbox box = {});
void write_pings_csv(const std::filesystem::path& path, const PingSeries& pings);

struct FixtureOptions {
  std::size_t city_trips = 2000;
  std::size_t personal_trips = 200;
  std::size_t cancelled_trips = 5;
  int rows = 14;
  int cols = 7;
  bool pings = true;
  std::uint64_t seed = 7;
  int day_start_offset = 0;
};

struct Fixture {
  std::filesystem::path dir;
  std::filesystem::path config;
  NeighborhoodSet boundaries;
  std::vector<Trip> city;
  std::vector<Trip> personal;
  WeatherSeries weather;
  std::optional<PingSeries> pings;
};

/// City trips in June 2022, personal trips May-June 2022, weather for both
/// months. Writes data files and config.json into `dir`.
Fixture write_fixture(const std::filesystem::path& dir, const FixtureOptions& options = {});

}  // namespace rideprobe::synth
