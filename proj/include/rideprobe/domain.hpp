#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rideprobe/time.hpp"

namespace rideprobe {

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  bool operator==(const GeoPoint&) const = default;
};

enum class TripSource { personal, city };

std::string_view source_name(TripSource source) noexcept;

struct Trip {
  std::string trip_id;
  LocalTime start_ts{};
  LocalTime end_ts{};
  double duration_s = 0.0;
  double miles = 0.0;
  double fare = 0.0;
  double tip = 0.0;
  double additional_charges = 0.0;
  double total = 0.0;
  std::optional<GeoPoint> pickup_point;
  std::optional<GeoPoint> dropoff_point;
  std::optional<std::string> pickup_area;
  std::optional<std::string> dropoff_area;
  TripSource source = TripSource::city;
  // Pooled ride; kept in every aggregate, only carried for downstream use.
  bool shared = false;
  // Populated by attach_weather.
  std::optional<double> temp_f;
  std::optional<double> precip_in;

  double duration_min() const noexcept { return duration_s / 60.0; }

  bool operator==(const Trip&) const = default;
};

/// Closed ring: first vertex repeated as last.
using Ring = std::vector<GeoPoint>;

struct Neighborhood {
  std::string id;
  std::string name;
  std::vector<Ring> rings;

  bool operator==(const Neighborhood&) const = default;
};

struct NeighborhoodSet {
  std::vector<Neighborhood> entries;

  const Neighborhood* find(std::string_view id) const noexcept;
  bool operator==(const NeighborhoodSet&) const = default;
};

struct WeatherRecord {
  LocalTime hour_ts{};
  double temp_f = 0.0;
  double precip_in = 0.0;

  bool operator==(const WeatherRecord&) const = default;
};

struct WeatherSeries {
  std::vector<WeatherRecord> records;  // strictly increasing hour_ts

  const WeatherRecord* at_hour(LocalTime hour_ts) const noexcept;
  bool operator==(const WeatherSeries&) const = default;
};

struct Ping {
  LocalTime ts{};
  GeoPoint point;

  bool operator==(const Ping&) const = default;
};

struct PingSeries {
  std::vector<Ping> pings;  // ts non-decreasing

  bool operator==(const PingSeries&) const = default;
};

/// Canonical field name -> source column name, plus how to read timestamps.
///
/// Trip fields: trip_id, start_ts, end_ts, duration_s, miles, fare, tip,
/// additional_charges, total, pickup_lat, pickup_lon, dropoff_lat,
/// dropoff_lon, pickup_area, dropoff_area, status, shared.
/// Ping fields: ts, lat, lon. Weather fields: ts, temp_f, precip_in.
struct ColumnMap {
  std::map<std::string, std::string> columns;
  std::string timestamp_format = "%Y-%m-%d %H:%M:%S";
  std::string timezone = "America/Chicago";
  // Rows whose mapped status column differs from this (case-insensitive)
  // are excluded.
  std::string completed_status = "completed";

  std::optional<std::string> column(const std::string& field) const;
  bool maps(const std::string& field) const { return columns.count(field) != 0; }

  /// Throws ConfigError unless start_ts, fare and one of duration_s/end_ts are mapped.
  void validate_for_trips() const;

  bool operator==(const ColumnMap&) const = default;
};

/// Chicago Transportation Network Providers trip table.
ColumnMap chicago_tnp_columns();
/// Best-effort guess at a driver's personal trip export.
ColumnMap personal_export_columns();
ColumnMap location_ping_columns();
ColumnMap weather_columns();

}  // namespace rideprobe
