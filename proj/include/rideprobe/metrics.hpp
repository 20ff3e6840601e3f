#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rideprobe/domain.hpp"

namespace rideprobe {

enum class RateMethod {
  ratio_of_sums,   // sum(fare) / sum(minutes)
  mean_of_ratios,  // mean(fare / minutes), for sensitivity checks
};

enum class EarningsDefinition {
  fare_plus_tip,
  trip_total,
};

struct MetricOptions {
  RateMethod rate = RateMethod::ratio_of_sums;
  EarningsDefinition earnings = EarningsDefinition::fare_plus_tip;
};

inline constexpr int kDefaultShades = 5;

/// Running sums for one bucket. Trips with zero duration count toward
/// `count` and fare/tip/miles means but not toward per-minute figures.
/// merge() is associative, so buckets can be filled per partition.
struct TripAccumulator {
  std::size_t count = 0;
  std::size_t timed_count = 0;
  double fare_sum = 0.0;
  double timed_fare_sum = 0.0;
  double minutes_sum = 0.0;
  double ratio_sum = 0.0;
  double tip_sum = 0.0;
  double miles_sum = 0.0;
  double earnings_sum = 0.0;

  void add(const Trip& trip, EarningsDefinition earnings = EarningsDefinition::fare_plus_tip);
  void merge(const TripAccumulator& other);

  std::optional<double> fare_per_minute(RateMethod method = RateMethod::ratio_of_sums) const;
  std::optional<double> avg_fare() const;
  std::optional<double> avg_duration_min() const;
  std::optional<double> avg_miles() const;
  std::optional<double> avg_tip() const;
};

double trip_earnings(const Trip& trip, EarningsDefinition earnings) noexcept;

struct WeatherAttachResult {
  std::vector<Trip> trips;
  std::size_t unmatched = 0;
};

/// Matches each trip to the record for floor-to-hour(start_ts).
WeatherAttachResult attach_weather(std::vector<Trip> trips, const WeatherSeries& weather);

struct HourlyStat {
  int hour = 0;  // wall-clock hour
  std::size_t trip_count = 0;
  std::optional<double> fare_per_minute;
  std::optional<double> avg_fare;
  std::optional<double> avg_duration_min;

  bool operator==(const HourlyStat&) const = default;
};

using HourlyBuckets = std::array<TripAccumulator, 24>;

/// Bucket index = hour of (start_ts - offset); bucket b displays wall-clock
/// hour (b + offset) % 24, so the series reads as the driver's day.
HourlyBuckets accumulate_hourly(std::span<const Trip> trips, int day_start_offset_hours,
                                const MetricOptions& options = {});
std::vector<HourlyStat> finish_hourly(const HourlyBuckets& buckets, int day_start_offset_hours,
                                      const MetricOptions& options = {});

/// 24 entries in driver-day order starting at the offset hour.
std::vector<HourlyStat> hourly_stats(std::span<const Trip> trips, int day_start_offset_hours = 0,
                                     const MetricOptions& options = {});

struct DateRange {
  Date first;
  Date last;  // inclusive

  bool contains(Date d) const noexcept;
  int days() const noexcept;
};

struct DayStat {
  Date date;
  std::size_t trip_count = 0;
  double total_earnings = 0.0;
  std::optional<double> fare_per_minute;
  std::optional<double> avg_fare;
  int shade = 0;

  bool operator==(const DayStat&) const = default;
};

/// One entry per date in `range` with at least one trip.
std::map<Date, DayStat> daily_stats(std::span<const Trip> trips, const DateRange& range,
                                    int n_shades = kDefaultShades,
                                    int day_start_offset_hours = 0,
                                    const MetricOptions& options = {});

struct WeekdayStat {
  Weekday weekday = Weekday::mon;
  std::size_t total_trips = 0;
  std::optional<double> avg_fare;
  std::optional<double> avg_duration_min;
  std::optional<double> fare_per_minute;

  bool operator==(const WeekdayStat&) const = default;
};

/// Always Mon..Sun.
std::array<WeekdayStat, kWeekdayCount> weekday_stats(std::span<const Trip> trips,
                                                     int day_start_offset_hours = 0,
                                                     const MetricOptions& options = {});

enum class TripEnd { pickup, dropoff };

struct NeighborhoodStat {
  std::string id;
  std::size_t trip_count = 0;
  std::optional<double> fare_per_minute;
  std::optional<double> avg_fare;
  std::optional<double> avg_miles_per_trip;
  // Absent when fare_per_minute is (every trip had zero duration).
  std::optional<int> shade;

  bool operator==(const NeighborhoodStat&) const = default;
};

struct NeighborhoodStats {
  std::map<std::string, NeighborhoodStat> entries;
  std::size_t unclassified = 0;

  bool operator==(const NeighborhoodStats&) const = default;
};

NeighborhoodStats neighborhood_stats(std::span<const Trip> trips, TripEnd end,
                                     int n_shades = kDefaultShades,
                                     const MetricOptions& options = {});

/// neighborhood_stats(end = dropoff) over trips that picked up in `pickup_id`.
/// An unknown id yields an empty map.
NeighborhoodStats linked_dropoff_stats(std::span<const Trip> trips, const std::string& pickup_id,
                                       int n_shades = kDefaultShades,
                                       const MetricOptions& options = {});

/// Linear binning between min and max into 0..n_shades-1. Constant input
/// maps to the top shade. Throws std::invalid_argument for empty input or
/// n_shades < 2.
std::vector<int> shade_scale(std::span<const double> values, int n_shades);

}  // namespace rideprobe
