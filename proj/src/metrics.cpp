#include "rideprobe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rideprobe {

double trip_earnings(const Trip& trip, EarningsDefinition earnings) noexcept {
  return earnings == EarningsDefinition::trip_total ? trip.total : trip.fare + trip.tip;
}

void TripAccumulator::add(const Trip& trip, EarningsDefinition earnings) {
  ++count;
  fare_sum += trip.fare;
  tip_sum += trip.tip;
  miles_sum += trip.miles;
  earnings_sum += trip_earnings(trip, earnings);
  if (trip.duration_s > 0.0) {
    ++timed_count;
    timed_fare_sum += trip.fare;
    minutes_sum += trip.duration_min();
    ratio_sum += trip.fare / trip.duration_min();
  }
}

void TripAccumulator::merge(const TripAccumulator& other) {
  count += other.count;
  timed_count += other.timed_count;
  fare_sum += other.fare_sum;
  timed_fare_sum += other.timed_fare_sum;
  minutes_sum += other.minutes_sum;
  ratio_sum += other.ratio_sum;
  tip_sum += other.tip_sum;
  miles_sum += other.miles_sum;
  earnings_sum += other.earnings_sum;
}

std::optional<double> TripAccumulator::fare_per_minute(RateMethod method) const {
  if (timed_count == 0) return std::nullopt;
  if (method == RateMethod::mean_of_ratios) return ratio_sum / static_cast<double>(timed_count);
  return timed_fare_sum / minutes_sum;
}

std::optional<double> TripAccumulator::avg_fare() const {
  if (count == 0) return std::nullopt;
  return fare_sum / static_cast<double>(count);
}

std::optional<double> TripAccumulator::avg_duration_min() const {
  if (timed_count == 0) return std::nullopt;
  return minutes_sum / static_cast<double>(timed_count);
}

std::optional<double> TripAccumulator::avg_miles() const {
  if (count == 0) return std::nullopt;
  return miles_sum / static_cast<double>(count);
}

std::optional<double> TripAccumulator::avg_tip() const {
  if (count == 0) return std::nullopt;
  return tip_sum / static_cast<double>(count);
}

WeatherAttachResult attach_weather(std::vector<Trip> trips, const WeatherSeries& weather) {
  WeatherAttachResult result;
  for (auto& trip : trips) {
    if (const WeatherRecord* rec = weather.at_hour(floor_to_hour(trip.start_ts))) {
      trip.temp_f = rec->temp_f;
      trip.precip_in = rec->precip_in;
    } else {
      trip.temp_f.reset();
      trip.precip_in.reset();
      ++result.unmatched;
    }
  }
  result.trips = std::move(trips);
  return result;
}

HourlyBuckets accumulate_hourly(std::span<const Trip> trips, int day_start_offset_hours,
                                const MetricOptions& options) {
  HourlyBuckets buckets{};
  for (const auto& trip : trips) {
    const int bucket = hour_of(shift_to_driver_day(trip.start_ts, day_start_offset_hours));
    buckets[static_cast<std::size_t>(bucket)].add(trip, options.earnings);
  }
  return buckets;
}

std::vector<HourlyStat> finish_hourly(const HourlyBuckets& buckets, int day_start_offset_hours,
                                      const MetricOptions& options) {
  std::vector<HourlyStat> out;
  out.reserve(24);
  for (int b = 0; b < 24; ++b) {
    const auto& acc = buckets[static_cast<std::size_t>(b)];
    HourlyStat stat;
    stat.hour = ((b + day_start_offset_hours) % 24 + 24) % 24;
    stat.trip_count = acc.count;
    stat.fare_per_minute = acc.fare_per_minute(options.rate);
    stat.avg_fare = acc.avg_fare();
    stat.avg_duration_min = acc.avg_duration_min();
    out.push_back(stat);
  }
  return out;
}

std::vector<HourlyStat> hourly_stats(std::span<const Trip> trips, int day_start_offset_hours,
                                     const MetricOptions& options) {
  return finish_hourly(accumulate_hourly(trips, day_start_offset_hours, options),
                       day_start_offset_hours, options);
}

bool DateRange::contains(Date d) const noexcept {
  const std::chrono::sys_days x{d};
  return x >= std::chrono::sys_days{first} && x <= std::chrono::sys_days{last};
}

int DateRange::days() const noexcept {
  return static_cast<int>((std::chrono::sys_days{last} - std::chrono::sys_days{first}).count()) + 1;
}

std::map<Date, DayStat> daily_stats(std::span<const Trip> trips, const DateRange& range,
                                    int n_shades, int day_start_offset_hours,
                                    const MetricOptions& options) {
  std::map<Date, TripAccumulator> by_day;
  for (const auto& trip : trips) {
    const Date d = date_of(trip.start_ts, day_start_offset_hours);
    if (range.contains(d)) by_day[d].add(trip, options.earnings);
  }
  std::map<Date, DayStat> out;
  if (by_day.empty()) return out;

  std::vector<double> earnings;
  for (const auto& [date, acc] : by_day) earnings.push_back(acc.earnings_sum);
  const auto shades = shade_scale(earnings, n_shades);

  std::size_t i = 0;
  for (const auto& [date, acc] : by_day) {
    DayStat stat;
    stat.date = date;
    stat.trip_count = acc.count;
    stat.total_earnings = acc.earnings_sum;
    stat.fare_per_minute = acc.fare_per_minute(options.rate);
    stat.avg_fare = acc.avg_fare();
    stat.shade = shades[i++];
    out.emplace(date, stat);
  }
  return out;
}

std::array<WeekdayStat, kWeekdayCount> weekday_stats(std::span<const Trip> trips,
                                                     int day_start_offset_hours,
                                                     const MetricOptions& options) {
  std::array<TripAccumulator, kWeekdayCount> acc{};
  for (const auto& trip : trips) {
    acc[static_cast<std::size_t>(weekday_of(trip.start_ts, day_start_offset_hours))].add(
        trip, options.earnings);
  }
  std::array<WeekdayStat, kWeekdayCount> out{};
  for (int d = 0; d < kWeekdayCount; ++d) {
    const auto& a = acc[static_cast<std::size_t>(d)];
    auto& s = out[static_cast<std::size_t>(d)];
    s.weekday = static_cast<Weekday>(d);
    s.total_trips = a.count;
    s.avg_fare = a.avg_fare();
    s.avg_duration_min = a.avg_duration_min();
    s.fare_per_minute = a.fare_per_minute(options.rate);
  }
  return out;
}

namespace {

NeighborhoodStats finish_neighborhoods(const std::map<std::string, TripAccumulator>& by_area,
                                       std::size_t unclassified, int n_shades,
                                       const MetricOptions& options) {
  NeighborhoodStats out;
  out.unclassified = unclassified;
  std::vector<double> rates;
  for (const auto& [id, acc] : by_area) {
    NeighborhoodStat stat;
    stat.id = id;
    stat.trip_count = acc.count;
    stat.fare_per_minute = acc.fare_per_minute(options.rate);
    stat.avg_fare = acc.avg_fare();
    stat.avg_miles_per_trip = acc.avg_miles();
    if (stat.fare_per_minute) rates.push_back(*stat.fare_per_minute);
    out.entries.emplace(id, std::move(stat));
  }
  if (!rates.empty()) {
    const auto shades = shade_scale(rates, n_shades);
    std::size_t i = 0;
    for (auto& [id, stat] : out.entries) {
      if (stat.fare_per_minute) stat.shade = shades[i++];
    }
  }
  return out;
}

const std::optional<std::string>& area_at(const Trip& trip, TripEnd end) {
  return end == TripEnd::pickup ? trip.pickup_area : trip.dropoff_area;
}

}  // namespace

NeighborhoodStats neighborhood_stats(std::span<const Trip> trips, TripEnd end, int n_shades,
                                     const MetricOptions& options) {
  std::map<std::string, TripAccumulator> by_area;
  std::size_t unclassified = 0;
  for (const auto& trip : trips) {
    const auto& area = area_at(trip, end);
    if (!area) {
      ++unclassified;
      continue;
    }
    by_area[*area].add(trip, options.earnings);
  }
  return finish_neighborhoods(by_area, unclassified, n_shades, options);
}

NeighborhoodStats linked_dropoff_stats(std::span<const Trip> trips, const std::string& pickup_id,
                                       int n_shades, const MetricOptions& options) {
  std::map<std::string, TripAccumulator> by_area;
  std::size_t unclassified = 0;
  for (const auto& trip : trips) {
    if (trip.pickup_area != pickup_id) continue;
    if (!trip.dropoff_area) {
      ++unclassified;
      continue;
    }
    by_area[*trip.dropoff_area].add(trip, options.earnings);
  }
  return finish_neighborhoods(by_area, unclassified, n_shades, options);
}

std::vector<int> shade_scale(std::span<const double> values, int n_shades) {
  if (values.empty()) throw std::invalid_argument("shade_scale: no values");
  if (n_shades < 2) throw std::invalid_argument("shade_scale: n_shades must be at least 2");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  std::vector<int> out;
  out.reserve(values.size());
  const int top = n_shades - 1;
  for (double v : values) {
    if (!(hi > lo)) {
      out.push_back(top);
      continue;
    }
    const double scaled = std::floor((v - lo) / (hi - lo) * n_shades);
    out.push_back(std::clamp(static_cast<int>(scaled), 0, top));
  }
  return out;
}

}  // namespace rideprobe
