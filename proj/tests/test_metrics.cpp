#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "rideprobe/metrics.hpp"

using namespace rideprobe;
using namespace std::chrono;

namespace {

LocalTime at(const char* text) { return *parse_timestamp(text); }

Trip trip(const char* start, double minutes, double fare, double tip = 0.0) {
  Trip t;
  t.start_ts = at(start);
  t.duration_s = minutes * 60.0;
  t.end_ts = t.start_ts + seconds{static_cast<long long>(t.duration_s)};
  t.fare = fare;
  t.tip = tip;
  t.total = fare + tip + 1.0;
  return t;
}

const std::vector<std::string> kAreas = {"albany_park", "loop", "near_north", "uptown", "west_town"};

/// floor((v - min) / (max - min) * n), top value folded into the last shade.
int shade_of(double v, double lo, double hi, int n) {
  if (hi == lo) return n - 1;
  return std::min(n - 1, static_cast<int>(std::floor((v - lo) / (hi - lo) * n)));
}

}  // namespace

TEST_CASE("fare per minute is a ratio of sums, zero durations left out") {
  const std::vector<Trip> trips = {trip("2022-06-01T10:00:00", 10, 10), trip("2022-06-01T10:10:00", 20, 30),
                                   trip("2022-06-01T10:20:00", 0, 8)};
  TripAccumulator acc;
  for (const auto& t : trips) acc.add(t);
  CHECK(acc.count == 3);
  CHECK(*acc.fare_per_minute() == doctest::Approx(40.0 / 30.0).epsilon(1e-15));
  CHECK(*acc.fare_per_minute(RateMethod::mean_of_ratios) == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(*acc.avg_fare() == doctest::Approx(16.0));
  CHECK(*acc.avg_duration_min() == doctest::Approx(15.0));

  TripAccumulator only_zero;
  only_zero.add(trips[2]);
  CHECK_FALSE(only_zero.fare_per_minute());
  CHECK_FALSE(only_zero.avg_duration_min());
  CHECK(only_zero.avg_fare() == 8.0);
  CHECK_FALSE(TripAccumulator{}.avg_fare());
}

TEST_CASE("earnings definitions") {
  const Trip t = trip("2022-06-01T10:00:00", 10, 10, 2);
  CHECK(trip_earnings(t, EarningsDefinition::fare_plus_tip) == 12.0);
  CHECK(trip_earnings(t, EarningsDefinition::trip_total) == 13.0);
}

TEST_CASE("hourly series follows the driver's day") {
  const std::vector<Trip> trips = {trip("2022-06-07T03:30:00", 10, 10), trip("2022-06-07T04:10:00", 10, 12)};
  const auto zero = hourly_stats(trips, 0);
  REQUIRE(zero.size() == 24);
  CHECK(zero[3].hour == 3);
  CHECK(zero[3].trip_count == 1);
  CHECK_FALSE(zero[5].avg_fare);

  const auto four = hourly_stats(trips, 4);
  CHECK(four[0].hour == 4);
  CHECK(four[0].trip_count == 1);
  CHECK(four[23].hour == 3);
  CHECK(four[23].trip_count == 1);
}

TEST_CASE("hourly partition and ratio-of-sums identity") {
  std::mt19937_64 rng(31);
  for (int c = 0; c < 200; ++c) {
    const auto trips = oracle::random_corpus(rng, 1 + c * 7 % 400, kAreas, false);
    const int offset = c % 24;
    const auto stats = hourly_stats(trips, offset);
    REQUIRE(stats.size() == 24);
    std::size_t total = 0;
    for (int b = 0; b < 24; ++b) {
      const auto& s = stats[static_cast<std::size_t>(b)];
      CHECK(s.hour == (b + offset) % 24);
      total += s.trip_count;

      double fare = 0, minutes = 0;
      std::size_t n = 0;
      for (const auto& t : trips) {
        if (oracle::wall_hour(t.start_ts) != s.hour) continue;
        ++n;
        if (t.duration_s > 0) {
          fare += t.fare;
          minutes += t.duration_s / 60.0;
        }
      }
      CHECK(s.trip_count == n);
      if (minutes > 0) {
        REQUIRE(s.fare_per_minute);
        CHECK(oracle::close(*s.fare_per_minute, fare / minutes, 1e-12));
      } else {
        CHECK_FALSE(s.fare_per_minute);
      }
    }
    CHECK(total == trips.size());
  }
}

TEST_CASE("accumulators merge like one pass") {
  std::mt19937_64 rng(32);
  for (int c = 0; c < 200; ++c) {
    const auto trips = oracle::random_corpus(rng, 2 + c, kAreas, false);
    const std::size_t cut = c % trips.size();
    TripAccumulator whole, left, right;
    for (std::size_t i = 0; i < trips.size(); ++i) {
      whole.add(trips[i]);
      (i < cut ? left : right).add(trips[i]);
    }
    left.merge(right);
    CHECK(left.count == whole.count);
    CHECK(left.timed_count == whole.timed_count);
    if (whole.fare_per_minute()) {
      CHECK(oracle::close(*left.fare_per_minute(), *whole.fare_per_minute(), 1e-12));
    }
    CHECK(oracle::close(left.earnings_sum, whole.earnings_sum, 1e-12));
  }
}

TEST_CASE("daily totals and shades") {
  std::mt19937_64 rng(33);
  const DateRange range{year{2022} / 6 / 1, year{2022} / 6 / 20};
  CHECK(range.days() == 20);
  CHECK(range.contains(year{2022} / 6 / 20));
  CHECK_FALSE(range.contains(year{2022} / 6 / 21));
  for (int c = 0; c < 50; ++c) {
    const auto trips = oracle::random_corpus(rng, 30 + c * 5, kAreas, false);
    const int offset = c % 2 == 0 ? 0 : 4;
    const auto defn = c % 3 == 0 ? EarningsDefinition::trip_total : EarningsDefinition::fare_plus_tip;
    const auto days = daily_stats(trips, range, 5, offset, {RateMethod::ratio_of_sums, defn});

    std::map<long long, std::pair<std::size_t, double>> truth;
    for (const auto& t : trips) {
      const long long d = oracle::driver_day(t.start_ts, offset);
      const long long first = sys_days{range.first}.time_since_epoch().count();
      const long long last = sys_days{range.last}.time_since_epoch().count();
      if (d < first || d > last) continue;
      auto& [n, sum] = truth[d];
      ++n;
      sum += defn == EarningsDefinition::trip_total ? t.total : t.fare + t.tip;
    }
    REQUIRE(days.size() == truth.size());
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& [d, v] : truth) {
      lo = std::min(lo, v.second);
      hi = std::max(hi, v.second);
    }
    for (const auto& [d, v] : truth) {
      const Date date{sys_days{std::chrono::days{d}}};
      const auto it = days.find(date);
      REQUIRE(it != days.end());
      CHECK(it->second.trip_count == v.first);
      CHECK(oracle::close(it->second.total_earnings, v.second, 1e-12));
      CHECK(it->second.shade == shade_of(it->second.total_earnings, lo, hi, 5));
    }
  }
}

TEST_CASE("shade scale") {
  const std::vector<double> v = {0, 1, 2, 3, 4};
  CHECK(shade_scale(v, 5) == std::vector<int>{0, 1, 2, 3, 4});
  const std::vector<double> flat = {7, 7, 7};
  CHECK(shade_scale(flat, 5) == std::vector<int>{4, 4, 4});
  const std::vector<double> two = {10, 20};
  CHECK(shade_scale(two, 3) == std::vector<int>{0, 2});
  CHECK_THROWS_AS(shade_scale(std::span<const double>{}, 5), std::invalid_argument);
  CHECK_THROWS_AS(shade_scale(v, 1), std::invalid_argument);
}

TEST_CASE("weekday matrix counts") {
  std::mt19937_64 rng(34);
  for (int c = 0; c < 50; ++c) {
    const auto trips = oracle::random_corpus(rng, 100, kAreas, false);
    const int offset = c % 24;
    const auto w = weekday_stats(trips, offset);
    std::array<std::size_t, 7> truth{};
    for (const auto& t : trips) ++truth[static_cast<std::size_t>(oracle::weekday_index(t.start_ts, offset))];
    for (int d = 0; d < 7; ++d) {
      CHECK(w[static_cast<std::size_t>(d)].weekday == static_cast<Weekday>(d));
      CHECK(w[static_cast<std::size_t>(d)].total_trips == truth[static_cast<std::size_t>(d)]);
    }
  }
}

TEST_CASE("neighborhood stats and shading") {
  std::mt19937_64 rng(35);
  const auto trips = oracle::random_corpus(rng, 500, kAreas, false);
  const auto stats = neighborhood_stats(trips, TripEnd::pickup);
  std::size_t counted = stats.unclassified;
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& [id, s] : stats.entries) {
    counted += s.trip_count;
    lo = std::min(lo, *s.fare_per_minute);
    hi = std::max(hi, *s.fare_per_minute);
    std::size_t n = 0;
    for (const auto& t : trips) n += t.pickup_area == id;
    CHECK(s.trip_count == n);
  }
  CHECK(counted == trips.size());
  for (const auto& [id, s] : stats.entries) CHECK(s.shade == shade_of(*s.fare_per_minute, lo, hi, 5));
  CHECK(linked_dropoff_stats(trips, "nowhere").entries.empty());
}

TEST_CASE("linked drop-off map equals stats over the pickup subset") {
  std::mt19937_64 rng(36);
  for (int c = 0; c < 200; ++c) {
    const auto trips = oracle::random_corpus(rng, 20 + c, kAreas, false);
    for (const auto& id : kAreas) {
      std::vector<Trip> subset;
      for (const auto& t : trips) {
        if (t.pickup_area == id) subset.push_back(t);
      }
      CHECK(linked_dropoff_stats(trips, id) == neighborhood_stats(subset, TripEnd::dropoff));
    }
  }
}

TEST_CASE("weather attaches by start hour") {
  WeatherSeries w;
  w.records = {{at("2022-06-01T10:00:00"), 71.0, 0.0}, {at("2022-06-01T11:00:00"), 72.0, 0.3}};
  const auto r = attach_weather({trip("2022-06-01T10:59:59", 5, 5), trip("2022-06-01T11:00:00", 5, 5),
                                 trip("2022-06-01T12:10:00", 5, 5)},
                                w);
  CHECK(r.trips[0].temp_f == 71.0);
  CHECK(r.trips[1].precip_in == 0.3);
  CHECK_FALSE(r.trips[2].temp_f);
  CHECK(r.unmatched == 1);
}
