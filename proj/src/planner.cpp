#include "rideprobe/planner.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace rideprobe {

std::set<Weekday> all_weekdays() {
  std::set<Weekday> days;
  for (int d = 0; d < kWeekdayCount; ++d) days.insert(static_cast<Weekday>(d));
  return days;
}

std::set<int> all_hours() {
  std::set<int> hours;
  for (int h = 0; h < 24; ++h) hours.insert(h);
  return hours;
}

std::map<std::string, std::string> validate(const PlannerInput& input) {
  std::map<std::string, std::string> errors;
  if (!(input.hours_per_week > 0.0) || !std::isfinite(input.hours_per_week)) {
    errors["hours_per_week"] = "must be greater than 0";
  } else if (input.hours_per_week > 168.0) {
    errors["hours_per_week"] = "cannot exceed 168 hours in a week";
  }
  if (input.days.empty()) errors["days"] = "choose at least one day";
  if (input.hours.empty()) {
    errors["hours"] = "choose at least one hour";
  } else if (*input.hours.begin() < 0 || *input.hours.rbegin() > 23) {
    errors["hours"] = "hours must be between 0 and 23";
  }
  if (input.temp_range_f && !(input.temp_range_f->min_f <= input.temp_range_f->max_f)) {
    errors["temp_range_f"] = "minimum must not exceed maximum";
  }
  if (!(input.gas_price >= 0.0)) errors["gas_price"] = "must be 0 or more";
  if (!(input.mpg > 0.0)) errors["mpg"] = "must be greater than 0";
  if (!(input.insurance_weekly >= 0.0)) errors["insurance_weekly"] = "must be 0 or more";
  if (!(input.misc_weekly >= 0.0)) errors["misc_weekly"] = "must be 0 or more";
  if (!(input.platform_cut >= 0.0 && input.platform_cut < 1.0)) {
    errors["platform_cut"] = "must be in [0, 1)";
  }
  if (!(input.tpc > 0.0 && input.tpc <= 1.0)) errors["tpc"] = "must be in (0, 1]";
  return errors;
}

NoMatchingTripsError::NoMatchingTripsError(PlannerInput filters)
    : std::runtime_error("no trips match this plan"), filters_(std::move(filters)) {}

FilterResult filter_trips(std::span<const Trip> trips, const PlannerInput& input,
                          int day_start_offset_hours) {
  std::array<bool, kWeekdayCount> day_ok{};
  for (Weekday d : input.days) day_ok[static_cast<std::size_t>(d)] = true;
  std::array<bool, 24> hour_ok{};
  for (int h : input.hours) {
    if (h >= 0 && h < 24) hour_ok[static_cast<std::size_t>(h)] = true;
  }

  FilterResult result;
  const bool weather_requested = input.temp_range_f.has_value() || input.precip != Precip::any;
  bool weather_known = false;
  if (weather_requested) {
    for (const auto& trip : trips) {
      if (trip.temp_f || trip.precip_in) {
        weather_known = true;
        break;
      }
    }
    result.weather_filter_ignored = !weather_known;
  }
  const bool apply_weather = weather_requested && weather_known;

  for (const auto& trip : trips) {
    if (!day_ok[static_cast<std::size_t>(weekday_of(trip.start_ts, day_start_offset_hours))]) continue;
    if (!hour_ok[static_cast<std::size_t>(hour_of(trip.start_ts))]) continue;
    if (!input.pickup_neighborhoods.empty() &&
        (!trip.pickup_area || input.pickup_neighborhoods.count(*trip.pickup_area) == 0)) {
      continue;
    }
    if (apply_weather) {
      if (input.temp_range_f) {
        if (!trip.temp_f || *trip.temp_f < input.temp_range_f->min_f ||
            *trip.temp_f > input.temp_range_f->max_f) {
          continue;
        }
      }
      if (input.precip != Precip::any) {
        if (!trip.precip_in) continue;
        const bool wet = *trip.precip_in >= kWetThresholdIn;
        if (wet != (input.precip == Precip::wet)) continue;
      }
    }
    result.trips.push_back(&trip);
  }
  return result;
}

SubsetStats subset_stats(std::span<const Trip* const> subset) {
  if (subset.empty()) throw NoMatchingTripsError(PlannerInput{});
  SubsetStats stats;
  stats.n = subset.size();
  double fare = 0.0, tip = 0.0, miles = 0.0, minutes = 0.0;
  std::size_t timed = 0;
  for (const Trip* trip : subset) {
    fare += trip->fare;
    tip += trip->tip;
    miles += trip->miles;
    if (trip->duration_s > 0.0) {
      minutes += trip->duration_min();
      ++timed;
    }
  }
  if (timed == 0) throw InvalidStatsError("every matching trip has zero duration");
  const auto n = static_cast<double>(stats.n);
  stats.af = fare / n;
  stats.avg_tip = tip / n;
  stats.avg_miles = miles / n;
  stats.atd = minutes / static_cast<double>(timed);
  return stats;
}

SubsetStats subset_stats(std::span<const Trip> subset) {
  std::vector<const Trip*> ptrs;
  ptrs.reserve(subset.size());
  for (const auto& t : subset) ptrs.push_back(&t);
  return subset_stats(std::span<const Trip* const>(ptrs));
}

Projection project(const SubsetStats& stats, const PlannerInput& input) {
  if (!(stats.atd > 0.0)) throw InvalidStatsError("average trip duration must be positive");
  Projection p;
  p.pt = 60.0 / stats.atd * input.tpc * input.hours_per_week;
  p.gross_fares = stats.af * p.pt;
  p.tips = stats.avg_tip * p.pt;
  p.paid_miles = stats.avg_miles * p.pt;
  p.total_miles = input.include_deadhead_miles ? p.paid_miles / input.tpc : p.paid_miles;
  return p;
}

ExpenseBreakdown expenses(const Projection& projection, const PlannerInput& input) {
  ExpenseBreakdown e;
  e.gas_cost = projection.total_miles / input.mpg * input.gas_price;
  e.fixed_cost = input.insurance_weekly + input.misc_weekly;
  e.driver_fares = projection.gross_fares * (1.0 - input.platform_cut);
  const double tips =
      input.tips_subject_to_cut ? projection.tips * (1.0 - input.platform_cut) : projection.tips;
  e.net = e.driver_fares + tips - e.gas_cost - e.fixed_cost;
  return e;
}

PlannerOutput simulate(std::span<const Trip> trips, const PlannerInput& input,
                       int day_start_offset_hours) {
  const FilterResult filtered = filter_trips(trips, input, day_start_offset_hours);
  if (filtered.trips.empty()) throw NoMatchingTripsError(input);

  PlannerOutput out;
  out.subset = subset_stats(filtered.trips);
  const Projection p = project(out.subset, input);
  const ExpenseBreakdown e = expenses(p, input);
  out.pt = p.pt;
  out.gross_fares = p.gross_fares;
  out.tips = p.tips;
  out.paid_miles = p.paid_miles;
  out.total_miles = p.total_miles;
  out.gas_cost = e.gas_cost;
  out.fixed_cost = e.fixed_cost;
  out.driver_fares = e.driver_fares;
  out.net = e.net;
  out.weather_filter_ignored = filtered.weather_filter_ignored;
  out.summary = render_summary(out);
  return out;
}

namespace {

std::string with_commas(long long value) {
  std::string digits = std::to_string(std::llabs(value));
  std::string out;
  const std::size_t lead = digits.size() % 3;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i != 0 && (i + 3 - lead) % 3 == 0) out.push_back(',');
    out.push_back(digits[i]);
  }
  return value < 0 ? "-" + out : out;
}

std::string count_noun(long long n, const char* noun) {
  return with_commas(n) + " " + noun + (n == 1 ? "" : "s");
}

}  // namespace

std::string format_dollars(double amount) {
  const long long cents = std::llround(amount * 100.0);
  const long long whole = std::llabs(cents) / 100;
  char frac[4];
  std::snprintf(frac, sizeof frac, "%02lld", std::llabs(cents) % 100);
  return std::string(cents < 0 ? "-$" : "$") + with_commas(whole) + "." + frac;
}

std::string render_summary(const PlannerOutput& o) {
  const long long trips = std::llround(o.pt);
  const auto n = static_cast<long long>(o.subset.n);
  std::string text;
  text += "You can expect about " + count_noun(trips, "trip") + " per week, grossing " +
          format_dollars(o.gross_fares) + " in fares (" + format_dollars(o.driver_fares) +
          " after the platform's cut) plus " + format_dollars(o.tips) + " in tips. ";
  text += "You would drive about " + count_noun(std::llround(o.total_miles), "mile") + " (" +
          with_commas(std::llround(o.paid_miles)) + " with passengers), spending " +
          format_dollars(o.gas_cost) + " on gas and " + format_dollars(o.fixed_cost) +
          " on insurance and other costs, for a net profit of " + format_dollars(o.net) +
          " per week. ";
  text += "This estimate is based on " + count_noun(n, "matching city trip") + ".";
  if (o.subset.n < kLowConfidenceTrips) {
    text += " Only " + count_noun(n, "trip") +
            " matched this plan, so treat these figures as a rough guide.";
  }
  if (o.weather_filter_ignored) {
    text += " Weather filters were ignored because the trip data has no weather attached.";
  }
  return text;
}

}  // namespace rideprobe
