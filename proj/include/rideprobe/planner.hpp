#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rideprobe/domain.hpp"

namespace rideprobe {

enum class Precip { any, dry, wet };

/// Hourly precipitation below this counts as dry.
inline constexpr double kWetThresholdIn = 0.01;
/// Subsets smaller than this get a low-confidence note in the summary.
inline constexpr std::size_t kLowConfidenceTrips = 30;

inline constexpr double kDefaultPlatformCut = 0.25;
inline constexpr double kDefaultTimeWithPassenger = 0.55;

struct TempRange {
  double min_f = 0.0;
  double max_f = 0.0;  // inclusive

  bool operator==(const TempRange&) const = default;
};

std::set<Weekday> all_weekdays();
std::set<int> all_hours();

/// A driver's hypothetical week.
struct PlannerInput {
  double hours_per_week = 40.0;
  std::set<Weekday> days = all_weekdays();
  std::set<int> hours = all_hours();
  std::set<std::string> pickup_neighborhoods;  // empty = anywhere
  std::optional<TempRange> temp_range_f;
  Precip precip = Precip::any;

  double gas_price = 0.0;   // $/gallon
  double mpg = 25.0;
  double insurance_weekly = 0.0;
  double misc_weekly = 0.0;  // amortized non-weekly costs belong here too

  double platform_cut = kDefaultPlatformCut;     // [0, 1)
  double tpc = kDefaultTimeWithPassenger;        // share of time on trip, (0, 1]

  bool tips_subject_to_cut = false;
  // Total miles = paid miles / tpc. Off: gas is charged on paid miles only.
  bool include_deadhead_miles = true;

  bool operator==(const PlannerInput&) const = default;
};

/// Field name -> message for every violated constraint; empty when valid.
std::map<std::string, std::string> validate(const PlannerInput& input);

struct FilterResult {
  std::vector<const Trip*> trips;
  // A weather band was requested but no trip carries weather.
  bool weather_filter_ignored = false;
};

FilterResult filter_trips(std::span<const Trip> trips, const PlannerInput& input,
                          int day_start_offset_hours = 0);

struct SubsetStats {
  std::size_t n = 0;
  double af = 0.0;   // average fare, $
  double atd = 0.0;  // average trip duration, minutes
  double avg_tip = 0.0;
  double avg_miles = 0.0;

  bool operator==(const SubsetStats&) const = default;
};

class NoMatchingTripsError : public std::runtime_error {
 public:
  explicit NoMatchingTripsError(PlannerInput filters);

  const PlannerInput& filters() const noexcept { return filters_; }

 private:
  PlannerInput filters_;
};

/// Thrown when stats cannot drive a projection (atd <= 0).
class InvalidStatsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Means over the subset. Zero-duration trips are left out of atd only.
/// Throws NoMatchingTripsError (with default filters) on an empty subset
/// and InvalidStatsError when no trip has a positive duration.
SubsetStats subset_stats(std::span<const Trip* const> subset);
SubsetStats subset_stats(std::span<const Trip> subset);

struct Projection {
  double pt = 0.0;  // projected trips per week, kept fractional
  double gross_fares = 0.0;
  double tips = 0.0;
  double paid_miles = 0.0;
  double total_miles = 0.0;

  bool operator==(const Projection&) const = default;
};

/// pt = 60 / atd * tpc * hpw; gross = af * pt.
Projection project(const SubsetStats& stats, const PlannerInput& input);

struct ExpenseBreakdown {
  double gas_cost = 0.0;
  double fixed_cost = 0.0;
  double driver_fares = 0.0;
  double net = 0.0;

  bool operator==(const ExpenseBreakdown&) const = default;
};

ExpenseBreakdown expenses(const Projection& projection, const PlannerInput& input);

struct PlannerOutput {
  double pt = 0.0;
  double gross_fares = 0.0;
  double driver_fares = 0.0;
  double tips = 0.0;
  double paid_miles = 0.0;
  double total_miles = 0.0;
  double gas_cost = 0.0;
  double fixed_cost = 0.0;
  double net = 0.0;
  SubsetStats subset;
  bool weather_filter_ignored = false;
  std::string summary;

  bool operator==(const PlannerOutput&) const = default;
};

/// filter_trips -> subset_stats -> project -> expenses -> render_summary.
/// Throws NoMatchingTripsError carrying `input` when nothing matches.
PlannerOutput simulate(std::span<const Trip> trips, const PlannerInput& input,
                       int day_start_offset_hours = 0);

std::string render_summary(const PlannerOutput& output);

/// "$1,234.50"
std::string format_dollars(double amount);

}  // namespace rideprobe
