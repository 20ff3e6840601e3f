#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <absl/time/time.h>

namespace rideprobe {

/// Wall-clock time in the configured city time zone, seconds resolution.
/// All bucketing (hour of day, weekday, calendar date) uses these values
/// directly; no zone math happens after ingestion.
using LocalTime = std::chrono::local_seconds;
using Date = std::chrono::year_month_day;

enum class Weekday : int { mon = 0, tue, wed, thu, fri, sat, sun };

inline constexpr int kWeekdayCount = 7;

std::string_view weekday_name(Weekday day) noexcept;
std::optional<Weekday> parse_weekday(std::string_view text) noexcept;

/// Shift so that a driver's "day" starting at `day_start_offset_hours`
/// lines up with a calendar day. 03:30 with offset 4 lands on the prior date.
inline LocalTime shift_to_driver_day(LocalTime t, int day_start_offset_hours) {
  return t - std::chrono::hours{day_start_offset_hours};
}

int hour_of(LocalTime t) noexcept;
Date date_of(LocalTime t, int day_start_offset_hours = 0) noexcept;
Weekday weekday_of(LocalTime t, int day_start_offset_hours = 0) noexcept;
Weekday weekday_of(Date date) noexcept;
LocalTime floor_to_hour(LocalTime t) noexcept;
LocalTime start_of(Date date, int day_start_offset_hours = 0) noexcept;

/// "YYYY-MM-DDTHH:MM:SS"
std::string format_timestamp(LocalTime t);
std::optional<LocalTime> parse_timestamp(std::string_view text);
/// "YYYY-MM-DD"
std::string format_date(Date date);
std::optional<Date> parse_date(std::string_view text);

struct YearMonth {
  int year = 0;
  unsigned month = 0;

  bool contains(Date date) const noexcept {
    return static_cast<int>(date.year()) == year && static_cast<unsigned>(date.month()) == month;
  }
  bool operator==(const YearMonth&) const = default;
};

/// "YYYY-MM"
std::optional<YearMonth> parse_year_month(std::string_view text);
std::string format_year_month(const YearMonth& ym);

/// Parses source timestamps with an strftime-style format. Formats that
/// carry a UTC offset (%z / %Ez) denote absolute instants and are converted
/// into `timezone`; formats without one are taken as wall-clock already.
class TimestampParser {
 public:
  TimestampParser(std::string format, const std::string& timezone);

  std::optional<LocalTime> parse(std::string_view text) const;
  const std::string& format() const noexcept { return format_; }

 private:
  std::string format_;
  absl::TimeZone zone_;
  bool has_offset_ = false;
};

}  // namespace rideprobe
