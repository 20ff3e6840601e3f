#include "rideprobe/time.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>

#include "rideprobe/error.hpp"

namespace rideprobe {
namespace {

constexpr std::array<std::string_view, kWeekdayCount> kWeekdayNames = {
    "mon", "tue", "wed", "thu", "fri", "sat", "sun"};

bool parse_int(std::string_view text, int& out) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

std::string_view weekday_name(Weekday day) noexcept {
  return kWeekdayNames[static_cast<std::size_t>(day)];
}

std::optional<Weekday> parse_weekday(std::string_view text) noexcept {
  static constexpr std::array<std::string_view, kWeekdayCount> kFull = {
      "monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"};
  std::string lower(text);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (std::size_t i = 0; i < kWeekdayCount; ++i) {
    if (lower == kWeekdayNames[i] || lower == kFull[i]) return static_cast<Weekday>(i);
  }
  return std::nullopt;
}

int hour_of(LocalTime t) noexcept {
  auto day = std::chrono::floor<std::chrono::days>(t);
  return static_cast<int>(std::chrono::floor<std::chrono::hours>(t - day).count());
}

Date date_of(LocalTime t, int day_start_offset_hours) noexcept {
  return Date{std::chrono::floor<std::chrono::days>(shift_to_driver_day(t, day_start_offset_hours))};
}

Weekday weekday_of(Date date) noexcept {
  // iso_encoding: Monday = 1 .. Sunday = 7
  std::chrono::weekday wd{std::chrono::local_days{date}};
  return static_cast<Weekday>(wd.iso_encoding() - 1);
}

Weekday weekday_of(LocalTime t, int day_start_offset_hours) noexcept {
  return weekday_of(date_of(t, day_start_offset_hours));
}

LocalTime floor_to_hour(LocalTime t) noexcept {
  return std::chrono::floor<std::chrono::hours>(t);
}

LocalTime start_of(Date date, int day_start_offset_hours) noexcept {
  return LocalTime{std::chrono::local_days{date}} + std::chrono::hours{day_start_offset_hours};
}

std::string format_timestamp(LocalTime t) {
  auto day = std::chrono::floor<std::chrono::days>(t);
  Date ymd{day};
  std::chrono::hh_mm_ss hms{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

std::optional<LocalTime> parse_timestamp(std::string_view text) {
  // YYYY-MM-DDTHH:MM:SS
  if (text.size() != 19 || text[10] != 'T') return std::nullopt;
  auto date = parse_date(text.substr(0, 10));
  int h = 0, m = 0, s = 0;
  if (!date || text[13] != ':' || text[16] != ':' || !parse_int(text.substr(11, 2), h) ||
      !parse_int(text.substr(14, 2), m) || !parse_int(text.substr(17, 2), s)) {
    return std::nullopt;
  }
  if (h > 23 || m > 59 || s > 60) return std::nullopt;
  return LocalTime{std::chrono::local_days{*date}} + std::chrono::hours{h} +
         std::chrono::minutes{m} + std::chrono::seconds{s};
}

std::string format_date(Date date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

std::optional<Date> parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) ||
      !parse_int(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
            std::chrono::day{static_cast<unsigned>(d)}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::optional<YearMonth> parse_year_month(std::string_view text) {
  if (text.size() != 7 || text[4] != '-') return std::nullopt;
  int y = 0, m = 0;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) || m < 1 || m > 12) {
    return std::nullopt;
  }
  return YearMonth{y, static_cast<unsigned>(m)};
}

std::string format_year_month(const YearMonth& ym) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u", ym.year, ym.month);
  return buf;
}

TimestampParser::TimestampParser(std::string format, const std::string& timezone)
    : format_(std::move(format)) {
  if (!absl::LoadTimeZone(timezone, &zone_)) {
    throw ConfigError("unknown time zone: " + timezone);
  }
  has_offset_ = format_.find("%z") != std::string::npos ||
                format_.find("%Ez") != std::string::npos;
}

std::optional<LocalTime> TimestampParser::parse(std::string_view text) const {
  absl::Time instant;
  std::string err;
  if (!absl::ParseTime(format_, std::string(text), absl::UTCTimeZone(), &instant, &err)) {
    return std::nullopt;
  }
  // Without an offset the text was read as UTC, which leaves the wall clock
  // untouched; with one, convert the instant into the city zone.
  absl::CivilSecond civil =
      absl::ToCivilSecond(instant, has_offset_ ? zone_ : absl::UTCTimeZone());
  Date date{std::chrono::year{static_cast<int>(civil.year())},
            std::chrono::month{static_cast<unsigned>(civil.month())},
            std::chrono::day{static_cast<unsigned>(civil.day())}};
  return LocalTime{std::chrono::local_days{date}} + std::chrono::hours{civil.hour()} +
         std::chrono::minutes{civil.minute()} + std::chrono::seconds{civil.second()};
}

}  // namespace rideprobe
