#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace bss {

/// Calendar day in the dataset's local time.
struct date {
  std::chrono::year_month_day ymd{};

  static date from_days(std::int64_t days_since_epoch);
  std::int64_t days_since_epoch() const;

  int year() const { return static_cast<int>(ymd.year()); }
  unsigned month() const { return static_cast<unsigned>(ymd.month()); }
  unsigned day() const { return static_cast<unsigned>(ymd.day()); }

  friend bool operator==(date const&, date const&) = default;
  friend auto operator<=>(date const& a, date const& b) {
    return a.ymd <=> b.ymd;
  }
};

/// Minute-resolution local timestamp, stored as minutes since 1970-01-01 00:00.
struct date_time {
  std::int64_t minutes{0};

  static date_time from(date d, int hour, int minute);

  bss::date day() const;
  int minute_of_day() const;
  /// ISO weekday: Monday = 1 ... Sunday = 7.
  int iso_weekday() const;

  date_time operator+(std::int64_t mins) const { return {minutes + mins}; }
  date_time operator-(std::int64_t mins) const { return {minutes - mins}; }
  std::int64_t operator-(date_time other) const {
    return minutes - other.minutes;
  }

  friend auto operator<=>(date_time, date_time) = default;
};

/// Accepts "YYYY-MM-DD", "YYYY/MM/DD" and "M/D/YYYY".
std::optional<date> parse_date(std::string_view text);

/// A date optionally followed by " H:MM" or " H:MM:SS"; seconds are truncated.
std::optional<date_time> parse_date_time(std::string_view text);

/// "YYYY/MM/DD HH:MM:00", the status-file layout.
std::string format_iso(date_time t);
/// "M/D/YYYY H:MM", the trip-file layout.
std::string format_us(date_time t);
/// "M/D/YYYY", the weather-file layout.
std::string format_us(date d);

}  // namespace bss
