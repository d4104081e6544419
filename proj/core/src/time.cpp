#include "bss/time.hpp"

#include <charconv>

#include <fmt/format.h>

namespace bss {

namespace {

constexpr std::int64_t kMinutesPerDay = 24 * 60;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  auto q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) {
    --q;
  }
  return q;
}

std::optional<int> to_int(std::string_view s) {
  if (s.empty()) {
    return std::nullopt;
  }
  int v = 0;
  auto const [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    return std::nullopt;
  }
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r' || s.back() == '\n')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

date date::from_days(std::int64_t days_since_epoch) {
  using namespace std::chrono;
  return {year_month_day{sys_days{days{days_since_epoch}}}};
}

std::int64_t date::days_since_epoch() const {
  using namespace std::chrono;
  return sys_days{ymd}.time_since_epoch().count();
}

date_time date_time::from(date d, int hour, int minute) {
  return {d.days_since_epoch() * kMinutesPerDay + hour * 60 + minute};
}

date date_time::day() const {
  return date::from_days(floor_div(minutes, kMinutesPerDay));
}

int date_time::minute_of_day() const {
  return static_cast<int>(minutes - floor_div(minutes, kMinutesPerDay) *
                                        kMinutesPerDay);
}

int date_time::iso_weekday() const {
  using namespace std::chrono;
  auto const d = sys_days{days{floor_div(minutes, kMinutesPerDay)}};
  return static_cast<int>(weekday{d}.iso_encoding());
}

std::optional<date> parse_date(std::string_view text) {
  text = trim(text);
  char const sep = text.find('-') != std::string_view::npos ? '-' : '/';
  auto const a = text.find(sep);
  if (a == std::string_view::npos) {
    return std::nullopt;
  }
  auto const b = text.find(sep, a + 1);
  if (b == std::string_view::npos) {
    return std::nullopt;
  }
  auto const p0 = to_int(text.substr(0, a));
  auto const p1 = to_int(text.substr(a + 1, b - a - 1));
  auto const p2 = to_int(text.substr(b + 1));
  if (!p0 || !p1 || !p2) {
    return std::nullopt;
  }
  int y = 0;
  int m = 0;
  int d = 0;
  if (a == 4) {
    y = *p0;
    m = *p1;
    d = *p2;
  } else {
    m = *p0;
    d = *p1;
    y = *p2;
  }
  using namespace std::chrono;
  auto const ymd = year_month_day{year{y}, month{static_cast<unsigned>(m)},
                                  day{static_cast<unsigned>(d)}};
  if (m < 1 || d < 1 || !ymd.ok()) {
    return std::nullopt;
  }
  return date{ymd};
}

std::optional<date_time> parse_date_time(std::string_view text) {
  text = trim(text);
  auto const space = text.find(' ');
  auto const d = parse_date(text.substr(0, space));
  if (!d) {
    return std::nullopt;
  }
  if (space == std::string_view::npos) {
    return date_time::from(*d, 0, 0);
  }
  auto clock = trim(text.substr(space + 1));
  auto const c1 = clock.find(':');
  if (c1 == std::string_view::npos) {
    return std::nullopt;
  }
  auto const c2 = clock.find(':', c1 + 1);
  auto const hh = to_int(clock.substr(0, c1));
  auto const mm = to_int(clock.substr(
      c1 + 1, c2 == std::string_view::npos ? std::string_view::npos
                                           : c2 - c1 - 1));
  if (!hh || !mm || *hh < 0 || *hh > 23 || *mm < 0 || *mm > 59) {
    return std::nullopt;
  }
  if (c2 != std::string_view::npos) {
    auto const ss = to_int(clock.substr(c2 + 1));
    if (!ss || *ss < 0 || *ss > 60) {
      return std::nullopt;
    }
  }
  return date_time::from(*d, *hh, *mm);
}

std::string format_iso(date_time t) {
  auto const d = t.day();
  auto const m = t.minute_of_day();
  return fmt::format("{:04}/{:02}/{:02} {:02}:{:02}:00", d.year(), d.month(),
                     d.day(), m / 60, m % 60);
}

std::string format_us(date_time t) {
  auto const d = t.day();
  auto const m = t.minute_of_day();
  return fmt::format("{}/{}/{} {}:{:02}", d.month(), d.day(), d.year(), m / 60,
                     m % 60);
}

std::string format_us(date d) {
  return fmt::format("{}/{}/{}", d.month(), d.day(), d.year());
}

}  // namespace bss
