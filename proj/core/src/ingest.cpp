#include "bss/ingest.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "bss/csv.hpp"
#include "bss/error.hpp"

namespace bss {

namespace {

std::string_view trim(std::string_view s) {
  auto const b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) {
    return {};
  }
  auto const e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
std::optional<T> to_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) {
    return std::nullopt;
  }
  if (s.front() == '+') {
    s.remove_prefix(1);
  }
  T v{};
  auto const [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    return std::nullopt;
  }
  return v;
}

std::string lower(std::string_view s) {
  std::string out{s};
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

std::string_view field(std::vector<std::string> const& f, std::size_t i) {
  return i < f.size() ? std::string_view{f[i]} : std::string_view{};
}

std::unordered_map<int, station_meta const*> index_stations(
    std::span<station_meta const> stations) {
  std::unordered_map<int, station_meta const*> idx;
  for (auto const& s : stations) {
    idx.emplace(s.station_id, &s);
  }
  return idx;
}

}  // namespace

std::optional<std::string> zip_for_city(std::string_view city) {
  static constexpr std::array<std::pair<std::string_view, std::string_view>, 5>
      kTable{{{"san francisco", "94107"},
              {"redwood city", "94063"},
              {"palo alto", "94301"},
              {"mountain view", "94041"},
              {"san jose", "95113"}}};
  auto const key = lower(trim(city));
  for (auto const& [name, zip] : kTable) {
    if (key == name) {
      return std::string{zip};
    }
  }
  return std::nullopt;
}

parse_result<station_meta> parse_stations(std::istream& in) {
  csv::reader r{in};
  auto const c_id = r.require("id");
  auto const c_name = r.require("name");
  auto const c_lat = r.require("lat");
  auto const c_long = r.require("long");
  auto const c_docks = r.require("dock_count");
  auto const c_city = r.require("city");
  auto const c_zip = r.find("zip_code");

  parse_result<station_meta> out;
  std::set<int> seen;
  std::vector<std::string> f;
  while (r.next(f)) {
    auto const id = to_number<int>(field(f, c_id));
    auto const lat = to_number<double>(field(f, c_lat));
    auto const lon = to_number<double>(field(f, c_long));
    auto const docks = to_number<int>(field(f, c_docks));
    if (!id || !lat || !lon || !docks || *docks < 0) {
      ++out.skipped;
      continue;
    }
    if (!seen.insert(*id).second) {
      throw validation_error{
          fmt::format("duplicate station_id {} on line {}", *id,
                      r.line_number())};
    }
    station_meta s;
    s.station_id = *id;
    s.name = std::string{trim(field(f, c_name))};
    s.latitude = *lat;
    s.longitude = *lon;
    s.dock_count = *docks;
    s.city = std::string{trim(field(f, c_city))};
    if (c_zip && !trim(field(f, *c_zip)).empty()) {
      s.zip_code = std::string{trim(field(f, *c_zip))};
    } else {
      s.zip_code = zip_for_city(s.city).value_or(std::string{});
    }
    out.records.push_back(std::move(s));
  }
  return out;
}

status_parse_result parse_status(std::istream& in,
                                 std::span<station_meta const> stations) {
  csv::reader r{in};
  auto const c_id = r.require("station_id");
  auto const c_bikes = r.require("bikes_available");
  auto const c_docks = r.require("docks_available");
  auto const c_time = r.require("time");
  auto const idx = index_stations(stations);

  status_parse_result out;
  std::vector<std::string> f;
  while (r.next(f)) {
    auto const id = to_number<int>(field(f, c_id));
    auto const bikes = to_number<int>(field(f, c_bikes));
    auto const docks = to_number<int>(field(f, c_docks));
    auto const t = parse_date_time(field(f, c_time));
    if (!id || !bikes || !docks || !t || *bikes < 0 || *docks < 0) {
      ++out.skipped;
      continue;
    }
    if (auto const it = idx.find(*id);
        it != idx.end() && *bikes + *docks > it->second->dock_count) {
      ++out.capacity_violations;
    }
    out.records.push_back({*id, *bikes, *docks, *t});
  }
  return out;
}

trip_parse_result parse_trips(std::istream& in,
                              std::span<station_meta const> stations) {
  csv::reader r{in};
  auto const c_id = r.require("id");
  auto const c_dur = r.require("duration");
  auto const c_start = r.require("start_date");
  auto const c_start_id = r.require("start_station_id");
  auto const c_end = r.require("end_date");
  auto const c_end_id = r.require("end_station_id");
  auto const idx = index_stations(stations);

  trip_parse_result out;
  std::vector<std::string> f;
  while (r.next(f)) {
    auto const id = to_number<long long>(field(f, c_id));
    auto const dur = to_number<long long>(field(f, c_dur));
    auto const start = parse_date_time(field(f, c_start));
    auto const end = parse_date_time(field(f, c_end));
    auto const from = to_number<int>(field(f, c_start_id));
    auto const to = to_number<int>(field(f, c_end_id));
    if (!id || !dur || !start || !end || !from || !to || *dur <= 0) {
      ++out.skipped;
      continue;
    }
    if (!idx.empty() && (!idx.contains(*from) || !idx.contains(*to))) {
      ++out.unresolved;
      continue;
    }
    out.records.push_back({*id, *dur, *start, *end, *from, *to});
  }
  return out;
}

weather_event parse_weather_event(std::string_view label, bool* unknown) {
  if (unknown != nullptr) {
    *unknown = false;
  }
  auto key = lower(trim(label));
  std::replace(key.begin(), key.end(), '_', '-');
  std::replace(key.begin(), key.end(), ' ', '-');
  if (key.empty() || key == "none" || key == "sunny" || key == "clear") {
    return weather_event::none;
  }
  if (key == "fog") {
    return weather_event::fog;
  }
  if (key == "rain") {
    return weather_event::rain;
  }
  if (key == "fog-rain" || key == "rain-fog") {
    return weather_event::fog_rain;
  }
  if (key == "thunderstorm" || key == "rain-thunderstorm" ||
      key == "thunderstorm-rain") {
    return weather_event::thunderstorm;
  }
  if (unknown != nullptr) {
    *unknown = key != "other";
  }
  return weather_event::other;
}

std::string_view to_label(weather_event e) {
  switch (e) {
    case weather_event::none: return "";
    case weather_event::fog: return "Fog";
    case weather_event::rain: return "Rain";
    case weather_event::fog_rain: return "Fog-Rain";
    case weather_event::thunderstorm: return "Rain-Thunderstorm";
    case weather_event::other: return "Other";
  }
  return "Other";
}

weather_parse_result parse_weather(std::istream& in) {
  csv::reader r{in};
  auto const c_date = r.require("date");
  auto const c_temp = r.require("mean_temperature_f");
  auto const c_hum = r.require("mean_humidity");
  auto const c_vis = r.require("mean_visibility_miles");
  auto const c_wind = r.require("mean_wind_speed_mph");
  auto const c_prec = r.require("precipitation_inches");
  auto const c_events = r.require("events");
  auto const c_zip = r.require("zip_code");

  weather_parse_result out;
  std::set<std::pair<std::string, std::int64_t>> seen;
  std::vector<std::string> f;
  while (r.next(f)) {
    auto const d = parse_date(field(f, c_date));
    if (!d) {
      ++out.bad_dates;
      ++out.skipped;
      continue;
    }
    auto const prec_text = trim(field(f, c_prec));
    auto const prec = (prec_text == "T" || prec_text == "t")
                          ? std::optional<double>{0.01}
                          : to_number<double>(prec_text);
    auto const temp = to_number<double>(field(f, c_temp));
    auto const hum = to_number<double>(field(f, c_hum));
    auto const vis = to_number<double>(field(f, c_vis));
    auto const wind = to_number<double>(field(f, c_wind));
    auto const zip = trim(field(f, c_zip));
    if (!prec || !temp || !hum || !vis || !wind || zip.empty() ||
        *hum < 0.0 || *hum > 100.0 || *prec < 0.0) {
      ++out.incomplete;
      ++out.skipped;
      continue;
    }
    if (!seen.emplace(std::string{zip}, d->days_since_epoch()).second) {
      ++out.duplicates;
      ++out.skipped;
      continue;
    }
    bool unknown = false;
    daily_weather w;
    w.date = *d;
    w.zip_code = std::string{zip};
    w.mean_temperature = *temp;
    w.mean_humidity = *hum;
    w.mean_visibility = *vis;
    w.mean_wind_speed = *wind;
    w.precipitation = *prec;
    w.event = parse_weather_event(field(f, c_events), &unknown);
    if (unknown) {
      ++out.unknown_events;
    }
    out.records.push_back(std::move(w));
  }
  return out;
}

void write_weather(std::ostream& out, std::span<daily_weather const> rows) {
  out << "date,mean_temperature_f,mean_humidity,mean_visibility_miles,"
         "mean_wind_speed_mph,precipitation_inches,events,zip_code\n";
  for (auto const& w : rows) {
    out << fmt::format("{},{},{},{},{},{},{},{}\n", format_us(w.date),
                       w.mean_temperature, w.mean_humidity, w.mean_visibility,
                       w.mean_wind_speed, w.precipitation, to_label(w.event),
                       csv::escape(w.zip_code));
  }
}

void write_stations(std::ostream& out, std::span<station_meta const> rows) {
  out << "id,name,lat,long,dock_count,city,zip_code\n";
  for (auto const& s : rows) {
    out << fmt::format("{},{},{},{},{},{},{}\n", s.station_id,
                       csv::escape(s.name), s.latitude, s.longitude,
                       s.dock_count, csv::escape(s.city),
                       csv::escape(s.zip_code));
  }
}

void write_trips(std::ostream& out, std::span<trip_record const> rows) {
  out << "id,duration,start_date,start_station_id,end_date,end_station_id\n";
  for (auto const& t : rows) {
    out << fmt::format("{},{},{},{},{},{}\n", t.trip_id, t.duration_seconds,
                       format_us(t.start_time), t.start_station_id,
                       format_us(t.end_time), t.end_station_id);
  }
}

std::vector<change_event> detect_changes(
    std::span<status_snapshot const> snapshots) {
  std::vector<change_event> out;
  if (snapshots.empty()) {
    return out;
  }
  auto const id = snapshots.front().station_id;
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    auto const& s = snapshots[i];
    if (s.station_id != id) {
      throw validation_error{fmt::format(
          "detect_changes expects one station, saw {} and {}", id,
          s.station_id)};
    }
    if (i > 0 && s.timestamp < snapshots[i - 1].timestamp) {
      throw ordering_error{fmt::format(
          "status snapshots for station {} are not sorted at index {}", id,
          i)};
    }
    if (out.empty() || out.back().bikes_available != s.bikes_available) {
      out.push_back({id, s.timestamp, s.bikes_available});
    }
  }
  return out;
}

std::optional<int> stock_at(std::span<change_event const> events,
                            date_time t) {
  auto const it = std::upper_bound(
      events.begin(), events.end(), t,
      [](date_time v, change_event const& e) { return v < e.timestamp; });
  if (it == events.begin()) {
    return std::nullopt;
  }
  return std::prev(it)->bikes_available;
}

std::span<change_event const> event_store::events(int station_id) const {
  auto const it = by_station.find(station_id);
  if (it == by_station.end()) {
    return {};
  }
  return it->second;
}

std::size_t event_store::total_events() const {
  std::size_t n = 0;
  for (auto const& [id, ev] : by_station) {
    n += ev.size();
  }
  return n;
}

event_store compress_status(std::span<status_snapshot const> snapshots) {
  std::map<int, std::vector<status_snapshot>> grouped;
  for (auto const& s : snapshots) {
    grouped[s.station_id].push_back(s);
  }
  event_store store;
  bool first = true;
  for (auto& [id, snaps] : grouped) {
    std::stable_sort(snaps.begin(), snaps.end(),
                     [](auto const& a, auto const& b) {
                       return a.timestamp < b.timestamp;
                     });
    if (first) {
      store.observed_begin = snaps.front().timestamp;
      store.observed_end = snaps.back().timestamp;
      first = false;
    } else {
      store.observed_begin = std::min(store.observed_begin,
                                      snaps.front().timestamp);
      store.observed_end = std::max(store.observed_end, snaps.back().timestamp);
    }
    store.by_station.emplace(id, detect_changes(snaps));
  }
  return store;
}

void write_change_events(std::ostream& out, event_store const& store) {
  if (store.total_events() > 0) {
    out << fmt::format("# observed_begin={} observed_end={}\n",
                       format_iso(store.observed_begin),
                       format_iso(store.observed_end));
  }
  out << "station_id,timestamp,bikes_available\n";
  for (auto const& [id, events] : store.by_station) {
    for (auto const& e : events) {
      out << fmt::format("{},{},{}\n", e.station_id, format_iso(e.timestamp),
                         e.bikes_available);
    }
  }
}

event_store read_change_events(std::istream& in) {
  std::optional<date_time> span_begin;
  std::optional<date_time> span_end;
  std::string line;
  while (in.peek() == '#' && std::getline(in, line)) {
    auto const b = line.find("observed_begin=");
    auto const e = line.find(" observed_end=");
    if (b != std::string::npos && e != std::string::npos && e > b) {
      span_begin = parse_date_time(line.substr(b + 15, e - b - 15));
      span_end = parse_date_time(line.substr(e + 14));
    }
  }
  csv::reader r{in};
  auto const c_id = r.require("station_id");
  auto const c_time = r.require("timestamp");
  auto const c_bikes = r.require("bikes_available");

  event_store store;
  bool first = true;
  std::vector<std::string> f;
  while (r.next(f)) {
    auto const id = to_number<int>(field(f, c_id));
    auto const t = parse_date_time(field(f, c_time));
    auto const bikes = to_number<int>(field(f, c_bikes));
    if (!id || !t || !bikes || *bikes < 0) {
      throw validation_error{
          fmt::format("malformed change event on line {}", r.line_number())};
    }
    auto& ev = store.by_station[*id];
    if (!ev.empty() && *t < ev.back().timestamp) {
      throw ordering_error{fmt::format(
          "change events for station {} are not sorted (line {})", *id,
          r.line_number())};
    }
    ev.push_back({*id, *t, *bikes});
    if (first) {
      store.observed_begin = store.observed_end = *t;
      first = false;
    } else {
      store.observed_begin = std::min(store.observed_begin, *t);
      store.observed_end = std::max(store.observed_end, *t);
    }
  }
  if (span_begin && span_end && !first) {
    store.observed_begin = std::min(store.observed_begin, *span_begin);
    store.observed_end = std::max(store.observed_end, *span_end);
  }
  return store;
}

status_compression compress_status_stream(
    std::istream& in, std::span<station_meta const> stations) {
  csv::reader r{in};
  auto const c_id = r.require("station_id");
  auto const c_bikes = r.require("bikes_available");
  auto const c_docks = r.require("docks_available");
  auto const c_time = r.require("time");
  auto const idx = index_stations(stations);

  status_compression out;
  std::unordered_map<int, date_time> last_time;
  bool first = true;
  std::vector<std::string> f;
  while (r.next(f)) {
    auto const id = to_number<int>(field(f, c_id));
    auto const bikes = to_number<int>(field(f, c_bikes));
    auto const docks = to_number<int>(field(f, c_docks));
    auto const t = parse_date_time(field(f, c_time));
    if (!id || !bikes || !docks || !t || *bikes < 0 || *docks < 0) {
      ++out.skipped;
      continue;
    }
    if (auto const it = idx.find(*id);
        it != idx.end() && *bikes + *docks > it->second->dock_count) {
      ++out.capacity_violations;
    }
    ++out.snapshots;
    auto const [lt, fresh] = last_time.try_emplace(*id, *t);
    if (!fresh) {
      if (*t < lt->second) {
        throw ordering_error{fmt::format(
            "status snapshots for station {} are not sorted (line {})", *id,
            r.line_number())};
      }
      lt->second = *t;
    }
    auto& ev = out.store.by_station[*id];
    if (ev.empty() || ev.back().bikes_available != *bikes) {
      ev.push_back({*id, *t, *bikes});
    }
    if (first) {
      out.store.observed_begin = out.store.observed_end = *t;
      first = false;
    } else {
      out.store.observed_begin = std::min(out.store.observed_begin, *t);
      out.store.observed_end = std::max(out.store.observed_end, *t);
    }
  }
  return out;
}

weather_table::weather_table(std::span<daily_weather const> rows) {
  for (auto const& w : rows) {
    rows_.emplace(std::pair{w.zip_code, w.date.days_since_epoch()}, w);
  }
}

daily_weather const* weather_table::find(std::string_view zip, date d) const {
  auto const it = rows_.find(std::pair{std::string{zip}, d.days_since_epoch()});
  return it == rows_.end() ? nullptr : &it->second;
}

}  // namespace bss
