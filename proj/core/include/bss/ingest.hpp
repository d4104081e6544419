#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bss/time.hpp"

namespace bss {

struct station_meta {
  int station_id{0};
  std::string name;
  double latitude{0.0};
  double longitude{0.0};
  int dock_count{0};
  std::string city;
  std::string zip_code;
};

struct status_snapshot {
  int station_id{0};
  int bikes_available{0};
  int docks_available{0};
  date_time timestamp;
};

struct trip_record {
  long long trip_id{0};
  long long duration_seconds{0};
  date_time start_time;
  date_time end_time;
  int start_station_id{0};
  int end_station_id{0};
};

enum class weather_event { none, fog, rain, fog_rain, thunderstorm, other };

inline constexpr int kWeatherEventCount = 6;

struct daily_weather {
  bss::date date;
  std::string zip_code;
  double mean_temperature{0.0};  // degrees F
  double mean_humidity{0.0};     // percent
  double mean_visibility{0.0};   // miles
  double mean_wind_speed{0.0};   // mph
  double precipitation{0.0};     // inches, trace = 0.01
  weather_event event{weather_event::none};

  friend bool operator==(daily_weather const&, daily_weather const&) = default;
};

struct change_event {
  int station_id{0};
  date_time timestamp;
  int bikes_available{0};

  friend bool operator==(change_event const&, change_event const&) = default;
};

template <typename T>
struct parse_result {
  std::vector<T> records;
  std::size_t skipped{0};
};

struct status_parse_result : parse_result<status_snapshot> {
  // bikes + docks above the station's dock count; retained, not dropped
  std::size_t capacity_violations{0};
};

struct trip_parse_result : parse_result<trip_record> {
  std::size_t unresolved{0};
};

struct weather_parse_result : parse_result<daily_weather> {
  std::size_t bad_dates{0};
  std::size_t unknown_events{0};
  std::size_t incomplete{0};
  std::size_t duplicates{0};
};

/// ZIP assigned to a city when the station file carries no zip_code column.
/// Covers the five Bay Area cities of the public release.
std::optional<std::string> zip_for_city(std::string_view city);

/// Station file: id,name,lat,long,dock_count,city,installation_date with an
/// optional zip_code column. Throws schema_error / validation_error.
parse_result<station_meta> parse_stations(std::istream& in);

/// Status file: station_id,bikes_available,docks_available,time.
status_parse_result parse_status(std::istream& in,
                                 std::span<station_meta const> stations = {});

/// Trip file. With a non-empty station list, trips referring to unknown
/// stations are counted in `unresolved` and dropped.
trip_parse_result parse_trips(std::istream& in,
                              std::span<station_meta const> stations = {});

/// Weather file. Only the six retained variables and events are kept.
weather_parse_result parse_weather(std::istream& in);

/// Writes the retained weather fields in a header-bearing layout that
/// parse_weather reads back.
void write_weather(std::ostream& out, std::span<daily_weather const> rows);
/// id,name,lat,long,dock_count,city,zip_code
void write_stations(std::ostream& out, std::span<station_meta const> rows);
/// id,duration,start_date,start_station_id,end_date,end_station_id
void write_trips(std::ostream& out, std::span<trip_record const> rows);

/// Case-insensitive mapping onto the fixed event taxonomy. Sets `*unknown`
/// when the label is not recognized (mapped to other).
weather_event parse_weather_event(std::string_view label,
                                  bool* unknown = nullptr);
std::string_view to_label(weather_event e);

/// Keeps the first snapshot and every snapshot whose bike count differs from
/// the last kept one. Throws ordering_error on unsorted input and
/// validation_error when station ids differ.
std::vector<change_event> detect_changes(
    std::span<status_snapshot const> snapshots);

/// Last observation carried forward: bikes of the latest event at or before
/// `t`, absent when `t` precedes the first event.
std::optional<int> stock_at(std::span<change_event const> events,
                            date_time t);

/// Change events for a whole network plus the observed status span.
struct event_store {
  std::map<int, std::vector<change_event>> by_station;
  date_time observed_begin;
  date_time observed_end;

  std::span<change_event const> events(int station_id) const;
  std::size_t total_events() const;
};

/// Groups by station, sorts each stream by time and applies detect_changes.
event_store compress_status(std::span<status_snapshot const> snapshots);

struct status_compression {
  event_store store;
  std::size_t snapshots{0};
  std::size_t skipped{0};
  std::size_t capacity_violations{0};
};

/// Single pass over a status file without holding the snapshots. Each
/// station's rows must be in time order (stations may interleave); throws
/// ordering_error otherwise.
status_compression compress_status_stream(
    std::istream& in, std::span<station_meta const> stations);

/// station_id,timestamp,bikes_available, preceded by a comment line holding
/// the observed span.
void write_change_events(std::ostream& out, event_store const& store);
/// The observed span comes from the comment line when present, else from the
/// events themselves.
event_store read_change_events(std::istream& in);

/// Weather keyed by (ZIP, date).
class weather_table {
public:
  weather_table() = default;
  explicit weather_table(std::span<daily_weather const> rows);

  daily_weather const* find(std::string_view zip, date d) const;
  std::size_t size() const { return rows_.size(); }

private:
  std::map<std::pair<std::string, std::int64_t>, daily_weather, std::less<>>
      rows_;
};

}  // namespace bss
