#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "bss/ingest.hpp"
#include "bss/time.hpp"

namespace bss {

struct synthetic_config {
  int n_stations{10};
  int n_regions{2};
  int min_docks{11};
  int max_docks{19};
  int days{14};
  int status_interval{1};  // minutes between status snapshots
  double trips_per_station_day{40.0};
  double intra_region_preference{0.995};  // in (0.5, 1]
  double morning_peak_hour{8.0};
  double evening_peak_hour{17.0};
  double peak_weight{2.5};
  double weekend_factor{0.6};
  double rain_probability{0.12};
  double fog_probability{0.10};
  double rain_trip_factor{0.6};
  bss::date start{std::chrono::year{2015} / 3 / 1};
  std::uint64_t seed{1};
  bool emit_status{true};

  /// Throws validation_error.
  void validate() const;
};

struct synthetic_bundle {
  std::vector<station_meta> stations;
  std::vector<int> block_of;  // per station, parallel to `stations`
  std::vector<status_snapshot> status;
  std::vector<trip_record> trips;
  std::vector<daily_weather> weather;
  std::vector<int> initial_bikes;
  date_time begin;
  date_time end;
};

/// Minute-step simulation. A departure needs a bike at the origin and a free,
/// unreserved dock at the destination, which it reserves until arrival, so
/// docked plus in-transit bikes stay constant. No trip leaves in the final
/// hour, so every trip ends inside the span.
synthetic_bundle generate_synthetic(synthetic_config const& config);

/// station.csv, status.csv, trip.csv and weather.csv in the ingest schemas.
void write_synthetic(std::filesystem::path const& dir,
                     synthetic_bundle const& bundle);

}  // namespace bss
