#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bss {

struct station_mae {
  int station_id{0};
  double mae_bikes{0.0};
  double mae_log{0.0};
  std::size_t n{0};
};

struct mae_summary {
  std::vector<station_mae> stations;  // ascending station id
  double mae_bikes{0.0};             // weighted by station row counts
  double mae_bikes_unweighted{0.0};  // plain mean over stations
  double mae_log{0.0};
  double mae_log_unweighted{0.0};
  std::size_t n{0};
};

/// MAE per station on the bike scale (after inverse_target) and on the log
/// scale. Throws validation_error on empty or mismatched input.
mae_summary mae_per_station(std::span<double const> predicted_log,
                            std::span<double const> truth_log,
                            std::span<int const> station_ids);

/// Aggregates per-station entries: row-count-weighted and plain means.
mae_summary summarize(std::vector<station_mae> stations);

}  // namespace bss
