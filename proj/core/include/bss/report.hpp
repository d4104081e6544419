#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "bss/sweep.hpp"

namespace bss {

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view text);

/// The effective sweep configuration as sorted key=value lines.
std::string config_text(sweep_grid const& grid, sweep_config const& config);

/// "# seed=<seed> config_hash=<16 hex digits>"
std::string report_stamp(std::uint64_t seed, std::string_view config);

/// model,delta_minutes,trees_or_components,station_id,mae_bikes,mae_log,n_test_rows
void write_report_csv(std::ostream& out, mae_report const& report,
                      std::string_view stamp = {});

/// model,delta_minutes,trees_or_components,mae_bikes,mae_bikes_unweighted,
/// mae_log,n_stations,n_test_rows
void write_summary_csv(std::ostream& out, mae_report const& report,
                       std::string_view stamp = {});

/// id,delta_minutes,reason
void write_skipped_csv(std::ostream& out, mae_report const& report);

/// Reads per-station records and recomputes the aggregates.
mae_report read_report_csv(std::istream& in);

/// Reads aggregates only.
mae_report read_summary_csv(std::istream& in);

}  // namespace bss
