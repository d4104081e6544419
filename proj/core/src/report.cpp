#include "bss/report.hpp"

#include <algorithm>
#include <charconv>
#include <vector>

#include <fmt/format.h>

#include "bss/csv.hpp"
#include "bss/error.hpp"

namespace bss {

namespace {

template <typename T>
T parse_number(std::string const& s, csv::reader const& r) {
  T v{};
  auto const [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw validation_error{
        fmt::format("line {}: bad number '{}'", r.line_number(), s)};
  }
  return v;
}

std::string join(std::vector<int> const& v) {
  std::string out;
  for (auto const x : v) {
    out += (out.empty() ? "" : ";") + std::to_string(x);
  }
  return out;
}

void write_stamp(std::ostream& out, std::string_view stamp) {
  if (!stamp.empty()) {
    out << stamp << '\n';
  }
}

}  // namespace

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_text(sweep_grid const& grid, sweep_config const& config) {
  std::string model_list;
  for (auto const m : grid.models) {
    model_list += (model_list.empty() ? "" : ";") + std::string{to_string(m)};
  }
  std::vector<std::string> lines{
      fmt::format("bootstrap={}", config.bootstrap ? 1 : 0),
      fmt::format("cv_folds={}", config.cv_folds),
      fmt::format("delta={}", join(grid.horizons)),
      fmt::format("forest_mtry={}", config.forest_mtry),
      fmt::format("grid_step={}", config.grid_step),
      fmt::format("max_components={}", config.max_components),
      fmt::format("max_depth={}", config.tree.max_depth),
      fmt::format("min_leaf_size={}", config.tree.min_leaf_size),
      fmt::format("min_test_rows={}", config.min_test_rows),
      fmt::format("min_train_rows={}", config.min_train_rows),
      fmt::format("models={}", model_list),
      fmt::format("plsr_autoscale={}", config.plsr.autoscale ? 1 : 0),
      fmt::format("plsr_max_iterations={}", config.plsr.max_iterations),
      fmt::format("plsr_tolerance={}", config.plsr.tolerance),
      fmt::format("seed={}", config.seed),
      fmt::format("shrinkage={}", config.shrinkage),
      fmt::format("train_fraction={}", config.train_fraction),
      fmt::format("trees={}", join(grid.tree_counts)),
  };
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (auto const& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

std::string report_stamp(std::uint64_t seed, std::string_view config) {
  return fmt::format("# seed={} config_hash={:016x}", seed, fnv1a64(config));
}

void write_report_csv(std::ostream& out, mae_report const& report,
                      std::string_view stamp) {
  write_stamp(out, stamp);
  out << "model,delta_minutes,trees_or_components,station_id,mae_bikes,"
         "mae_log,n_test_rows\n";
  for (auto const& r : report.records) {
    out << fmt::format("{},{},{},{},{:.9f},{:.9f},{}\n", r.model, r.delta,
                       r.size, r.station_id, r.mae_bikes, r.mae_log, r.n_test);
  }
}

void write_summary_csv(std::ostream& out, mae_report const& report,
                       std::string_view stamp) {
  write_stamp(out, stamp);
  out << "model,delta_minutes,trees_or_components,mae_bikes,"
         "mae_bikes_unweighted,mae_log,n_stations,n_test_rows\n";
  for (auto const& a : report.aggregates) {
    out << fmt::format("{},{},{},{:.9f},{:.9f},{:.9f},{},{}\n", a.model,
                       a.delta, a.size, a.mae_bikes, a.mae_bikes_unweighted,
                       a.mae_log, a.n_stations, a.n_test);
  }
}

void write_skipped_csv(std::ostream& out, mae_report const& report) {
  out << "id,delta_minutes,reason\n";
  for (auto const& s : report.skipped) {
    out << fmt::format("{},{},{}\n", s.id, s.delta, csv::escape(s.reason));
  }
}

mae_report read_report_csv(std::istream& in) {
  csv::reader r{in};
  auto const c_model = r.require("model");
  auto const c_delta = r.require("delta_minutes");
  auto const c_size = r.require("trees_or_components");
  auto const c_station = r.require("station_id");
  auto const c_bikes = r.require("mae_bikes");
  auto const c_log = r.require("mae_log");
  auto const c_n = r.require("n_test_rows");
  mae_report report;
  std::vector<std::string> f;
  while (r.next(f)) {
    if (f.size() < r.header().size()) {
      throw validation_error{
          fmt::format("line {}: expected {} fields", r.line_number(),
                      r.header().size())};
    }
    report.records.push_back({f[c_model], parse_number<int>(f[c_delta], r),
                              parse_number<int>(f[c_size], r),
                              parse_number<int>(f[c_station], r),
                              parse_number<double>(f[c_bikes], r),
                              parse_number<double>(f[c_log], r),
                              parse_number<std::size_t>(f[c_n], r)});
  }
  report.finalize();
  return report;
}

mae_report read_summary_csv(std::istream& in) {
  csv::reader r{in};
  auto const c_model = r.require("model");
  auto const c_delta = r.require("delta_minutes");
  auto const c_size = r.require("trees_or_components");
  auto const c_bikes = r.require("mae_bikes");
  auto const c_unw = r.require("mae_bikes_unweighted");
  auto const c_log = r.require("mae_log");
  auto const c_stations = r.require("n_stations");
  auto const c_n = r.require("n_test_rows");
  mae_report report;
  std::vector<std::string> f;
  while (r.next(f)) {
    if (f.size() < r.header().size()) {
      throw validation_error{
          fmt::format("line {}: expected {} fields", r.line_number(),
                      r.header().size())};
    }
    report.aggregates.push_back(
        {f[c_model], parse_number<int>(f[c_delta], r),
         parse_number<int>(f[c_size], r), parse_number<double>(f[c_bikes], r),
         parse_number<double>(f[c_unw], r), parse_number<double>(f[c_log], r),
         parse_number<std::size_t>(f[c_stations], r),
         parse_number<std::size_t>(f[c_n], r)});
  }
  return report;
}

}  // namespace bss
