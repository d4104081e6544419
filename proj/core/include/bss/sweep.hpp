#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bss/graph.hpp"
#include "bss/ingest.hpp"
#include "bss/plsr.hpp"
#include "bss/tree.hpp"

namespace bss {

enum class model_kind { rf, lsboost, plsr, mean };

std::string_view to_string(model_kind m);
/// Throws validation_error for unknown names.
model_kind parse_model_kind(std::string_view name);

struct sweep_grid {
  std::vector<int> horizons{15, 30, 60, 90, 120};
  std::vector<int> tree_counts{20, 60, 100, 140, 180};
  std::vector<model_kind> models{model_kind::rf, model_kind::lsboost,
                                 model_kind::plsr};

  /// Horizons and tree counts must be positive and strictly increasing.
  void validate() const;
  bool has(model_kind m) const;
};

struct sweep_config {
  int grid_step{15};
  double train_fraction{0.8};
  tree_config tree{};
  int forest_mtry{0};
  bool bootstrap{true};
  double shrinkage{1.0};
  int cv_folds{kDefaultCvFolds};
  int max_components{10};
  plsr_options plsr{};
  std::uint64_t seed{1};
  int workers{1};
  std::size_t min_train_rows{20};
  std::size_t min_test_rows{5};
};

/// Everything a sweep reads: metadata, change events, weather and neighbors.
struct dataset {
  std::vector<station_meta> stations;
  event_store events;
  weather_table weather;
  std::map<int, neighbor_set> neighbors;

  std::string const& zip_of(int station_id) const;
};

struct mae_record {
  std::string model;
  int delta{0};
  int size{0};  // trees, stages, or PLSR components
  int station_id{0};
  double mae_bikes{0.0};
  double mae_log{0.0};
  std::size_t n_test{0};
};

struct mae_aggregate {
  std::string model;
  int delta{0};
  int size{0};  // 0 for PLSR, whose component count varies by region
  double mae_bikes{0.0};
  double mae_bikes_unweighted{0.0};
  double mae_log{0.0};
  std::size_t n_stations{0};
  std::size_t n_test{0};
};

struct skipped_unit {
  int id{0};  // station id, or region index for multivariate sweeps
  int delta{0};
  std::string reason;
};

struct mae_report {
  std::vector<mae_record> records;
  std::vector<mae_aggregate> aggregates;
  std::vector<skipped_unit> skipped;
  std::size_t models_trained{0};

  /// Sorts records and recomputes aggregates.
  void finalize();
  mae_aggregate const* find(std::string_view model, int delta,
                            int size) const;
};

mae_report merge_reports(std::span<mae_report const> reports);

/// Per station and horizon: rows, chronological split, one forest and one
/// boosting run at the largest tree count, evaluated at every requested
/// tree-count prefix.
mae_report run_univariate_sweep(dataset const& data, sweep_grid const& grid,
                                sweep_config const& config);

/// Per region and horizon: one PLSR model over all region stations with
/// cross-validated component count.
mae_report run_multivariate_sweep(dataset const& data,
                                  region_partition const& partition,
                                  sweep_grid const& grid,
                                  sweep_config const& config);

struct comparison_table {
  std::vector<int> horizons;
  std::vector<std::string> models;
  std::vector<std::vector<double>> mae;  // [horizon][model]
  std::vector<std::vector<int>> sizes;

  std::string to_csv() const;
  std::string to_console() const;
};

/// Rows are horizons, columns models. Tree models use `tree_count` when given
/// and their best size otherwise. Throws alignment_error naming every missing
/// (model, horizon) cell.
comparison_table compare_models(std::span<mae_report const> reports,
                                std::optional<int> tree_count = std::nullopt);

}  // namespace bss
