#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bss/graph.hpp"
#include "bss/ingest.hpp"
#include "bss/time.hpp"

namespace bss {

enum class feature_kind { numeric, ordinal_calendar, one_hot_categorical };

/// How the weather event enters the design matrix. Trees take the ordinal
/// code, linear models the one-hot group.
enum class event_encoding { ordinal, one_hot };

struct feature_spec {
  std::string name;
  feature_kind kind{feature_kind::numeric};

  friend bool operator==(feature_spec const&, feature_spec const&) = default;
};

struct encoding_schema {
  std::vector<feature_spec> features;
  std::vector<std::string> targets;
  std::string target_transform{"log1p"};

  std::size_t width() const { return features.size(); }
  std::vector<std::string> feature_names() const;
  std::string to_json() const;

  friend bool operator==(encoding_schema const&,
                         encoding_schema const&) = default;
};

/// own_stock, nbr1_stock..nbrK_stock, calendar, weather.
encoding_schema univariate_schema(int neighbor_count, event_encoding events);

/// stock_<id> per predictor station, calendar, weather; one target per
/// region station.
encoding_schema region_schema(std::span<int const> predictor_stations,
                              std::span<int const> target_stations,
                              event_encoding events);

struct feature_row {
  int station_id{0};
  date_time t;
  int own_stock{0};
  std::vector<int> neighbor_stocks;
  int month{1};
  int day_of_week{1};
  int time_of_day{0};
  std::optional<daily_weather> weather;
  date_time target_time;
  double target{0.0};
};

struct row_options {
  int grid_step{15};  // minutes
  int delta{15};      // horizon, minutes
  bool keep_missing_weather{false};
  event_encoding events{event_encoding::ordinal};
  // grid bounds; default to the event store's observed span
  std::optional<date_time> begin;
  std::optional<date_time> end;
};

/// Rows and targets for one response block. Row r of `x` and `y` belongs to
/// grid instant times[r]; the target refers to target_times[r].
struct design_matrix {
  encoding_schema schema;
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;  // log1p scale
  std::vector<date_time> times;
  std::vector<date_time> target_times;
  std::vector<int> station_ids;  // per row; region id for region blocks

  std::size_t rows() const { return times.size(); }
  design_matrix subset(std::span<std::size_t const> idx) const;
};

/// Grid instants: multiples of grid_step (minutes since epoch) with
/// begin <= t and t + delta <= end.
std::vector<date_time> grid_instants(date_time begin, date_time end,
                                     int grid_step, int delta);

std::vector<feature_row> build_rows(event_store const& events,
                                    weather_table const& weather,
                                    std::string const& zip,
                                    neighbor_set const& neighbors,
                                    row_options const& opt);

/// Missing weather becomes NaN; model fitting rejects such rows.
design_matrix to_design_matrix(std::span<feature_row const> rows,
                               int neighbor_count, event_encoding events);

/// The predictor stations of a region block: the region's own stations in id
/// order, then neighbors outside the region in id order, each once.
std::vector<int> region_predictor_stations(
    std::span<int const> region, std::map<int, neighbor_set> const& neighbors);

/// Most common ZIP among the region's stations, ties toward the smaller ZIP.
std::string region_zip(std::span<int const> region,
                       std::span<station_meta const> stations);

design_matrix build_region_rows(event_store const& events,
                                weather_table const& weather,
                                std::string const& zip,
                                std::span<int const> region,
                                std::map<int, neighbor_set> const& neighbors,
                                row_options const& opt, int region_id = 0);

struct dataset_split {
  design_matrix train;
  design_matrix test;
  date_time split_time;
  std::size_t leakage_dropped{0};
};

inline constexpr double kDefaultTrainFraction = 0.8;

/// Earliest ceil(fraction * n) rows by time train the model; train rows whose
/// target time reaches split_time are dropped.
dataset_split chronological_split(design_matrix const& m,
                                  double train_fraction = kDefaultTrainFraction);

/// exp(z) - 1 floored at zero.
double inverse_target(double z);
double forward_target(double bikes);

/// Header: time,station_id,<features>,<targets>.
void write_design_csv(std::ostream& out, design_matrix const& m);

}  // namespace bss
