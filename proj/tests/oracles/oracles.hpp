#pragma once

// Brute-force reference implementations. Each one recomputes a result the
// slow, obvious way so tests can compare against the library.

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

struct split {
  int feature{-1};
  double threshold{0.0};
  double sse{0.0};
};

/// Every feature and every gap between adjacent distinct values, children
/// scored by their summed squared error computed from scratch. Returns
/// nothing when no admissible split lowers the error.
std::optional<split> best_root_split(Eigen::MatrixXd const& x,
                                     Eigen::VectorXd const& y, int min_leaf);

/// Least squares with an intercept through the normal equations.
Eigen::MatrixXd ols_predict(Eigen::MatrixXd const& x_train,
                            Eigen::MatrixXd const& y_train,
                            Eigen::MatrixXd const& x_eval);

struct stamped {
  std::int64_t t;
  int value;
};

/// Indices of snapshots whose value differs from the previously kept one.
std::vector<std::size_t> kept_changes(std::vector<int> const& values);

/// Value of the latest entry at or before t by linear scan.
std::optional<int> locf(std::vector<stamped> const& series, std::int64_t t);

using tally = std::map<std::pair<int, int>, long long>;

tally count_pairs(std::vector<std::pair<int, int>> const& trips);

/// All other stations sorted by (inbound count desc, id asc), first k kept.
std::vector<int> top_k(tally const& counts, std::vector<int> const& ids,
                       int target, int k);

/// Connected components over pairs with a trip in either direction,
/// self-trips ignored; components sorted by smallest member.
std::vector<std::vector<int>> components(
    std::vector<int> ids, std::vector<std::pair<int, int>> const& trips);

struct civil {
  int year;
  int month;
  int day;
};

/// Days since 1970-01-01 to a proleptic Gregorian date.
civil civil_from_days(std::int64_t days);

/// Monday = 1 ... Sunday = 7.
int iso_weekday(int year, int month, int day);

struct weather_day {
  std::int64_t day;  // days since epoch
  double values[5];
  int event;
};

struct replay_row {
  std::int64_t t;
  int own;
  std::vector<int> neighbors;
  int month;
  int weekday;
  int minute;
  double weather[5];
  int event;
  double target;
};

/// Rows on multiples of `step` in [begin, end - delta], replaying each
/// station's series with locf.
std::vector<replay_row> replay_rows(
    std::map<int, std::vector<stamped>> const& series,
    std::vector<weather_day> const& weather, int station,
    std::vector<int> const& neighbors, std::int64_t begin, std::int64_t end,
    int step, int delta);

struct replay_region {
  std::vector<std::int64_t> times;
  std::vector<std::vector<int>> stocks;  // per row, predictor order
  std::vector<std::vector<double>> targets;
};

replay_region replay_region_rows(
    std::map<int, std::vector<stamped>> const& series,
    std::vector<weather_day> const& weather,
    std::vector<int> const& predictors, std::vector<int> const& targets,
    std::int64_t begin, std::int64_t end, int step, int delta);

/// Per-row bike-scale errors averaged per station, then weighted by rows.
struct mae_result {
  std::map<int, double> per_station;
  double weighted{0.0};
};

mae_result naive_mae(std::vector<double> const& pred_log,
                     std::vector<double> const& truth_log,
                     std::vector<int> const& stations);

}  // namespace oracle
