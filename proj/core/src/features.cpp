#include "bss/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "bss/csv.hpp"
#include "bss/error.hpp"

namespace bss {

namespace {

constexpr std::array<char const*, kWeatherEventCount> kEventNames{
    "none", "fog", "rain", "fog_rain", "thunderstorm", "other"};

void append_calendar_and_weather(std::vector<feature_spec>& f,
                                 event_encoding events) {
  f.push_back({"month", feature_kind::ordinal_calendar});
  f.push_back({"day_of_week", feature_kind::ordinal_calendar});
  f.push_back({"time_of_day", feature_kind::ordinal_calendar});
  f.push_back({"mean_temperature_f", feature_kind::numeric});
  f.push_back({"mean_humidity", feature_kind::numeric});
  f.push_back({"mean_visibility_miles", feature_kind::numeric});
  f.push_back({"mean_wind_speed_mph", feature_kind::numeric});
  f.push_back({"precipitation_inches", feature_kind::numeric});
  if (events == event_encoding::ordinal) {
    f.push_back({"event", feature_kind::ordinal_calendar});
  } else {
    for (auto const* n : kEventNames) {
      f.push_back({fmt::format("event_{}", n),
                   feature_kind::one_hot_categorical});
    }
  }
}

/// Writes calendar and weather values starting at column `c`.
void encode_calendar_and_weather(Eigen::MatrixXd& x, Eigen::Index r,
                                 Eigen::Index c, date_time t,
                                 daily_weather const* w,
                                 event_encoding events) {
  auto const d = t.day();
  x(r, c++) = d.month();
  x(r, c++) = t.iso_weekday();
  x(r, c++) = t.minute_of_day();
  auto const nan = std::numeric_limits<double>::quiet_NaN();
  x(r, c++) = w ? w->mean_temperature : nan;
  x(r, c++) = w ? w->mean_humidity : nan;
  x(r, c++) = w ? w->mean_visibility : nan;
  x(r, c++) = w ? w->mean_wind_speed : nan;
  x(r, c++) = w ? w->precipitation : nan;
  if (events == event_encoding::ordinal) {
    x(r, c++) = w ? static_cast<double>(w->event) : nan;
  } else {
    for (int e = 0; e < kWeatherEventCount; ++e) {
      x(r, c++) = !w ? nan : (static_cast<int>(w->event) == e ? 1.0 : 0.0);
    }
  }
}

std::int64_t ceil_to_multiple(std::int64_t v, std::int64_t step) {
  auto q = v / step;
  if (q * step < v) {
    ++q;
  }
  return q * step;
}

}  // namespace

std::vector<std::string> encoding_schema::feature_names() const {
  std::vector<std::string> out;
  out.reserve(features.size());
  for (auto const& f : features) {
    out.push_back(f.name);
  }
  return out;
}

std::string encoding_schema::to_json() const {
  auto kind_name = [](feature_kind k) {
    switch (k) {
      case feature_kind::numeric: return "numeric";
      case feature_kind::ordinal_calendar: return "ordinal";
      case feature_kind::one_hot_categorical: return "one_hot";
    }
    return "numeric";
  };
  nlohmann::json j;
  j["target_transform"] = target_transform;
  j["targets"] = targets;
  j["features"] = nlohmann::json::array();
  for (auto const& f : features) {
    j["features"].push_back({{"name", f.name}, {"kind", kind_name(f.kind)}});
  }
  return j.dump(2);
}

encoding_schema univariate_schema(int neighbor_count, event_encoding events) {
  encoding_schema s;
  s.features.push_back({"own_stock", feature_kind::numeric});
  for (int k = 1; k <= neighbor_count; ++k) {
    s.features.push_back({fmt::format("nbr{}_stock", k), feature_kind::numeric});
  }
  append_calendar_and_weather(s.features, events);
  s.targets = {"target_log1p"};
  return s;
}

encoding_schema region_schema(std::span<int const> predictor_stations,
                              std::span<int const> target_stations,
                              event_encoding events) {
  encoding_schema s;
  for (auto const id : predictor_stations) {
    s.features.push_back({fmt::format("stock_{}", id), feature_kind::numeric});
  }
  append_calendar_and_weather(s.features, events);
  for (auto const id : target_stations) {
    s.targets.push_back(fmt::format("target_log1p_{}", id));
  }
  return s;
}

design_matrix design_matrix::subset(std::span<std::size_t const> idx) const {
  design_matrix out;
  out.schema = schema;
  out.x.resize(static_cast<Eigen::Index>(idx.size()), x.cols());
  out.y.resize(static_cast<Eigen::Index>(idx.size()), y.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    auto const src = static_cast<Eigen::Index>(idx[r]);
    out.x.row(static_cast<Eigen::Index>(r)) = x.row(src);
    out.y.row(static_cast<Eigen::Index>(r)) = y.row(src);
    out.times.push_back(times[idx[r]]);
    out.target_times.push_back(target_times[idx[r]]);
    out.station_ids.push_back(station_ids[idx[r]]);
  }
  return out;
}

double forward_target(double bikes) { return std::log1p(bikes); }

double inverse_target(double z) { return std::max(0.0, std::expm1(z)); }

std::vector<date_time> grid_instants(date_time begin, date_time end,
                                     int grid_step, int delta) {
  if (grid_step <= 0 || delta <= 0) {
    throw validation_error{"grid_step and delta must be positive"};
  }
  std::vector<date_time> out;
  for (auto t = ceil_to_multiple(begin.minutes, grid_step);
       t + delta <= end.minutes; t += grid_step) {
    out.push_back({t});
  }
  return out;
}

std::vector<feature_row> build_rows(event_store const& events,
                                    weather_table const& weather,
                                    std::string const& zip,
                                    neighbor_set const& neighbors,
                                    row_options const& opt) {
  auto const i = neighbors.station_id;
  auto const own = events.events(i);
  std::vector<std::span<change_event const>> nbr;
  nbr.reserve(neighbors.neighbors.size());
  for (auto const j : neighbors.neighbors) {
    nbr.push_back(events.events(j));
  }

  std::vector<feature_row> rows;
  auto const grid =
      grid_instants(opt.begin.value_or(events.observed_begin),
                    opt.end.value_or(events.observed_end), opt.grid_step,
                    opt.delta);
  for (auto const t : grid) {
    auto const now = stock_at(own, t);
    auto const later = stock_at(own, t + opt.delta);
    if (!now || !later) {
      continue;
    }
    feature_row row;
    row.neighbor_stocks.reserve(nbr.size());
    bool complete = true;
    for (auto const& ev : nbr) {
      auto const s = stock_at(ev, t);
      if (!s) {
        complete = false;
        break;
      }
      row.neighbor_stocks.push_back(*s);
    }
    if (!complete) {
      continue;
    }
    auto const* w = weather.find(zip, t.day());
    if (w == nullptr && !opt.keep_missing_weather) {
      continue;
    }
    row.station_id = i;
    row.t = t;
    row.own_stock = *now;
    row.month = static_cast<int>(t.day().month());
    row.day_of_week = t.iso_weekday();
    row.time_of_day = t.minute_of_day();
    if (w != nullptr) {
      row.weather = *w;
    }
    row.target_time = t + opt.delta;
    row.target = forward_target(*later);
    rows.push_back(std::move(row));
  }
  return rows;
}

design_matrix to_design_matrix(std::span<feature_row const> rows,
                               int neighbor_count, event_encoding events) {
  design_matrix m;
  m.schema = univariate_schema(neighbor_count, events);
  auto const n = static_cast<Eigen::Index>(rows.size());
  m.x.resize(n, static_cast<Eigen::Index>(m.schema.width()));
  m.y.resize(n, 1);
  for (Eigen::Index r = 0; r < n; ++r) {
    auto const& row = rows[static_cast<std::size_t>(r)];
    if (row.neighbor_stocks.size() != static_cast<std::size_t>(neighbor_count)) {
      throw validation_error{"feature row neighbor width mismatch"};
    }
    Eigen::Index c = 0;
    m.x(r, c++) = row.own_stock;
    for (auto const s : row.neighbor_stocks) {
      m.x(r, c++) = s;
    }
    encode_calendar_and_weather(m.x, r, c, row.t,
                                row.weather ? &*row.weather : nullptr, events);
    m.y(r, 0) = row.target;
    m.times.push_back(row.t);
    m.target_times.push_back(row.target_time);
    m.station_ids.push_back(row.station_id);
  }
  return m;
}

std::vector<int> region_predictor_stations(
    std::span<int const> region, std::map<int, neighbor_set> const& neighbors) {
  std::vector<int> own{region.begin(), region.end()};
  std::sort(own.begin(), own.end());
  own.erase(std::unique(own.begin(), own.end()), own.end());
  std::set<int> extra;
  for (auto const id : own) {
    auto const it = neighbors.find(id);
    if (it == neighbors.end()) {
      throw lookup_error{fmt::format("no neighbor set for station {}", id)};
    }
    for (auto const j : it->second.neighbors) {
      if (!std::binary_search(own.begin(), own.end(), j)) {
        extra.insert(j);
      }
    }
  }
  own.insert(own.end(), extra.begin(), extra.end());
  return own;
}

std::string region_zip(std::span<int const> region,
                       std::span<station_meta const> stations) {
  std::map<std::string, std::size_t> tally;
  for (auto const& s : stations) {
    if (std::find(region.begin(), region.end(), s.station_id) != region.end()) {
      ++tally[s.zip_code];
    }
  }
  std::string best;
  std::size_t best_count = 0;
  for (auto const& [zip, count] : tally) {
    if (count > best_count) {
      best = zip;
      best_count = count;
    }
  }
  return best;
}

design_matrix build_region_rows(event_store const& events,
                                weather_table const& weather,
                                std::string const& zip,
                                std::span<int const> region,
                                std::map<int, neighbor_set> const& neighbors,
                                row_options const& opt, int region_id) {
  if (region.empty()) {
    throw validation_error{"region must contain at least one station"};
  }
  std::vector<int> targets{region.begin(), region.end()};
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  auto const predictors = region_predictor_stations(targets, neighbors);

  design_matrix m;
  m.schema = region_schema(predictors, targets, opt.events);

  std::vector<std::span<change_event const>> pred_events;
  for (auto const id : predictors) {
    pred_events.push_back(events.events(id));
  }
  std::vector<std::span<change_event const>> target_events;
  for (auto const id : targets) {
    target_events.push_back(events.events(id));
  }

  auto const grid =
      grid_instants(opt.begin.value_or(events.observed_begin),
                    opt.end.value_or(events.observed_end), opt.grid_step,
                    opt.delta);
  auto const width = static_cast<Eigen::Index>(m.schema.width());
  auto const n_targets = static_cast<Eigen::Index>(targets.size());
  Eigen::MatrixXd x(static_cast<Eigen::Index>(grid.size()), width);
  Eigen::MatrixXd y(static_cast<Eigen::Index>(grid.size()), n_targets);
  Eigen::Index r = 0;
  std::vector<double> stocks(predictors.size());
  std::vector<double> future(targets.size());
  for (auto const t : grid) {
    bool ok = true;
    for (std::size_t s = 0; ok && s < pred_events.size(); ++s) {
      auto const v = stock_at(pred_events[s], t);
      ok = v.has_value();
      if (ok) {
        stocks[s] = *v;
      }
    }
    for (std::size_t s = 0; ok && s < target_events.size(); ++s) {
      auto const v = stock_at(target_events[s], t + opt.delta);
      ok = v.has_value();
      if (ok) {
        future[s] = *v;
      }
    }
    if (!ok) {
      continue;
    }
    auto const* w = weather.find(zip, t.day());
    if (w == nullptr && !opt.keep_missing_weather) {
      continue;
    }
    Eigen::Index c = 0;
    for (auto const s : stocks) {
      x(r, c++) = s;
    }
    encode_calendar_and_weather(x, r, c, t, w, opt.events);
    for (Eigen::Index s = 0; s < n_targets; ++s) {
      y(r, s) = forward_target(future[static_cast<std::size_t>(s)]);
    }
    m.times.push_back(t);
    m.target_times.push_back(t + opt.delta);
    m.station_ids.push_back(region_id);
    ++r;
  }
  m.x = x.topRows(r);
  m.y = y.topRows(r);
  return m;
}

dataset_split chronological_split(design_matrix const& m,
                                  double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw validation_error{"train_fraction must lie in (0, 1)"};
  }
  auto const n = m.rows();
  if (n == 0) {
    throw validation_error{"cannot split an empty design matrix"};
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return m.times[a] < m.times[b];
  });
  if (m.times[order.front()] == m.times[order.back()]) {
    throw degenerate_split_error{
        "all rows share one timestamp; no chronological split exists"};
  }
  auto n_train = static_cast<std::size_t>(
      std::ceil(train_fraction * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  auto const split_time = m.times[order[n_train]];

  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::size_t dropped = 0;
  for (auto const i : order) {
    if (m.times[i] < split_time) {
      if (m.target_times[i] < split_time) {
        train.push_back(i);
      } else {
        ++dropped;
      }
    } else {
      test.push_back(i);
    }
  }
  if (train.empty()) {
    throw degenerate_split_error{
        "chronological split leaves no training rows"};
  }
  return {m.subset(train), m.subset(test), split_time, dropped};
}

void write_design_csv(std::ostream& out, design_matrix const& m) {
  out << "time,station_id";
  for (auto const& f : m.schema.features) {
    out << ',' << csv::escape(f.name);
  }
  for (auto const& t : m.schema.targets) {
    out << ',' << csv::escape(t);
  }
  out << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto const ri = static_cast<Eigen::Index>(r);
    out << format_iso(m.times[r]) << ',' << m.station_ids[r];
    for (Eigen::Index c = 0; c < m.x.cols(); ++c) {
      out << ',' << fmt::format("{}", m.x(ri, c));
    }
    for (Eigen::Index c = 0; c < m.y.cols(); ++c) {
      out << ',' << fmt::format("{}", m.y(ri, c));
    }
    out << '\n';
  }
}

}  // namespace bss
