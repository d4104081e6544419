#include "bss/sweep.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <set>
#include <tuple>

#include <fmt/format.h>

#include "bss/error.hpp"
#include "bss/features.hpp"
#include "bss/forest.hpp"
#include "bss/lsboost.hpp"
#include "bss/metrics.hpp"
#include "bss/parallel.hpp"
#include "bss/rng.hpp"

namespace bss {

std::string_view to_string(model_kind m) {
  switch (m) {
    case model_kind::rf: return "rf";
    case model_kind::lsboost: return "lsboost";
    case model_kind::plsr: return "plsr";
    case model_kind::mean: return "mean";
  }
  return "rf";
}

model_kind parse_model_kind(std::string_view name) {
  for (auto const m : {model_kind::rf, model_kind::lsboost, model_kind::plsr,
                       model_kind::mean}) {
    if (name == to_string(m)) {
      return m;
    }
  }
  throw validation_error{fmt::format(
      "unknown model '{}' (expected rf, lsboost, plsr or mean)", name)};
}

void sweep_grid::validate() const {
  auto check = [](std::vector<int> const& v, std::string_view what) {
    if (v.empty()) {
      throw validation_error{fmt::format("sweep grid has no {}", what)};
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] <= 0 || (i > 0 && v[i] <= v[i - 1])) {
        throw validation_error{fmt::format(
            "sweep grid {} must be positive and strictly increasing", what)};
      }
    }
  };
  check(horizons, "horizons");
  check(tree_counts, "tree counts");
  if (models.empty()) {
    throw validation_error{"sweep grid has no models"};
  }
}

bool sweep_grid::has(model_kind m) const {
  return std::find(models.begin(), models.end(), m) != models.end();
}

std::string const& dataset::zip_of(int station_id) const {
  for (auto const& s : stations) {
    if (s.station_id == station_id) {
      return s.zip_code;
    }
  }
  throw lookup_error{fmt::format("no metadata for station {}", station_id)};
}

namespace {

std::uint64_t model_tag(model_kind m) { return static_cast<std::uint64_t>(m) + 1; }

int size_key(mae_record const& r) { return r.model == "plsr" ? 0 : r.size; }

struct job_result {
  std::vector<mae_record> records;
  std::vector<skipped_unit> skipped;
  std::size_t models_trained{0};
};

void add_records(job_result& out, std::string_view model, int delta, int size,
                 mae_summary const& s) {
  for (auto const& st : s.stations) {
    out.records.push_back({std::string{model}, delta, size, st.station_id,
                           st.mae_bikes, st.mae_log, st.n});
  }
}

std::vector<double> to_vector(Eigen::VectorXd const& v) {
  return {v.data(), v.data() + v.size()};
}

job_result univariate_job(dataset const& data, sweep_grid const& grid,
                          sweep_config const& config, int station, int delta) {
  job_result out;
  auto const& nbrs = data.neighbors.at(station);
  row_options opt;
  opt.grid_step = config.grid_step;
  opt.delta = delta;
  opt.events = event_encoding::ordinal;
  auto const rows = build_rows(data.events, data.weather, data.zip_of(station),
                               nbrs, opt);
  auto const m = to_design_matrix(
      rows, static_cast<int>(nbrs.neighbors.size()), opt.events);
  if (m.rows() < config.min_train_rows + config.min_test_rows) {
    out.skipped.push_back({station, delta,
                           fmt::format("{} rows, too few", m.rows())});
    return out;
  }
  dataset_split split;
  try {
    split = chronological_split(m, config.train_fraction);
  } catch (degenerate_split_error const& e) {
    out.skipped.push_back({station, delta, e.what()});
    return out;
  }
  if (split.train.rows() < config.min_train_rows ||
      split.test.rows() < config.min_test_rows) {
    out.skipped.push_back({station, delta,
                           fmt::format("{} train / {} test rows, too few",
                                       split.train.rows(), split.test.rows())});
    return out;
  }

  Eigen::VectorXd const y_train = split.train.y.col(0);
  auto const truth = to_vector(split.test.y.col(0));
  std::vector<int> const ids(split.test.rows(), station);
  auto const max_trees = grid.tree_counts.back();

  if (grid.has(model_kind::rf)) {
    forest_config fc;
    fc.tree = config.tree;
    fc.n_trees = max_trees;
    fc.mtry = config.forest_mtry;
    fc.bootstrap = config.bootstrap;
    fc.seed = derive_seed(config.seed,
                          {static_cast<std::uint64_t>(station),
                           static_cast<std::uint64_t>(delta),
                           model_tag(model_kind::rf)});
    auto const forest = fit_forest(split.train.x, y_train, fc, 1);
    ++out.models_trained;
    for (auto const c : grid.tree_counts) {
      auto const pred = to_vector(forest.predict(split.test.x, c));
      add_records(out, "rf", delta, c, mae_per_station(pred, truth, ids));
    }
  }
  if (grid.has(model_kind::lsboost)) {
    boost_config bc;
    bc.tree = config.tree;
    bc.n_stages = max_trees;
    bc.shrinkage = config.shrinkage;
    auto const boost = fit_lsboost(split.train.x, y_train, bc);
    ++out.models_trained;
    for (auto const c : grid.tree_counts) {
      auto const pred = to_vector(boost.predict(split.test.x, c));
      add_records(out, "lsboost", delta, c, mae_per_station(pred, truth, ids));
    }
  }
  if (grid.has(model_kind::mean)) {
    std::vector<double> const pred(truth.size(), y_train.mean());
    add_records(out, "mean", delta, 0, mae_per_station(pred, truth, ids));
  }
  return out;
}

job_result multivariate_job(dataset const& data, std::vector<int> const& region,
                            int region_id, sweep_config const& config,
                            int delta) {
  job_result out;
  row_options opt;
  opt.grid_step = config.grid_step;
  opt.delta = delta;
  opt.events = event_encoding::one_hot;
  auto const zip = region_zip(region, data.stations);
  auto const m = build_region_rows(data.events, data.weather, zip, region,
                                   data.neighbors, opt, region_id);
  if (m.rows() < config.min_train_rows + config.min_test_rows) {
    out.skipped.push_back({region_id, delta,
                           fmt::format("{} rows, too few", m.rows())});
    return out;
  }
  try {
    auto const split = chronological_split(m, config.train_fraction);
    if (split.train.rows() < config.min_train_rows ||
        split.test.rows() < config.min_test_rows) {
      out.skipped.push_back(
          {region_id, delta,
           fmt::format("{} train / {} test rows, too few", split.train.rows(),
                       split.test.rows())});
      return out;
    }
    // a component that fails to converge bounds the candidate range
    auto max_a = config.max_components;
    std::optional<plsr_model> model;
    while (!model) {
      try {
        auto const sel = select_components(split.train.x, split.train.y,
                                           config.cv_folds, max_a, config.plsr);
        model = fit_plsr(split.train.x, split.train.y, sel.chosen, config.plsr);
      } catch (convergence_error const& e) {
        if (e.component() <= 1 || e.component() - 1 >= max_a) {
          throw;
        }
        max_a = e.component() - 1;
      }
    }
    ++out.models_trained;
    Eigen::MatrixXd const pred = model->predict(split.test.x);
    for (Eigen::Index j = 0; j < pred.cols(); ++j) {
      auto const station = region[static_cast<std::size_t>(j)];
      std::vector<int> const ids(split.test.rows(), station);
      auto const p = to_vector(pred.col(j));
      auto const t = to_vector(split.test.y.col(j));
      add_records(out, "plsr", delta, model->components(),
                  mae_per_station(p, t, ids));
    }
  } catch (numeric_error const& e) {
    out.skipped.push_back({region_id, delta, e.what()});
  } catch (validation_error const& e) {
    out.skipped.push_back({region_id, delta, e.what()});
  }
  return out;
}

mae_report collect(std::vector<job_result>& results) {
  mae_report report;
  for (auto& r : results) {
    report.records.insert(report.records.end(), r.records.begin(),
                          r.records.end());
    report.skipped.insert(report.skipped.end(), r.skipped.begin(),
                          r.skipped.end());
    report.models_trained += r.models_trained;
  }
  report.finalize();
  return report;
}

}  // namespace

void mae_report::finalize() {
  auto const key = [](mae_record const& r) {
    return std::tuple{r.model, r.delta, r.size, r.station_id};
  };
  std::sort(records.begin(), records.end(),
            [&](auto const& a, auto const& b) { return key(a) < key(b); });
  std::sort(skipped.begin(), skipped.end(), [](auto const& a, auto const& b) {
    return std::tie(a.id, a.delta, a.reason) < std::tie(b.id, b.delta, b.reason);
  });

  std::map<std::tuple<std::string, int, int>, std::vector<station_mae>> groups;
  for (auto const& r : records) {
    groups[{r.model, r.delta, size_key(r)}].push_back(
        {r.station_id, r.mae_bikes, r.mae_log, r.n_test});
  }
  aggregates.clear();
  for (auto& [k, stations] : groups) {
    auto const n_stations = stations.size();
    auto const s = summarize(std::move(stations));
    aggregates.push_back({std::get<0>(k), std::get<1>(k), std::get<2>(k),
                          s.mae_bikes, s.mae_bikes_unweighted, s.mae_log,
                          n_stations, s.n});
  }
}

mae_aggregate const* mae_report::find(std::string_view model, int delta,
                                      int size) const {
  for (auto const& a : aggregates) {
    if (a.model == model && a.delta == delta && a.size == size) {
      return &a;
    }
  }
  return nullptr;
}

mae_report merge_reports(std::span<mae_report const> reports) {
  mae_report out;
  for (auto const& r : reports) {
    out.records.insert(out.records.end(), r.records.begin(), r.records.end());
    out.skipped.insert(out.skipped.end(), r.skipped.begin(), r.skipped.end());
    out.models_trained += r.models_trained;
  }
  out.finalize();
  return out;
}

mae_report run_univariate_sweep(dataset const& data, sweep_grid const& grid,
                                sweep_config const& config) {
  grid.validate();
  std::vector<int> stations;
  for (auto const& s : data.stations) {
    if (data.neighbors.contains(s.station_id) &&
        !data.events.events(s.station_id).empty()) {
      stations.push_back(s.station_id);
    }
  }
  std::sort(stations.begin(), stations.end());
  if (stations.size() < 2) {
    throw validation_error{"a univariate sweep needs at least two stations"};
  }
  auto const n_h = grid.horizons.size();
  std::vector<job_result> results(stations.size() * n_h);
  parallel_for(results.size(), config.workers, [&](std::size_t j) {
    results[j] = univariate_job(data, grid, config, stations[j / n_h],
                                grid.horizons[j % n_h]);
  });
  return collect(results);
}

mae_report run_multivariate_sweep(dataset const& data,
                                  region_partition const& partition,
                                  sweep_grid const& grid,
                                  sweep_config const& config) {
  grid.validate();
  if (partition.regions.empty()) {
    throw validation_error{"partition has no regions"};
  }
  auto const n_h = grid.horizons.size();
  std::vector<job_result> results(partition.regions.size() * n_h);
  parallel_for(results.size(), config.workers, [&](std::size_t j) {
    auto const r = j / n_h;
    results[j] = multivariate_job(data, partition.regions[r],
                                  static_cast<int>(r), config,
                                  grid.horizons[j % n_h]);
  });
  return collect(results);
}

std::string comparison_table::to_csv() const {
  std::string out = "delta_minutes";
  for (auto const& m : models) {
    out += fmt::format(",{}_mae_bikes,{}_size", m, m);
  }
  out += '\n';
  for (std::size_t h = 0; h < horizons.size(); ++h) {
    out += fmt::format("{}", horizons[h]);
    for (std::size_t m = 0; m < models.size(); ++m) {
      out += fmt::format(",{:.6f},{}", mae[h][m], sizes[h][m]);
    }
    out += '\n';
  }
  return out;
}

std::string comparison_table::to_console() const {
  std::string out = fmt::format("{:>10}", "delta_min");
  for (auto const& m : models) {
    out += fmt::format(" {:>14}", m);
  }
  out += '\n';
  for (std::size_t h = 0; h < horizons.size(); ++h) {
    out += fmt::format("{:>10}", horizons[h]);
    for (std::size_t m = 0; m < models.size(); ++m) {
      out += fmt::format(" {:>14.4f}", mae[h][m]);
    }
    out += '\n';
  }
  return out;
}

comparison_table compare_models(std::span<mae_report const> reports,
                                std::optional<int> tree_count) {
  std::set<int> horizons;
  std::vector<std::string> models;
  for (auto const& r : reports) {
    for (auto const& a : r.aggregates) {
      horizons.insert(a.delta);
      if (std::find(models.begin(), models.end(), a.model) == models.end()) {
        models.push_back(a.model);
      }
    }
  }
  auto rank = [](std::string const& m) {
    static constexpr std::string_view order[] = {"rf", "lsboost", "plsr", "mean"};
    for (int i = 0; i < 4; ++i) {
      if (m == order[i]) {
        return i;
      }
    }
    return 4;
  };
  std::stable_sort(models.begin(), models.end(),
                   [&](auto const& a, auto const& b) { return rank(a) < rank(b); });

  comparison_table t;
  t.horizons.assign(horizons.begin(), horizons.end());
  t.models = models;
  std::vector<std::string> missing;
  for (auto const h : t.horizons) {
    std::vector<double> row;
    std::vector<int> sizes;
    for (auto const& m : models) {
      mae_aggregate const* best = nullptr;
      bool const tree_model = m == "rf" || m == "lsboost";
      for (auto const& r : reports) {
        for (auto const& a : r.aggregates) {
          if (a.model != m || a.delta != h) {
            continue;
          }
          if (tree_model && tree_count) {
            if (a.size == *tree_count) {
              best = &a;
            }
          } else if (best == nullptr || a.mae_bikes < best->mae_bikes) {
            best = &a;
          }
        }
      }
      if (best == nullptr) {
        missing.push_back(fmt::format("({}, {})", m, h));
        row.push_back(std::numeric_limits<double>::quiet_NaN());
        sizes.push_back(0);
      } else {
        row.push_back(best->mae_bikes);
        sizes.push_back(best->size);
      }
    }
    t.mae.push_back(std::move(row));
    t.sizes.push_back(std::move(sizes));
  }
  if (!missing.empty()) {
    std::string list;
    for (auto const& s : missing) {
      list += (list.empty() ? "" : ", ") + s;
    }
    throw alignment_error{"report grids do not align; missing cells: " + list};
  }
  return t;
}

}  // namespace bss
