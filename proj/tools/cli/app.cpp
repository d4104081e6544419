#include "cli/app.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "bss/error.hpp"
#include "bss/features.hpp"
#include "bss/graph.hpp"
#include "bss/ingest.hpp"
#include "bss/report.hpp"
#include "bss/sweep.hpp"
#include "bss/synthetic.hpp"
#include "cli/settings.hpp"

namespace bss::cli {

namespace fs = std::filesystem;

namespace {

class invariant_violation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

struct context {
  settings const& cfg;
  std::ostream& out;
  std::ostream& err;

  fs::path out_dir() const { return cfg.text("out"); }
  fs::path in_dir() const {
    auto const& in = cfg.text("in");
    return in.empty() ? out_dir() : fs::path{in};
  }
  std::string stamp() const {
    return report_stamp(static_cast<std::uint64_t>(cfg.integer("seed")),
                        cfg.effective());
  }
};

std::ifstream open_input(fs::path const& path) {
  std::ifstream in{path, std::ios::binary};
  if (!in) {
    throw validation_error{fmt::format("cannot read {}", path.string())};
  }
  return in;
}

std::ifstream open_prerequisite(fs::path const& path, std::string_view stage) {
  if (!fs::exists(path)) {
    throw missing_prerequisite{fmt::format(
        "missing {} (run `bss {}` first, or pass --synthetic)", path.string(),
        stage)};
  }
  return open_input(path);
}

std::ofstream open_output(fs::path const& dir, std::string_view name) {
  fs::create_directories(dir);
  auto const path = dir / name;
  std::ofstream out{path, std::ios::binary};
  if (!out) {
    throw validation_error{fmt::format("cannot write {}", path.string())};
  }
  return out;
}

void write_effective(context const& ctx, std::string_view command) {
  auto out = open_output(ctx.out_dir(), fmt::format("{}_config.txt", command));
  out << ctx.stamp() << '\n' << ctx.cfg.effective();
}

int resolve_k(settings const& cfg, std::size_t n_stations) {
  auto const n = static_cast<long long>(n_stations);
  if (n < 2) {
    throw validation_error{"neighbor sets need at least two stations"};
  }
  if (!cfg.explicitly_set("k")) {
    return static_cast<int>(std::min<long long>(kDefaultNeighborCount, n - 1));
  }
  auto const k = cfg.integer("k");
  if (k <= 0 || k > n - 1) {
    throw validation_error{fmt::format(
        "k = {} neighbors is impossible with {} stations: k must lie in "
        "[1, {}]",
        k, n, n - 1)};
  }
  return static_cast<int>(k);
}

synthetic_config synthetic_settings(settings const& cfg) {
  synthetic_config s;
  s.n_stations = static_cast<int>(cfg.integer("n_stations"));
  s.n_regions = static_cast<int>(cfg.integer("n_regions"));
  s.days = static_cast<int>(cfg.integer("days"));
  s.intra_region_preference = cfg.real("preference");
  s.trips_per_station_day = cfg.real("trips_per_day");
  s.status_interval = static_cast<int>(cfg.integer("status_interval"));
  s.seed = static_cast<std::uint64_t>(cfg.integer("seed"));
  return s;
}

void print_partition(context const& ctx, region_partition const& p,
                     std::span<station_meta const> stations) {
  ctx.out << fmt::format("regions: {} (edge threshold {:.3f} trips)\n",
                         p.regions.size(), p.threshold_used);
  for (auto const& z : validate_partition_zip(p, stations)) {
    ctx.out << fmt::format("  region {}: {} stations, zip {} purity {:.3f}\n",
                           z.region, z.size, z.modal_zip, z.purity);
  }
}

// ---- ingest ----

int cmd_ingest(context const& ctx) {
  fs::path const data = ctx.cfg.text("data");
  auto const path = [&](char const* name) {
    auto const p = data / name;
    if (!fs::exists(p)) {
      throw validation_error{fmt::format("input file {} not found", p.string())};
    }
    return p;
  };
  auto const station_path = path("station.csv");
  auto const status_path = path("status.csv");
  auto const trip_path = path("trip.csv");
  auto const weather_path = path("weather.csv");

  auto in_st = open_input(station_path);
  auto const stations = parse_stations(in_st);
  auto in_status = open_input(status_path);
  auto const status = compress_status_stream(in_status, stations.records);
  auto in_trips = open_input(trip_path);
  auto const trips = parse_trips(in_trips, stations.records);
  auto in_weather = open_input(weather_path);
  auto const weather = parse_weather(in_weather);

  auto const events = status.store.total_events();
  if (events > status.snapshots) {
    throw invariant_violation{"more change events than status snapshots"};
  }

  auto const dir = ctx.out_dir();
  auto const stamp = ctx.stamp();
  {
    auto o = open_output(dir, "stations.csv");
    o << stamp << '\n';
    write_stations(o, stations.records);
  }
  {
    auto o = open_output(dir, "change_events.csv");
    o << stamp << '\n';
    write_change_events(o, status.store);
  }
  {
    auto o = open_output(dir, "trips.csv");
    o << stamp << '\n';
    write_trips(o, trips.records);
  }
  {
    auto o = open_output(dir, "weather.csv");
    o << stamp << '\n';
    write_weather(o, weather.records);
  }
  std::string summary = fmt::format(
      "stations={}\nstations_skipped={}\nstatus_snapshots={}\n"
      "status_skipped={}\ncapacity_violations={}\nchange_events={}\n"
      "trips={}\ntrips_skipped={}\ntrips_unresolved={}\nweather_rows={}\n"
      "weather_skipped={}\nweather_bad_dates={}\nweather_incomplete={}\n"
      "weather_duplicates={}\nweather_unknown_events={}\n",
      stations.records.size(), stations.skipped, status.snapshots,
      status.skipped, status.capacity_violations, events,
      trips.records.size(), trips.skipped, trips.unresolved,
      weather.records.size(), weather.skipped, weather.bad_dates,
      weather.incomplete, weather.duplicates, weather.unknown_events);
  if (events > 0) {
    summary += fmt::format("observed_begin={}\nobserved_end={}\n",
                           format_iso(status.store.observed_begin),
                           format_iso(status.store.observed_end));
  }
  {
    auto o = open_output(dir, "ingest_summary.txt");
    o << stamp << '\n' << summary;
  }
  write_effective(ctx, "ingest");
  ctx.out << summary;
  return kExitOk;
}

// ---- graph ----

int cmd_graph(context const& ctx) {
  auto const in = ctx.in_dir();
  auto st = open_prerequisite(in / "stations.csv", "ingest");
  auto const stations = parse_stations(st).records;
  auto tr = open_prerequisite(in / "trips.csv", "ingest");
  auto const trips = parse_trips(tr, stations).records;

  auto const adjacency = build_adjacency(trips, stations);
  auto const k = resolve_k(ctx.cfg, adjacency.size());
  auto const neighbors = all_neighbors(adjacency, k);
  auto const partition = partition_regions(adjacency, ctx.cfg.real("threshold"));

  auto const dir = ctx.out_dir();
  auto const stamp = ctx.stamp();
  {
    auto o = open_output(dir, "adjacency.csv");
    o << stamp << '\n';
    write_adjacency_csv(o, adjacency);
  }
  {
    auto o = open_output(dir, "neighbors.csv");
    o << stamp << '\n';
    write_neighbors_csv(o, neighbors);
  }
  {
    auto o = open_output(dir, "partition.csv");
    o << stamp << '\n';
    write_partition_csv(o, partition);
  }
  write_effective(ctx, "graph");
  ctx.out << fmt::format("stations: {}, trips: {} ({} self loops, {} dropped)\n",
                         adjacency.size(), adjacency.total_counts(),
                         adjacency.total_self_loops(), adjacency.dropped());
  ctx.out << fmt::format("neighbors per station: {}\n", k);
  print_partition(ctx, partition, stations);
  return kExitOk;
}

// ---- shared loading ----

struct loaded {
  dataset data;
  std::optional<region_partition> partition;
};

loaded load_workspace(context const& ctx, bool need_partition) {
  auto const in = ctx.in_dir();
  loaded l;
  auto st = open_prerequisite(in / "stations.csv", "ingest");
  l.data.stations = parse_stations(st).records;
  auto ev = open_prerequisite(in / "change_events.csv", "ingest");
  l.data.events = read_change_events(ev);
  auto we = open_prerequisite(in / "weather.csv", "ingest");
  l.data.weather = weather_table{parse_weather(we).records};
  auto nb = open_prerequisite(in / "neighbors.csv", "graph");
  l.data.neighbors = read_neighbors_csv(nb);
  if (need_partition) {
    auto pa = open_prerequisite(in / "partition.csv", "graph");
    l.partition = read_partition_csv(pa);
  }
  return l;
}

loaded synthesize_workspace(context const& ctx) {
  auto const bundle = generate_synthetic(synthetic_settings(ctx.cfg));
  loaded l;
  l.data.stations = bundle.stations;
  l.data.events = compress_status(bundle.status);
  l.data.weather = weather_table{bundle.weather};
  auto const adjacency = build_adjacency(bundle.trips, bundle.stations);
  l.data.neighbors = all_neighbors(adjacency, resolve_k(ctx.cfg, adjacency.size()));
  l.partition = partition_regions(adjacency, ctx.cfg.real("threshold"));

  auto const dir = ctx.out_dir();
  auto const stamp = ctx.stamp();
  {
    auto o = open_output(dir, "neighbors.csv");
    o << stamp << '\n';
    write_neighbors_csv(o, l.data.neighbors);
  }
  {
    auto o = open_output(dir, "partition.csv");
    o << stamp << '\n';
    write_partition_csv(o, *l.partition);
  }
  ctx.out << fmt::format(
      "synthetic network: {} stations, {} trips, {} change events\n",
      bundle.stations.size(), bundle.trips.size(), l.data.events.total_events());
  print_partition(ctx, *l.partition, l.data.stations);
  return l;
}

// ---- features ----

int cmd_features(context const& ctx) {
  auto const& cfg = ctx.cfg;
  auto const has_station = !cfg.text("station").empty();
  auto const has_region = !cfg.text("region").empty();
  if (has_station == has_region) {
    throw validation_error{"features needs exactly one of --station or --region"};
  }
  auto const l = load_workspace(ctx, has_region);
  auto const deltas = cfg.int_list("delta");
  if (deltas.empty()) {
    throw validation_error{"no horizon given"};
  }
  row_options opt;
  opt.grid_step = static_cast<int>(cfg.integer("grid_step"));
  opt.delta = deltas.front();
  opt.keep_missing_weather = cfg.flag("keep_missing_weather");

  design_matrix m;
  std::string name;
  if (has_station) {
    auto const id = static_cast<int>(cfg.integer("station"));
    auto const it = l.data.neighbors.find(id);
    if (it == l.data.neighbors.end()) {
      throw lookup_error{fmt::format("station {} has no neighbor set", id)};
    }
    opt.events = event_encoding::ordinal;
    auto const rows = build_rows(l.data.events, l.data.weather,
                                 l.data.zip_of(id), it->second, opt);
    m = to_design_matrix(rows, static_cast<int>(it->second.neighbors.size()),
                         opt.events);
    name = fmt::format("design_station_{}_delta{}", id, opt.delta);
  } else {
    auto const r = cfg.integer("region");
    auto const& regions = l.partition->regions;
    if (r < 0 || r >= static_cast<long long>(regions.size())) {
      throw lookup_error{fmt::format("region {} does not exist ({} regions)", r,
                                     regions.size())};
    }
    auto const& region = regions[static_cast<std::size_t>(r)];
    opt.events = event_encoding::one_hot;
    m = build_region_rows(l.data.events, l.data.weather,
                          region_zip(region, l.data.stations), region,
                          l.data.neighbors, opt, static_cast<int>(r));
    name = fmt::format("design_region_{}_delta{}", r, opt.delta);
  }
  auto const dir = ctx.out_dir();
  {
    auto o = open_output(dir, name + ".csv");
    o << ctx.stamp() << '\n';
    write_design_csv(o, m);
  }
  {
    auto o = open_output(dir, name + ".schema.json");
    o << m.schema.to_json() << '\n';
  }
  write_effective(ctx, "features");
  ctx.out << fmt::format("{} rows x {} features -> {}\n", m.rows(),
                         m.schema.width(), (dir / (name + ".csv")).string());
  return kExitOk;
}

// ---- sweep ----

sweep_grid grid_settings(settings const& cfg) {
  sweep_grid g;
  g.horizons = cfg.int_list("delta");
  g.tree_counts = cfg.int_list("trees");
  g.models.clear();
  for (auto const& w : cfg.word_list("models")) {
    g.models.push_back(parse_model_kind(w));
  }
  g.validate();
  return g;
}

sweep_config sweep_settings(settings const& cfg) {
  sweep_config c;
  c.grid_step = static_cast<int>(cfg.integer("grid_step"));
  c.train_fraction = cfg.real("train_fraction");
  c.tree.min_leaf_size = static_cast<int>(cfg.integer("min_leaf_size"));
  c.tree.max_depth = static_cast<int>(cfg.integer("max_depth"));
  c.forest_mtry = static_cast<int>(cfg.integer("mtry"));
  c.shrinkage = cfg.real("shrinkage");
  c.cv_folds = static_cast<int>(cfg.integer("cv_folds"));
  c.max_components = static_cast<int>(cfg.integer("max_components"));
  c.seed = static_cast<std::uint64_t>(cfg.integer("seed"));
  c.workers = static_cast<int>(cfg.integer("workers"));
  c.min_train_rows = static_cast<std::size_t>(cfg.integer("min_train_rows"));
  c.min_test_rows = static_cast<std::size_t>(cfg.integer("min_test_rows"));
  if (c.grid_step <= 0) {
    throw validation_error{"grid step must be positive"};
  }
  if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0)) {
    throw validation_error{"train fraction must lie in (0, 1)"};
  }
  if (c.workers < 1) {
    throw validation_error{"workers must be at least 1"};
  }
  return c;
}

int cmd_sweep(context const& ctx) {
  auto const grid = grid_settings(ctx.cfg);
  auto const config = sweep_settings(ctx.cfg);
  auto const need_plsr = grid.has(model_kind::plsr);
  auto const l = ctx.cfg.flag("synthetic") ? synthesize_workspace(ctx)
                                           : load_workspace(ctx, need_plsr);

  std::vector<mae_report> parts;
  if (grid.has(model_kind::rf) || grid.has(model_kind::lsboost) ||
      grid.has(model_kind::mean)) {
    parts.push_back(run_univariate_sweep(l.data, grid, config));
  }
  if (need_plsr) {
    parts.push_back(run_multivariate_sweep(l.data, *l.partition, grid, config));
  }
  auto const report = merge_reports(parts);

  auto const dir = ctx.out_dir();
  auto const stamp = ctx.stamp();
  {
    auto o = open_output(dir, "report.csv");
    write_report_csv(o, report, stamp);
  }
  {
    auto o = open_output(dir, "summary.csv");
    write_summary_csv(o, report, stamp);
  }
  {
    auto o = open_output(dir, "skipped.csv");
    o << stamp << '\n';
    write_skipped_csv(o, report);
  }
  write_effective(ctx, "sweep");

  ctx.out << fmt::format("models trained: {}, records: {}, skipped units: {}\n",
                         report.models_trained, report.records.size(),
                         report.skipped.size());
  ctx.out << fmt::format("{:>8} {:>6} {:>6} {:>12} {:>12}\n", "model", "delta",
                         "size", "mae_bikes", "mae_log");
  for (auto const& a : report.aggregates) {
    ctx.out << fmt::format("{:>8} {:>6} {:>6} {:>12.4f} {:>12.4f}\n", a.model,
                           a.delta, a.size, a.mae_bikes, a.mae_log);
  }
  try {
    std::optional<int> tree_count;
    if (!ctx.cfg.text("tree_count").empty()) {
      tree_count = static_cast<int>(ctx.cfg.integer("tree_count"));
    }
    auto const table = compare_models(std::span{&report, 1}, tree_count);
    auto o = open_output(dir, "comparison.csv");
    o << stamp << '\n' << table.to_csv();
    ctx.out << '\n' << table.to_console();
  } catch (alignment_error const& e) {
    ctx.err << "comparison table not written: " << e.what() << '\n';
  }
  return kExitOk;
}

// ---- synth ----

int cmd_synth(context const& ctx) {
  auto const bundle = generate_synthetic(synthetic_settings(ctx.cfg));
  write_synthetic(ctx.out_dir(), bundle);
  ctx.out << fmt::format(
      "wrote {} stations, {} status rows, {} trips, {} weather rows to {}\n",
      bundle.stations.size(), bundle.status.size(), bundle.trips.size(),
      bundle.weather.size(), ctx.out_dir().string());
  return kExitOk;
}

// ---- compare ----

mae_report read_any_report(fs::path const& path) {
  auto in = open_input(path);
  std::string line;
  while (std::getline(in, line) && (line.empty() || line.front() == '#')) {
  }
  auto const per_station = line.find("station_id") != std::string::npos;
  in.clear();
  in.seekg(0);
  return per_station ? read_report_csv(in) : read_summary_csv(in);
}

int cmd_compare(context const& ctx, std::vector<std::string> const& files) {
  if (files.empty()) {
    throw validation_error{"compare needs at least one report file"};
  }
  std::vector<mae_report> reports;
  for (auto const& f : files) {
    reports.push_back(read_any_report(f));
  }
  std::optional<int> tree_count;
  if (!ctx.cfg.text("tree_count").empty()) {
    tree_count = static_cast<int>(ctx.cfg.integer("tree_count"));
  }
  auto const table = compare_models(reports, tree_count);
  auto o = open_output(ctx.out_dir(), "comparison.csv");
  o << ctx.stamp() << '\n' << table.to_csv();
  ctx.out << table.to_console();
  return kExitOk;
}

struct bound_option {
  CLI::Option* option;
  std::string key;
  std::string value;
  bool is_flag{false};
};

}  // namespace

int run(std::vector<std::string> const& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Bike-share station availability forecasting pipeline", "bss"};
  app.require_subcommand(1);

  std::map<CLI::App*, std::vector<std::unique_ptr<bound_option>>> bound;
  auto option = [&](CLI::App* sub, std::string const& flag,
                    std::string const& help) {
    auto b = std::make_unique<bound_option>();
    b->key = flag;
    std::replace(b->key.begin(), b->key.end(), '-', '_');
    b->option = sub->add_option("--" + flag, b->value, help);
    bound[sub].push_back(std::move(b));
  };
  auto switch_ = [&](CLI::App* sub, std::string const& flag,
                     std::string const& help) {
    auto b = std::make_unique<bound_option>();
    b->key = flag;
    std::replace(b->key.begin(), b->key.end(), '-', '_');
    b->is_flag = true;
    b->option = sub->add_flag("--" + flag, help);
    bound[sub].push_back(std::move(b));
  };
  auto common = [&](CLI::App* sub) {
    option(sub, "config", "key = value settings file");
    option(sub, "out", "output directory");
    option(sub, "seed", "master seed");
    option(sub, "workers", "worker threads");
    option(sub, "delta", "prediction horizons in minutes, comma separated");
    option(sub, "trees", "tree counts, comma separated");
    option(sub, "models", "models: rf, lsboost, plsr, mean");
    option(sub, "grid-step", "grid resolution in minutes");
    option(sub, "train-fraction", "chronological training share");
    option(sub, "data", "raw input directory (default $BSS_DATA_DIR)");
    option(sub, "in", "directory with earlier stage outputs (default --out)");
  };
  auto synthetic_options = [&](CLI::App* sub) {
    option(sub, "n-stations", "synthetic station count");
    option(sub, "n-regions", "synthetic block count");
    option(sub, "days", "synthetic span in days");
    option(sub, "preference", "share of trips staying inside a block");
    option(sub, "trips-per-day", "mean departures per station and day");
    option(sub, "status-interval", "minutes between status snapshots");
  };

  auto* ingest = app.add_subcommand("ingest", "parse raw files, compress status");
  common(ingest);
  auto* graph = app.add_subcommand("graph", "trip graph, neighbors, regions");
  common(graph);
  option(graph, "k", "in-degree neighbors per station");
  option(graph, "threshold", "edge threshold as a fraction of all trips");
  auto* features = app.add_subcommand("features", "write one design matrix");
  common(features);
  option(features, "station", "station id");
  option(features, "region", "region index");
  switch_(features, "keep-missing-weather", "keep rows without weather as NaN");
  auto* sweep = app.add_subcommand("sweep", "horizon and tree-count sweeps");
  common(sweep);
  switch_(sweep, "synthetic", "simulate a network instead of reading files");
  synthetic_options(sweep);
  option(sweep, "k", "in-degree neighbors per station (synthetic runs)");
  option(sweep, "threshold", "edge threshold fraction (synthetic runs)");
  option(sweep, "min-leaf-size", "smallest leaf of every tree");
  option(sweep, "max-depth", "deepest tree level");
  option(sweep, "mtry", "features tried per forest split, 0 for a third of p");
  option(sweep, "shrinkage", "boosting learning rate in (0, 1]");
  option(sweep, "cv-folds", "folds when choosing PLSR components");
  option(sweep, "max-components", "largest PLSR component count tried");
  option(sweep, "min-train-rows", "skip cells with fewer training rows");
  option(sweep, "min-test-rows", "skip cells with fewer test rows");
  option(sweep, "tree-count", "tree count shown in comparison.csv");
  auto* synth = app.add_subcommand("synth", "write a synthetic raw data set");
  common(synth);
  synthetic_options(synth);
  auto* compare = app.add_subcommand("compare", "align reports into one table");
  common(compare);
  option(compare, "tree-count", "tree count for rf and lsboost columns");
  std::vector<std::string> files;
  compare->add_option("reports", files, "report.csv or summary.csv files");

  std::vector<std::string> reversed{args.rbegin(), args.rend()};
  try {
    app.parse(reversed);
  } catch (CLI::ParseError const& e) {
    auto const code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  CLI::App* chosen = nullptr;
  for (auto* sub : {ingest, graph, features, sweep, synth, compare}) {
    if (sub->parsed()) {
      chosen = sub;
    }
  }

  try {
    settings cfg;
    auto& opts = bound[chosen];
    for (auto const& b : opts) {
      if (b->key == "config" && b->option->count() > 0) {
        cfg.load_file(b->value);
      }
    }
    for (auto const& b : opts) {
      if (b->option->count() > 0 && b->key != "config") {
        cfg.set(b->key, b->is_flag ? "1" : b->value);
      }
    }
    context ctx{cfg, out, err};
    if (chosen == ingest) {
      return cmd_ingest(ctx);
    }
    if (chosen == graph) {
      return cmd_graph(ctx);
    }
    if (chosen == features) {
      return cmd_features(ctx);
    }
    if (chosen == sweep) {
      return cmd_sweep(ctx);
    }
    if (chosen == synth) {
      return cmd_synth(ctx);
    }
    return cmd_compare(ctx, files);
  } catch (missing_prerequisite const& e) {
    err << "error: " << e.what() << '\n';
    return kExitMissing;
  } catch (input_error const& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (numeric_error const& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (alignment_error const& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (fs::filesystem_error const& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (std::exception const& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace bss::cli
