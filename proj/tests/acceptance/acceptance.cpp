// Acceptance suite: one line per criterion, PASS / FAIL / SKIP.
// Exit status is non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "bss/forest.hpp"
#include "bss/graph.hpp"
#include "bss/ingest.hpp"
#include "bss/lsboost.hpp"
#include "bss/plsr.hpp"
#include "bss/report.hpp"
#include "bss/rng.hpp"
#include "bss/tree.hpp"
#include "cli/app.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

enum class verdict { pass, fail, skip };

struct outcome {
  verdict v{verdict::pass};
  std::string detail;
};

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

int cli(std::vector<std::string> args, std::string* captured = nullptr) {
  std::ostringstream out;
  std::ostringstream err;
  auto const code = bss::cli::run(args, out, err);
  if (captured != nullptr) {
    *captured = out.str() + err.str();
  }
  if (code != 0) {
    std::cerr << "  command failed (" << code << "): " << err.str();
  }
  return code;
}

// ---------------------------------------------------------------------------

outcome split_oracle() {
  auto const t0 = clock_type::now();
  int matched = 0;
  std::string first_miss;
  for (int trial = 0; trial < 100; ++trial) {
    bss::rng g{bss::derive_seed(11, {static_cast<std::uint64_t>(trial)})};
    auto const n = g.between(2, 50);
    auto const p = g.between(1, 3);
    auto const x = fixtures::mixed_matrix(g, n, p);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      y(i) = g.normal(0.0, 2.0) + (x(i, 0) > 1.0 ? 3.0 : 0.0);
    }
    bss::tree_config cfg;
    cfg.min_leaf_size = g.between(1, 4);
    cfg.max_depth = 1;
    auto const tree = bss::fit_tree(x, y, cfg);
    auto const& root = tree.nodes().front();
    auto const expect = oracle::best_root_split(
        x, y, cfg.min_leaf_size);
    bool ok = false;
    if (!expect) {
      ok = root.is_leaf();
    } else {
      ok = !root.is_leaf() && root.feature == expect->feature &&
           root.threshold == expect->threshold;
    }
    if (ok) {
      ++matched;
    } else if (first_miss.empty()) {
      first_miss = fmt::format("; first mismatch in trial {}", trial);
    }
  }
  auto const secs = seconds_since(t0);
  auto const ok = matched == 100 && secs < 10.0;
  return {ok ? verdict::pass : verdict::fail,
          fmt::format("{}/100 root splits exact, {:.2f} s (limit 10 s){}",
                      matched, secs, first_miss)};
}

outcome boosting() {
  int monotone = 0;
  double worst_beta = 0.0;
  std::size_t stages_checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    bss::rng g{bss::derive_seed(12, {static_cast<std::uint64_t>(trial)})};
    auto const n = g.between(60, 150);
    auto const p = g.between(1, 5);
    auto const x = fixtures::normal_matrix(g, n, p);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      y(i) = std::sin(x(i, 0)) + 0.5 * x(i, p - 1) * x(i, 0) + g.normal(0.0, 0.3);
    }
    bss::boost_config cfg;
    cfg.n_stages = 50;
    cfg.shrinkage = 1.0;
    auto const model = bss::fit_lsboost(x, y, cfg);

    // replay the stages and recompute every quantity from scratch
    Eigen::VectorXd f = Eigen::VectorXd::Constant(n, y.mean());
    std::vector<double> mse{(y - f).squaredNorm() / n};
    for (auto const& s : model.stages()) {
      Eigen::VectorXd const r = y - f;
      Eigen::VectorXd h(n);
      for (int i = 0; i < n; ++i) {
        h(i) = s.tree.predict_row(x.row(i));
      }
      auto const beta = r.dot(h) / h.dot(h);
      worst_beta = std::max(worst_beta, std::abs(s.beta - beta) /
                                            std::max(1.0, std::abs(beta)));
      f += s.beta * h;
      mse.push_back((y - f).squaredNorm() / n);
      ++stages_checked;
    }
    bool non_increasing = true;
    for (std::size_t m = 1; m < mse.size(); ++m) {
      non_increasing = non_increasing && mse[m] <= mse[m - 1];
    }
    if (non_increasing) {
      ++monotone;
    }
  }
  auto const ok = monotone == 20 && worst_beta <= 1e-10;
  return {ok ? verdict::pass : verdict::fail,
          fmt::format("{}/20 datasets with non-increasing training MSE, "
                      "{} stages, worst beta deviation {:.2e} (limit 1e-10)",
                      monotone, stages_checked, worst_beta)};
}

outcome plsr_equivalence() {
  double worst_ols = 0.0;
  double worst_orth = 0.0;
  double worst_dup = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    bss::rng g{bss::derive_seed(13, {static_cast<std::uint64_t>(trial)})};
    auto const n = g.between(30, 60);
    auto const p = g.between(3, 8);
    auto const m = g.between(1, 3);
    Eigen::MatrixXd x = fixtures::normal_matrix(g, n, p);
    for (int j = 0; j < p; ++j) {
      x.col(j) = x.col(j) * g.uniform(0.5, 20.0) +
                 Eigen::VectorXd::Constant(n, g.uniform(-10, 10));
    }
    Eigen::MatrixXd const b = fixtures::normal_matrix(g, p, m);
    Eigen::MatrixXd y = x * b + 0.5 * fixtures::normal_matrix(g, n, m);
    Eigen::MatrixXd const x_new = fixtures::normal_matrix(g, 10, p) * 5.0;

    auto const rank = bss::attainable_components(x);
    bss::plsr_training rec;
    auto const model = bss::fit_plsr(x, y, rank, {}, &rec);
    Eigen::MatrixXd const ols_train = oracle::ols_predict(x, y, x);
    Eigen::MatrixXd const ols_new = oracle::ols_predict(x, y, x_new);
    Eigen::MatrixXd const pred_train = model.predict(x);
    Eigen::MatrixXd const pred_new = model.predict(x_new);
    for (Eigen::Index i = 0; i < pred_train.size(); ++i) {
      worst_ols = std::max(worst_ols, rel_diff(pred_train(i), ols_train(i)));
    }
    for (Eigen::Index i = 0; i < pred_new.size(); ++i) {
      worst_ols = std::max(worst_ols, rel_diff(pred_new(i), ols_new(i)));
    }
    auto const& t = rec.x_scores;
    for (Eigen::Index a = 0; a < t.cols(); ++a) {
      for (Eigen::Index c = a + 1; c < t.cols(); ++c) {
        worst_orth = std::max(worst_orth, std::abs(t.col(a).dot(t.col(c))) /
                                              (t.col(a).norm() * t.col(c).norm()));
      }
    }
    Eigen::MatrixXd x_dup(n, p + 1);
    x_dup << x, x.col(0);
    Eigen::MatrixXd x_new_dup(x_new.rows(), p + 1);
    x_new_dup << x_new, x_new.col(0);
    auto const dup = bss::fit_plsr(x_dup, y, bss::attainable_components(x_dup));
    Eigen::MatrixXd const pd_train = dup.predict(x_dup);
    Eigen::MatrixXd const pd_new = dup.predict(x_new_dup);
    for (Eigen::Index i = 0; i < pd_train.size(); ++i) {
      worst_dup = std::max(worst_dup, rel_diff(pd_train(i), pred_train(i)));
    }
    for (Eigen::Index i = 0; i < pd_new.size(); ++i) {
      worst_dup = std::max(worst_dup, rel_diff(pd_new(i), pred_new(i)));
    }
  }
  auto const ok = worst_ols <= 1e-6 && worst_orth <= 1e-8 && worst_dup <= 1e-8;
  return {ok ? verdict::pass : verdict::fail,
          fmt::format("20 instances: least-squares deviation {:.2e} (limit "
                      "1e-6), score orthogonality {:.2e} (limit 1e-8), "
                      "duplicate-column deviation {:.2e} (limit 1e-8)",
                      worst_ols, worst_orth, worst_dup)};
}

outcome change_replay() {
  std::size_t snapshots = 0;
  std::size_t mismatches = 0;
  std::size_t filter_mismatches = 0;
  std::vector<bss::status_snapshot> all;
  for (int s = 0; s < 50; ++s) {
    bss::rng g{bss::derive_seed(14, {static_cast<std::uint64_t>(s)})};
    auto const stream = fixtures::status_stream(g, s + 1, g.between(1, 1000),
                                                g.between(1, 30));
    auto const events = bss::detect_changes(stream);
    std::vector<int> values;
    for (auto const& snap : stream) {
      values.push_back(snap.bikes_available);
    }
    auto const kept = oracle::kept_changes(values);
    if (kept.size() != events.size()) {
      ++filter_mismatches;
    } else {
      for (std::size_t k = 0; k < kept.size(); ++k) {
        if (events[k].timestamp != stream[kept[k]].timestamp ||
            events[k].bikes_available != values[kept[k]]) {
          ++filter_mismatches;
          break;
        }
      }
    }
    for (auto const& snap : stream) {
      ++snapshots;
      auto const v = bss::stock_at(events, snap.timestamp);
      if (!v || *v != snap.bikes_available) {
        ++mismatches;
      }
    }
    all.insert(all.end(), stream.begin(), stream.end());
  }
  // the same replay through the interleaved, whole-network path
  bss::rng g{99};
  for (std::size_t i = all.size(); i > 1; --i) {
    std::swap(all[i - 1], all[g.index(i)]);
  }
  auto const store = bss::compress_status(all);
  for (auto const& snap : all) {
    auto const v = bss::stock_at(store.events(snap.station_id), snap.timestamp);
    if (!v || *v != snap.bikes_available) {
      ++mismatches;
    }
  }
  auto const ok = mismatches == 0 && filter_mismatches == 0;
  return {ok ? verdict::pass : verdict::fail,
          fmt::format("50 streams, {} snapshots: {} replay mismatches, {} "
                      "streams differing from the brute-force filter",
                      snapshots, mismatches, filter_mismatches)};
}

outcome graph_oracles() {
  int tally_ok = 0;
  int topk_ok = 0;
  int parts_ok = 0;
  for (int trial = 0; trial < 50; ++trial) {
    bss::rng g{bss::derive_seed(15, {static_cast<std::uint64_t>(trial)})};
    auto const n = g.between(3, 15);
    std::vector<int> ids;
    for (int i = 0; i < n; ++i) {
      ids.push_back(2 + 3 * i + g.between(0, 2));
    }
    std::vector<std::pair<int, int>> pairs;
    auto const n_trips = g.between(0, 500);
    auto const sparse = g.bernoulli(0.5);
    for (int t = 0; t < n_trips; ++t) {
      auto const a = ids[g.index(static_cast<std::uint64_t>(n))];
      auto const b = sparse && g.bernoulli(0.8)
                         ? a
                         : ids[g.index(static_cast<std::uint64_t>(n))];
      pairs.emplace_back(a, b);
    }
    auto const stations = fixtures::stations(ids);
    auto const a = bss::build_adjacency(fixtures::trips(pairs), stations);
    auto const expect = oracle::count_pairs(pairs);

    bool tally = a.total_counts() + a.total_self_loops() ==
                 static_cast<long long>(pairs.size());
    for (auto const i : ids) {
      for (auto const j : ids) {
        auto const it = expect.find({i, j});
        auto const want = it == expect.end() ? 0 : it->second;
        if (i != j) {
          tally = tally && a.count(i, j) == want;
        } else {
          tally = tally && a.self_loops(*a.index_of(i)) == want;
        }
      }
    }
    tally_ok += tally ? 1 : 0;

    auto const k = g.between(1, n - 1);
    bool topk = true;
    for (auto const i : ids) {
      topk = topk && bss::top_in_neighbors(a, i, k).neighbors ==
                         oracle::top_k(expect, ids, i, k);
    }
    topk_ok += topk ? 1 : 0;

    auto const p = bss::partition_regions(a, 0.0);
    parts_ok += p.regions == oracle::components(ids, pairs) ? 1 : 0;
  }
  auto const ok = tally_ok == 50 && topk_ok == 50 && parts_ok == 50;
  return {ok ? verdict::pass : verdict::fail,
          fmt::format("50 trip sets: adjacency {}/50, top-k {}/50, "
                      "threshold-0 components {}/50",
                      tally_ok, topk_ok, parts_ok)};
}

// ---------------------------------------------------------------------------

struct summary_lookup {
  bss::mae_report report;

  double mae(std::string const& model, int delta, int size) const {
    auto const* a = report.find(model, delta, size);
    return a == nullptr ? std::nan("") : a->mae_bikes;
  }
};

summary_lookup read_summary(fs::path const& p) {
  std::ifstream in{p};
  return {bss::read_summary_csv(in)};
}

outcome synthetic_end_to_end() {
  fixtures::temp_dir dir{"bss-acceptance-e2e"};
  auto const raw = dir.str("raw");
  auto const work = dir.str("work");
  auto const t0 = clock_type::now();
  std::string graph_out;
  auto const ok_run =
      cli({"synth", "--out", raw, "--seed", "1"}) == 0 &&
      cli({"ingest", "--data", raw, "--out", work, "--seed", "1"}) == 0 &&
      cli({"graph", "--out", work, "--seed", "1"}, &graph_out) == 0 &&
      cli({"sweep", "--out", work, "--seed", "1", "--grid-step", "15",
           "--models", "rf,lsboost,plsr,mean"}) == 0;
  auto const secs = seconds_since(t0);
  if (!ok_run) {
    return {verdict::fail, "pipeline command failed"};
  }
  std::ifstream pin{fs::path{work} / "partition.csv"};
  auto const regions = bss::read_partition_csv(pin).regions.size();
  auto const s = read_summary(fs::path{work} / "summary.csv");
  auto const rf15 = s.mae("rf", 15, 140);
  auto const rf120 = s.mae("rf", 120, 140);
  auto const mean15 = s.mae("mean", 15, 0);
  auto const ok = secs < 300.0 && rf15 < mean15 && rf15 < rf120 && regions == 2;
  return {ok ? verdict::pass : verdict::fail,
          fmt::format("{:.1f} s (limit 300 s); RF(140 trees) MAE at 15 min "
                      "{:.4f} vs training-mean baseline {:.4f}; RF at 120 min "
                      "{:.4f}; {} regions recovered (want 2)",
                      secs, rf15, mean15, rf120, regions)};
}

outcome determinism() {
  fixtures::temp_dir dir{"bss-acceptance-det"};
  std::vector<std::string> const grid{
      "--synthetic", "--seed", "5", "--delta", "15,60", "--trees", "20,60",
      "--models", "rf,lsboost,plsr,mean", "--days", "7"};
  struct run_spec {
    std::string name;
    std::string workers;
  };
  std::vector<run_spec> const runs{{"a", "1"}, {"b", "4"}, {"c", "1"}, {"d", "3"}};
  for (auto const& r : runs) {
    std::vector<std::string> args{"sweep", "--out", dir.str(r.name), "--workers",
                                  r.workers};
    args.insert(args.end(), grid.begin(), grid.end());
    if (cli(args) != 0) {
      return {verdict::fail, fmt::format("sweep run {} failed", r.name)};
    }
  }
  std::vector<std::string> const files{"report.csv", "summary.csv", "skipped.csv",
                                       "comparison.csv", "neighbors.csv",
                                       "partition.csv", "sweep_config.txt"};
  int identical = 0;
  int compared = 0;
  for (auto const& f : files) {
    auto const ref = fixtures::slurp(dir.path() / "a" / f);
    for (std::size_t r = 1; r < runs.size(); ++r) {
      ++compared;
      auto const other = fixtures::slurp(dir.path() / runs[r].name / f);
      identical += (!ref.empty() && ref == other) ? 1 : 0;
    }
  }
  auto const ok = identical == compared;
  return {ok ? verdict::pass : verdict::fail,
          fmt::format("{}/{} file comparisons byte-identical across reruns "
                      "with 1, 3 and 4 workers",
                      identical, compared)};
}

outcome real_dataset() {
  auto const* env = std::getenv("BSS_DATA_DIR");
  if (env == nullptr || !fs::exists(fs::path{env} / "station.csv") ||
      !fs::exists(fs::path{env} / "status.csv") ||
      !fs::exists(fs::path{env} / "trip.csv") ||
      !fs::exists(fs::path{env} / "weather.csv")) {
    return {verdict::skip, "data absent (set BSS_DATA_DIR to the public dataset)"};
  }
  fixtures::temp_dir dir{"bss-acceptance-real"};
  auto const work = dir.str("work");
  auto const t0 = clock_type::now();
  if (cli({"ingest", "--data", env, "--out", work}) != 0 ||
      cli({"graph", "--out", work, "--k", "10"}) != 0 ||
      cli({"sweep", "--out", work, "--delta", "15", "--trees", "140",
           "--models", "rf,lsboost,plsr"}) != 0) {
    return {verdict::fail, "pipeline command failed"};
  }
  auto const secs = seconds_since(t0);
  std::ifstream pin{fs::path{work} / "partition.csv"};
  auto const partition = bss::read_partition_csv(pin);
  std::ifstream sin{fs::path{work} / "stations.csv"};
  auto const stations = bss::parse_stations(sin).records;
  double min_purity = 1.0;
  for (auto const& z : bss::validate_partition_zip(partition, stations)) {
    min_purity = std::min(min_purity, z.purity);
  }
  auto const s = read_summary(fs::path{work} / "summary.csv");
  auto const rf = s.mae("rf", 15, 140);
  auto const lsb = s.mae("lsboost", 15, 140);
  auto const pls = s.mae("plsr", 15, 0);
  auto const ok = partition.regions.size() == 5 && min_purity >= 0.9 &&
                  rf >= 0.25 && rf <= 0.55 && rf <= lsb && lsb <= pls &&
                  secs <= 7200.0;
  return {ok ? verdict::pass : verdict::fail,
          fmt::format("{} regions (want 5), min ZIP purity {:.3f} (want >= 0.9); "
                      "MAE at 15 min: RF {:.3f} (band [0.25, 0.55]), LSBoost "
                      "{:.3f}, PLSR {:.3f}; {:.0f} s",
                      partition.regions.size(), min_purity, rf, lsb, pls, secs)};
}

}  // namespace

int main() {
  struct criterion {
    std::string name;
    std::function<outcome()> run;
  };
  std::vector<criterion> const criteria{
      {"split-oracle equivalence", split_oracle},
      {"boosting monotone MSE and closed-form beta", boosting},
      {"PLSR full-component equivalence", plsr_equivalence},
      {"change-detection replay", change_replay},
      {"graph oracles", graph_oracles},
      {"synthetic end-to-end", synthetic_end_to_end},
      {"sweep determinism", determinism},
      {"public dataset (optional)", real_dataset},
  };
  int failures = 0;
  for (auto const& c : criteria) {
    outcome o;
    try {
      o = c.run();
    } catch (std::exception const& e) {
      o = {verdict::fail, fmt::format("exception: {}", e.what())};
    }
    auto const tag = o.v == verdict::pass   ? "PASS"
                     : o.v == verdict::fail ? "FAIL"
                                            : "SKIP";
    failures += o.v == verdict::fail ? 1 : 0;
    std::cout << fmt::format("{}  {}: {}", tag, c.name, o.detail) << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria failed", failures, criteria.size())
            << std::endl;
  return failures == 0 ? 0 : 1;
}
