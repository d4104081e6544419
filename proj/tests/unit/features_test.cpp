#include <cmath>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "bss/error.hpp"
#include "bss/features.hpp"
#include "bss/rng.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace {

using fixtures::at;

struct network {
  bss::event_store store;
  std::vector<bss::daily_weather> weather;
  std::map<int, std::vector<oracle::stamped>> series;
  std::vector<oracle::weather_day> oracle_weather;
};

/// Random change events for `ids` over `days` days starting 2015-03-01, with
/// weather for every day except `missing_day`.
network random_network(std::uint64_t seed, std::vector<int> const& ids, int days,
                       int missing_day = -1) {
  bss::rng g{seed};
  network n;
  n.store.observed_begin = at(0, 0, 0);
  n.store.observed_end = at(days, 0, 0) - 1;
  for (auto const id : ids) {
    std::vector<bss::change_event> ev;
    auto t = at(0, 0, 0) + g.between(0, 90);
    auto bikes = g.between(0, 15);
    while (t < n.store.observed_end) {
      ev.push_back({id, t, bikes});
      n.series[id].push_back({t.minutes, bikes});
      auto next = bikes;
      while (next == bikes) {
        next = g.between(0, 15);
      }
      bikes = next;
      t = t + g.between(1, 80);
    }
    n.store.by_station[id] = ev;
  }
  for (int d = 0; d < days; ++d) {
    if (d == missing_day) {
      continue;
    }
    bss::daily_weather w;
    w.date = at(d, 0, 0).day();
    w.zip_code = "94107";
    w.mean_temperature = g.uniform(40, 80);
    w.mean_humidity = g.uniform(20, 90);
    w.mean_visibility = g.uniform(1, 10);
    w.mean_wind_speed = g.uniform(0, 20);
    w.precipitation = g.uniform(0, 1);
    w.event = static_cast<bss::weather_event>(g.between(0, 5));
    n.weather.push_back(w);
    n.oracle_weather.push_back(
        {w.date.days_since_epoch(),
         {w.mean_temperature, w.mean_humidity, w.mean_visibility,
          w.mean_wind_speed, w.precipitation},
         static_cast<int>(w.event)});
  }
  return n;
}

TEST(Target, InverseExamplesAndRoundTrip) {
  EXPECT_NEAR(bss::inverse_target(std::log(5.0)), 4.0, 1e-12);
  EXPECT_EQ(bss::inverse_target(0.0), 0.0);
  EXPECT_EQ(bss::inverse_target(-3.0), 0.0);
  for (int y = 0; y <= 200; ++y) {
    EXPECT_NEAR(bss::inverse_target(bss::forward_target(y)), y, 1e-9 * (1 + y));
  }
}

TEST(BuildRows, ConstantStockOneGridPoint) {
  bss::event_store s;
  s.by_station[1] = {{1, at(0, 0, 0), 4}};
  s.by_station[2] = {{2, at(0, 0, 0), 7}};
  s.observed_begin = at(0, 0, 0);
  s.observed_end = at(0, 0, 15);
  bss::daily_weather w;
  w.date = at(0, 0, 0).day();
  w.zip_code = "94107";
  std::vector<bss::daily_weather> const rows{w};
  bss::row_options opt;
  auto const r = bss::build_rows(s, bss::weather_table{rows}, "94107", {1, {2}}, opt);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].own_stock, 4);
  EXPECT_EQ(r[0].neighbor_stocks, std::vector<int>{7});
  EXPECT_NEAR(r[0].target, std::log(5.0), 1e-15);
  EXPECT_EQ(r[0].day_of_week, 7);
  EXPECT_EQ(r[0].month, 3);
}

TEST(BuildRows, SkipsInstantBeforeNeighborEvent) {
  bss::event_store s;
  s.by_station[1] = {{1, at(0, 0, 0), 4}};
  s.by_station[2] = {{2, at(0, 0, 20), 7}};
  s.observed_begin = at(0, 0, 0);
  s.observed_end = at(0, 1, 0);
  bss::daily_weather w;
  w.date = at(0, 0, 0).day();
  w.zip_code = "94107";
  std::vector<bss::daily_weather> const rows{w};
  auto const r = bss::build_rows(s, bss::weather_table{rows}, "94107", {1, {2}}, {});
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].t, at(0, 0, 30));
}

TEST(BuildRows, MatchesReplayOracle) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto const n = random_network(seed, {1, 2, 3}, 1);
    bss::weather_table const table{n.weather};
    for (int const step : {15, 7}) {
      for (int const delta : {15, 40}) {
        bss::row_options opt;
        opt.grid_step = step;
        opt.delta = delta;
        auto const rows = bss::build_rows(n.store, table, "94107", {1, {3, 2}}, opt);
        auto const expect = oracle::replay_rows(
            n.series, n.oracle_weather, 1, {3, 2}, n.store.observed_begin.minutes,
            n.store.observed_end.minutes, step, delta);
        ASSERT_EQ(rows.size(), expect.size());
        auto const m = bss::to_design_matrix(rows, 2, bss::event_encoding::ordinal);
        for (std::size_t r = 0; r < rows.size(); ++r) {
          auto const& e = expect[r];
          auto const i = static_cast<Eigen::Index>(r);
          EXPECT_EQ(rows[r].t.minutes, e.t);
          EXPECT_EQ(m.x(i, 0), e.own);
          EXPECT_EQ(m.x(i, 1), e.neighbors[0]);
          EXPECT_EQ(m.x(i, 2), e.neighbors[1]);
          EXPECT_EQ(m.x(i, 3), e.month);
          EXPECT_EQ(m.x(i, 4), e.weekday);
          EXPECT_EQ(m.x(i, 5), e.minute);
          for (int k = 0; k < 5; ++k) {
            EXPECT_EQ(m.x(i, 6 + k), e.weather[k]);
          }
          EXPECT_EQ(m.x(i, 11), e.event);
          EXPECT_DOUBLE_EQ(m.y(i, 0), e.target);
        }
      }
    }
  }
}

TEST(BuildRows, GridCoverageBound) {
  auto const n = random_network(9, {1, 2}, 2);
  for (int const step : {5, 15, 60}) {
    bss::row_options opt;
    opt.grid_step = step;
    auto const rows = bss::build_rows(n.store, bss::weather_table{n.weather},
                                      "94107", {1, {2}}, opt);
    auto const span = n.store.observed_end - n.store.observed_begin;
    EXPECT_LE(static_cast<std::int64_t>(rows.size()), span / step + 1);
    for (auto const& r : rows) {
      EXPECT_GE(r.own_stock, 0);
      EXPECT_TRUE(std::isfinite(r.target));
      EXPECT_EQ(r.t.minutes % step, 0);
    }
  }
}

TEST(BuildRows, MissingWeatherExcludedByDefault) {
  auto const n = random_network(10, {1, 2}, 2, 1);
  bss::weather_table const table{n.weather};
  auto const dropped = bss::build_rows(n.store, table, "94107", {1, {2}}, {});
  for (auto const& r : dropped) {
    EXPECT_EQ(r.t.day(), at(0, 0, 0).day());
  }
  bss::row_options keep;
  keep.keep_missing_weather = true;
  auto const kept = bss::build_rows(n.store, table, "94107", {1, {2}}, keep);
  EXPECT_GT(kept.size(), dropped.size());
  auto const m = bss::to_design_matrix(kept, 1, bss::event_encoding::ordinal);
  bool saw_nan = false;
  for (std::size_t r = 0; r < kept.size(); ++r) {
    if (!kept[r].weather) {
      saw_nan = true;
      EXPECT_TRUE(std::isnan(m.x(static_cast<Eigen::Index>(r), 6)));
    }
  }
  EXPECT_TRUE(saw_nan);
}

TEST(DesignMatrix, OneHotEventsSumToOne) {
  auto const n = random_network(11, {1, 2, 3}, 3);
  auto const rows = bss::build_rows(n.store, bss::weather_table{n.weather},
                                    "94107", {2, {1, 3}}, {});
  auto const m = bss::to_design_matrix(rows, 2, bss::event_encoding::one_hot);
  auto const names = m.schema.feature_names();
  ASSERT_EQ(names.back(), "event_other");
  auto const first = static_cast<Eigen::Index>(names.size()) - bss::kWeatherEventCount;
  EXPECT_EQ(names[static_cast<std::size_t>(first)], "event_none");
  for (Eigen::Index r = 0; r < m.x.rows(); ++r) {
    EXPECT_EQ(m.x.row(r).tail(bss::kWeatherEventCount).sum(), 1.0);
  }
}

TEST(Schema, LayoutAndJson) {
  auto const s = bss::univariate_schema(3, bss::event_encoding::ordinal);
  EXPECT_EQ(s.width(), 1u + 3u + 3u + 5u + 1u);
  EXPECT_EQ(s.feature_names()[0], "own_stock");
  EXPECT_EQ(s.feature_names()[3], "nbr3_stock");
  EXPECT_NE(s.to_json().find("\"target_transform\": \"log1p\""), std::string::npos);
  std::vector<int> const pred{4, 9};
  std::vector<int> const tgt{4};
  auto const r = bss::region_schema(pred, tgt, bss::event_encoding::one_hot);
  EXPECT_EQ(r.feature_names()[1], "stock_9");
  EXPECT_EQ(r.targets, std::vector<std::string>{"target_log1p_4"});
}

TEST(RegionRows, MatchesReplayOracle) {
  auto const n = random_network(12, {1, 2, 3, 4, 5, 6}, 1);
  std::map<int, bss::neighbor_set> nb;
  nb[1] = {1, {2, 5}};
  nb[2] = {2, {1, 6}};
  nb[3] = {3, {1, 2}};
  nb[4] = {4, {5, 3}};
  std::vector<int> const region{4, 2, 3, 1};
  std::vector<int> const expect_pred{1, 2, 3, 4, 5, 6};
  EXPECT_EQ(bss::region_predictor_stations(region, nb), expect_pred);
  bss::row_options opt;
  opt.events = bss::event_encoding::one_hot;
  opt.delta = 30;
  auto const m = bss::build_region_rows(n.store, bss::weather_table{n.weather},
                                        "94107", region, nb, opt, 3);
  auto const e = oracle::replay_region_rows(
      n.series, n.oracle_weather, expect_pred, {1, 2, 3, 4},
      n.store.observed_begin.minutes, n.store.observed_end.minutes, 15, 30);
  ASSERT_EQ(m.rows(), e.times.size());
  ASSERT_EQ(m.y.cols(), 4);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto const i = static_cast<Eigen::Index>(r);
    EXPECT_EQ(m.times[r].minutes, e.times[r]);
    EXPECT_EQ(m.station_ids[r], 3);
    for (std::size_t s = 0; s < expect_pred.size(); ++s) {
      EXPECT_EQ(m.x(i, static_cast<Eigen::Index>(s)), e.stocks[r][s]);
    }
    for (std::size_t s = 0; s < 4; ++s) {
      EXPECT_DOUBLE_EQ(m.y(i, static_cast<Eigen::Index>(s)), e.targets[r][s]);
    }
  }
}

TEST(RegionRows, SingleStationMatchesUnivariateTarget) {
  auto const n = random_network(13, {1, 2}, 1);
  std::map<int, bss::neighbor_set> nb;
  nb[1] = {1, {2}};
  bss::weather_table const table{n.weather};
  std::vector<int> const region{1};
  auto const m = bss::build_region_rows(n.store, table, "94107", region, nb, {});
  auto const rows = bss::build_rows(n.store, table, "94107", nb[1], {});
  ASSERT_EQ(m.y.cols(), 1);
  ASSERT_EQ(m.rows(), rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    EXPECT_EQ(m.y(static_cast<Eigen::Index>(r), 0), rows[r].target);
  }
  std::vector<int> const none;
  EXPECT_THROW(bss::build_region_rows(n.store, table, "94107", none, nb, {}),
               bss::validation_error);
}

TEST(RegionRows, TwoStationsOneInstant) {
  bss::event_store s;
  s.by_station[1] = {{1, at(0, 0, 0), 3}};
  s.by_station[2] = {{2, at(0, 0, 0), 5}};
  s.observed_begin = at(0, 0, 0);
  s.observed_end = at(0, 0, 20);
  bss::daily_weather w;
  w.date = at(0, 0, 0).day();
  w.zip_code = "z";
  std::vector<bss::daily_weather> const rows{w};
  std::map<int, bss::neighbor_set> nb{{1, {1, {2}}}, {2, {2, {1}}}};
  std::vector<int> const region{1, 2};
  auto const m = bss::build_region_rows(s, bss::weather_table{rows}, "z", region, nb, {});
  EXPECT_EQ(m.rows(), 1u);
  EXPECT_EQ(m.y.cols(), 2);
}

TEST(RegionZip, ModalWithSmallerTie) {
  auto st = fixtures::stations({1, 2, 3, 4});
  st[0].zip_code = "95113";
  st[1].zip_code = "95113";
  std::vector<int> const region{1, 2, 3, 4};
  EXPECT_EQ(bss::region_zip(region, st), "94107");
  std::vector<int> const sub{1, 2, 3};
  EXPECT_EQ(bss::region_zip(sub, st), "95113");
}

bss::design_matrix timed_matrix(std::vector<std::int64_t> const& t,
                                std::int64_t lag) {
  bss::design_matrix m;
  m.schema = bss::univariate_schema(0, bss::event_encoding::ordinal);
  m.x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(t.size()), 1);
  m.y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(t.size()), 1);
  for (std::size_t i = 0; i < t.size(); ++i) {
    m.x(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i);
    m.times.push_back({t[i]});
    m.target_times.push_back({t[i] + lag});
    m.station_ids.push_back(1);
  }
  return m;
}

TEST(Split, CountsAndLeakageGuard) {
  std::vector<std::int64_t> const t{90, 0, 10, 20, 30, 40, 50, 60, 70, 80};
  auto const plain = bss::chronological_split(timed_matrix(t, 0), 0.8);
  EXPECT_EQ(plain.train.rows(), 8u);
  EXPECT_EQ(plain.test.rows(), 2u);
  EXPECT_EQ(plain.split_time.minutes, 80);
  EXPECT_EQ(plain.leakage_dropped, 0u);
  auto const guarded = bss::chronological_split(timed_matrix(t, 15), 0.8);
  EXPECT_EQ(guarded.train.rows(), 7u);
  EXPECT_EQ(guarded.leakage_dropped, 1u);
  EXPECT_EQ(guarded.train.schema, guarded.test.schema);
}

TEST(Split, Errors) {
  EXPECT_THROW(bss::chronological_split(timed_matrix({5, 5, 5}, 0)),
               bss::degenerate_split_error);
  EXPECT_THROW(bss::chronological_split(timed_matrix({}, 0)), bss::validation_error);
  EXPECT_THROW(bss::chronological_split(timed_matrix({1, 2}, 0), 1.0),
               bss::validation_error);
}

TEST(Split, RandomTimestampsNeverLeak) {
  for (int trial = 0; trial < 200; ++trial) {
    bss::rng g{bss::derive_seed(41, {static_cast<std::uint64_t>(trial)})};
    std::vector<std::int64_t> t;
    for (int i = 0; i < g.between(2, 60); ++i) {
      t.push_back(g.between(0, 40));
    }
    if (*std::min_element(t.begin(), t.end()) == *std::max_element(t.begin(), t.end())) {
      continue;
    }
    auto const lag = g.between(0, 10);
    try {
      auto const s = bss::chronological_split(timed_matrix(t, lag), g.uniform(0.05, 0.95));
      std::int64_t max_train = -1;
      for (std::size_t i = 0; i < s.train.rows(); ++i) {
        max_train = std::max(max_train, s.train.times[i].minutes);
        EXPECT_LT(s.train.target_times[i], s.split_time);
      }
      for (std::size_t i = 0; i < s.test.rows(); ++i) {
        EXPECT_LT(max_train, s.test.times[i].minutes);
        EXPECT_GE(s.test.times[i], s.split_time);
      }
      EXPECT_EQ(s.train.rows() + s.test.rows() + s.leakage_dropped, t.size());
    } catch (bss::degenerate_split_error const&) {
      // every train candidate leaked
    }
  }
}

TEST(DesignCsv, HeaderAndRowCount) {
  auto const n = random_network(14, {1, 2}, 1);
  auto const rows = bss::build_rows(n.store, bss::weather_table{n.weather},
                                    "94107", {1, {2}}, {});
  auto const m = bss::to_design_matrix(rows, 1, bss::event_encoding::ordinal);
  std::ostringstream out;
  bss::write_design_csv(out, m);
  auto const text = out.str();
  EXPECT_EQ(text.rfind("time,station_id,own_stock,nbr1_stock,month", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')),
            m.rows() + 1);
}

}  // namespace
