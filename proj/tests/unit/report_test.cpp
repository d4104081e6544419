#include <sstream>

#include <gtest/gtest.h>

#include "bss/report.hpp"

namespace {

bss::mae_report sample() {
  bss::mae_report r;
  r.records = {{"rf", 15, 20, 2, 0.25, 0.05, 40},
               {"rf", 15, 20, 1, 1.0 / 3.0, 0.07, 35},
               {"plsr", 15, 3, 1, 0.5, 0.1, 35},
               {"plsr", 15, 2, 2, 0.75, 0.2, 40}};
  r.skipped = {{7, 60, "12 rows, too few"}, {3, 15, "reason, with comma"}};
  r.finalize();
  return r;
}

TEST(Report, Fnv1aKnownValues) {
  EXPECT_EQ(bss::fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(bss::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Report, StampFormat) {
  auto const s = bss::report_stamp(42, "k=v\n");
  EXPECT_EQ(s.rfind("# seed=42 config_hash=", 0), 0u);
  EXPECT_EQ(s.size(), std::string{"# seed=42 config_hash="}.size() + 16);
  EXPECT_NE(s, bss::report_stamp(42, "k=w\n"));
}

TEST(Report, ConfigTextIsSortedAndStable) {
  bss::sweep_grid g;
  bss::sweep_config c;
  auto const a = bss::config_text(g, c);
  EXPECT_EQ(a, bss::config_text(g, c));
  c.seed = 2;
  EXPECT_NE(a, bss::config_text(g, c));
  std::istringstream in{a};
  std::string line;
  std::string prev;
  while (std::getline(in, line)) {
    EXPECT_LT(prev, line);
    prev = line;
  }
}

TEST(Report, PlsrAggregatesAcrossComponentCounts) {
  auto const r = sample();
  auto const* p = r.find("plsr", 15, 0);
  ASSERT_NE(p, nullptr);
  EXPECT_EQ(p->n_stations, 2u);
  EXPECT_NEAR(p->mae_bikes, (0.5 * 35 + 0.75 * 40) / 75.0, 1e-12);
}

TEST(Report, ReportCsvRoundTrip) {
  auto const r = sample();
  std::stringstream s;
  bss::write_report_csv(s, r, "# seed=1 config_hash=0000000000000000");
  EXPECT_EQ(s.str().rfind("# seed=1", 0), 0u);
  auto const back = bss::read_report_csv(s);
  ASSERT_EQ(back.records.size(), r.records.size());
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    EXPECT_EQ(back.records[i].model, r.records[i].model);
    EXPECT_EQ(back.records[i].station_id, r.records[i].station_id);
    EXPECT_NEAR(back.records[i].mae_bikes, r.records[i].mae_bikes, 1e-9);
    EXPECT_EQ(back.records[i].n_test, r.records[i].n_test);
  }
  EXPECT_EQ(back.aggregates.size(), r.aggregates.size());
}

TEST(Report, SummaryCsvRoundTrip) {
  auto const r = sample();
  std::stringstream s;
  bss::write_summary_csv(s, r);
  auto const back = bss::read_summary_csv(s);
  ASSERT_EQ(back.aggregates.size(), r.aggregates.size());
  for (std::size_t i = 0; i < r.aggregates.size(); ++i) {
    EXPECT_EQ(back.aggregates[i].model, r.aggregates[i].model);
    EXPECT_EQ(back.aggregates[i].size, r.aggregates[i].size);
    EXPECT_NEAR(back.aggregates[i].mae_bikes, r.aggregates[i].mae_bikes, 1e-9);
    EXPECT_EQ(back.aggregates[i].n_test, r.aggregates[i].n_test);
  }
}

TEST(Report, SkippedCsvQuotesReasons) {
  std::ostringstream s;
  bss::write_skipped_csv(s, sample());
  EXPECT_EQ(s.str(),
            "id,delta_minutes,reason\n"
            "3,15,\"reason, with comma\"\n"
            "7,60,\"12 rows, too few\"\n");
}

}  // namespace
