#pragma once

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <functional>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bss/ingest.hpp"
#include "bss/rng.hpp"
#include "bss/time.hpp"

namespace fixtures {

inline Eigen::MatrixXd normal_matrix(bss::rng& g, Eigen::Index n,
                                     Eigen::Index p) {
  Eigen::MatrixXd m(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      m(i, j) = g.normal();
    }
  }
  return m;
}

/// Columns alternate between continuous values and a small integer grid, so
/// repeated values show up in split searches.
inline Eigen::MatrixXd mixed_matrix(bss::rng& g, Eigen::Index n,
                                    Eigen::Index p) {
  Eigen::MatrixXd m(n, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    auto const discrete = g.bernoulli(0.5);
    for (Eigen::Index i = 0; i < n; ++i) {
      m(i, j) = discrete ? static_cast<double>(g.between(0, 6)) : g.uniform(-5, 5);
    }
  }
  return m;
}

inline bss::date_time at(int day, int hour, int minute) {
  return bss::date_time::from(bss::date{std::chrono::year{2015} / 3 / 1}, 0, 0) +
         (day * 1440 + hour * 60 + minute);
}

/// One station's snapshots at strictly increasing times, values following a
/// bounded random walk that often stays put.
inline std::vector<bss::status_snapshot> status_stream(bss::rng& g, int station,
                                                       int length, int docks) {
  std::vector<bss::status_snapshot> out;
  auto t = at(0, 0, 0) + g.between(0, 30);
  auto bikes = g.between(0, docks);
  for (int i = 0; i < length; ++i) {
    if (g.bernoulli(0.3)) {
      bikes = std::clamp(bikes + g.between(-2, 2), 0, docks);
    }
    out.push_back({station, bikes, docks - bikes, t});
    t = t + g.between(1, 5);
  }
  return out;
}

inline std::vector<bss::station_meta> stations(std::vector<int> const& ids,
                                               std::string const& zip = "94107") {
  std::vector<bss::station_meta> out;
  for (auto const id : ids) {
    bss::station_meta s;
    s.station_id = id;
    s.name = "S" + std::to_string(id);
    s.dock_count = 15;
    s.city = "San Francisco";
    s.zip_code = zip;
    out.push_back(s);
  }
  return out;
}

inline std::vector<bss::trip_record> trips(
    std::vector<std::pair<int, int>> const& pairs) {
  std::vector<bss::trip_record> out;
  long long id = 1;
  for (auto const& [a, b] : pairs) {
    out.push_back({id++, 600, at(0, 8, 0), at(0, 8, 10), a, b});
  }
  return out;
}

inline std::string slurp(std::filesystem::path const& p) {
  std::ifstream in{p, std::ios::binary};
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// A fresh directory under the system temp dir, removed on destruction.
class temp_dir {
public:
  explicit temp_dir(std::string const& tag) {
    auto const base = std::filesystem::temp_directory_path();
    bss::rng g{static_cast<std::uint64_t>(
        std::hash<std::string>{}(tag) ^
        static_cast<std::uint64_t>(
            std::chrono::steady_clock::now().time_since_epoch().count()))};
    do {
      path_ = base / (tag + "-" + std::to_string(g.next() % 1000000007ULL));
    } while (std::filesystem::exists(path_));
    std::filesystem::create_directories(path_);
  }
  ~temp_dir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  temp_dir(temp_dir const&) = delete;
  temp_dir& operator=(temp_dir const&) = delete;

  std::filesystem::path const& path() const { return path_; }
  std::string str(std::string const& sub = {}) const {
    return sub.empty() ? path_.string() : (path_ / sub).string();
  }

private:
  std::filesystem::path path_;
};

}  // namespace fixtures
