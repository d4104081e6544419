#include "bss/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "bss/error.hpp"
#include "bss/features.hpp"

namespace bss {

mae_summary mae_per_station(std::span<double const> predicted_log,
                            std::span<double const> truth_log,
                            std::span<int const> station_ids) {
  if (predicted_log.empty()) {
    throw validation_error{"MAE of an empty prediction set"};
  }
  if (predicted_log.size() != truth_log.size() ||
      predicted_log.size() != station_ids.size()) {
    throw validation_error{"prediction, truth and station vectors differ in length"};
  }
  struct acc {
    double bikes{0.0};
    double log{0.0};
    std::size_t n{0};
  };
  std::map<int, acc> per;
  for (std::size_t i = 0; i < predicted_log.size(); ++i) {
    auto& a = per[station_ids[i]];
    a.bikes += std::abs(inverse_target(predicted_log[i]) -
                        inverse_target(truth_log[i]));
    a.log += std::abs(predicted_log[i] - truth_log[i]);
    ++a.n;
  }
  std::vector<station_mae> stations;
  for (auto const& [id, a] : per) {
    auto const n = static_cast<double>(a.n);
    stations.push_back({id, a.bikes / n, a.log / n, a.n});
  }
  return summarize(std::move(stations));
}

mae_summary summarize(std::vector<station_mae> stations) {
  std::sort(stations.begin(), stations.end(),
            [](auto const& a, auto const& b) { return a.station_id < b.station_id; });
  mae_summary s;
  double wb = 0.0;
  double wl = 0.0;
  double ub = 0.0;
  double ul = 0.0;
  for (auto const& st : stations) {
    auto const n = static_cast<double>(st.n);
    wb += st.mae_bikes * n;
    wl += st.mae_log * n;
    ub += st.mae_bikes;
    ul += st.mae_log;
    s.n += st.n;
  }
  if (!stations.empty() && s.n > 0) {
    auto const total = static_cast<double>(s.n);
    auto const count = static_cast<double>(stations.size());
    s.mae_bikes = wb / total;
    s.mae_log = wl / total;
    s.mae_bikes_unweighted = ub / count;
    s.mae_log_unweighted = ul / count;
  }
  s.stations = std::move(stations);
  return s;
}

}  // namespace bss
