#include "bss/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string_view>

#include <fmt/format.h>

#include "bss/csv.hpp"
#include "bss/error.hpp"
#include "bss/rng.hpp"

namespace bss {

namespace {

struct city_info {
  std::string_view name;
  std::string_view zip;
  double lat;
  double lon;
};

constexpr std::array<city_info, 5> kCities{{
    {"San Francisco", "94107", 37.7858, -122.4048},
    {"Redwood City", "94063", 37.4857, -122.2321},
    {"Palo Alto", "94301", 37.4432, -122.1644},
    {"Mountain View", "94041", 37.3898, -122.0818},
    {"San Jose", "95113", 37.3353, -121.8906},
}};

constexpr int kMinutesPerDay = 1440;
constexpr int kIntraMin = 4;
constexpr int kIntraMax = 20;
constexpr int kInterMin = 25;
constexpr int kInterMax = 60;

double bump(double h, double center) {
  auto const d = h - center;
  return std::exp(-0.5 * d * d);
}

// Departure intensity by hour; residential stations peak in the morning,
// commercial ones in the evening.
double departure_shape(synthetic_config const& c, bool residential, double h,
                       bool weekend) {
  double v = (h < 6.0 || h >= 23.0) ? 0.1 : 1.0;
  if (weekend) {
    return v * c.weekend_factor;
  }
  v += c.peak_weight *
       bump(h, residential ? c.morning_peak_hour : c.evening_peak_hour);
  return v;
}

double attraction(synthetic_config const& c, bool residential, double h,
                  bool weekend) {
  if (weekend) {
    return 1.0;
  }
  if (std::abs(h - c.morning_peak_hour) <= 2.5) {
    return residential ? 1.0 : 3.0;
  }
  if (std::abs(h - c.evening_peak_hour) <= 2.5) {
    return residential ? 3.0 : 1.0;
  }
  return 1.0;
}

std::vector<daily_weather> draw_weather(synthetic_config const& c,
                                        std::vector<std::string> const& zips) {
  rng gen{derive_seed(c.seed, {1})};
  std::vector<daily_weather> out;
  auto const first = c.start.days_since_epoch();
  for (int d = 0; d < c.days; ++d) {
    auto const day = date::from_days(first + d);
    auto const jan1 = date{std::chrono::year{day.year()} / 1 / 1};
    auto const doy = static_cast<double>(day.days_since_epoch() -
                                         jan1.days_since_epoch());
    auto const seasonal =
        58.0 + 8.0 * std::sin(2.0 * std::numbers::pi * (doy - 105.0) / 365.25);
    for (auto const& zip : zips) {
      daily_weather w;
      w.date = day;
      w.zip_code = zip;
      auto const rain = gen.bernoulli(c.rain_probability);
      auto const fog = gen.bernoulli(c.fog_probability);
      w.mean_temperature = std::round(seasonal + gen.normal(0.0, 3.0));
      w.mean_humidity =
          std::clamp(std::round(68.0 + (rain ? 15.0 : 0.0) + gen.normal(0.0, 6.0)),
                     10.0, 100.0);
      w.mean_visibility = fog ? static_cast<double>(gen.between(2, 7))
                              : (rain ? 8.0 : 10.0);
      w.mean_wind_speed = static_cast<double>(gen.between(3, 14));
      w.precipitation =
          rain ? std::round(gen.uniform(0.02, 0.8) * 100.0) / 100.0 : 0.0;
      w.event = rain ? (fog ? weather_event::fog_rain : weather_event::rain)
                     : (fog ? weather_event::fog : weather_event::none);
      out.push_back(std::move(w));
    }
  }
  return out;
}

}  // namespace

void synthetic_config::validate() const {
  if (n_stations < 1) {
    throw validation_error{"synthetic network needs at least one station"};
  }
  if (n_regions < 1 || n_regions > n_stations) {
    throw validation_error{fmt::format(
        "n_regions must lie in [1, n_stations], got {}", n_regions)};
  }
  if (min_docks < 1 || max_docks < min_docks) {
    throw validation_error{fmt::format(
        "dock capacity range [{}, {}] is infeasible", min_docks, max_docks)};
  }
  if (days < 1) {
    throw validation_error{"simulation span must be at least one day"};
  }
  if (status_interval < 1) {
    throw validation_error{"status interval must be at least one minute"};
  }
  if (!(trips_per_station_day >= 0.0)) {
    throw validation_error{"trip rate must be non-negative"};
  }
  if (!(intra_region_preference > 0.5 && intra_region_preference <= 1.0)) {
    throw validation_error{"intra-region preference must lie in (0.5, 1]"};
  }
  auto const prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(rain_probability) || !prob(fog_probability) ||
      !prob(weekend_factor) || !(rain_trip_factor >= 0.0)) {
    throw validation_error{"weather and weekend factors must be probabilities"};
  }
}

synthetic_bundle generate_synthetic(synthetic_config const& c) {
  c.validate();
  synthetic_bundle b;
  auto const n = static_cast<std::size_t>(c.n_stations);

  rng setup{derive_seed(c.seed, {0})};
  std::vector<std::string> zips;
  std::vector<int> capacity(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto const block = static_cast<int>(i * static_cast<std::size_t>(c.n_regions) / n);
    auto const& city = kCities[static_cast<std::size_t>(block) % kCities.size()];
    auto const zip = block < static_cast<int>(kCities.size())
                         ? std::string{city.zip}
                         : fmt::format("{}", 96000 + block);
    if (zips.empty() || zips.back() != zip) {
      zips.push_back(zip);
    }
    auto const shift = 0.05 * static_cast<double>(block / static_cast<int>(kCities.size()));
    station_meta s;
    s.station_id = static_cast<int>(i) + 1;
    s.name = fmt::format("{} Station {}", city.name, s.station_id);
    s.latitude = city.lat + shift + setup.uniform(-0.01, 0.01);
    s.longitude = city.lon + setup.uniform(-0.01, 0.01);
    s.dock_count = setup.between(c.min_docks, c.max_docks);
    s.city = std::string{city.name};
    s.zip_code = zip;
    capacity[i] = s.dock_count;
    b.initial_bikes.push_back(setup.between(
        static_cast<int>(std::lround(0.35 * s.dock_count)),
        static_cast<int>(std::lround(0.65 * s.dock_count))));
    b.block_of.push_back(block);
    b.stations.push_back(std::move(s));
  }
  b.weather = draw_weather(c, zips);

  auto const total_minutes = c.days * kMinutesPerDay;
  auto const last_departure = total_minutes - kInterMax - 1;
  b.begin = date_time::from(c.start, 0, 0);
  b.end = b.begin + (total_minutes - 1);

  double shape_mean = 0.0;
  for (int m = 0; m < kMinutesPerDay; ++m) {
    auto const h = m / 60.0;
    shape_mean += 0.5 * (departure_shape(c, true, h, false) +
                         departure_shape(c, false, h, false));
  }
  shape_mean /= kMinutesPerDay;
  auto const base = c.trips_per_station_day / kMinutesPerDay / shape_mean;

  std::vector<int> bikes = b.initial_bikes;
  std::vector<int> reserved(n, 0);
  std::vector<std::vector<std::size_t>> arriving(
      static_cast<std::size_t>(total_minutes) + 1);
  std::vector<double> weights(n);
  rng gen{derive_seed(c.seed, {2})};
  long long trip_id = 1;
  std::vector<bool> raining(n);

  for (int m = 0; m < total_minutes; ++m) {
    auto const now = b.begin + m;
    for (auto const d : arriving[static_cast<std::size_t>(m)]) {
      ++bikes[d];
      --reserved[d];
    }
    arriving[static_cast<std::size_t>(m)].clear();

    auto const day = m / kMinutesPerDay;
    if (m % kMinutesPerDay == 0) {
      for (std::size_t i = 0; i < n; ++i) {
        auto const z = std::find(zips.begin(), zips.end(), b.stations[i].zip_code) -
                       zips.begin();
        auto const& w = b.weather[static_cast<std::size_t>(day) * zips.size() +
                                  static_cast<std::size_t>(z)];
        raining[i] = w.precipitation > 0.0;
      }
    }
    if (m <= last_departure) {
      auto const h = (m % kMinutesPerDay) / 60.0;
      auto const weekend = now.iso_weekday() >= 6;
      for (std::size_t s = 0; s < n; ++s) {
        if (bikes[s] == 0) {
          continue;
        }
        auto const residential = s % 2 == 0;
        auto lambda = base * departure_shape(c, residential, h, weekend) *
                      bikes[s] / (0.5 * capacity[s]);
        if (raining[s]) {
          lambda *= c.rain_trip_factor;
        }
        if (!gen.bernoulli(std::min(lambda, 1.0))) {
          continue;
        }
        auto const intra =
            c.n_regions == 1 || gen.bernoulli(c.intra_region_preference);
        double total = 0.0;
        for (std::size_t d = 0; d < n; ++d) {
          auto const same = b.block_of[d] == b.block_of[s];
          auto const free = capacity[d] - bikes[d] - reserved[d];
          weights[d] = (d == s || same != intra || free <= 0)
                           ? 0.0
                           : free * attraction(c, d % 2 == 0, h, weekend);
          total += weights[d];
        }
        if (total <= 0.0) {
          continue;
        }
        auto pick = gen.uniform() * total;
        std::size_t dest = n;
        for (std::size_t d = 0; d < n; ++d) {
          if (weights[d] <= 0.0) {
            continue;
          }
          dest = d;
          if (pick < weights[d]) {
            break;
          }
          pick -= weights[d];
        }
        auto const duration =
            intra ? gen.between(kIntraMin, kIntraMax) : gen.between(kInterMin, kInterMax);
        --bikes[s];
        ++reserved[dest];
        arriving[static_cast<std::size_t>(m + duration)].push_back(dest);
        b.trips.push_back({trip_id++, duration * 60LL, now, now + duration,
                           b.stations[s].station_id,
                           b.stations[dest].station_id});
      }
    }
    if (c.emit_status && m % c.status_interval == 0) {
      for (std::size_t s = 0; s < n; ++s) {
        b.status.push_back({b.stations[s].station_id, bikes[s],
                            capacity[s] - bikes[s], now});
      }
    }
  }
  return b;
}

void write_synthetic(std::filesystem::path const& dir,
                     synthetic_bundle const& b) {
  std::filesystem::create_directories(dir);
  auto open = [&](char const* name) {
    std::ofstream out{dir / name, std::ios::binary};
    if (!out) {
      throw validation_error{
          fmt::format("cannot write {}", (dir / name).string())};
    }
    return out;
  };
  {
    auto out = open("station.csv");
    out << "id,name,lat,long,dock_count,city,installation_date,zip_code\n";
    for (auto const& s : b.stations) {
      out << fmt::format("{},{},{:.6f},{:.6f},{},{},{},{}\n", s.station_id,
                         csv::escape(s.name), s.latitude, s.longitude,
                         s.dock_count, csv::escape(s.city), "8/6/2013",
                         s.zip_code);
    }
  }
  {
    auto out = open("status.csv");
    fmt::memory_buffer buf;
    fmt::format_to(std::back_inserter(buf),
                   "station_id,bikes_available,docks_available,time\n");
    for (auto const& s : b.status) {
      fmt::format_to(std::back_inserter(buf), "{},{},{},{}\n", s.station_id,
                     s.bikes_available, s.docks_available,
                     format_iso(s.timestamp));
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  {
    auto out = open("trip.csv");
    auto name_of = [&](int id) -> std::string const& {
      return b.stations[static_cast<std::size_t>(id - 1)].name;
    };
    out << "id,duration,start_date,start_station_name,start_station_id,"
           "end_date,end_station_name,end_station_id,subscription_type\n";
    for (auto const& t : b.trips) {
      out << fmt::format("{},{},{},{},{},{},{},{},Subscriber\n", t.trip_id,
                         t.duration_seconds, format_us(t.start_time),
                         csv::escape(name_of(t.start_station_id)),
                         t.start_station_id, format_us(t.end_time),
                         csv::escape(name_of(t.end_station_id)),
                         t.end_station_id);
    }
  }
  {
    auto out = open("weather.csv");
    write_weather(out, b.weather);
  }
}

}  // namespace bss
