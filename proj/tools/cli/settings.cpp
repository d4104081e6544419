#include "cli/settings.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>

#include <fmt/format.h>

#include "bss/error.hpp"
#include "bss/parallel.hpp"

namespace bss::cli {

namespace {

std::string trim(std::string_view s) {
  auto const b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) {
    return {};
  }
  auto const e = s.find_last_not_of(" \t\r");
  return std::string{s.substr(b, e - b + 1)};
}

std::string normalize(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

std::map<std::string, std::string> defaults() {
  auto const* env = std::getenv("BSS_DATA_DIR");
  return {
      {"config", ""},
      {"data", env != nullptr && *env != '\0' ? env : "."},
      {"in", ""},
      {"out", "out"},
      {"seed", "1"},
      {"workers", std::to_string(default_workers())},
      {"delta", "15,30,60,90,120"},
      {"trees", "20,60,100,140,180"},
      {"models", "rf,lsboost,plsr"},
      {"grid_step", "15"},
      {"train_fraction", "0.8"},
      {"k", "10"},
      {"threshold", "0.001"},
      {"min_leaf_size", "5"},
      {"max_depth", "20"},
      {"mtry", "0"},
      {"shrinkage", "1"},
      {"cv_folds", "5"},
      {"max_components", "10"},
      {"min_train_rows", "20"},
      {"min_test_rows", "5"},
      {"keep_missing_weather", "0"},
      {"synthetic", "0"},
      {"n_stations", "10"},
      {"n_regions", "2"},
      {"days", "14"},
      {"preference", "0.995"},
      {"trips_per_day", "40"},
      {"status_interval", "1"},
      {"station", ""},
      {"region", ""},
      {"tree_count", ""},
  };
}

bool is_path_key(std::string const& k) {
  return k == "config" || k == "data" || k == "in" || k == "out" ||
         k == "workers";
}

template <typename T>
T parse_as(std::string const& key, std::string const& v) {
  T out{};
  auto const s = trim(v);
  auto const [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw validation_error{fmt::format("{}: '{}' is not a number", key, v)};
  }
  return out;
}

}  // namespace

settings::settings() : values_{defaults()} {}

std::vector<std::string> const& settings::keys() {
  static auto const k = [] {
    std::vector<std::string> out;
    for (auto const& [key, v] : defaults()) {
      out.push_back(key);
    }
    return out;
  }();
  return k;
}

void settings::load_file(std::filesystem::path const& path) {
  std::ifstream in{path};
  if (!in) {
    throw validation_error{fmt::format("cannot read config {}", path.string())};
  }
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto const hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    auto const body = trim(line);
    if (body.empty()) {
      continue;
    }
    auto const eq = body.find('=');
    if (eq == std::string::npos) {
      throw validation_error{
          fmt::format("{}:{}: expected key = value", path.string(), n)};
    }
    set(normalize(trim(body.substr(0, eq))), trim(body.substr(eq + 1)));
  }
}

void settings::set(std::string key, std::string value) {
  key = normalize(std::move(key));
  if (!values_.contains(key)) {
    throw validation_error{fmt::format("unknown setting '{}'", key)};
  }
  values_[key] = std::move(value);
  explicit_[key] = true;
}

bool settings::explicitly_set(std::string const& key) const {
  return explicit_.contains(key);
}

std::string const& settings::text(std::string const& key) const {
  return values_.at(key);
}

long long settings::integer(std::string const& key) const {
  return parse_as<long long>(key, text(key));
}

double settings::real(std::string const& key) const {
  return parse_as<double>(key, text(key));
}

bool settings::flag(std::string const& key) const {
  auto const v = trim(text(key));
  if (v == "1" || v == "true" || v == "yes" || v == "on") {
    return true;
  }
  if (v.empty() || v == "0" || v == "false" || v == "no" || v == "off") {
    return false;
  }
  throw validation_error{fmt::format("{}: '{}' is not a boolean", key, v)};
}

std::vector<std::string> settings::word_list(std::string const& key) const {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text(key) + ",") {
    if (c == ',' || c == ';' || c == ' ') {
      if (auto t = trim(cur); !t.empty()) {
        out.push_back(std::move(t));
      }
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  return out;
}

std::vector<int> settings::int_list(std::string const& key) const {
  std::vector<int> out;
  for (auto const& w : word_list(key)) {
    out.push_back(parse_as<int>(key, w));
  }
  return out;
}

std::string settings::effective() const {
  std::string out;
  for (auto const& [k, v] : values_) {
    if (!is_path_key(k)) {
      out += fmt::format("{}={}\n", k, v);
    }
  }
  return out;
}

}  // namespace bss::cli
