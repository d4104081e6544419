#include "bss/graph.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

#include "bss/csv.hpp"
#include "bss/error.hpp"

namespace bss {

adjacency_matrix::adjacency_matrix(std::vector<int> station_ids)
    : ids_{std::move(station_ids)} {
  std::sort(ids_.begin(), ids_.end());
  if (std::adjacent_find(ids_.begin(), ids_.end()) != ids_.end()) {
    throw validation_error{"adjacency matrix station ids must be unique"};
  }
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    index_.emplace(ids_[i], i);
  }
  counts_.assign(ids_.size() * ids_.size(), 0);
  self_loops_.assign(ids_.size(), 0);
}

std::optional<std::size_t> adjacency_matrix::index_of(int station_id) const {
  auto const it = index_.find(station_id);
  if (it == index_.end()) {
    return std::nullopt;
  }
  return it->second;
}

long long adjacency_matrix::count(int from_id, int to_id) const {
  auto const from = index_of(from_id);
  auto const to = index_of(to_id);
  if (!from || !to) {
    throw lookup_error{
        fmt::format("station {} not in adjacency matrix", !from ? from_id : to_id)};
  }
  return at(*from, *to);
}

long long adjacency_matrix::total_counts() const {
  return std::accumulate(counts_.begin(), counts_.end(), 0LL);
}

long long adjacency_matrix::total_self_loops() const {
  return std::accumulate(self_loops_.begin(), self_loops_.end(), 0LL);
}

void adjacency_matrix::add_trip(int from_id, int to_id) {
  auto const from = index_of(from_id);
  auto const to = index_of(to_id);
  if (!from || !to) {
    ++dropped_;
    return;
  }
  if (*from == *to) {
    ++self_loops_[*from];
  } else {
    ++counts_[*from * ids_.size() + *to];
  }
}

adjacency_matrix build_adjacency(std::span<trip_record const> trips,
                                 std::span<station_meta const> stations) {
  if (stations.empty()) {
    throw validation_error{"cannot build an adjacency matrix without stations"};
  }
  std::vector<int> ids;
  ids.reserve(stations.size());
  for (auto const& s : stations) {
    ids.push_back(s.station_id);
  }
  adjacency_matrix a{std::move(ids)};
  for (auto const& t : trips) {
    a.add_trip(t.start_station_id, t.end_station_id);
  }
  return a;
}

neighbor_set top_in_neighbors(adjacency_matrix const& a, int station_id,
                              int k) {
  auto const target = a.index_of(station_id);
  if (!target) {
    throw lookup_error{fmt::format("unknown station {}", station_id)};
  }
  if (k <= 0 || static_cast<std::size_t>(k) >= a.size()) {
    throw validation_error{fmt::format(
        "neighbor count k={} must be positive and below the station count {}",
        k, a.size())};
  }
  std::vector<std::size_t> candidates;
  candidates.reserve(a.size() - 1);
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (j != *target) {
      candidates.push_back(j);
    }
  }
  // ids ascend with index, so index order is the id tie-break
  std::partial_sort(candidates.begin(), candidates.begin() + k,
                    candidates.end(), [&](std::size_t l, std::size_t r) {
                      auto const cl = a.at(l, *target);
                      auto const cr = a.at(r, *target);
                      return cl != cr ? cl > cr : l < r;
                    });
  neighbor_set out{station_id, {}};
  out.neighbors.reserve(static_cast<std::size_t>(k));
  for (int n = 0; n < k; ++n) {
    out.neighbors.push_back(a.station_ids()[candidates[n]]);
  }
  return out;
}

std::map<int, neighbor_set> all_neighbors(adjacency_matrix const& a, int k) {
  std::map<int, neighbor_set> out;
  for (auto const id : a.station_ids()) {
    out.emplace(id, top_in_neighbors(a, id, k));
  }
  return out;
}

int region_partition::region_of(int station_id) const {
  for (std::size_t r = 0; r < regions.size(); ++r) {
    if (std::binary_search(regions[r].begin(), regions[r].end(), station_id)) {
      return static_cast<int>(r);
    }
  }
  return -1;
}

namespace {

struct disjoint_sets {
  explicit disjoint_sets(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) {
      parent[std::max(a, b)] = std::min(a, b);
    }
  }
  std::vector<std::size_t> parent;
};

}  // namespace

region_partition partition_regions(adjacency_matrix const& a,
                                   double threshold_fraction) {
  if (a.size() == 0) {
    throw validation_error{"cannot partition an empty adjacency matrix"};
  }
  if (!(threshold_fraction >= 0.0 && threshold_fraction < 1.0)) {
    throw validation_error{"threshold_fraction must lie in [0, 1)"};
  }
  auto const total =
      static_cast<double>(a.total_counts() + a.total_self_loops());
  region_partition p;
  p.threshold_fraction = threshold_fraction;
  p.threshold_used = threshold_fraction * total;

  auto const n = a.size();
  disjoint_sets sets{n};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      auto const w = a.at(i, j) + a.at(j, i);
      if (w > 0 && static_cast<double>(w) >= p.threshold_used) {
        sets.unite(i, j);
      }
    }
  }
  std::map<std::size_t, std::vector<int>> groups;
  for (std::size_t i = 0; i < n; ++i) {
    groups[sets.find(i)].push_back(a.station_ids()[i]);
  }
  for (auto& [root, members] : groups) {
    p.regions.push_back(std::move(members));
  }
  return p;
}

std::vector<region_zip_purity> validate_partition_zip(
    region_partition const& p, std::span<station_meta const> stations) {
  std::unordered_map<int, std::string const*> zip_of;
  for (auto const& s : stations) {
    zip_of.emplace(s.station_id, &s.zip_code);
  }
  std::vector<region_zip_purity> out;
  for (std::size_t r = 0; r < p.regions.size(); ++r) {
    std::map<std::string, std::size_t> tally;
    for (auto const id : p.regions[r]) {
      auto const it = zip_of.find(id);
      if (it == zip_of.end()) {
        throw lookup_error{fmt::format("station {} has no metadata", id)};
      }
      ++tally[*it->second];
    }
    region_zip_purity rp;
    rp.region = r;
    rp.size = p.regions[r].size();
    std::size_t best = 0;
    for (auto const& [zip, count] : tally) {
      if (count > best) {
        best = count;
        rp.modal_zip = zip;
      }
    }
    rp.purity = rp.size == 0 ? 0.0
                             : static_cast<double>(best) /
                                   static_cast<double>(rp.size);
    out.push_back(std::move(rp));
  }
  return out;
}

void write_adjacency_csv(std::ostream& out, adjacency_matrix const& a) {
  out << "from\\to";
  for (auto const id : a.station_ids()) {
    out << ',' << id;
  }
  out << '\n';
  for (std::size_t i = 0; i < a.size(); ++i) {
    out << a.station_ids()[i];
    for (std::size_t j = 0; j < a.size(); ++j) {
      out << ',' << a.at(i, j);
    }
    out << '\n';
  }
}

void write_partition_csv(std::ostream& out, region_partition const& p) {
  out << "station_id,region_id\n";
  std::vector<std::pair<int, std::size_t>> rows;
  for (std::size_t r = 0; r < p.regions.size(); ++r) {
    for (auto const id : p.regions[r]) {
      rows.emplace_back(id, r);
    }
  }
  std::sort(rows.begin(), rows.end());
  for (auto const& [id, r] : rows) {
    out << id << ',' << r << '\n';
  }
}

region_partition read_partition_csv(std::istream& in) {
  csv::reader r{in};
  auto const c_id = r.require("station_id");
  auto const c_region = r.require("region_id");
  std::map<int, std::vector<int>> groups;
  std::vector<std::string> f;
  while (r.next(f)) {
    try {
      groups[std::stoi(f.at(c_region))].push_back(std::stoi(f.at(c_id)));
    } catch (std::exception const&) {
      throw validation_error{
          fmt::format("malformed partition line {}", r.line_number())};
    }
  }
  region_partition p;
  for (auto& [region, members] : groups) {
    std::sort(members.begin(), members.end());
    p.regions.push_back(std::move(members));
  }
  std::sort(p.regions.begin(), p.regions.end());
  return p;
}

void write_neighbors_csv(std::ostream& out,
                         std::map<int, neighbor_set> const& neighbors) {
  out << "station_id,rank,neighbor_id\n";
  for (auto const& [id, set] : neighbors) {
    for (std::size_t r = 0; r < set.neighbors.size(); ++r) {
      out << id << ',' << r + 1 << ',' << set.neighbors[r] << '\n';
    }
  }
}

std::map<int, neighbor_set> read_neighbors_csv(std::istream& in) {
  csv::reader r{in};
  auto const c_id = r.require("station_id");
  auto const c_rank = r.require("rank");
  auto const c_nbr = r.require("neighbor_id");
  std::map<int, std::map<int, int>> ranked;
  std::vector<std::string> f;
  while (r.next(f)) {
    try {
      ranked[std::stoi(f.at(c_id))][std::stoi(f.at(c_rank))] =
          std::stoi(f.at(c_nbr));
    } catch (std::exception const&) {
      throw validation_error{
          fmt::format("malformed neighbor line {}", r.line_number())};
    }
  }
  std::map<int, neighbor_set> out;
  for (auto const& [id, by_rank] : ranked) {
    neighbor_set s{id, {}};
    for (auto const& [rank, nbr] : by_rank) {
      s.neighbors.push_back(nbr);
    }
    out.emplace(id, std::move(s));
  }
  return out;
}

}  // namespace bss
