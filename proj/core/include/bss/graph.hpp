#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "bss/ingest.hpp"

namespace bss {

/// Directed trip counts. Entry (from, to) counts trips starting at `from` and
/// ending at `to`; the diagonal is always zero and self-trips are kept apart.
class adjacency_matrix {
public:
  adjacency_matrix() = default;
  explicit adjacency_matrix(std::vector<int> station_ids);

  std::size_t size() const { return ids_.size(); }
  std::vector<int> const& station_ids() const { return ids_; }
  std::optional<std::size_t> index_of(int station_id) const;

  long long at(std::size_t from, std::size_t to) const {
    return counts_[from * ids_.size() + to];
  }
  /// Count by station id; throws lookup_error for unknown ids.
  long long count(int from_id, int to_id) const;
  long long self_loops(std::size_t i) const { return self_loops_[i]; }

  long long total_counts() const;
  long long total_self_loops() const;
  /// Trips whose endpoints were not in the station list.
  long long dropped() const { return dropped_; }

  void add_trip(int from_id, int to_id);

private:
  std::vector<int> ids_;
  std::map<int, std::size_t> index_;
  std::vector<long long> counts_;
  std::vector<long long> self_loops_;
  long long dropped_{0};
};

adjacency_matrix build_adjacency(std::span<trip_record const> trips,
                                 std::span<station_meta const> stations);

struct neighbor_set {
  int station_id{0};
  std::vector<int> neighbors;

  friend bool operator==(neighbor_set const&, neighbor_set const&) = default;
};

inline constexpr int kDefaultNeighborCount = 10;

/// The k stations sending the most trips into `station_id`, most first, ties
/// by ascending id, padded with zero-count stations in id order.
neighbor_set top_in_neighbors(adjacency_matrix const& a, int station_id,
                              int k = kDefaultNeighborCount);

std::map<int, neighbor_set> all_neighbors(adjacency_matrix const& a,
                                          int k = kDefaultNeighborCount);

struct region_partition {
  // regions ordered by their smallest member; members ascending
  std::vector<std::vector<int>> regions;
  double threshold_fraction{0.0};
  double threshold_used{0.0};

  /// Index of the region holding `station_id`, or -1.
  int region_of(int station_id) const;
};

inline constexpr double kDefaultRegionThreshold = 0.001;

/// Connected components of the symmetrized trip graph after dropping edges
/// lighter than threshold_fraction * total trips.
region_partition partition_regions(
    adjacency_matrix const& a,
    double threshold_fraction = kDefaultRegionThreshold);

struct region_zip_purity {
  std::size_t region{0};
  std::size_t size{0};
  std::string modal_zip;
  double purity{0.0};
};

std::vector<region_zip_purity> validate_partition_zip(
    region_partition const& p, std::span<station_meta const> stations);

void write_adjacency_csv(std::ostream& out, adjacency_matrix const& a);
void write_partition_csv(std::ostream& out, region_partition const& p);
region_partition read_partition_csv(std::istream& in);
void write_neighbors_csv(std::ostream& out,
                         std::map<int, neighbor_set> const& neighbors);
std::map<int, neighbor_set> read_neighbors_csv(std::istream& in);

}  // namespace bss
