#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <vector>

namespace rtxpsim {

struct Vec2 {
  double x = 0;
  double y = 0;
};

struct Topology {
  std::vector<Vec2> pos;
  int sink = 0;
  double width = 50;
  double height = 50;
  double range = 10;

  int count() const { return static_cast<int>(pos.size()); }
  double distance(int a, int b) const;
};

// Undirected disk-model connectivity plus the 2-hop closure used by carrier
// sensing and interference checks. two_hop(u) excludes u itself and contains
// every node at graph distance 1 or 2.
struct NeighborGraph {
  std::vector<std::vector<int>> adj;
  std::vector<std::vector<int>> two_hop;
  std::vector<std::vector<std::uint64_t>> adj_bits;
  std::vector<std::vector<std::uint64_t>> two_hop_bits;

  int count() const { return static_cast<int>(adj.size()); }
  bool adjacent(int u, int v) const {
    return (adj_bits[u][static_cast<std::size_t>(v) >> 6] >> (v & 63)) & 1u;
  }
  bool within_two_hops(int u, int v) const {
    return (two_hop_bits[u][static_cast<std::size_t>(v) >> 6] >> (v & 63)) & 1u;
  }
  double average_degree() const;
};

struct HopCounts {
  std::vector<int> ring; // sink = 0
  int max_ring = 0;      // NB_hop_max
};

struct DisconnectedTopology : std::runtime_error {
  explicit DisconnectedTopology(int unreachable)
      : std::runtime_error("topology disconnected: " + std::to_string(unreachable) +
                           " node(s) unreachable from sink") {}
};

// count nodes i.i.d. uniform on the area. Node 0 is the sink; with
// sink_at_corner it is pinned to (0,0), which maximizes hop diversity.
Topology generate_uniform(int count, double width, double height, double range,
                          std::mt19937_64& rng, bool sink_at_corner = true);

NeighborGraph build_graphs(const Topology& topo);

// BFS rings from the sink; throws DisconnectedTopology when a node is
// unreachable (callers regenerate with the next seed).
HopCounts hop_counts(const NeighborGraph& graph, int sink);

// Plain-text exchange format: "count width height range sink" header, then
// one "id x y" line per node, full double round-trip precision.
void save_topology(const Topology& topo, std::ostream& out);
Topology load_topology(std::istream& in);

} // namespace rtxpsim
