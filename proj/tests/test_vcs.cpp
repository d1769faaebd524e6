#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "rtxpsim/rng.hpp"
#include "rtxpsim/rtxp_config.hpp"
#include "rtxpsim/topology.hpp"
#include "rtxpsim/vcs.hpp"

using namespace rtxpsim;

namespace {

NeighborGraph graph_from_adj(std::vector<std::vector<int>> adj) {
  const int n = static_cast<int>(adj.size());
  NeighborGraph g;
  g.adj = std::move(adj);
  g.two_hop.resize(n);
  g.adj_bits.assign(n, std::vector<std::uint64_t>((n + 63) / 64, 0));
  g.two_hop_bits.assign(n, std::vector<std::uint64_t>((n + 63) / 64, 0));
  for (int u = 0; u < n; ++u) {
    std::set<int> two;
    for (int v : g.adj[u]) {
      g.adj_bits[u][static_cast<std::size_t>(v) >> 6] |= 1ULL << (v & 63);
      two.insert(v);
      for (int w : g.adj[v]) two.insert(w);
    }
    two.erase(u);
    for (int v : two) {
      g.two_hop[u].push_back(v);
      g.two_hop_bits[u][static_cast<std::size_t>(v) >> 6] |= 1ULL << (v & 63);
    }
  }
  return g;
}

struct RandomNet {
  Topology topo;
  NeighborGraph graph;
  HopCounts rings;
  CoordinateSet coords;
};

RandomNet make_net(std::uint64_t seed, int size) {
  for (int attempt = 0;; ++attempt) {
    auto rng = make_stream(derive_seed(seed, attempt), RngStreamId::topology);
    RandomNet net;
    net.topo = generate_uniform(size, 50, 50, 10, rng);
    net.graph = build_graphs(net.topo);
    try {
      net.rings = hop_counts(net.graph, 0);
    } catch (const DisconnectedTopology&) {
      continue;
    }
    net.coords = compute_coordinates(net.graph, net.rings, net.topo.range);
    return net;
  }
}

} // namespace

TEST_CASE("coordinate formula: ring 3, offset 4.2, R = 10 gives 24.2") {
  const double coord = (3 - 1) * 10.0 + 4.2;
  CHECK(coord == doctest::Approx(24.2));
  // and the constructive path obeys the same formula everywhere
  const RandomNet net = make_net(21, 120);
  for (int u = 1; u < net.topo.count(); ++u) {
    const Coordinate& c = net.coords.coords[u];
    CHECK(c.coord == doctest::Approx((c.ring - 1) * 10.0 + c.offset));
    CHECK(c.offset >= 0.0);
    CHECK(c.offset < 10.0);
  }
}

TEST_CASE("nodes better connected toward the sink get smaller offsets") {
  // ring-2 node A has 3 of 4 neighbors in ring 1; B has 1 of 4
  std::vector<std::vector<int>> adj(9);
  auto link = [&](int a, int b) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  };
  link(0, 1);
  link(0, 2);
  link(0, 3);
  link(0, 4);          // ring 1: nodes 1..4
  link(5, 1);
  link(5, 2);
  link(5, 3);
  link(5, 6);          // A = 5, neighbors 1,2,3 below + 6
  link(6, 4);
  link(6, 7);
  link(6, 8);          // B = 6, neighbors 4 below + 5,7,8
  link(7, 3);
  link(8, 2);          // 7, 8 are ring-2 fillers
  const NeighborGraph g = graph_from_adj(std::move(adj));
  const HopCounts rings{{0, 1, 1, 1, 1, 2, 2, 2, 2}, 2};
  const CoordinateSet coords = compute_coordinates(g, rings, 10.0);
  CHECK(coords.coords[5].offset < coords.coords[6].offset);
}

TEST_CASE("no two nodes within two hops share an offset (exhaustive oracle)") {
  for (std::uint64_t seed : {31u, 32u}) {
    const RandomNet net = make_net(seed, 200);
    CHECK(net.coords.overflow_warnings == 0);
    for (int u = 0; u < net.topo.count(); ++u) {
      for (int v : net.graph.two_hop[u]) {
        if (v <= u) continue;
        CHECK(net.coords.coords[u].offset != net.coords.coords[v].offset);
        if (net.rings.ring[u] == net.rings.ring[v]) {
          CHECK(net.coords.slot[u] != net.coords.slot[v]);
        }
      }
    }
  }
}

TEST_CASE("backoff mapping is the slot-quantized identity") {
  CHECK(backoff_of(0.0, 10.0) == 0);
  CHECK(backoff_of(2.0, 10.0) == 2000);
  CHECK(backoff_of(9.999, 10.0) == 10000); // approaching R maps to max(backoff)
  // y = x exactly whenever the slot grain divides the value
  const VcsParams fine{10000, 100};
  CHECK(backoff_of(2.0, 10.0, fine) == 2000);
  CHECK(backoff_of(7.5, 10.0, fine) == 7500);
  // the default 200 us grain rounds to whole jamming slots
  CHECK(backoff_of(7.5, 10.0) == 7600);
  // order preservation
  CHECK(backoff_of(2.0, 10.0) < backoff_of(7.5, 10.0));
  // the full phase adds the jamming code on top of max(backoff)
  RtxpConfig cfg;
  CHECK(cfg.d_b() == 10200);
  CHECK(cfg.d_bf() == 10200);
}

TEST_CASE("contention has a unique earliest jammer over random 2-hop sets") {
  // synthetic sets with distinct slots: the minimum is unique by construction;
  // the brute-force oracle recounts it
  auto rng = make_stream(77, RngStreamId::csma_backoff);
  std::uniform_int_distribution<int> size_draw(1, 40);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<int> slots(50);
    for (int i = 0; i < 50; ++i) slots[i] = i;
    std::shuffle(slots.begin(), slots.end(), rng);
    const int k = size_draw(rng);
    std::vector<SimTime> backoffs;
    for (int i = 0; i < k; ++i) backoffs.push_back(slots[i] * 200);
    const SimTime min = *std::min_element(backoffs.begin(), backoffs.end());
    CHECK(std::count(backoffs.begin(), backoffs.end(), min) == 1);
  }

  // topology-driven sets: same-ring contenders in a mutual 2-hop
  // neighborhood (every pair senses every other pair)
  const RandomNet net = make_net(88, 150);
  const BackoffAssignment ba = make_backoffs(net.coords);
  std::uniform_int_distribution<int> pick(1, net.topo.count() - 1);
  int checked = 0;
  for (int trial = 0; trial < 6000; ++trial) {
    const int center = pick(rng);
    std::vector<int> candidates;
    for (int v : net.graph.two_hop[center]) {
      if (net.rings.ring[v] == net.rings.ring[center]) candidates.push_back(v);
    }
    std::shuffle(candidates.begin(), candidates.end(), rng);
    std::vector<int> scope{center};
    for (int v : candidates) {
      bool mutual = true;
      for (int u : scope) {
        if (!net.graph.within_two_hops(u, v)) {
          mutual = false;
          break;
        }
      }
      if (mutual) scope.push_back(v);
    }
    if (scope.size() < 2) continue;
    const int k =
        std::min<int>(static_cast<int>(scope.size()), 2 + static_cast<int>(rng() % 10));
    std::vector<SimTime> backoffs;
    for (int i = 0; i < k; ++i) backoffs.push_back(ba.b_backoff_us[scope[i]]);
    const SimTime min = *std::min_element(backoffs.begin(), backoffs.end());
    CHECK(std::count(backoffs.begin(), backoffs.end(), min) == 1);
    ++checked;
  }
  CHECK(checked > 1000);
}

TEST_CASE("argmin of forward backoff equals argmin of coordinate on receiver sets") {
  const RandomNet net = make_net(99, 150);
  const BackoffAssignment ba = make_backoffs(net.coords);
  auto rng = make_stream(123, RngStreamId::csma_backoff);
  std::uniform_int_distribution<int> pick(1, net.topo.count() - 1);
  for (int trial = 0; trial < 2000; ++trial) {
    const int sender = pick(rng);
    if (net.rings.ring[sender] < 1) continue;
    std::vector<int> receivers;
    for (int v : net.graph.adj[sender]) {
      if (net.rings.ring[v] == net.rings.ring[sender] - 1 && v != 0) receivers.push_back(v);
    }
    if (receivers.size() < 2) continue;
    int by_backoff = receivers[0];
    int by_coord = receivers[0];
    for (int v : receivers) {
      if (ba.bf_backoff_us[v] < ba.bf_backoff_us[by_backoff]) by_backoff = v;
      if (net.coords.coords[v].coord < net.coords.coords[by_coord].coord) by_coord = v;
    }
    CHECK(by_backoff == by_coord);
  }
}

TEST_CASE("coordinate construction is deterministic") {
  const RandomNet a = make_net(444, 100);
  const CoordinateSet again = compute_coordinates(a.graph, a.rings, a.topo.range);
  for (int u = 0; u < a.topo.count(); ++u) {
    CHECK(a.coords.coords[u].offset == again.coords[u].offset);
    CHECK(a.coords.slot[u] == again.slot[u]);
  }
}

TEST_CASE("sink coordinate is zero and below every other coordinate") {
  const RandomNet net = make_net(55, 80);
  CHECK(net.coords.coords[0].coord == 0.0);
  for (int u = 1; u < net.topo.count(); ++u) {
    CHECK(net.coords.coords[u].coord > 0.0);
  }
}
