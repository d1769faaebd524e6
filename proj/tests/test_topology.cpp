#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "rtxpsim/rng.hpp"
#include "rtxpsim/topology.hpp"

using namespace rtxpsim;

TEST_CASE("uniform generation stays inside the area and pins the sink") {
  auto rng = make_stream(42, RngStreamId::topology);
  const Topology topo = generate_uniform(100, 50, 50, 10, rng);
  REQUIRE(topo.count() == 100);
  CHECK(topo.sink == 0);
  CHECK(topo.pos[0].x == 0.0);
  CHECK(topo.pos[0].y == 0.0);
  for (const Vec2& p : topo.pos) {
    CHECK(p.x >= 0.0);
    CHECK(p.x <= 50.0);
    CHECK(p.y >= 0.0);
    CHECK(p.y <= 50.0);
  }
}

TEST_CASE("two-node topologies are valid and sink is assigned") {
  auto rng = make_stream(7, RngStreamId::topology);
  const Topology topo = generate_uniform(2, 50, 50, 10, rng);
  CHECK(topo.count() == 2);
  CHECK(topo.sink == 0);
}

TEST_CASE("same seed reproduces the same topology") {
  auto a = make_stream(1234, RngStreamId::topology);
  auto b = make_stream(1234, RngStreamId::topology);
  const Topology ta = generate_uniform(50, 50, 50, 10, a);
  const Topology tb = generate_uniform(50, 50, 50, 10, b);
  for (int i = 0; i < 50; ++i) {
    CHECK(ta.pos[i].x == tb.pos[i].x);
    CHECK(ta.pos[i].y == tb.pos[i].y);
  }
}

TEST_CASE("disk edges, chain two-hop closure, isolated nodes") {
  Topology topo;
  topo.range = 10;
  topo.pos = {{0, 0}, {9.9, 0}, {19.8, 0}, {45, 45}};
  topo.sink = 0;
  const NeighborGraph g = build_graphs(topo);

  CHECK(std::count(g.adj[0].begin(), g.adj[0].end(), 1) == 1); // d = 9.9 <= R
  CHECK(std::count(g.adj[0].begin(), g.adj[0].end(), 2) == 0); // d = 19.8 > R
  CHECK(g.within_two_hops(0, 2));                              // via the chain
  CHECK(!g.within_two_hops(0, 3));
  CHECK(g.adj[3].empty()); // isolated
}

TEST_CASE("hop counts: chain, star, disconnected") {
  Topology chain;
  chain.range = 10;
  chain.pos = {{0, 0}, {9, 0}, {18, 0}};
  const NeighborGraph gc = build_graphs(chain);
  const HopCounts hc = hop_counts(gc, 0);
  CHECK(hc.ring == std::vector<int>{0, 1, 2});
  CHECK(hc.max_ring == 2);

  Topology star;
  star.range = 10;
  star.pos = {{0, 0}, {5, 0}, {0, 5}, {-5, 0}, {0, -5}};
  const HopCounts hs = hop_counts(build_graphs(star), 0);
  for (int i = 1; i < 5; ++i) CHECK(hs.ring[i] == 1);

  Topology split;
  split.range = 10;
  split.pos = {{0, 0}, {9, 0}, {40, 40}};
  CHECK_THROWS_AS(hop_counts(build_graphs(split), 0), DisconnectedTopology);
}

TEST_CASE("ring difference across any edge is -1, 0 or +1") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    auto rng = make_stream(seed, RngStreamId::topology);
    const Topology topo = generate_uniform(150, 50, 50, 10, rng);
    const NeighborGraph g = build_graphs(topo);
    HopCounts hc;
    try {
      hc = hop_counts(g, 0);
    } catch (const DisconnectedTopology&) {
      continue;
    }
    for (int u = 0; u < topo.count(); ++u) {
      for (int v : g.adj[u]) {
        CHECK(std::abs(hc.ring[u] - hc.ring[v]) <= 1);
      }
    }
  }
}

TEST_CASE("average neighbor count grows strictly with the ensemble size") {
  double prev = 0;
  for (int size = 200; size <= 800; size += 100) {
    double avg = 0;
    const int reps = 5;
    for (int rep = 0; rep < reps; ++rep) {
      auto rng = make_stream(derive_seed(99, size, rep), RngStreamId::topology);
      const Topology topo = generate_uniform(size, 50, 50, 10, rng);
      avg += build_graphs(topo).average_degree();
    }
    avg /= reps;
    CHECK(avg > prev);
    prev = avg;
  }
}

TEST_CASE("topology export/import round-trips byte-identically") {
  auto rng = make_stream(5150, RngStreamId::topology);
  const Topology topo = generate_uniform(40, 50, 50, 10, rng);
  std::ostringstream first;
  save_topology(topo, first);
  std::istringstream in(first.str());
  const Topology back = load_topology(in);
  std::ostringstream second;
  save_topology(back, second);
  CHECK(first.str() == second.str());
  CHECK(back.range == topo.range);
  CHECK(back.sink == topo.sink);
}
