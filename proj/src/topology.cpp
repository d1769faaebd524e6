#include "rtxpsim/topology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <istream>
#include <ostream>
#include <sstream>

namespace rtxpsim {

double Topology::distance(int a, int b) const {
  const double dx = pos[a].x - pos[b].x;
  const double dy = pos[a].y - pos[b].y;
  return std::sqrt(dx * dx + dy * dy);
}

double NeighborGraph::average_degree() const {
  std::size_t total = 0;
  for (const auto& n : adj) total += n.size();
  return adj.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(adj.size());
}

Topology generate_uniform(int count, double width, double height, double range,
                          std::mt19937_64& rng, bool sink_at_corner) {
  Topology topo;
  topo.width = width;
  topo.height = height;
  topo.range = range;
  topo.sink = 0;
  topo.pos.resize(count);
  std::uniform_real_distribution<double> ux(0.0, width);
  std::uniform_real_distribution<double> uy(0.0, height);
  for (int i = 0; i < count; ++i) {
    topo.pos[i].x = ux(rng);
    topo.pos[i].y = uy(rng);
  }
  if (sink_at_corner) topo.pos[0] = Vec2{0.0, 0.0};
  return topo;
}

NeighborGraph build_graphs(const Topology& topo) {
  const int n = topo.count();
  NeighborGraph g;
  g.adj.resize(n);
  g.two_hop.resize(n);
  g.adj_bits.assign(n, std::vector<std::uint64_t>((n + 63) / 64, 0));
  g.two_hop_bits.assign(n, std::vector<std::uint64_t>((n + 63) / 64, 0));

  const double r2 = topo.range * topo.range;
#pragma omp parallel for schedule(static)
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (v == u) continue;
      const double dx = topo.pos[u].x - topo.pos[v].x;
      const double dy = topo.pos[u].y - topo.pos[v].y;
      if (dx * dx + dy * dy <= r2) {
        g.adj[u].push_back(v);
        g.adj_bits[u][static_cast<std::size_t>(v) >> 6] |= 1ULL << (v & 63);
      }
    }
  }

#pragma omp parallel for schedule(static)
  for (int u = 0; u < n; ++u) {
    auto& bits = g.two_hop_bits[u];
    for (int v : g.adj[u]) {
      bits[static_cast<std::size_t>(v) >> 6] |= 1ULL << (v & 63);
      for (int w : g.adj[v]) bits[static_cast<std::size_t>(w) >> 6] |= 1ULL << (w & 63);
    }
    bits[static_cast<std::size_t>(u) >> 6] &= ~(1ULL << (u & 63));
    auto& list = g.two_hop[u];
    for (int v = 0; v < n; ++v) {
      if ((bits[static_cast<std::size_t>(v) >> 6] >> (v & 63)) & 1u) list.push_back(v);
    }
  }
  return g;
}

HopCounts hop_counts(const NeighborGraph& graph, int sink) {
  const int n = graph.count();
  HopCounts hc;
  hc.ring.assign(n, -1);
  hc.ring[sink] = 0;
  std::deque<int> frontier{sink};
  int reached = 1;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop_front();
    for (int v : graph.adj[u]) {
      if (hc.ring[v] < 0) {
        hc.ring[v] = hc.ring[u] + 1;
        hc.max_ring = std::max(hc.max_ring, hc.ring[v]);
        frontier.push_back(v);
        ++reached;
      }
    }
  }
  if (reached != n) throw DisconnectedTopology(n - reached);
  return hc;
}

void save_topology(const Topology& topo, std::ostream& out) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%d %.17g %.17g %.17g %d\n", topo.count(), topo.width,
                topo.height, topo.range, topo.sink);
  out << buf;
  for (int i = 0; i < topo.count(); ++i) {
    std::snprintf(buf, sizeof(buf), "%d %.17g %.17g\n", i, topo.pos[i].x, topo.pos[i].y);
    out << buf;
  }
}

Topology load_topology(std::istream& in) {
  Topology topo;
  int count = 0;
  if (!(in >> count >> topo.width >> topo.height >> topo.range >> topo.sink)) {
    throw std::runtime_error("topology header malformed");
  }
  topo.pos.resize(count);
  for (int i = 0; i < count; ++i) {
    int id;
    double x, y;
    if (!(in >> id >> x >> y) || id < 0 || id >= count) {
      throw std::runtime_error("topology node line malformed");
    }
    topo.pos[id] = Vec2{x, y};
  }
  return topo;
}

} // namespace rtxpsim
