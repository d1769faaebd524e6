#include "rtxpsim/vcs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

namespace rtxpsim {

SimTime backoff_of(double offset, double range, const VcsParams& params) {
  const double raw = offset / range * static_cast<double>(params.max_backoff_us);
  const SimTime slots = std::llround(raw / static_cast<double>(params.slot_us));
  return slots * params.slot_us;
}

CoordinateSet compute_coordinates(const NeighborGraph& graph, const HopCounts& rings,
                                  double range, const VcsParams& params) {
  const int n = graph.count();
  const int slots = params.slot_count();

  CoordinateSet out;
  out.params = params;
  out.range = range;
  out.coords.resize(n);
  out.slot.assign(n, 0);

  // Classification key: fraction of neighbors NOT in the ring below, scaled
  // into [0, 0.9] so the top slots stay free for collision bumping.
  std::vector<double> key(n, 0.0);
  for (int u = 0; u < n; ++u) {
    if (rings.ring[u] == 0) continue;
    int below = 0;
    for (int v : graph.adj[u]) {
      if (rings.ring[v] == rings.ring[u] - 1) ++below;
    }
    const double rho = static_cast<double>(below) / static_cast<double>(graph.adj[u].size());
    key[u] = (1.0 - rho) * 0.9;
  }

  std::vector<int> order;
  order.reserve(n);
  for (int u = 0; u < n; ++u) {
    if (rings.ring[u] > 0) order.push_back(u);
  }
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return key[a] != key[b] ? key[a] < key[b] : a < b;
  });

  // Greedy slot assignment in classification order. Contention only ever
  // happens between same-ring nodes of a 2-hop neighborhood (a B_i phase
  // within 2 hops implies equal rings), so that is the scope on which
  // quantized backoffs must differ.
  std::vector<char> taken(slots, 0);
  std::vector<char> assigned(n, 0);
  for (int u : order) {
    std::fill(taken.begin(), taken.end(), 0);
    for (int v : graph.two_hop[u]) {
      if (assigned[v] && rings.ring[v] == rings.ring[u]) taken[out.slot[v]] = 1;
    }
    const int desired =
        std::min<int>(slots - 1, static_cast<int>(std::llround(key[u] * slots)));
    int chosen = -1;
    for (int s = desired; s < slots; ++s) {
      if (!taken[s]) { chosen = s; break; }
    }
    if (chosen < 0) {
      for (int s = desired - 1; s >= 0; --s) {
        if (!taken[s]) { chosen = s; break; }
      }
    }
    if (chosen < 0) { // neighborhood denser than the slot space
      chosen = desired;
      ++out.overflow_warnings;
    }
    out.slot[u] = chosen;
    assigned[u] = 1;
  }

  // Continuous offsets: slot value plus a sub-slot epsilon unique per node
  // id. The epsilon keeps offsets pairwise distinct everywhere while
  // round-tripping to the same slot through backoff_of.
  const double quantum = range / static_cast<double>(slots);
  for (int u = 0; u < n; ++u) {
    Coordinate& c = out.coords[u];
    c.ring = rings.ring[u];
    if (c.ring == 0) {
      c.offset = 0.0;
      c.coord = 0.0; // sink never contends; below every real coordinate
      continue;
    }
    const double eps = quantum * (static_cast<double>(u) + 1.0) /
                       (2.0 * (static_cast<double>(n) + 1.0));
    c.offset = static_cast<double>(out.slot[u]) * quantum + eps;
    c.coord = static_cast<double>(c.ring - 1) * range + c.offset;
  }
  return out;
}

BackoffAssignment make_backoffs(const CoordinateSet& coords) {
  BackoffAssignment out;
  const std::size_t n = coords.coords.size();
  out.b_backoff_us.resize(n);
  out.bf_backoff_us.resize(n);
  for (std::size_t u = 0; u < n; ++u) {
    const SimTime b = static_cast<SimTime>(coords.slot[u]) * coords.params.slot_us;
    out.b_backoff_us[u] = b;
    out.bf_backoff_us[u] = b;
  }
  return out;
}

void save_coordinates(const CoordinateSet& coords, std::ostream& out) {
  char buf[128];
  for (std::size_t u = 0; u < coords.coords.size(); ++u) {
    const Coordinate& c = coords.coords[u];
    std::snprintf(buf, sizeof(buf), "%zu %d %.17g %.17g\n", u, c.ring, c.offset, c.coord);
    out << buf;
  }
}

} // namespace rtxpsim
