#pragma once

#include <iosfwd>
#include <vector>

#include "rtxpsim/sim_time.hpp"
#include "rtxpsim/topology.hpp"

namespace rtxpsim {

// 1-D virtual coordinate: coord = (ring - 1) * R + offset, offset in [0, R).
// The offset classifies nodes of a ring by their connectivity toward the
// ring below; smaller offset = better placed to forward.
struct Coordinate {
  int ring = 0;
  double offset = 0;
  double coord = 0;
};

struct VcsParams {
  SimTime max_backoff_us = 10000; // 10 ms contention window
  SimTime slot_us = 200;          // one jamming code

  int slot_count() const { return static_cast<int>(max_backoff_us / slot_us); }
};

struct CoordinateSet {
  std::vector<Coordinate> coords;
  std::vector<int> slot;        // quantized backoff slot per node (sink: 0)
  int overflow_warnings = 0;    // same-ring 2-hop groups beyond slot capacity
  VcsParams params;
  double range = 0;
};

// Assigns every node its (ring, offset, coord). Offsets order nodes by the
// fraction of their neighbors lying in the ring below; quantized backoff
// slots are made pairwise distinct within every same-ring 2-hop group so
// that contention always has a unique earliest jammer. Deterministic given
// (graph, rings, R).
CoordinateSet compute_coordinates(const NeighborGraph& graph, const HopCounts& rings,
                                  double range, const VcsParams& params = {});

// y = x mapping from offset to backoff, rounded to whole slots.
SimTime backoff_of(double offset, double range, const VcsParams& params = {});

// Per-node backoff durations for the B and BF phases. Both phases use the
// same slot-quantized mapping; keeping them separate mirrors the two
// contention roles.
struct BackoffAssignment {
  std::vector<SimTime> b_backoff_us;
  std::vector<SimTime> bf_backoff_us;
};

BackoffAssignment make_backoffs(const CoordinateSet& coords);

// "id ring offset coord" lines, companion to the topology export.
void save_coordinates(const CoordinateSet& coords, std::ostream& out);

} // namespace rtxpsim
