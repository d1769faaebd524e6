#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <vector>

#include "rtxpsim/des.hpp"
#include "rtxpsim/metrics.hpp"
#include "rtxpsim/radio.hpp"
#include "rtxpsim/rng.hpp"
#include "rtxpsim/topology.hpp"

namespace rtxpsim {

// BFS convergecast tree: parent is the lowest-id neighbor one ring closer to
// the sink, depth equals the ring number.
struct TreeRouting {
  std::vector<int> parent; // -1 for the sink
  std::vector<int> depth;
};

TreeRouting build_tree(const NeighborGraph& graph, const HopCounts& rings);

// Interference-free TDMA frame. Slots are grouped in depth-descending blocks
// (deepest senders first), so a relayed packet always finds its parent's
// slot later in the same frame; the frame is padded with idle slots to an
// alarm-commensurate length, which keeps per-packet delays independent of
// the alarm rate.
//
// express: one slot per node, a single deepest-to-shallowest sweep; short
//   frames sized for alarm traffic, worst per-packet delay < frame + sweep.
// full_generation: sweeps repeat until a one-packet-per-node batch drains,
//   i.e. the frame absorbs a whole periodic data generation.
enum class ScheduleMode { express, full_generation };

struct TdmaSchedule {
  SimTime t_slot_us = 2000;
  int frame_slots = 0;     // padded length
  int built_slots = 0;     // before padding
  std::vector<std::vector<int>> senders_per_slot;
  std::vector<std::vector<int>> owned_slots; // per node, ascending
};

TdmaSchedule compute_schedule(const NeighborGraph& graph, const TreeRouting& tree,
                              SimTime t_slot_us = 2000, SimTime alarm_base_us = 1000000,
                              ScheduleMode mode = ScheduleMode::express);

struct ScheduleCheck {
  int conflicts = 0;       // same-slot pairs violating 2-hop separation
  int frame_slots = 0;
  int frame_bound = 0;     // 3 * (|V| - 1)
  bool within_bound = false;
  bool tree_consistent = false; // every sender transmits to its parent
};

// Independent brute-force verifier: recomputes pairwise hop distances by BFS
// (no reuse of the scheduler's adjacency closures) and scans every pair of
// same-slot senders.
ScheduleCheck check_schedule(const NeighborGraph& graph, const TreeRouting& tree,
                             const TdmaSchedule& schedule);

// Runtime: packets ride the cyclic frame, one hop per owned slot, no
// retransmissions (a failed link loses the packet for good).
class PedamacsSim {
public:
  PedamacsSim(Simulator& sim, const Topology& topo, const NeighborGraph& graph,
              const TreeRouting& tree, const TdmaSchedule& schedule, const RadioParams& radio,
              ChannelModel model, std::uint64_t shadowing_seed);

  void inject(const Alarm& alarm);
  void run(SimTime horizon);
  RunMetrics metrics() const;
  const ChannelLog& channel() const { return channel_; }
  void retain_channel_log() { channel_.set_retain_all(true); }

private:
  void arm_next_slot(int node);
  void on_owned_slot(int node, SimTime slot_start);

  Simulator& sim_;
  const Topology& topo_;
  const NeighborGraph& graph_;
  const TreeRouting& tree_;
  const TdmaSchedule& schedule_;
  RadioParams radio_;
  ChannelModel model_;
  ChannelLog channel_;
  std::mt19937_64 shadowing_rng_;

  std::vector<std::deque<int>> queues_;
  std::vector<char> armed_;
  std::vector<PacketRecord> records_;
  EnergyLedger energy_;
  SimTime horizon_ = 0;
};

} // namespace rtxpsim
