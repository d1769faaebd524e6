#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <vector>

#include "rtxpsim/des.hpp"
#include "rtxpsim/metrics.hpp"
#include "rtxpsim/radio.hpp"
#include "rtxpsim/rng.hpp"
#include "rtxpsim/rtxp_config.hpp"
#include "rtxpsim/topology.hpp"
#include "rtxpsim/vcs.hpp"

namespace rtxpsim {

// One entry of a node's per-cycle phase timetable.
enum class RtxpPhase { contend, transmit, receive, forward_contend, l_slot };

struct PhaseWindow {
  RtxpPhase phase;
  SimTime start_us; // offset from the activity period start
  SimTime end_us;
};

// Phase layout of one activity period for a node of the given ring. Sending
// classes run in order 0, 2, 1 so a packet can descend three rings per
// activity period; the L slot closes the period.
std::vector<PhaseWindow> phase_timetable(int ring, const RtxpConfig& cfg);

// index of the awake period (0..2) in which ring class i transmits
int sending_period_of_class(int cls);

// The RTXP per-node state machine driven by the event core: globally
// synchronized duty cycles, B/R/BF phases per ring class, L slot, secondary
// activity periods, forwarder election by coordinate, ack by jamming,
// bounded per-cycle retransmissions.
class RtxpSim {
public:
  RtxpSim(Simulator& sim, const Topology& topo, const NeighborGraph& graph,
          const HopCounts& rings, const CoordinateSet& coords, const RtxpConfig& cfg,
          const RadioParams& radio, ChannelModel model, std::uint64_t shadowing_seed);

  void inject(const Alarm& alarm); // schedules the alarm arrival
  void run(SimTime horizon);       // drives the simulator to the horizon

  RunMetrics metrics() const;
  const ChannelLog& channel() const { return channel_; }
  void retain_channel_log() { channel_.set_retain_all(true); }

  // first time each packet was successfully forwarded off its origin ring
  // (used by the one-cycle drain property checks)
  const std::vector<SimTime>& first_advance_us() const { return first_advance_; }

private:
  struct Packet {
    int id;
    int origin;
    SimTime created;
    SimTime arrived_at_holder = 0; // when the current holder got it
    int sends_this_cycle = 0;      // per-cycle retransmission budget
    int sends_at_holder = 0;       // attempts by the current holder (retx counting)
  };

  struct NodeState {
    std::deque<int> queue; // packet indices, FIFO
    bool lost_contention = false;
    bool pending_retx = false;
    bool in_ap = false;
  };

  struct Election {
    int winner;
    int packet;
    std::vector<int> decoders;
  };

  void begin_cycle(std::int64_t k);
  void begin_activity_period(SimTime base, int index);
  void run_period(SimTime base, int period);   // B + R + BF of one awake period
  void close_activity_period(SimTime base, int index);
  void resolve_contention(SimTime b_start, int cls, std::vector<int>& winners);
  void transmit_and_elect(SimTime r_start, int cls, const std::vector<int>& winners);
  void deliver_to_sink(int packet, SimTime at);
  void maybe_schedule_period_for(int node);

  bool node_has_eligible_head(int u) const;
  SimTime backoff_us(int u) const { return backoffs_.b_backoff_us[u]; }

  Simulator& sim_;
  const Topology& topo_;
  const NeighborGraph& graph_;
  const HopCounts& rings_;
  const CoordinateSet& coords_;
  BackoffAssignment backoffs_;
  RtxpConfig cfg_;
  RadioParams radio_;
  ChannelModel model_;
  ChannelLog channel_;
  std::mt19937_64 shadowing_rng_;

  std::vector<NodeState> nodes_;
  std::vector<Packet> packets_;
  std::vector<PacketRecord> records_;
  std::vector<SimTime> first_advance_;
  EnergyLedger energy_;
  SimTime horizon_ = 0;

  std::vector<int> participants_;       // nodes taking part in the current AP
  std::vector<Election> elections_;     // of the current awake period
  std::int64_t primary_ap_count_ = 0;   // APs in which every node took part
  std::vector<std::int64_t> extra_aps_; // per-node secondary AP participations
  std::vector<char> period_scheduled_;  // lazily scheduled periods of the current AP
  SimTime current_ap_base_ = -1;
  int current_ap_index_ = 0;
};

} // namespace rtxpsim
