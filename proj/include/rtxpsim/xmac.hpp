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

// Low-power-listening MAC with short strobed preambles and opportunistic
// gradient forwarding: any lower-ring node that hears a strobe may answer
// and become the forwarder of the packet.
struct XmacConfig {
  SimTime cycle_us = 807466; // one third of the reference RTXP duty cycle
  SimTime strobe_us = 500;
  SimTime response_slot_us = 500;
  SimTime response_us = 300;
  SimTime sample_us = 1600; // covers one full strobe whatever the wake phase
  SimTime data_us = 1600;
  SimTime ack_us = 300;
  SimTime cca_us = 200;
  SimTime train_margin_us = 2000;
  int max_retries = 5; // {0, 5, 500} in the comparison campaign
  int backoff_slots = 32;
  SimTime backoff_slot_us = 200;
  int backoff_doublings = 3;

  SimTime strobe_period_us() const { return strobe_us + response_slot_us; }
  SimTime train_span_us() const { return cycle_us + train_margin_us; }
};

class XmacSim {
public:
  XmacSim(Simulator& sim, const Topology& topo, const NeighborGraph& graph,
          const HopCounts& rings, const XmacConfig& cfg, const RadioParams& radio,
          ChannelModel model, std::uint64_t seed);

  void inject(const Alarm& alarm);
  void run(SimTime horizon);
  RunMetrics metrics() const;
  SimTime wctt_bound_us() const {
    return static_cast<SimTime>(rings_.max_ring + 1) * cfg_.cycle_us;
  }

  struct Counters {
    long long trains = 0;
    long long train_timeouts = 0;
    long long strobe_decode_failures = 0;
    long long response_collisions = 0;
    long long response_losses = 0;
    long long data_losses = 0;
    long long ack_losses = 0;
    long long cca_busy = 0;
    long long handoffs = 0;
  };
  const Counters& counters() const { return counters_; }

private:
  struct QueueEntry {
    int packet;
    int hops;
    int attempts; // failed attempts by this holder, against the retry budget
  };

  struct Train {
    int sender = -1;
    SimTime start = 0;
    SimTime end = 0;
    std::int64_t envelope_id = -1;
    bool done = false;
    std::vector<int> slot_responders;
    std::vector<int> engaged; // every node that answered at least once
    bool resolve_pending = false;
  };

  enum class SendState { idle, cca, training };

  void start_send(int node, int backoff_attempts);
  void cca_done(int node, int backoff_attempts);
  void begin_train(int node);
  void schedule_listener_wakes(int v, int train_idx);
  void strobe_heard(int v, int train_idx, SimTime wake_at, int strobe_idx);
  void try_respond(int v, int train_idx, int strobe_idx);
  void resolve_responses(int train_idx, int strobe_idx);
  void handshake_data(int train_idx, int responder);
  void train_over(int train_idx, SimTime actual_end);
  void finish_attempt(int node, bool success);
  void close_engagement(int v, SimTime at);
  void enqueue_copy(int node, QueueEntry entry, SimTime at);
  void account_train_energy(int sender, SimTime t0, SimTime actual_end);

  SimTime strobe_start(const Train& t, int i) const {
    return t.start + static_cast<SimTime>(i) * cfg_.strobe_period_us();
  }

  Simulator& sim_;
  const Topology& topo_;
  const NeighborGraph& graph_;
  const HopCounts& rings_;
  XmacConfig cfg_;
  RadioParams radio_;
  ChannelModel model_;
  ChannelLog channel_;
  std::mt19937_64 shadowing_rng_;
  std::mt19937_64 mac_rng_;

  std::vector<SimTime> phase_; // LPL wake phase per node
  std::vector<std::deque<QueueEntry>> queue_;
  // send pipeline state; a node stays LPL-receptive while idle, which
  // includes csma backoff waits between channel probes
  std::vector<SendState> state_;
  std::vector<int> awaiting_train_; // train a node answered, -1 if none
  std::vector<char> collided_;      // its answer collided on that train
  std::vector<SimTime> engage_wake_;
  std::vector<int> engage_serial_;
  std::vector<std::vector<char>> seen_; // duplicate suppression per node
  std::vector<Train> trains_;
  std::vector<PacketRecord> records_;
  EnergyLedger energy_;
  Counters counters_;
  SimTime horizon_ = 0;
};

} // namespace rtxpsim
