#pragma once

#include "rtxpsim/sim_time.hpp"

namespace rtxpsim {

// RTXP timing knobs and the derived durations. Defaults follow the reference
// parameter set: 200 us jamming code, 10 ms contention window (10.2 ms B/BF
// phases), 1.6 ms data slot (100 bytes at 500 kbps), 1% duty cycle.
struct RtxpConfig {
  SimTime jamming_us = 200;
  SimTime max_backoff_us = 10000;
  SimTime data_slot_us = 1600;
  int dc_percent = 1;            // duty-cycle ratio in percent, (0, 100]
  int max_retx_per_cycle = 5;
  bool retransmissions = true;

  SimTime d_b() const { return max_backoff_us + jamming_us; }
  SimTime d_bf() const { return d_b(); }
  SimTime d_l() const { return jamming_us; }
  SimTime d_r() const { return data_slot_us; }
  // one awake period as seen by a single node: B + BF + 2 R + L
  SimTime d_awake() const { return d_b() + d_bf() + 2 * d_r() + d_l(); }
  SimTime d_sleep() const {
    // d_awake * (1/DC - 1), exact in integer us via the percent ratio
    const long long num = static_cast<long long>(d_awake()) * (100 - dc_percent);
    return static_cast<SimTime>((num + dc_percent / 2) / dc_percent);
  }
  SimTime d_activity_period() const { return 3 * (d_b() + d_bf() + d_r()) + d_l(); }
  // one duty cycle: an activity period and the sleep that follows it
  SimTime cycle_us() const { return d_activity_period() + d_sleep(); }
  // packets servable per 2-hop neighborhood per duty cycle
  int capacity() const { return static_cast<int>(cycle_us() / d_activity_period()); }
  SimTime wctt_us(int nb_hop_max) const {
    return static_cast<SimTime>(nb_hop_max + 1) * cycle_us();
  }
};

} // namespace rtxpsim
