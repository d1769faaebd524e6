#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rtxpsim/sim_time.hpp"

namespace rtxpsim {

struct Alarm {
  int id = 0;
  int origin = 0;
  SimTime at = 0;
};

enum class PacketFate { delivered, dropped, in_flight };

struct PacketRecord {
  int id = 0;
  int origin = 0;
  SimTime created_us = 0;
  SimTime delivered_us = -1;
  int hops = 0;
  int retx_total = 0;
  PacketFate fate = PacketFate::in_flight;
  std::string drop_reason; // empty unless dropped

  SimTime delay_us() const { return delivered_us - created_us; }
};

struct NodeEnergy {
  SimTime tx_us = 0;
  SimTime rx_us = 0;
  SimTime listen_us = 0;
  SimTime sleep_us = 0;
  double energy_mj = 0;
};

// Everything one protocol run reports back to the harness.
struct RunMetrics {
  std::vector<PacketRecord> packets;
  std::vector<NodeEnergy> node_energy;
  SimTime horizon_us = 0;
  SimTime wctt_us = 0; // protocol-specific bound for this topology
  int nb_hop_max = 0;
  double avg_neighbors = 0;
  int frame_slots = 0;           // PEDAMACS only
  int coordinate_overflows = 0;  // RTXP only

  int delivered() const {
    int n = 0;
    for (const auto& p : packets) n += p.fate == PacketFate::delivered;
    return n;
  }
  int dropped() const {
    int n = 0;
    for (const auto& p : packets) n += p.fate == PacketFate::dropped;
    return n;
  }
  int in_flight() const {
    int n = 0;
    for (const auto& p : packets) n += p.fate == PacketFate::in_flight;
    return n;
  }
  SimTime max_delay_us() const {
    SimTime m = 0;
    for (const auto& p : packets) {
      if (p.fate == PacketFate::delivered && p.delay_us() > m) m = p.delay_us();
    }
    return m;
  }
  double mean_delay_us() const {
    double sum = 0;
    int n = 0;
    for (const auto& p : packets) {
      if (p.fate == PacketFate::delivered) {
        sum += static_cast<double>(p.delay_us());
        ++n;
      }
    }
    return n ? sum / n : 0.0;
  }
  double max_node_energy_mj() const {
    double m = 0;
    for (const auto& e : node_energy) m = e.energy_mj > m ? e.energy_mj : m;
    return m;
  }
};

} // namespace rtxpsim
