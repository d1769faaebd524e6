#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <vector>

#include "rtxpsim/sim_time.hpp"
#include "rtxpsim/topology.hpp"

namespace rtxpsim {

enum class ChannelModel { free_space, log_normal };

ChannelModel parse_channel(const std::string& s);
const char* channel_name(ChannelModel m);

struct RadioPowers {
  double tx_mw = 60.0;
  double rx_mw = 60.0;
  double listen_mw = 60.0;
  double sleep_mw = 0.003;
};

struct RadioParams {
  double bitrate_bps = 500000.0;
  double range = 10.0;
  double path_loss_exponent = 2.0;
  double shadowing_sigma_db = 4.0;
  SimTime jamming_us = 200;
  int packet_bytes = 100;
  RadioPowers powers;

  SimTime data_airtime_us() const {
    return static_cast<SimTime>(packet_bytes * 8 * 1000000LL /
                                static_cast<long long>(bitrate_bps));
  }
};

enum class TxKind { jamming, data, strobe_train, response, ack };

struct Transmission {
  int sender = -1;
  SimTime start = 0;
  SimTime end = 0; // half-open [start, end)
  TxKind kind = TxKind::data;
  int tag = -1;           // protocol-specific (election id, packet id, ...)
  std::int64_t id = -1;   // assigned by the log
};

// Shared channel bookkeeping: every emission is registered here, carrier
// sensing and interference checks query it. Entries older than the horizon
// of interest are garbage collected; tests can retain the full log.
class ChannelLog {
public:
  explicit ChannelLog(const NeighborGraph* graph) : graph_(graph) {}

  void set_retain_all(bool retain) { retain_all_ = retain; }

  std::int64_t add(Transmission tx);

  // shortens a registered emission (a strobe train that found its forwarder
  // stops early); no-op if the entry is already gone
  void truncate(std::int64_t id, SimTime new_end);

  // busy iff a transmission from the node's 2-hop neighborhood overlaps the
  // window (the node's own emissions excluded). Detection reaches 2 hops.
  bool busy(int node, SimTime t1, SimTime t2) const;

  // true iff a transmission other than `sender` originates at a 1-hop
  // neighbor of `receiver` and overlaps [t1, t2). Reception is a 1-hop
  // property: only adjacent interferers corrupt a frame.
  bool interfered(int receiver, int sender, SimTime t1, SimTime t2) const;

  // drops entries ending before t (unless retaining for audits)
  void gc(SimTime before);

  const std::deque<Transmission>& entries() const { return live_; }
  const std::vector<Transmission>& retained() const { return all_; }

private:
  const NeighborGraph* graph_;
  std::deque<Transmission> live_;
  std::vector<Transmission> all_;
  std::int64_t next_id_ = 0;
  bool retain_all_ = false;
};

// Log-normal shadowing around the disk edge: received power (dB, relative)
// is -10*alpha*log10(d/d0) + X with X ~ N(0, sigma). The sensitivity is
// anchored so that delivery probability at d = R is exactly 1/2, which keeps
// the two channel models comparable.
bool shadowing_delivers(double distance, const RadioParams& params, std::mt19937_64& rng);

// Full reception decision for one (transmission, receiver) pair. The caller
// guarantees the receiver was listening for the whole interval.
bool reception_outcome(const Transmission& tx, int receiver, const Topology& topo,
                       ChannelModel model, const ChannelLog& log, const RadioParams& params,
                       std::mt19937_64& shadowing_rng);

enum class RadioState { tx, rx, listen, sleep };

// Per-node duration ledger; the four states partition simulated time, sleep
// being the remainder to the horizon.
class EnergyLedger {
public:
  explicit EnergyLedger(int nodes) : tx_us_(nodes, 0), rx_us_(nodes, 0), listen_us_(nodes, 0) {}

  void account(int node, RadioState state, SimTime duration_us);
  // re-labels already-accounted listen time (a node listening a phase that
  // turns into an actual tx/rx for part of it)
  void convert_listen(int node, RadioState to, SimTime duration_us);

  SimTime tx_us(int node) const { return tx_us_[node]; }
  SimTime rx_us(int node) const { return rx_us_[node]; }
  SimTime listen_us(int node) const { return listen_us_[node]; }
  SimTime awake_us(int node) const { return tx_us_[node] + rx_us_[node] + listen_us_[node]; }
  SimTime sleep_us(int node, SimTime horizon) const { return horizon - awake_us(node); }

  // millijoules over the run
  double energy_mj(int node, SimTime horizon, const RadioPowers& p) const;

  int nodes() const { return static_cast<int>(tx_us_.size()); }

private:
  std::vector<SimTime> tx_us_, rx_us_, listen_us_;
};

} // namespace rtxpsim
