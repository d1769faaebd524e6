#include "rtxpsim/radio.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rtxpsim {

ChannelModel parse_channel(const std::string& s) {
  if (s == "free-space" || s == "free_space") return ChannelModel::free_space;
  if (s == "log-normal" || s == "log_normal") return ChannelModel::log_normal;
  throw std::runtime_error("unknown channel model: " + s);
}

const char* channel_name(ChannelModel m) {
  return m == ChannelModel::free_space ? "free-space" : "log-normal";
}

std::int64_t ChannelLog::add(Transmission tx) {
  tx.id = next_id_++;
  live_.push_back(tx);
  if (retain_all_) all_.push_back(tx);
  return tx.id;
}

void ChannelLog::truncate(std::int64_t id, SimTime new_end) {
  for (auto it = live_.rbegin(); it != live_.rend(); ++it) {
    if (it->id == id) {
      it->end = std::max(it->start, new_end);
      break;
    }
  }
  if (retain_all_) {
    for (auto it = all_.rbegin(); it != all_.rend(); ++it) {
      if (it->id == id) {
        it->end = std::max(it->start, new_end);
        break;
      }
    }
  }
}

static bool overlaps(const Transmission& tx, SimTime t1, SimTime t2) {
  return tx.start < t2 && t1 < tx.end;
}

bool ChannelLog::busy(int node, SimTime t1, SimTime t2) const {
  for (const Transmission& tx : live_) {
    if (tx.sender == node) continue;
    if (overlaps(tx, t1, t2) && graph_->within_two_hops(node, tx.sender)) return true;
  }
  return false;
}

bool ChannelLog::interfered(int receiver, int sender, SimTime t1, SimTime t2) const {
  for (const Transmission& tx : live_) {
    if (tx.sender == sender || tx.sender == receiver) continue;
    if (overlaps(tx, t1, t2) && graph_->adjacent(receiver, tx.sender)) return true;
  }
  return false;
}

void ChannelLog::gc(SimTime before) {
  while (!live_.empty() && live_.front().end <= before) live_.pop_front();
}

bool shadowing_delivers(double distance, const RadioParams& params, std::mt19937_64& rng) {
  std::normal_distribution<double> x(0.0, params.shadowing_sigma_db);
  const double draw = x(rng);
  // margin (dB) relative to the calibrated sensitivity at d = R
  const double margin =
      -10.0 * params.path_loss_exponent * std::log10(distance / params.range);
  return draw + margin >= 0.0;
}

bool reception_outcome(const Transmission& tx, int receiver, const Topology& topo,
                       ChannelModel model, const ChannelLog& log, const RadioParams& params,
                       std::mt19937_64& shadowing_rng) {
  const double d = topo.distance(tx.sender, receiver);
  if (d > params.range) return false;
  if (log.interfered(receiver, tx.sender, tx.start, tx.end)) return false;
  if (model == ChannelModel::log_normal) {
    return shadowing_delivers(d, params, shadowing_rng);
  }
  return true;
}

void EnergyLedger::account(int node, RadioState state, SimTime duration_us) {
  switch (state) {
    case RadioState::tx: tx_us_[node] += duration_us; break;
    case RadioState::rx: rx_us_[node] += duration_us; break;
    case RadioState::listen: listen_us_[node] += duration_us; break;
    case RadioState::sleep: break; // sleep is the remainder; nothing to record
  }
}

void EnergyLedger::convert_listen(int node, RadioState to, SimTime duration_us) {
  listen_us_[node] -= duration_us;
  account(node, to, duration_us);
}

double EnergyLedger::energy_mj(int node, SimTime horizon, const RadioPowers& p) const {
  // mW * us = nJ; 1e6 nJ = 1 mJ
  const double nj = p.tx_mw * static_cast<double>(tx_us_[node]) +
                    p.rx_mw * static_cast<double>(rx_us_[node]) +
                    p.listen_mw * static_cast<double>(listen_us_[node]) +
                    p.sleep_mw * static_cast<double>(sleep_us(node, horizon));
  return nj / 1e6;
}

} // namespace rtxpsim
