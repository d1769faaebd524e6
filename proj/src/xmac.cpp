#include "rtxpsim/xmac.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace rtxpsim {

XmacSim::XmacSim(Simulator& sim, const Topology& topo, const NeighborGraph& graph,
                 const HopCounts& rings, const XmacConfig& cfg, const RadioParams& radio,
                 ChannelModel model, std::uint64_t seed)
    : sim_(sim),
      topo_(topo),
      graph_(graph),
      rings_(rings),
      cfg_(cfg),
      radio_(radio),
      model_(model),
      channel_(&graph),
      shadowing_rng_(make_stream(seed, RngStreamId::shadowing)),
      mac_rng_(make_stream(seed, RngStreamId::csma_backoff)),
      phase_(topo.count(), 0),
      queue_(topo.count()),
      state_(topo.count(), SendState::idle),
      awaiting_train_(topo.count(), -1),
      collided_(topo.count(), 0),
      engage_wake_(topo.count(), 0),
      engage_serial_(topo.count(), 0),
      seen_(topo.count()),
      energy_(topo.count()) {
  std::uniform_int_distribution<SimTime> ph(0, cfg_.cycle_us - 1);
  for (int u = 0; u < topo_.count(); ++u) phase_[u] = ph(mac_rng_);
}

void XmacSim::inject(const Alarm& alarm) {
  if (alarm.origin == topo_.sink) throw std::invalid_argument("alarm origin is the sink");
  const int pidx = static_cast<int>(records_.size());
  PacketRecord rec;
  rec.id = alarm.id;
  rec.origin = alarm.origin;
  rec.created_us = alarm.at;
  records_.push_back(rec);
  for (auto& s : seen_) s.push_back(0);

  sim_.schedule_at(alarm.at, [this, pidx] {
    const int origin = records_[pidx].origin;
    seen_[origin][pidx] = 1;
    queue_[origin].push_back(QueueEntry{pidx, 0, 0});
    start_send(origin, 0);
  });
}

void XmacSim::run(SimTime horizon) {
  horizon_ = horizon;
  sim_.run_until(horizon);
}

void XmacSim::start_send(int node, int backoff_attempts) {
  // idempotent pump: every path that frees the node re-enters here
  if (queue_[node].empty()) return;
  if (state_[node] != SendState::idle || awaiting_train_[node] >= 0) return;
  state_[node] = SendState::cca;
  energy_.account(node, RadioState::listen, cfg_.cca_us);
  sim_.schedule_in(cfg_.cca_us, [this, node, backoff_attempts] {
    cca_done(node, backoff_attempts);
  });
}

void XmacSim::cca_done(int node, int backoff_attempts) {
  if (channel_.busy(node, sim_.now() - cfg_.cca_us, sim_.now())) {
    ++counters_.cca_busy;
    state_[node] = SendState::idle; // receptive again while backing off
    const int capped = std::min(backoff_attempts, cfg_.backoff_doublings);
    const SimTime window = static_cast<SimTime>(cfg_.backoff_slots) << capped;
    std::uniform_int_distribution<SimTime> draw(1, window);
    const SimTime wait = draw(mac_rng_) * cfg_.backoff_slot_us;
    sim_.schedule_in(wait, [this, node, backoff_attempts] {
      start_send(node, backoff_attempts + 1);
    });
  } else {
    state_[node] = SendState::training;
    begin_train(node);
  }
}

void XmacSim::begin_train(int node) {
  const int ti = static_cast<int>(trains_.size());
  Train t;
  t.sender = node;
  t.start = sim_.now();
  t.end = sim_.now() + cfg_.train_span_us();
  t.envelope_id =
      channel_.add(Transmission{node, t.start, t.end, TxKind::strobe_train, -1, -1});
  trains_.push_back(t);
  ++counters_.trains;

  for (int v : graph_.adj[node]) {
    if (rings_.ring[v] < rings_.ring[node]) schedule_listener_wakes(v, ti);
  }
  sim_.schedule_at(t.end, [this, ti] {
    if (!trains_[ti].done) train_over(ti, trains_[ti].end);
  });
}

void XmacSim::schedule_listener_wakes(int v, int train_idx) {
  const Train& t = trains_[train_idx];
  if (v == topo_.sink) {
    // the sink listens continuously: it hears the first strobe
    sim_.schedule_at(strobe_start(t, 0) + cfg_.strobe_us,
                     [this, v, train_idx, w = t.start] { strobe_heard(v, train_idx, w, 0); });
    return;
  }
  const SimTime period = cfg_.strobe_period_us();
  // earliest wake whose sample window still contains the first strobe
  const SimTime earliest = t.start - (cfg_.sample_us - cfg_.strobe_us) + 1;
  std::int64_t k = (earliest - phase_[v]) / cfg_.cycle_us;
  while (phase_[v] + k * cfg_.cycle_us < earliest) ++k;
  for (SimTime w = phase_[v] + k * cfg_.cycle_us; w < t.end; w += cfg_.cycle_us) {
    std::int64_t i = w <= t.start ? 0 : (w - t.start + period - 1) / period;
    const SimTime s = strobe_start(t, static_cast<int>(i));
    if (s + cfg_.strobe_us > t.end) continue;
    if (s + cfg_.strobe_us > w + cfg_.sample_us && w > t.start) continue;
    sim_.schedule_at(s + cfg_.strobe_us, [this, v, train_idx, w, i] {
      strobe_heard(v, train_idx, w, static_cast<int>(i));
    });
  }
}

void XmacSim::strobe_heard(int v, int train_idx, SimTime wake_at, int strobe_idx) {
  const Train& t = trains_[train_idx];
  if (t.done || state_[v] != SendState::idle || awaiting_train_[v] >= 0) return;
  // decode of the strobe itself: collisions with other traffic, shadowing
  const SimTime s = strobe_start(t, strobe_idx);
  if (channel_.interfered(v, t.sender, s, s + cfg_.strobe_us)) {
    ++counters_.strobe_decode_failures;
    return;
  }
  if (model_ == ChannelModel::log_normal &&
      !shadowing_delivers(topo_.distance(t.sender, v), radio_, shadowing_rng_)) {
    ++counters_.strobe_decode_failures;
    return;
  }
  awaiting_train_[v] = train_idx;
  collided_[v] = 0;
  engage_wake_[v] = wake_at;
  ++engage_serial_[v];
  trains_[train_idx].engaged.push_back(v);
  try_respond(v, train_idx, strobe_idx);
}

void XmacSim::try_respond(int v, int train_idx, int strobe_idx) {
  Train& t = trains_[train_idx];
  if (t.done || awaiting_train_[v] != train_idx) return;
  const SimTime s = strobe_start(t, strobe_idx);
  if (s + cfg_.strobe_period_us() > t.end) return; // train expires first

  if (collided_[v]) {
    // after a collision, re-answer later strobes with probability 1/2
    std::uniform_int_distribution<int> coin(0, 1);
    if (coin(mac_rng_)) {
      const int next = strobe_idx + 1;
      sim_.schedule_at(strobe_start(t, next) + cfg_.strobe_us,
                       [this, v, train_idx, next] { try_respond(v, train_idx, next); });
      return;
    }
  }

  const SimTime resp_at = s + cfg_.strobe_us;
  channel_.add(Transmission{v, resp_at, resp_at + cfg_.response_us, TxKind::response, -1, -1});
  energy_.account(v, RadioState::tx, cfg_.response_us);
  t.slot_responders.push_back(v);
  if (!t.resolve_pending) {
    t.resolve_pending = true;
    sim_.schedule_at(s + cfg_.strobe_period_us(), [this, train_idx, strobe_idx] {
      resolve_responses(train_idx, strobe_idx);
    });
  }
  // if no data follows (lost response, collision, lost data), answer again
  const int again = strobe_idx + 3;
  const int serial = engage_serial_[v];
  sim_.schedule_at(strobe_start(t, again) + cfg_.strobe_us, [this, v, train_idx, again, serial] {
    if (engage_serial_[v] == serial && awaiting_train_[v] == train_idx) {
      try_respond(v, train_idx, again);
    }
  });
}

void XmacSim::resolve_responses(int train_idx, int strobe_idx) {
  Train& t = trains_[train_idx];
  t.resolve_pending = false;
  std::vector<int> responders = std::move(t.slot_responders);
  t.slot_responders.clear();
  if (t.done || responders.empty()) return;

  if (responders.size() > 1) {
    ++counters_.response_collisions;
    for (int v : responders) collided_[v] = 1;
    return; // sender keeps strobing
  }
  const int v = responders.front();
  const SimTime s = strobe_start(t, strobe_idx);
  const SimTime resp_at = s + cfg_.strobe_us;
  if (channel_.interfered(t.sender, v, resp_at, resp_at + cfg_.response_us)) {
    ++counters_.response_losses;
    return;
  }
  if (model_ == ChannelModel::log_normal &&
      !shadowing_delivers(topo_.distance(t.sender, v), radio_, shadowing_rng_)) {
    ++counters_.response_losses;
    return;
  }
  handshake_data(train_idx, v);
}

void XmacSim::handshake_data(int train_idx, int responder) {
  Train& t = trains_[train_idx];
  t.done = true;
  const SimTime now = sim_.now();
  channel_.truncate(t.envelope_id, now);
  account_train_energy(t.sender, t.start, now);
  for (int v : t.engaged) {
    if (v != responder && awaiting_train_[v] == train_idx) close_engagement(v, now);
  }

  const int sender = t.sender;
  channel_.add(Transmission{sender, now, now + cfg_.data_us, TxKind::data, -1, -1});
  energy_.account(sender, RadioState::tx, cfg_.data_us);

  sim_.schedule_at(now + cfg_.data_us, [this, responder, sender, now] {
    const SimTime data_end = sim_.now();
    const Transmission data{sender, now, data_end, TxKind::data, -1, -1};
    const bool data_ok =
        reception_outcome(data, responder, topo_, model_, channel_, radio_, shadowing_rng_);
    if (!data_ok) {
      ++counters_.data_losses;
      // responder never sees the data: it falls back asleep, the sender
      // burns a retry
      close_engagement(responder, data_end);
      finish_attempt(sender, false);
      return;
    }
    energy_.account(responder, RadioState::rx, cfg_.data_us);
    QueueEntry entry = queue_[sender].front();
    ++entry.hops;
    entry.attempts = 0;
    enqueue_copy(responder, entry, data_end);
    close_engagement(responder, data_end + cfg_.ack_us);

    channel_.add(
        Transmission{responder, data_end, data_end + cfg_.ack_us, TxKind::ack, -1, -1});
    energy_.account(responder, RadioState::tx, cfg_.ack_us);
    sim_.schedule_at(data_end + cfg_.ack_us, [this, responder, sender, data_end] {
      const Transmission ack{responder, data_end, data_end + cfg_.ack_us, TxKind::ack, -1, -1};
      bool ack_ok =
          !channel_.interfered(sender, responder, ack.start, ack.end);
      if (ack_ok && model_ == ChannelModel::log_normal) {
        ack_ok = shadowing_delivers(topo_.distance(responder, sender), radio_, shadowing_rng_);
      }
      if (ack_ok) {
        energy_.account(sender, RadioState::rx, cfg_.ack_us);
        ++counters_.handoffs;
      } else {
        energy_.account(sender, RadioState::listen, cfg_.ack_us);
        ++counters_.ack_losses;
      }
      finish_attempt(sender, ack_ok);
    });
  });
}

void XmacSim::train_over(int train_idx, SimTime actual_end) {
  ++counters_.train_timeouts;
  Train& t = trains_[train_idx];
  t.done = true;
  account_train_energy(t.sender, t.start, actual_end);
  for (int v : t.engaged) {
    if (awaiting_train_[v] == train_idx) close_engagement(v, actual_end);
  }
  finish_attempt(t.sender, false);
}

void XmacSim::finish_attempt(int node, bool success) {
  state_[node] = SendState::idle;
  if (queue_[node].empty()) return;
  if (success) {
    queue_[node].pop_front();
    start_send(node, 0);
    return;
  }
  QueueEntry& e = queue_[node].front();
  ++e.attempts;
  ++records_[e.packet].retx_total;
  if (e.attempts > cfg_.max_retries) {
    PacketRecord& rec = records_[e.packet];
    if (rec.fate == PacketFate::in_flight) {
      rec.fate = PacketFate::dropped;
      rec.drop_reason = "retries";
      rec.hops = e.hops;
    }
    queue_[node].pop_front();
    start_send(node, 0);
    return;
  }
  // random backoff before the retry; immediate re-probing makes neighboring
  // retriers race each other's carrier sense and strobe concurrently
  const int capped = std::min(e.attempts, cfg_.backoff_doublings);
  const SimTime window = static_cast<SimTime>(cfg_.backoff_slots) << capped;
  std::uniform_int_distribution<SimTime> draw(1, window);
  sim_.schedule_in(draw(mac_rng_) * cfg_.backoff_slot_us,
                   [this, node] { start_send(node, 0); });
}

void XmacSim::close_engagement(int v, SimTime at) {
  if (awaiting_train_[v] < 0) return;
  if (v != topo_.sink) {
    const SimTime ext = at - (engage_wake_[v] + cfg_.sample_us);
    if (ext > 0) energy_.account(v, RadioState::listen, ext);
  }
  awaiting_train_[v] = -1;
  collided_[v] = 0;
  ++engage_serial_[v];
  // resume a send pipeline that deferred to the receive engagement
  if (!queue_[v].empty()) {
    const SimTime resume = std::max(at, sim_.now());
    sim_.schedule_at(resume, [this, v] { start_send(v, 0); });
  }
}

void XmacSim::enqueue_copy(int node, QueueEntry entry, SimTime at) {
  PacketRecord& rec = records_[entry.packet];
  if (node == topo_.sink) {
    if (rec.fate != PacketFate::delivered) {
      rec.fate = PacketFate::delivered;
      rec.delivered_us = at;
      rec.hops = entry.hops;
      rec.drop_reason.clear();
    }
    return;
  }
  if (seen_[node][entry.packet]) return; // duplicate copy, re-acked but not relayed
  seen_[node][entry.packet] = 1;
  queue_[node].push_back(entry);
  sim_.schedule_at(at, [this, node] { start_send(node, 0); });
}

void XmacSim::account_train_energy(int sender, SimTime t0, SimTime actual_end) {
  const SimTime d = actual_end - t0;
  if (d <= 0) return;
  const SimTime period = cfg_.strobe_period_us();
  const SimTime full = d / period;
  const SimTime rem = d % period;
  const SimTime tx = full * cfg_.strobe_us + std::min(rem, cfg_.strobe_us);
  energy_.account(sender, RadioState::tx, tx);
  energy_.account(sender, RadioState::listen, d - tx);
}

RunMetrics XmacSim::metrics() const {
  RunMetrics m;
  m.packets = records_;
  m.horizon_us = horizon_;
  m.nb_hop_max = rings_.max_ring;
  m.wctt_us = wctt_bound_us();
  m.avg_neighbors = graph_.average_degree();

  m.node_energy.resize(topo_.count());
  for (int u = 0; u < topo_.count(); ++u) {
    NodeEnergy& ne = m.node_energy[u];
    ne.tx_us = energy_.tx_us(u);
    ne.rx_us = energy_.rx_us(u);
    if (u == topo_.sink) {
      ne.listen_us = horizon_ - ne.tx_us - ne.rx_us; // always-on collection point
    } else {
      const std::int64_t wakes = (horizon_ - 1 - phase_[u]) / cfg_.cycle_us + 1;
      ne.listen_us = energy_.listen_us(u) + wakes * cfg_.sample_us;
    }
    ne.sleep_us = horizon_ - ne.tx_us - ne.rx_us - ne.listen_us;
    const RadioPowers& p = radio_.powers;
    ne.energy_mj = (p.tx_mw * static_cast<double>(ne.tx_us) +
                    p.rx_mw * static_cast<double>(ne.rx_us) +
                    p.listen_mw * static_cast<double>(ne.listen_us) +
                    p.sleep_mw * static_cast<double>(ne.sleep_us)) /
                   1e6;
  }
  return m;
}

} // namespace rtxpsim
