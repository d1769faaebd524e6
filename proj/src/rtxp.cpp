#include "rtxpsim/rtxp.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace rtxpsim {

namespace {
// sending class of each awake period; this order is what lets a packet
// descend rings 3j+3 -> 3j+2 -> 3j+1 -> 3j inside one activity period
constexpr int kSendingClass[3] = {0, 2, 1};
} // namespace

int sending_period_of_class(int cls) {
  for (int p = 0; p < 3; ++p) {
    if (kSendingClass[p] == cls) return p;
  }
  return -1;
}

std::vector<PhaseWindow> phase_timetable(int ring, const RtxpConfig& cfg) {
  if (ring < 1) throw std::invalid_argument("phase_timetable: ring must be >= 1");
  const int cls = ring % 3;
  const SimTime period_len = cfg.d_b() + cfg.d_r() + cfg.d_bf();
  const int p_send = sending_period_of_class(cls);
  const int p_recv = sending_period_of_class((cls + 1) % 3);

  const SimTime send_base = p_send * period_len;
  const SimTime recv_base = p_recv * period_len;
  std::vector<PhaseWindow> t;
  t.push_back({RtxpPhase::contend, send_base, send_base + cfg.d_b()});
  t.push_back({RtxpPhase::transmit, send_base + cfg.d_b(), send_base + cfg.d_b() + cfg.d_r()});
  t.push_back({RtxpPhase::receive, recv_base + cfg.d_b(), recv_base + cfg.d_b() + cfg.d_r()});
  t.push_back({RtxpPhase::forward_contend, recv_base + cfg.d_b() + cfg.d_r(),
               recv_base + period_len});
  t.push_back({RtxpPhase::l_slot, 3 * period_len, 3 * period_len + cfg.d_l()});
  std::sort(t.begin(), t.end(),
            [](const PhaseWindow& a, const PhaseWindow& b) { return a.start_us < b.start_us; });
  return t;
}

RtxpSim::RtxpSim(Simulator& sim, const Topology& topo, const NeighborGraph& graph,
                 const HopCounts& rings, const CoordinateSet& coords, const RtxpConfig& cfg,
                 const RadioParams& radio, ChannelModel model, std::uint64_t shadowing_seed)
    : sim_(sim),
      topo_(topo),
      graph_(graph),
      rings_(rings),
      coords_(coords),
      backoffs_(make_backoffs(coords)),
      cfg_(cfg),
      radio_(radio),
      model_(model),
      channel_(&graph),
      shadowing_rng_(make_stream(shadowing_seed, RngStreamId::shadowing)),
      nodes_(topo.count()),
      energy_(topo.count()),
      extra_aps_(topo.count(), 0),
      period_scheduled_(3, 0) {
  assert(static_cast<SimTime>(cfg_.capacity()) * cfg_.d_activity_period() <= cfg_.cycle_us());
}

bool RtxpSim::node_has_eligible_head(int u) const {
  const NodeState& st = nodes_[u];
  if (st.queue.empty()) return false;
  const Packet& pk = packets_[st.queue.front()];
  return pk.sends_this_cycle <= cfg_.max_retx_per_cycle;
}

void RtxpSim::inject(const Alarm& alarm) {
  if (alarm.origin == topo_.sink) throw std::invalid_argument("alarm origin is the sink");
  const int pidx = static_cast<int>(packets_.size());
  packets_.push_back(Packet{alarm.id, alarm.origin, alarm.at});
  PacketRecord rec;
  rec.id = alarm.id;
  rec.origin = alarm.origin;
  rec.created_us = alarm.at;
  records_.push_back(rec);
  first_advance_.push_back(-1);

  sim_.schedule_at(alarm.at, [this, pidx] {
    const int origin = packets_[pidx].origin;
    packets_[pidx].arrived_at_holder = sim_.now();
    nodes_[origin].queue.push_back(pidx);
    // A source buffers a fresh alarm until its next B phase; if that phase
    // still lies ahead in the running activity period it contends there.
    if (nodes_[origin].in_ap && current_ap_base_ >= 0) {
      const int period = sending_period_of_class(rings_.ring[origin] % 3);
      const SimTime period_len = cfg_.d_b() + cfg_.d_r() + cfg_.d_bf();
      const SimTime b_start = current_ap_base_ + period * period_len;
      if (b_start > sim_.now() && !period_scheduled_[period]) {
        period_scheduled_[period] = 1;
        const SimTime base = current_ap_base_;
        sim_.schedule_at(b_start, [this, base, period] { run_period(base, period); });
      }
    }
  });
}

void RtxpSim::run(SimTime horizon) {
  horizon_ = horizon;
  begin_cycle(0);
  sim_.run_until(horizon);
}

void RtxpSim::begin_cycle(std::int64_t k) {
  const SimTime base = k * cfg_.cycle_us();
  if (base >= horizon_) return;
  sim_.schedule_at(base, [this, k, base] {
    for (Packet& pk : packets_) pk.sends_this_cycle = 0;
    participants_.clear();
    for (int u = 0; u < topo_.count(); ++u) participants_.push_back(u);
    begin_activity_period(base, 0);
  });
  begin_cycle(k + 1);
}

void RtxpSim::begin_activity_period(SimTime base, int index) {
  current_ap_base_ = base;
  current_ap_index_ = index;
  for (int u : participants_) {
    nodes_[u].in_ap = true;
    nodes_[u].lost_contention = false;
    nodes_[u].pending_retx = false;
  }
  if (index == 0) {
    ++primary_ap_count_;
  } else {
    for (int u : participants_) ++extra_aps_[u];
  }

  const SimTime period_len = cfg_.d_b() + cfg_.d_r() + cfg_.d_bf();
  std::fill(period_scheduled_.begin(), period_scheduled_.end(), 0);
  for (int p = 0; p < 3; ++p) {
    const int cls = kSendingClass[p];
    bool any = false;
    for (int u : participants_) {
      if (rings_.ring[u] % 3 == cls && rings_.ring[u] > 0 && node_has_eligible_head(u)) {
        any = true;
        break;
      }
    }
    if (any) {
      period_scheduled_[p] = 1;
      sim_.schedule_at(base + p * period_len, [this, base, p] { run_period(base, p); });
    }
  }
  const SimTime l_start = base + cfg_.d_activity_period() - cfg_.d_l();
  sim_.schedule_at(l_start, [this, base, index] { close_activity_period(base, index); });
}

void RtxpSim::run_period(SimTime base, int period) {
  const SimTime period_len = cfg_.d_b() + cfg_.d_r() + cfg_.d_bf();
  const SimTime b_start = base + period * period_len;
  const int cls = kSendingClass[period];

  std::vector<int> winners;
  resolve_contention(b_start, cls, winners);
  if (!winners.empty()) transmit_and_elect(b_start + cfg_.d_b(), cls, winners);
}

void RtxpSim::resolve_contention(SimTime b_start, int cls, std::vector<int>& winners) {
  std::vector<int> contenders;
  for (int u : participants_) {
    if (rings_.ring[u] > 0 && rings_.ring[u] % 3 == cls && nodes_[u].in_ap &&
        node_has_eligible_head(u)) {
      contenders.push_back(u);
    }
  }
  if (contenders.empty()) return;

  // ascending backoff; a contender jams unless a strictly earlier jam from
  // its 2-hop neighborhood already reserved the channel
  std::sort(contenders.begin(), contenders.end(), [&](int a, int b) {
    return backoff_us(a) != backoff_us(b) ? backoff_us(a) < backoff_us(b) : a < b;
  });
  for (int u : contenders) {
    energy_.account(u, RadioState::listen, cfg_.d_b());
    bool suppressed = false;
    for (int w : winners) {
      if (backoff_us(w) < backoff_us(u) && graph_.within_two_hops(u, w)) {
        suppressed = true;
        break;
      }
    }
    if (suppressed) {
      nodes_[u].lost_contention = true;
    } else {
      winners.push_back(u);
      const SimTime jam_at = b_start + backoff_us(u);
      channel_.add(Transmission{u, jam_at, jam_at + cfg_.jamming_us, TxKind::jamming, -1});
      energy_.convert_listen(u, RadioState::tx, cfg_.jamming_us);
    }
  }
}

void RtxpSim::transmit_and_elect(SimTime r_start, int cls, const std::vector<int>& winners) {
  (void)cls;
  const SimTime r_end = r_start + cfg_.d_r();
  const SimTime bf_start = r_end;

  elections_.clear();
  for (int w : winners) {
    const int pidx = nodes_[w].queue.front();
    Packet& pk = packets_[pidx];
    ++pk.sends_this_cycle;
    ++pk.sends_at_holder;
    if (pk.sends_at_holder > 1) ++records_[pidx].retx_total;
    channel_.add(Transmission{w, r_start, r_end, TxKind::data, pk.id});
    energy_.account(w, RadioState::tx, cfg_.d_r());
    energy_.account(w, RadioState::listen, cfg_.d_bf()); // acknowledgment window
    elections_.push_back(Election{w, pidx, {}});
  }

  // receptions once every concurrent transmission is on the channel
  for (Election& e : elections_) {
    const Transmission tx{e.winner, r_start, r_end, TxKind::data, packets_[e.packet].id};
    for (int v : graph_.adj[e.winner]) {
      if (rings_.ring[v] != rings_.ring[e.winner] - 1) continue;
      if (!nodes_[v].in_ap) continue;
      if (reception_outcome(tx, v, topo_, model_, channel_, radio_, shadowing_rng_)) {
        e.decoders.push_back(v);
        energy_.convert_listen(v, RadioState::rx, cfg_.d_r());
      }
    }
  }

  for (Election& e : elections_) {
    NodeState& sender = nodes_[e.winner];
    Packet& pk = packets_[e.packet];
    if (e.decoders.empty()) {
      // nobody decoded: no forward jam, no ack; retransmission path
      if (!cfg_.retransmissions) {
        records_[e.packet].fate = PacketFate::dropped;
        records_[e.packet].drop_reason = "unacked";
        sender.queue.pop_front();
      } else if (pk.sends_this_cycle <= cfg_.max_retx_per_cycle) {
        sender.pending_retx = true;
      }
      // else: per-cycle budget exhausted, resumes next duty cycle
      continue;
    }
    // forwarder election: minimum coordinate wins; the sink carries
    // coordinate zero and therefore always claims packets it decodes
    int f = e.decoders.front();
    for (int v : e.decoders) {
      const SimTime bv = backoffs_.bf_backoff_us[v];
      const SimTime bf = backoffs_.bf_backoff_us[f];
      if (bv != bf ? bv < bf : v < f) f = v;
    }
    const SimTime jam_at = bf_start + backoffs_.bf_backoff_us[f];
    channel_.add(Transmission{f, jam_at, jam_at + cfg_.jamming_us, TxKind::jamming, pk.id});
    energy_.convert_listen(f, RadioState::tx, cfg_.jamming_us);

    // the jam is the acknowledgment; losers of the BF election discard
    sender.queue.pop_front();
    ++records_[e.packet].hops;
    if (first_advance_[e.packet] < 0) first_advance_[e.packet] = jam_at + cfg_.jamming_us;
    if (f == topo_.sink) {
      deliver_to_sink(e.packet, jam_at + cfg_.jamming_us);
    } else {
      pk.sends_this_cycle = 0; // fresh holder, fresh per-cycle budget
      pk.sends_at_holder = 0;
      pk.arrived_at_holder = jam_at + cfg_.jamming_us;
      nodes_[f].queue.push_back(e.packet);
      maybe_schedule_period_for(f);
    }
  }
  elections_.clear();
}

void RtxpSim::deliver_to_sink(int packet, SimTime at) {
  PacketRecord& rec = records_[packet];
  rec.fate = PacketFate::delivered;
  rec.delivered_us = at;
}

void RtxpSim::close_activity_period(SimTime base, int index) {
  const SimTime l_start = base + cfg_.d_activity_period() - cfg_.d_l();

  // a node claims a secondary period when it still holds a packet that made
  // no hop during this activity period: a lost contention, an unacknowledged
  // send, or backlog behind the head. Packets that arrived here during this
  // period made their hop already and wait quietly.
  std::vector<int> jammers;
  for (int u : participants_) {
    const NodeState& st = nodes_[u];
    bool stale_head = false;
    if (!st.queue.empty() && node_has_eligible_head(u)) {
      stale_head = packets_[st.queue.front()].arrived_at_holder < base;
    }
    if (st.lost_contention || st.pending_retx || stale_head) jammers.push_back(u);
  }
  for (int u : jammers) {
    channel_.add(Transmission{u, l_start, l_start + cfg_.d_l(), TxKind::jamming, -1});
    energy_.convert_listen(u, RadioState::tx, cfg_.d_l());
  }

  std::vector<int> next;
  if (!jammers.empty() && index + 1 <= cfg_.capacity() - 1) {
    for (int u : participants_) {
      bool senses = false;
      for (int j : jammers) {
        if (j == u || graph_.within_two_hops(u, j)) {
          senses = true;
          break;
        }
      }
      if (senses) next.push_back(u);
    }
    // the sink is always available to absorb packets, jam audible or not
    if (!next.empty() &&
        std::find(next.begin(), next.end(), topo_.sink) == next.end()) {
      next.push_back(topo_.sink);
    }
  }

  for (int u : participants_) {
    nodes_[u].in_ap = false;
    nodes_[u].lost_contention = false;
    nodes_[u].pending_retx = false;
  }
  current_ap_base_ = -1;
  channel_.gc(base - cfg_.d_activity_period());

  if (!next.empty()) {
    participants_ = std::move(next);
    const SimTime next_base = base + cfg_.d_activity_period();
    sim_.schedule_at(next_base, [this, next_base, index] {
      begin_activity_period(next_base, index + 1);
    });
  }
}

void RtxpSim::maybe_schedule_period_for(int node) {
  if (!nodes_[node].in_ap || current_ap_base_ < 0) return;
  const int period = sending_period_of_class(rings_.ring[node] % 3);
  const SimTime period_len = cfg_.d_b() + cfg_.d_r() + cfg_.d_bf();
  const SimTime b_start = current_ap_base_ + period * period_len;
  if (b_start > sim_.now() && !period_scheduled_[period]) {
    period_scheduled_[period] = 1;
    const SimTime base = current_ap_base_;
    sim_.schedule_at(b_start, [this, base, period] { run_period(base, period); });
  }
}

RunMetrics RtxpSim::metrics() const {
  RunMetrics m;
  m.packets = records_;
  m.horizon_us = horizon_;
  m.nb_hop_max = rings_.max_ring;
  m.wctt_us = cfg_.wctt_us(rings_.max_ring);
  m.avg_neighbors = graph_.average_degree();
  m.coordinate_overflows = coords_.overflow_warnings;

  const SimTime template_listen = cfg_.d_r() + cfg_.d_bf() + cfg_.d_l();
  m.node_energy.resize(topo_.count());
  for (int u = 0; u < topo_.count(); ++u) {
    const SimTime aps = primary_ap_count_ + extra_aps_[u];
    NodeEnergy& ne = m.node_energy[u];
    ne.tx_us = energy_.tx_us(u);
    ne.rx_us = energy_.rx_us(u);
    ne.listen_us = energy_.listen_us(u) + aps * template_listen;
    const SimTime awake = ne.tx_us + ne.rx_us + ne.listen_us;
    ne.sleep_us = horizon_ - awake;
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
