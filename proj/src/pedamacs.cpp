#include "rtxpsim/pedamacs.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <stdexcept>

namespace rtxpsim {

TreeRouting build_tree(const NeighborGraph& graph, const HopCounts& rings) {
  const int n = graph.count();
  TreeRouting tree;
  tree.parent.assign(n, -1);
  tree.depth = rings.ring;
  for (int u = 0; u < n; ++u) {
    if (rings.ring[u] == 0) continue;
    int best = -1;
    for (int v : graph.adj[u]) {
      if (rings.ring[v] == rings.ring[u] - 1 && (best < 0 || v < best)) best = v;
    }
    if (best < 0) throw std::logic_error("build_tree: node without lower-ring neighbor");
    tree.parent[u] = best;
  }
  return tree;
}

namespace {

bool sender_conflict(const NeighborGraph& g, const TreeRouting& tree, int a, int b) {
  if (g.within_two_hops(a, b)) return true;
  const int pa = tree.parent[a];
  const int pb = tree.parent[b];
  if (pb >= 0 && a != pb && g.within_two_hops(a, pb)) return true;
  if (pa >= 0 && b != pa && g.within_two_hops(b, pa)) return true;
  return false;
}

// smallest alarm-commensurate frame length >= built: a divisor of the
// 1-second slot count, or 2x/4x it, falling back to a plain multiple
int padded_length(int built, SimTime t_slot_us, SimTime alarm_base_us) {
  const int base = static_cast<int>(alarm_base_us / t_slot_us);
  std::vector<int> options;
  for (int d = 1; d <= base; ++d) {
    if (base % d == 0) options.push_back(d);
  }
  options.push_back(base * 2);
  options.push_back(base * 4);
  for (int len : options) {
    if (len >= built) return len;
  }
  const int unit = base * 4;
  return (built + unit - 1) / unit * unit;
}

} // namespace

TdmaSchedule compute_schedule(const NeighborGraph& graph, const TreeRouting& tree,
                              SimTime t_slot_us, SimTime alarm_base_us, ScheduleMode mode) {
  const int n = graph.count();
  TdmaSchedule sched;
  sched.t_slot_us = t_slot_us;

  int max_depth = 0;
  for (int u = 0; u < n; ++u) max_depth = std::max(max_depth, tree.depth[u]);

  if (mode == ScheduleMode::express) {
    // one deepest-to-shallowest sweep, one slot per node, blocks packed:
    // every parent slot lies later in the frame, so a packet sent in any
    // pass of the cyclic frame reaches the sink within that same pass
    for (int d = max_depth; d >= 1; --d) {
      std::vector<std::vector<int>> block;
      for (int u = 0; u < n; ++u) {
        if (tree.depth[u] != d) continue;
        bool placed = false;
        for (auto& slot : block) {
          bool ok = true;
          for (int v : slot) {
            if (sender_conflict(graph, tree, u, v)) {
              ok = false;
              break;
            }
          }
          if (ok) {
            slot.push_back(u);
            placed = true;
            break;
          }
        }
        if (!placed) block.push_back({u});
      }
      for (auto& slot : block) sched.senders_per_slot.push_back(std::move(slot));
    }
  } else {
    // full-generation drain: one packet per node, slot-by-slot greedy over
    // the current holders (deepest first) until everything reaches the sink
    std::vector<int> queue(n, 1);
    queue[0] = 0;
    int remaining = 0;
    for (int u = 0; u < n; ++u) {
      if (tree.depth[u] == 0) queue[u] = 0;
      remaining += queue[u];
    }
    std::vector<int> order;
    for (int u = 0; u < n; ++u) {
      if (tree.depth[u] > 0) order.push_back(u);
    }
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return tree.depth[a] != tree.depth[b] ? tree.depth[a] > tree.depth[b] : a < b;
    });

    while (remaining > 0) {
      std::vector<int> slot;
      std::vector<int> arrivals;
      for (int u : order) {
        if (queue[u] == 0) continue;
        bool ok = true;
        for (int v : slot) {
          if (sender_conflict(graph, tree, u, v)) {
            ok = false;
            break;
          }
        }
        if (!ok) continue;
        slot.push_back(u);
        --queue[u];
        if (tree.depth[tree.parent[u]] > 0) {
          arrivals.push_back(tree.parent[u]);
        } else {
          --remaining;
        }
      }
      for (int p : arrivals) ++queue[p]; // visible from the next slot on
      sched.senders_per_slot.push_back(std::move(slot));
    }
  }

  sched.built_slots = static_cast<int>(sched.senders_per_slot.size());
  sched.frame_slots = padded_length(sched.built_slots, t_slot_us, alarm_base_us);
  sched.senders_per_slot.resize(sched.frame_slots);

  sched.owned_slots.assign(n, {});
  for (int s = 0; s < sched.frame_slots; ++s) {
    for (int u : sched.senders_per_slot[s]) sched.owned_slots[u].push_back(s);
  }
  return sched;
}

ScheduleCheck check_schedule(const NeighborGraph& graph, const TreeRouting& tree,
                             const TdmaSchedule& schedule) {
  const int n = graph.count();
  ScheduleCheck out;
  out.frame_slots = schedule.frame_slots;
  out.frame_bound = 3 * (n - 1);
  out.within_bound = schedule.frame_slots <= out.frame_bound;
  out.tree_consistent = true;

  // independent hop distances, straight BFS per node
  std::vector<std::vector<int>> dist(n, std::vector<int>(n, -1));
  for (int s = 0; s < n; ++s) {
    dist[s][s] = 0;
    std::deque<int> q{s};
    while (!q.empty()) {
      const int u = q.front();
      q.pop_front();
      for (int v : graph.adj[u]) {
        if (dist[s][v] < 0) {
          dist[s][v] = dist[s][u] + 1;
          q.push_back(v);
        }
      }
    }
  }
  auto close = [&](int a, int b) { return a != b && dist[a][b] >= 0 && dist[a][b] <= 2; };

  for (const auto& slot : schedule.senders_per_slot) {
    for (int u : slot) {
      if (tree.parent[u] < 0 || dist[u][tree.parent[u]] != 1) out.tree_consistent = false;
    }
    for (std::size_t i = 0; i < slot.size(); ++i) {
      for (std::size_t j = i + 1; j < slot.size(); ++j) {
        const int a = slot[i];
        const int b = slot[j];
        const int pa = tree.parent[a];
        const int pb = tree.parent[b];
        if (close(a, b) || (pb >= 0 && close(a, pb)) || (pa >= 0 && close(b, pa))) {
          ++out.conflicts;
        }
      }
    }
  }
  return out;
}

PedamacsSim::PedamacsSim(Simulator& sim, const Topology& topo, const NeighborGraph& graph,
                         const TreeRouting& tree, const TdmaSchedule& schedule,
                         const RadioParams& radio, ChannelModel model,
                         std::uint64_t shadowing_seed)
    : sim_(sim),
      topo_(topo),
      graph_(graph),
      tree_(tree),
      schedule_(schedule),
      radio_(radio),
      model_(model),
      channel_(&graph),
      shadowing_rng_(make_stream(shadowing_seed, RngStreamId::shadowing)),
      queues_(topo.count()),
      armed_(topo.count(), 0),
      energy_(topo.count()) {}

void PedamacsSim::inject(const Alarm& alarm) {
  if (alarm.origin == topo_.sink) throw std::invalid_argument("alarm origin is the sink");
  const int pidx = static_cast<int>(records_.size());
  PacketRecord rec;
  rec.id = alarm.id;
  rec.origin = alarm.origin;
  rec.created_us = alarm.at;
  records_.push_back(rec);
  sim_.schedule_at(alarm.at, [this, pidx] {
    const int origin = records_[pidx].origin;
    queues_[origin].push_back(pidx);
    arm_next_slot(origin);
  });
}

void PedamacsSim::arm_next_slot(int node) {
  if (armed_[node] || queues_[node].empty()) return;
  const auto& owned = schedule_.owned_slots[node];
  if (owned.empty()) return;

  const SimTime t_slot = schedule_.t_slot_us;
  const std::int64_t next_tick = (sim_.now() + t_slot - 1) / t_slot;
  const int frame = schedule_.frame_slots;
  const int offset = static_cast<int>(next_tick % frame);
  auto it = std::lower_bound(owned.begin(), owned.end(), offset);
  std::int64_t tick;
  if (it != owned.end()) {
    tick = next_tick + (*it - offset);
  } else {
    tick = next_tick + (frame - offset) + owned.front();
  }
  armed_[node] = 1;
  const SimTime at = tick * t_slot;
  sim_.schedule_at(at, [this, node, at] { on_owned_slot(node, at); });
}

void PedamacsSim::on_owned_slot(int node, SimTime slot_start) {
  armed_[node] = 0;
  if (queues_[node].empty()) return;
  const int pidx = queues_[node].front();
  queues_[node].pop_front();

  const SimTime airtime = radio_.data_airtime_us();
  const Transmission tx{node, slot_start, slot_start + airtime, TxKind::data,
                        records_[pidx].id, -1};
  channel_.add(tx);
  energy_.convert_listen(node, RadioState::tx, airtime);

  const int parent = tree_.parent[node];
  const bool ok =
      reception_outcome(tx, parent, topo_, model_, channel_, radio_, shadowing_rng_);
  if (ok) {
    energy_.convert_listen(parent, RadioState::rx, airtime);
    ++records_[pidx].hops;
    if (parent == topo_.sink) {
      records_[pidx].fate = PacketFate::delivered;
      records_[pidx].delivered_us = slot_start + airtime;
    } else {
      queues_[parent].push_back(pidx);
      arm_next_slot(parent);
    }
  } else {
    // no retransmission mechanism: the packet is gone
    records_[pidx].fate = PacketFate::dropped;
    records_[pidx].drop_reason = "link-loss";
  }
  channel_.gc(sim_.now() - 10 * schedule_.t_slot_us);
  arm_next_slot(node);
}

void PedamacsSim::run(SimTime horizon) {
  horizon_ = horizon;
  sim_.run_until(horizon);
}

RunMetrics PedamacsSim::metrics() const {
  RunMetrics m;
  m.packets = records_;
  m.horizon_us = horizon_;
  m.avg_neighbors = graph_.average_degree();
  m.frame_slots = schedule_.frame_slots;
  m.wctt_us = 3LL * (topo_.count() - 1) * schedule_.t_slot_us;
  int max_depth = 0;
  for (int d : tree_.depth) max_depth = std::max(max_depth, d);
  m.nb_hop_max = max_depth;

  // baseline wake schedule: a node is awake for its own slots and for its
  // children's slots, whether or not traffic flows
  const int n = topo_.count();
  std::vector<SimTime> per_frame_awake(n, 0);
  for (int u = 0; u < n; ++u) {
    per_frame_awake[u] +=
        static_cast<SimTime>(schedule_.owned_slots[u].size()) * schedule_.t_slot_us;
    if (tree_.parent[u] >= 0) {
      per_frame_awake[tree_.parent[u]] +=
          static_cast<SimTime>(schedule_.owned_slots[u].size()) * schedule_.t_slot_us;
    }
  }
  const SimTime frame_us = static_cast<SimTime>(schedule_.frame_slots) * schedule_.t_slot_us;
  const std::int64_t frames = horizon_ / frame_us;

  m.node_energy.resize(n);
  for (int u = 0; u < n; ++u) {
    NodeEnergy& ne = m.node_energy[u];
    ne.tx_us = energy_.tx_us(u);
    ne.rx_us = energy_.rx_us(u);
    ne.listen_us = energy_.listen_us(u) + frames * per_frame_awake[u];
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
