#include "rtxpsim/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

#include "rtxpsim/des.hpp"
#include "rtxpsim/pedamacs.hpp"
#include "rtxpsim/rng.hpp"
#include "rtxpsim/rtxp.hpp"
#include "rtxpsim/vcs.hpp"
#include "rtxpsim/xmac.hpp"

namespace rtxpsim {

Protocol parse_protocol(const std::string& s) {
  if (s == "rtxp") return Protocol::rtxp;
  if (s == "rtxp-no-retx" || s == "rtxp_no_retx") return Protocol::rtxp_no_retx;
  if (s == "pedamacs") return Protocol::pedamacs;
  if (s == "xmac-gradient" || s == "xmac_gradient" || s == "xmac") {
    return Protocol::xmac_gradient;
  }
  throw std::runtime_error("unknown protocol: " + s);
}

const char* protocol_name(Protocol p) {
  switch (p) {
    case Protocol::rtxp: return "rtxp";
    case Protocol::rtxp_no_retx: return "rtxp-no-retx";
    case Protocol::pedamacs: return "pedamacs";
    case Protocol::xmac_gradient: return "xmac-gradient";
  }
  return "?";
}

std::string ExperimentSpec::provenance() const {
  char buf[512];
  std::string sizes_str;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    sizes_str += (i ? "," : "") + std::to_string(sizes[i]);
  }
  std::snprintf(buf, sizeof(buf),
                "protocol=%s channel=%s alarm_period_us=%lld alarms=%d sizes=%s "
                "replications=%d seed=%llu dc_percent=%d max_retx=%d xmac_retries=%d",
                protocol_name(protocol), channel_name(channel),
                static_cast<long long>(alarm_period_us), alarms, sizes_str.c_str(),
                replications, static_cast<unsigned long long>(seed), rtxp.dc_percent,
                rtxp.max_retx_per_cycle, xmac.max_retries);
  return buf;
}

std::vector<Alarm> generate_traffic(const ExperimentSpec& spec, const Topology& topo,
                                    std::mt19937_64& rng) {
  if (spec.alarm_period_us <= 0) throw std::invalid_argument("alarm period must be positive");
  std::vector<Alarm> alarms;
  alarms.reserve(spec.alarms);
  std::uniform_int_distribution<int> pick(0, topo.count() - 2);
  for (int k = 1; k <= spec.alarms; ++k) {
    int origin = pick(rng);
    if (origin >= topo.sink) ++origin; // uniform over non-sink ids
    alarms.push_back(Alarm{k - 1, origin, static_cast<SimTime>(k) * spec.alarm_period_us});
  }
  return alarms;
}

PreparedTopology prepare_topology(const ExperimentSpec& spec, int size, int replication) {
  PreparedTopology out;
  for (int attempt = 0;; ++attempt) {
    out.topo_seed = derive_seed(spec.seed, static_cast<std::uint64_t>(size),
                                static_cast<std::uint64_t>(replication),
                                static_cast<std::uint64_t>(attempt));
    auto rng = make_stream(out.topo_seed, RngStreamId::topology);
    out.topo = generate_uniform(size, spec.area_w, spec.area_h, spec.radio.range, rng,
                                spec.sink_at_corner);
    out.graph = build_graphs(out.topo);
    try {
      out.rings = hop_counts(out.graph, out.topo.sink);
      out.regen_count = attempt;
      return out;
    } catch (const DisconnectedTopology&) {
      // rejected; next derived seed
    }
  }
}

namespace {

SimTime align_up(SimTime value, SimTime unit) { return (value + unit - 1) / unit * unit; }

RunMetrics run_protocol(const ExperimentSpec& spec, const PreparedTopology& prep) {
  auto traffic_rng = make_stream(prep.topo_seed, RngStreamId::traffic);
  const std::vector<Alarm> alarms = generate_traffic(spec, prep.topo, traffic_rng);
  const SimTime traffic_end = static_cast<SimTime>(spec.alarms) * spec.alarm_period_us;

  Simulator sim;
  switch (spec.protocol) {
    case Protocol::rtxp:
    case Protocol::rtxp_no_retx: {
      RtxpConfig cfg = spec.rtxp;
      cfg.retransmissions = spec.protocol == Protocol::rtxp;
      const CoordinateSet coords =
          compute_coordinates(prep.graph, prep.rings,
                              prep.topo.range, VcsParams{cfg.max_backoff_us, cfg.jamming_us});
      RtxpSim proto(sim, prep.topo, prep.graph, prep.rings, coords, cfg, spec.radio,
                    spec.channel, prep.topo_seed);
      const SimTime horizon =
          align_up(traffic_end + 2 * cfg.wctt_us(prep.rings.max_ring), cfg.cycle_us());
      for (const Alarm& a : alarms) proto.inject(a);
      proto.run(horizon);
      return proto.metrics();
    }
    case Protocol::pedamacs: {
      const TreeRouting tree = build_tree(prep.graph, prep.rings);
      const TdmaSchedule sched = compute_schedule(prep.graph, tree);
      PedamacsSim proto(sim, prep.topo, prep.graph, tree, sched, spec.radio, spec.channel,
                        prep.topo_seed);
      const SimTime frame_us = static_cast<SimTime>(sched.frame_slots) * sched.t_slot_us;
      const SimTime bound = 3LL * (prep.topo.count() - 1) * sched.t_slot_us;
      const SimTime horizon = align_up(traffic_end + 2 * bound, frame_us);
      for (const Alarm& a : alarms) proto.inject(a);
      proto.run(horizon);
      return proto.metrics();
    }
    case Protocol::xmac_gradient: {
      XmacSim proto(sim, prep.topo, prep.graph, prep.rings, spec.xmac, spec.radio,
                    spec.channel, prep.topo_seed);
      // large retry budgets produce deliveries far beyond the WCTT; the
      // grace window must cover them or they count as losses
      const SimTime horizon = traffic_end + 2 * proto.wctt_bound_us() +
                              static_cast<SimTime>(spec.xmac.max_retries) * spec.xmac.cycle_us;
      for (const Alarm& a : alarms) proto.inject(a);
      proto.run(horizon);
      return proto.metrics();
    }
  }
  throw std::logic_error("unhandled protocol");
}

} // namespace

RunResult run_single(const ExperimentSpec& spec, int size, int replication) {
  RunResult result;
  result.size = size;
  result.replication = replication;
  const PreparedTopology prep = prepare_topology(spec, size, replication);
  result.topo_seed = prep.topo_seed;
  result.regen_count = prep.regen_count;
  result.metrics = run_protocol(spec, prep);
  return result;
}

MetricsReport run_experiment(const ExperimentSpec& spec) {
  MetricsReport report;
  report.spec = spec;

  struct Job {
    int size;
    int replication;
  };
  std::vector<Job> jobs;
  for (int size : spec.sizes) {
    for (int rep = 0; rep < spec.replications; ++rep) jobs.push_back({size, rep});
  }
  report.runs.resize(jobs.size());

  if (spec.parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      report.runs[i] = run_single(spec, jobs[i].size, jobs[i].replication);
    }
  } else {
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      report.runs[i] = run_single(spec, jobs[i].size, jobs[i].replication);
    }
  }

  // serial reduce, one stats row per ensemble size
  for (int size : spec.sizes) {
    EnsembleStats st;
    st.size = size;
    st.min_delivery = 1.0;
    int count = 0;
    for (const RunResult& run : report.runs) {
      if (run.size != size) continue;
      const double delivery =
          static_cast<double>(run.metrics.delivered()) / static_cast<double>(spec.alarms);
      st.min_delivery = std::min(st.min_delivery, delivery);
      st.max_delivery = std::max(st.max_delivery, delivery);
      st.avg_delivery += delivery;
      st.avg_neighbors += run.metrics.avg_neighbors;
      st.max_energy_mj = std::max(st.max_energy_mj, run.metrics.max_node_energy_mj());
      ++count;
    }
    if (count) {
      st.avg_delivery /= count;
      st.avg_neighbors /= count;
    }
    report.ensembles.push_back(st);
  }
  return report;
}

namespace {

void append_line(std::string& out, const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  out += buf;
}

} // namespace

std::string packets_csv(const MetricsReport& report) {
  std::string out = "# " + report.spec.provenance() + "\n";
  out += "protocol,channel,alarm_period_us,nodes,replication,topology_seed,avg_neighbors,"
         "packet_id,origin,creation_us,delivery_us,hops,retx_total,delivered,drop_reason\n";
  for (const RunResult& run : report.runs) {
    for (const PacketRecord& p : run.metrics.packets) {
      append_line(out, "%s,%s,%lld,%d,%d,%llu,%.4f,%d,%d,%lld,%lld,%d,%d,%d,%s\n",
                  protocol_name(report.spec.protocol), channel_name(report.spec.channel),
                  static_cast<long long>(report.spec.alarm_period_us), run.size,
                  run.replication, static_cast<unsigned long long>(run.topo_seed),
                  run.metrics.avg_neighbors, p.id, p.origin,
                  static_cast<long long>(p.created_us), static_cast<long long>(p.delivered_us),
                  p.hops, p.retx_total, p.fate == PacketFate::delivered ? 1 : 0,
                  p.fate == PacketFate::dropped ? p.drop_reason.c_str() : "");
    }
  }
  return out;
}

std::string runs_csv(const MetricsReport& report) {
  std::string out = "# " + report.spec.provenance() + "\n";
  out += "protocol,channel,alarm_period_us,nodes,replication,topology_seed,regen_count,"
         "avg_neighbors,nb_hop_max,alarms,delivered,dropped,in_flight,delivery_ratio,"
         "max_delay_us,mean_delay_us,wctt_us,max_node_energy_mj,frame_slots,"
         "coordinate_overflows\n";
  for (const RunResult& run : report.runs) {
    const RunMetrics& m = run.metrics;
    append_line(out, "%s,%s,%lld,%d,%d,%llu,%d,%.4f,%d,%d,%d,%d,%d,%.6f,%lld,%.1f,%lld,%.6f,"
                     "%d,%d\n",
                protocol_name(report.spec.protocol), channel_name(report.spec.channel),
                static_cast<long long>(report.spec.alarm_period_us), run.size, run.replication,
                static_cast<unsigned long long>(run.topo_seed), run.regen_count,
                m.avg_neighbors, m.nb_hop_max, static_cast<int>(m.packets.size()),
                m.delivered(), m.dropped(), m.in_flight(),
                static_cast<double>(m.delivered()) / static_cast<double>(m.packets.size()),
                static_cast<long long>(m.max_delay_us()), m.mean_delay_us(),
                static_cast<long long>(m.wctt_us), m.max_node_energy_mj(), m.frame_slots,
                m.coordinate_overflows);
  }
  return out;
}

namespace {

std::string delay_plot(const MetricsReport& report) {
  std::string out = "# " + report.spec.provenance() + "\n";
  out += "# avg_neighbors delay_ms is_mean wctt_ms\n";
  for (const RunResult& run : report.runs) {
    double sum = 0;
    int n = 0;
    for (const PacketRecord& p : run.metrics.packets) {
      if (p.fate != PacketFate::delivered) continue;
      append_line(out, "%.4f %.3f 0 %.3f\n", run.metrics.avg_neighbors, to_ms(p.delay_us()),
                  to_ms(run.metrics.wctt_us));
      sum += to_ms(p.delay_us());
      ++n;
    }
    if (n) {
      append_line(out, "%.4f %.3f 1 %.3f\n", run.metrics.avg_neighbors, sum / n,
                  to_ms(run.metrics.wctt_us));
    }
  }
  return out;
}

std::string delivery_plot(const MetricsReport& report) {
  std::string out = "# " + report.spec.provenance() + "\n";
  out += "# ensemble_size min avg max\n";
  for (const EnsembleStats& st : report.ensembles) {
    append_line(out, "%d %.6f %.6f %.6f\n", st.size, st.min_delivery, st.avg_delivery,
                st.max_delivery);
  }
  return out;
}

std::string energy_plot(const MetricsReport& report) {
  std::string out = "# " + report.spec.provenance() + "\n";
  out += "# ensemble_size avg_neighbors max_energy_mj\n";
  for (const EnsembleStats& st : report.ensembles) {
    append_line(out, "%d %.4f %.6f\n", st.size, st.avg_neighbors, st.max_energy_mj);
  }
  return out;
}

std::string file_tag(const ExperimentSpec& spec) {
  std::string tag = protocol_name(spec.protocol);
  tag += "_";
  tag += channel_name(spec.channel);
  tag += "_p" + std::to_string(spec.alarm_period_us / 1000000) + "s";
  for (char& c : tag) {
    if (c == '-') c = '_';
  }
  return tag;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace

void emit_csv(const MetricsReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::string tag = file_tag(report.spec);
  write_file(dir + "/packets_" + tag + ".csv", packets_csv(report));
  write_file(dir + "/runs_" + tag + ".csv", runs_csv(report));
}

void emit_plot_data(const MetricsReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::string tag = file_tag(report.spec);
  write_file(dir + "/delay_" + tag + ".txt", delay_plot(report));
  write_file(dir + "/delivery_" + tag + ".txt", delivery_plot(report));
  write_file(dir + "/energy_" + tag + ".txt", energy_plot(report));
}

} // namespace rtxpsim
