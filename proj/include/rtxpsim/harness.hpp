#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rtxpsim/metrics.hpp"
#include "rtxpsim/radio.hpp"
#include "rtxpsim/rtxp_config.hpp"
#include "rtxpsim/topology.hpp"
#include "rtxpsim/xmac.hpp"

namespace rtxpsim {

enum class Protocol { rtxp, rtxp_no_retx, pedamacs, xmac_gradient };

Protocol parse_protocol(const std::string& s);
const char* protocol_name(Protocol p);

// One experiment: a protocol on a channel model over a topology ensemble.
struct ExperimentSpec {
  Protocol protocol = Protocol::rtxp;
  ChannelModel channel = ChannelModel::free_space;
  std::vector<int> sizes = {100, 200, 300, 400, 500, 600, 700, 800};
  int replications = 20;
  SimTime alarm_period_us = 5000000;
  int alarms = 200;
  std::uint64_t seed = 1;
  bool parallel = true;
  bool sink_at_corner = true;
  double area_w = 50, area_h = 50;

  RtxpConfig rtxp;
  RadioParams radio;
  XmacConfig xmac;

  std::string provenance() const; // key=value summary baked into outputs
};

struct RunResult {
  int size = 0;
  int replication = 0;
  std::uint64_t topo_seed = 0;
  int regen_count = 0; // disconnected topologies discarded before this one
  RunMetrics metrics;
};

struct EnsembleStats {
  int size = 0;
  double min_delivery = 0, avg_delivery = 0, max_delivery = 0;
  double avg_neighbors = 0;
  double max_energy_mj = 0;
};

struct MetricsReport {
  ExperimentSpec spec;
  std::vector<RunResult> runs; // ordered by (size, replication)
  std::vector<EnsembleStats> ensembles;
};

// 200 alarms at k*period, origins uniform over the non-sink nodes.
std::vector<Alarm> generate_traffic(const ExperimentSpec& spec, const Topology& topo,
                                    std::mt19937_64& rng);

// Generates a connected topology for (size, replication), retrying
// disconnected draws with derived seeds.
struct PreparedTopology {
  Topology topo;
  NeighborGraph graph;
  HopCounts rings;
  std::uint64_t topo_seed = 0;
  int regen_count = 0;
};
PreparedTopology prepare_topology(const ExperimentSpec& spec, int size, int replication);

RunResult run_single(const ExperimentSpec& spec, int size, int replication);
MetricsReport run_experiment(const ExperimentSpec& spec);

// Canonical outputs: packets.csv + runs.csv, plus whitespace plot files
// (delay scatter/mean/bound, delivery min-avg-max, max energy). Writes are
// byte-deterministic for a given spec.
void emit_csv(const MetricsReport& report, const std::string& dir);
void emit_plot_data(const MetricsReport& report, const std::string& dir);

std::string packets_csv(const MetricsReport& report);
std::string runs_csv(const MetricsReport& report);

} // namespace rtxpsim
