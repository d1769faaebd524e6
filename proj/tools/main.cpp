// Command-line front end: experiment campaigns, closed-form analysis and
// topology/schedule utilities over the simulator library.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "rtxpsim/analysis.hpp"
#include "rtxpsim/harness.hpp"
#include "rtxpsim/pedamacs.hpp"
#include "rtxpsim/rng.hpp"
#include "rtxpsim/topology.hpp"
#include "rtxpsim/vcs.hpp"

using namespace rtxpsim;

namespace {

// flat key=value file with [section] headers; keys below mirror the flags
std::map<std::string, std::string> load_config(const std::string& path) {
  std::map<std::string, std::string> kv;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  std::string line, section;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\r')) line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    line = line.substr(start);
    if (line.front() == '[') {
      const auto end = line.find(']');
      if (end == std::string::npos) throw std::runtime_error("bad section header: " + line);
      section = line.substr(1, end - 1) + ".";
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("bad config line: " + line);
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    while (!key.empty() && key.back() == ' ') key.pop_back();
    while (!value.empty() && value.front() == ' ') value.erase(0, 1);
    kv[section + key] = value;
  }
  return kv;
}

std::vector<int> parse_sizes(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  if (out.empty()) throw std::runtime_error("empty node size list");
  return out;
}

struct RunOptions {
  std::string config_path;
  std::string protocol, channel, nodes, out_dir;
  double alarm_period_s = -1;
  int replications = -1;
  long long seed = -1;
  int alarms = -1;
  int dc_percent = -1;
  int xmac_retries = -1;
  bool serial = false;
};

ExperimentSpec resolve_spec(const RunOptions& opt) {
  std::map<std::string, std::string> cfg;
  if (!opt.config_path.empty()) cfg = load_config(opt.config_path);
  auto from_cfg = [&](const std::string& key) -> std::optional<std::string> {
    auto it = cfg.find(key);
    if (it == cfg.end()) return std::nullopt;
    return it->second;
  };

  ExperimentSpec spec;
  std::vector<std::string> missing;

  if (!opt.protocol.empty()) {
    spec.protocol = parse_protocol(opt.protocol);
  } else if (auto v = from_cfg("harness.protocol")) {
    spec.protocol = parse_protocol(*v);
  } else {
    missing.push_back("--protocol");
  }

  if (!opt.channel.empty()) {
    spec.channel = parse_channel(opt.channel);
  } else if (auto v = from_cfg("harness.channel")) {
    spec.channel = parse_channel(*v);
  } else {
    missing.push_back("--channel");
  }

  if (opt.alarm_period_s > 0) {
    spec.alarm_period_us = static_cast<SimTime>(opt.alarm_period_s * 1000000.0);
  } else if (auto v = from_cfg("harness.alarm-period")) {
    spec.alarm_period_us = static_cast<SimTime>(std::stod(*v) * 1000000.0);
  } else {
    missing.push_back("--alarm-period");
  }

  if (!opt.nodes.empty()) {
    spec.sizes = parse_sizes(opt.nodes);
  } else if (auto v = from_cfg("harness.nodes")) {
    spec.sizes = parse_sizes(*v);
  } else {
    missing.push_back("--nodes");
  }

  if (opt.replications > 0) {
    spec.replications = opt.replications;
  } else if (auto v = from_cfg("harness.replications")) {
    spec.replications = std::stoi(*v);
  } else {
    missing.push_back("--replications");
  }

  if (opt.seed >= 0) {
    spec.seed = static_cast<std::uint64_t>(opt.seed);
  } else if (auto v = from_cfg("harness.seed")) {
    spec.seed = std::stoull(*v);
  } else {
    missing.push_back("--seed");
  }

  if (opt.alarms > 0) spec.alarms = opt.alarms;
  else if (auto v = from_cfg("harness.alarms")) spec.alarms = std::stoi(*v);

  if (opt.dc_percent > 0) spec.rtxp.dc_percent = opt.dc_percent;
  else if (auto v = from_cfg("rtxp.dc-percent")) spec.rtxp.dc_percent = std::stoi(*v);

  if (auto v = from_cfg("rtxp.max-retx-per-cycle")) spec.rtxp.max_retx_per_cycle = std::stoi(*v);

  if (opt.xmac_retries >= 0) spec.xmac.max_retries = opt.xmac_retries;
  else if (auto v = from_cfg("xmac.max-retries")) spec.xmac.max_retries = std::stoi(*v);

  if (auto v = from_cfg("radio.tx-mw")) spec.radio.powers.tx_mw = std::stod(*v);
  if (auto v = from_cfg("radio.rx-mw")) spec.radio.powers.rx_mw = std::stod(*v);
  if (auto v = from_cfg("radio.listen-mw")) spec.radio.powers.listen_mw = std::stod(*v);
  if (auto v = from_cfg("radio.sleep-mw")) spec.radio.powers.sleep_mw = std::stod(*v);
  if (auto v = from_cfg("radio.range")) spec.radio.range = std::stod(*v);
  if (auto v = from_cfg("radio.shadowing-sigma-db")) {
    spec.radio.shadowing_sigma_db = std::stod(*v);
  }

  spec.parallel = !opt.serial;

  if (!missing.empty()) {
    std::string msg = "missing required settings (flag or config):";
    for (const auto& m : missing) msg += " " + m;
    throw std::runtime_error(msg);
  }
  return spec;
}

int cmd_run(const RunOptions& opt) {
  const ExperimentSpec spec = resolve_spec(opt);
  std::printf("running: %s\n", spec.provenance().c_str());
  const MetricsReport report = run_experiment(spec);
  emit_csv(report, opt.out_dir);
  emit_plot_data(report, opt.out_dir);

  std::printf("%-8s %-14s %-10s %-10s %-10s %-12s %-12s\n", "nodes", "avg_neighbors",
              "min_deliv", "avg_deliv", "max_deliv", "max_delay_s", "max_energy_mJ");
  for (const EnsembleStats& st : report.ensembles) {
    SimTime max_delay = 0;
    for (const RunResult& run : report.runs) {
      if (run.size == st.size) max_delay = std::max(max_delay, run.metrics.max_delay_us());
    }
    std::printf("%-8d %-14.2f %-10.4f %-10.4f %-10.4f %-12.3f %-12.3f\n", st.size,
                st.avg_neighbors, st.min_delivery, st.avg_delivery, st.max_delivery,
                to_seconds(max_delay), st.max_energy_mj);
  }
  std::printf("outputs written to %s\n", opt.out_dir.c_str());
  return 0;
}

PreparedTopology topology_for(int nodes, std::uint64_t seed) {
  ExperimentSpec spec;
  spec.seed = seed;
  return prepare_topology(spec, nodes, 0);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"RTXP / PEDAMACS / X-MAC convergecast simulator and analysis toolkit"};
  app.require_subcommand(1);

  // run
  RunOptions run_opt;
  auto* run = app.add_subcommand("run", "run a simulation campaign and emit CSV/plot data");
  run->add_option("--config", run_opt.config_path, "key=value config file");
  run->add_option("--protocol", run_opt.protocol,
                  "rtxp | rtxp-no-retx | pedamacs | xmac-gradient");
  run->add_option("--channel", run_opt.channel, "free-space | log-normal");
  run->add_option("--alarm-period", run_opt.alarm_period_s, "alarm period in seconds");
  run->add_option("--nodes", run_opt.nodes, "comma-separated ensemble sizes, e.g. 100,200");
  run->add_option("--replications", run_opt.replications, "topologies per ensemble size");
  run->add_option("--seed", run_opt.seed, "master seed");
  run->add_option("--alarms", run_opt.alarms, "alarms per run (default 200)");
  run->add_option("--dc", run_opt.dc_percent, "duty-cycle percent (default 1)");
  run->add_option("--xmac-retries", run_opt.xmac_retries, "xmac retry budget (default 5)");
  run->add_flag("--serial", run_opt.serial, "disable the parallel ensemble loop");
  run->add_option("--out-dir", run_opt.out_dir, "output directory")->required();

  // analyze
  AnalysisInputs an;
  auto* analyze = app.add_subcommand("analyze", "evaluate the closed-form timing formulas");
  analyze->add_option("--dc", an.rtxp.dc_percent, "duty-cycle percent");
  analyze->add_option("--jamming-us", an.rtxp.jamming_us, "jamming code duration");
  analyze->add_option("--max-backoff-us", an.rtxp.max_backoff_us, "contention window");
  analyze->add_option("--data-slot-us", an.rtxp.data_slot_us, "data slot duration");
  analyze->add_option("--hops", an.nb_hop_max, "maximum hop count");
  analyze->add_option("--nodes", an.pedamacs_nodes, "node count for the TDMA bound");
  analyze->add_option("--t-slot-us", an.pedamacs_t_slot_us, "TDMA slot duration");

  // capacity-curve
  AnalysisInputs curve_in;
  curve_in.rtxp.data_slot_us = 32000; // trade-off parameter set
  std::string curve_out;
  auto* curve = app.add_subcommand("capacity-curve",
                                   "capacity vs WCTT trade-off over duty cycles");
  curve->add_option("--data-slot-us", curve_in.rtxp.data_slot_us, "data slot duration");
  curve->add_option("--hops", curve_in.nb_hop_max, "maximum hop count");
  curve->add_option("--out", curve_out, "write plot data to a file instead of stdout");

  // export-topology
  int exp_nodes = 100;
  long long exp_seed = 1;
  std::string exp_out, exp_coords;
  auto* expo = app.add_subcommand("export-topology",
                                  "generate a connected topology and dump it as text");
  expo->add_option("--nodes", exp_nodes, "node count")->required();
  expo->add_option("--seed", exp_seed, "master seed")->required();
  expo->add_option("--out", exp_out, "topology file (stdout when omitted)");
  expo->add_option("--coords-out", exp_coords, "also dump 'id ring offset coord' lines");

  // check-schedule
  int chk_nodes = 100;
  long long chk_seed = 1;
  std::string chk_mode = "express";
  std::string chk_dump;
  auto* chk = app.add_subcommand("check-schedule",
                                 "build a TDMA schedule and verify it is interference-free");
  chk->add_option("--nodes", chk_nodes, "node count")->required();
  chk->add_option("--seed", chk_seed, "master seed")->required();
  chk->add_option("--mode", chk_mode, "express | full-generation");
  chk->add_option("--dump", chk_dump, "write 'slot: senders...' lines to a file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_opt);

    if (analyze->parsed()) {
      std::fputs(format_report(evaluate(an)).c_str(), stdout);
      return 0;
    }

    if (curve->parsed()) {
      const std::string text = format_capacity_curve(capacity_curve(curve_in));
      if (curve_out.empty()) {
        std::fputs(text.c_str(), stdout);
      } else {
        std::ofstream out(curve_out, std::ios::binary);
        out << text;
        std::printf("curve written to %s\n", curve_out.c_str());
      }
      return 0;
    }

    if (expo->parsed()) {
      const PreparedTopology prep =
          topology_for(exp_nodes, static_cast<std::uint64_t>(exp_seed));
      if (exp_out.empty()) {
        save_topology(prep.topo, std::cout);
      } else {
        std::ofstream out(exp_out, std::ios::binary);
        save_topology(prep.topo, out);
        std::printf("topology written to %s (seed %llu, %d regenerations)\n", exp_out.c_str(),
                    static_cast<unsigned long long>(prep.topo_seed), prep.regen_count);
      }
      if (!exp_coords.empty()) {
        const CoordinateSet coords =
            compute_coordinates(prep.graph, prep.rings, prep.topo.range);
        std::ofstream out(exp_coords, std::ios::binary);
        save_coordinates(coords, out);
        std::printf("coordinates written to %s\n", exp_coords.c_str());
      }
      return 0;
    }

    if (chk->parsed()) {
      const PreparedTopology prep =
          topology_for(chk_nodes, static_cast<std::uint64_t>(chk_seed));
      const TreeRouting tree = build_tree(prep.graph, prep.rings);
      const ScheduleMode mode = chk_mode == "full-generation" ? ScheduleMode::full_generation
                                                              : ScheduleMode::express;
      const TdmaSchedule sched = compute_schedule(prep.graph, tree, 2000, 1000000, mode);
      const ScheduleCheck result = check_schedule(prep.graph, tree, sched);
      std::printf("frame: %d slots built, %d padded, bound %d\n", sched.built_slots,
                  result.frame_slots, result.frame_bound);
      std::printf("conflicts: %d, tree-consistent: %s, within bound: %s\n", result.conflicts,
                  result.tree_consistent ? "yes" : "no", result.within_bound ? "yes" : "no");
      if (!chk_dump.empty()) {
        std::ofstream out(chk_dump, std::ios::binary);
        for (int s = 0; s < sched.built_slots; ++s) {
          out << s << ":";
          for (int u : sched.senders_per_slot[s]) out << ' ' << u;
          out << '\n';
        }
        std::printf("slot dump written to %s\n", chk_dump.c_str());
      }
      return result.conflicts == 0 ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
