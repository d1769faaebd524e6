#pragma once

#include <string>
#include <vector>

#include "rtxpsim/radio.hpp"
#include "rtxpsim/rtxp_config.hpp"
#include "rtxpsim/sim_time.hpp"

namespace rtxpsim {

struct AnalysisInputs {
  RtxpConfig rtxp;
  int nb_hop_max = 5;
  int pedamacs_nodes = 100; // |V|
  SimTime pedamacs_t_slot_us = 2000;
  RadioPowers powers;
};

// Closed-form evaluation of the protocol formulas in integer microseconds.
struct AnalyticalReport {
  AnalysisInputs inputs;
  SimTime d_b_us = 0;
  SimTime d_bf_us = 0;
  SimTime d_r_us = 0;
  SimTime d_l_us = 0;
  SimTime d_awake_us = 0;
  SimTime d_sleep_us = 0;
  SimTime d_activity_us = 0;
  SimTime duty_cycle_us = 0;
  SimTime wctt_rtxp_us = 0;
  int capacity_rtxp = 0;
  SimTime wctt_pedamacs_us = 0;
  double e_1hop_rtxp_mj = 0;
  double e_1hop_pedamacs_mj = 0;
};

AnalyticalReport evaluate(const AnalysisInputs& in);

// human-readable block plus machine-readable key=value lines
std::string format_report(const AnalyticalReport& report);

struct CapacityPoint {
  int dc_percent = 0;
  SimTime wctt_us = 0;
  int capacity = 0;
};

// Capacity/WCTT trade-off sweep over duty-cycle ratios; points come out
// sorted by increasing WCTT so capacity is non-decreasing along the curve.
std::vector<CapacityPoint> capacity_curve(const AnalysisInputs& in, int dc_from = 1,
                                          int dc_to = 100);

std::string format_capacity_curve(const std::vector<CapacityPoint>& curve);

} // namespace rtxpsim
