// Times the ensemble loop serially and with the OpenMP parallel path on the
// same campaign, and checks the outputs match byte for byte.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "rtxpsim/harness.hpp"

using namespace rtxpsim;
namespace chrono = std::chrono;

int main(int argc, char** argv) {
  ExperimentSpec spec;
  spec.protocol = Protocol::rtxp;
  spec.channel = ChannelModel::log_normal;
  spec.sizes = {100, 200};
  spec.replications = 6;
  spec.alarm_period_us = 1000000;
  spec.alarms = 100;
  spec.seed = 42;
  if (argc > 1) spec.replications = std::atoi(argv[1]);

  spec.parallel = false;
  auto t0 = chrono::steady_clock::now();
  const MetricsReport serial = run_experiment(spec);
  auto t1 = chrono::steady_clock::now();

  spec.parallel = true;
  auto t2 = chrono::steady_clock::now();
  const MetricsReport parallel = run_experiment(spec);
  auto t3 = chrono::steady_clock::now();

  const double serial_ms = chrono::duration<double, std::milli>(t1 - t0).count();
  const double parallel_ms = chrono::duration<double, std::milli>(t3 - t2).count();
  const bool identical = packets_csv(serial) == packets_csv(parallel) &&
                         runs_csv(serial) == runs_csv(parallel);

  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  std::printf("runs            %zu\n", serial.runs.size());
  std::printf("serial          %.0f ms\n", serial_ms);
  std::printf("parallel (%d)    %.0f ms\n", threads, parallel_ms);
  std::printf("speedup         %.2fx\n", serial_ms / parallel_ms);
  std::printf("outputs match   %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
