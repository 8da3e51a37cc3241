#pragma once

#include <vector>

#include "tda/error.hpp"

namespace tda {

// Throughput of one machine in work-units (rows) per second. One work-unit
// is one row-block of the reference computation; see workload.hpp for the
// scale convention. Always positive and finite.
struct PerformanceValue {
  double value;
  explicit PerformanceValue(double v);
};

// Distribution overhead rises linearly with the load being distributed:
// overhead(L) = slope_m * L.
struct OverheadModel {
  double slope_m;  // seconds per work-unit
  explicit OverheadModel(double m);
};

// Everything needed to predict distributed completion time and speedup:
// T (time on the standalone reference machine), N_H (cluster performance in
// multiples of that machine), the overhead line and the load.
struct SpeedupModel {
  double standalone_time_t;
  double virtual_count_nh;
  OverheadModel overhead;
  double load_l;  // work-units, >= 0

  SpeedupModel(double t, double nh, OverheadModel o, double l);
};

// Sum of the cluster's performance values.
PerformanceValue total_performance(const std::vector<PerformanceValue>& values);

// How many standalone-equivalent machines the cluster amounts to.
double virtual_machine_count(PerformanceValue p_total, PerformanceValue p_standalone);

double overhead_seconds(double load_l, const OverheadModel& model);

// T / N_H + overhead(L). With slope 0 this is the ideal T / N_H.
double predicted_time(const SpeedupModel& model);

// T / predicted_time. Approaches N_H from below as the overhead slope
// shrinks or the load grows.
double predicted_speedup(const SpeedupModel& model);

}  // namespace tda
