#include "tda/perf_model.hpp"

#include <cmath>

namespace tda {

PerformanceValue::PerformanceValue(double v) : value(v) {
  if (!(std::isfinite(v) && v > 0.0))
    fail(Errc::degenerate_performance, "performance must be positive and finite");
}

OverheadModel::OverheadModel(double m) : slope_m(m) {
  if (!(std::isfinite(m) && m >= 0.0))
    fail(Errc::invalid_argument, "overhead slope must be nonnegative and finite");
}

SpeedupModel::SpeedupModel(double t, double nh, OverheadModel o, double l)
    : standalone_time_t(t), virtual_count_nh(nh), overhead(o), load_l(l) {
  if (!(std::isfinite(t) && t > 0.0))
    fail(Errc::invalid_argument, "standalone time must be positive and finite");
  if (!(std::isfinite(nh) && nh > 0.0))
    fail(Errc::invalid_argument, "virtual machine count must be positive and finite");
  if (!(std::isfinite(l) && l >= 0.0)) fail(Errc::invalid_load, "load must be nonnegative");
}

PerformanceValue total_performance(const std::vector<PerformanceValue>& values) {
  if (values.empty()) fail(Errc::empty_provider_set, "no performance values to sum");
  double sum = 0.0;
  for (const auto& v : values) sum += v.value;
  return PerformanceValue(sum);
}

double virtual_machine_count(PerformanceValue p_total, PerformanceValue p_standalone) {
  return p_total.value / p_standalone.value;
}

double overhead_seconds(double load_l, const OverheadModel& model) {
  if (!(std::isfinite(load_l) && load_l >= 0.0))
    fail(Errc::invalid_load, "load must be nonnegative");
  return model.slope_m * load_l;
}

double predicted_time(const SpeedupModel& model) {
  return model.standalone_time_t / model.virtual_count_nh +
         overhead_seconds(model.load_l, model.overhead);
}

double predicted_speedup(const SpeedupModel& model) {
  return model.standalone_time_t / predicted_time(model);
}

}  // namespace tda
