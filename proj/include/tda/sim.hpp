#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tda/perf_model.hpp"
#include "tda/scheduler.hpp"

namespace tda {

// A virtual heterogeneous cluster. Speeds are rows/second at reference_size
// (an L-row square job costs L^3 scalar products, so compute time for r rows
// at size L is r * L^2 / (P * reference_size^2)). The overhead slope is the
// wire key `overhead_ms_per_row`; milliseconds is the scenario unit that
// puts distribution cost on the same footing as compute for LAN-scale runs.
struct SimScenario {
  std::vector<double> speeds;      // provider rows/s at reference_size
  double standalone_speed = 1.0;   // the reference machine's rows/s
  double overhead_ms_per_row = 0.0;
  std::vector<double> latency_s;   // optional per-provider fixed latency
  std::vector<std::uint64_t> loads;
  std::vector<Policy> policies{Policy::Homogenized, Policy::EqualSplit};
  double noise = 0.0;              // multiplicative speed jitter amplitude, [0, 1)
  std::uint64_t seed = 1;
  double reference_size = 800.0;

  double slope_m_s() const { return overhead_ms_per_row / 1000.0; }
  void validate() const;
};

// Scenario file: `key = value` lines with comma lists, e.g.
//   speeds = 4.0, 3.0, 5.0
//   loads = 200, 400
//   policies = homogenized, equal
SimScenario parse_scenario(const std::string& text);
SimScenario load_scenario(const std::string& path);

// The bundled nine-provider cluster used for the replication sweeps: the
// sixth and ninth providers are the slow ones and the overhead slope is
// 20 ms/row. The speed values are a stated guess, not measurements.
SimScenario paper_replication_scenario();

// One simulated experiment cell.
struct SimRun {
  Policy policy = Policy::Homogenized;
  std::uint64_t load = 0;
  std::size_t n_providers = 0;
  double n_h = 0.0;
  double t_standalone_s = 0.0;
  double t_total_s = 0.0;
  double t_compute_max_s = 0.0;  // max over providers of compute + latency
  double t_overhead_s = 0.0;     // charged once on the critical path
  double speedup_measured = 0.0;
  double speedup_formula = 0.0;
  std::vector<double> provider_finish_s;  // compute + latency, per provider
  std::vector<double> provider_share_rows;
};

struct SimOutcome {
  std::vector<SimRun> runs;
};

// Work is split in exact proportion to speed (homogenized) or exactly evenly
// (equal split); runtime speeds get one seeded jitter draw per provider.
// Deterministic: identical scenario and seed give identical output.
SimRun simulate_one(const SimScenario& scenario, Policy policy, std::uint64_t load,
                    std::size_t n_providers);

// Every (policy, load) cell at the full provider count.
SimOutcome simulate(const SimScenario& scenario);

// Every (policy, load, provider-count prefix) cell: the scalability sweep
// behind the speedup-versus-cluster-size curves.
SimOutcome sweep(const SimScenario& scenario);

// Header plus one row per run: run_id,policy,load_rows,n_providers,n_h,
// t_standalone_s,t_total_s,t_compute_max_s,t_overhead_s,speedup_measured,
// speedup_formula. LF endings, 9 significant digits.
std::string outcome_to_csv(const SimOutcome& outcome);
std::string csv_header();

// A timing row as it appears in the CSV schema, simulated or live.
struct LiveReport {
  std::string policy;
  std::uint64_t load = 0;
  std::size_t n_providers = 0;
  double n_h = 0.0;
  double t_standalone_s = 0.0;
  double t_total_s = 0.0;
  double speedup_measured = 0.0;
};

std::vector<LiveReport> parse_reports_csv(const std::string& text);

struct Deviation {
  LiveReport report;
  double speedup_formula = 0.0;  // recomputed with the scenario's overhead slope
  double deviation_abs = 0.0;
  double deviation_rel = 0.0;
};

// Measured-versus-formula comparison: the formula speedup is recomputed from
// each report's T, N_H and load with the scenario's overhead slope.
std::vector<Deviation> compare_live(const std::vector<LiveReport>& reports,
                                    const SimScenario& scenario);

// Report columns plus speedup_formula,deviation_abs,deviation_rel.
std::string deviations_to_csv(const std::vector<Deviation>& deviations);

}  // namespace tda
