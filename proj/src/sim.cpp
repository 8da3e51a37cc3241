#include "tda/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tda/config.hpp"
#include "tda/csv.hpp"
#include "tda/rng.hpp"

namespace tda {
namespace {

// Independent jitter stream per (seed, policy, load, n) cell so a single
// cell re-simulated in isolation reproduces its sweep values exactly.
std::uint64_t cell_seed(const SimScenario& s, Policy policy, std::uint64_t load,
                        std::size_t n_providers) {
  std::uint64_t x = mix64(s.seed ^ 0x5CE9A21700000000ULL);
  x = mix64(x ^ load);
  x = mix64(x ^ (std::uint64_t(n_providers) << 8 | std::uint64_t(policy)));
  return x;
}

}  // namespace

void SimScenario::validate() const {
  if (speeds.empty()) fail(Errc::empty_provider_set, "scenario has no provider speeds");
  for (double p : speeds)
    if (!(std::isfinite(p) && p > 0.0))
      fail(Errc::degenerate_performance, "provider speeds must be positive");
  if (!(std::isfinite(standalone_speed) && standalone_speed > 0.0))
    fail(Errc::degenerate_performance, "standalone speed must be positive");
  if (!(overhead_ms_per_row >= 0.0 && std::isfinite(overhead_ms_per_row)))
    fail(Errc::invalid_config, "overhead_ms_per_row must be nonnegative");
  if (loads.empty()) fail(Errc::invalid_config, "scenario has no loads");
  for (auto l : loads)
    if (l == 0) fail(Errc::invalid_config, "loads must be positive");
  if (policies.empty()) fail(Errc::invalid_config, "scenario has no policies");
  if (!(noise >= 0.0 && noise < 1.0)) fail(Errc::invalid_config, "noise must be in [0, 1)");
  if (!(reference_size > 0.0)) fail(Errc::invalid_config, "reference_size must be positive");
  if (!latency_s.empty() && latency_s.size() != speeds.size())
    fail(Errc::invalid_config, "latency_s must list one value per provider");
  for (double l : latency_s)
    if (!(std::isfinite(l) && l >= 0.0))
      fail(Errc::invalid_config, "latencies must be nonnegative");
}

SimScenario parse_scenario(const std::string& text) {
  SimScenario s;
  for (const auto& [key, value] : parse_key_values(text)) {
    if (key == "speeds") s.speeds = parse_double_list(value);
    else if (key == "standalone_speed") s.standalone_speed = parse_double(value, key);
    else if (key == "overhead_ms_per_row") s.overhead_ms_per_row = parse_double(value, key);
    else if (key == "latency_s") s.latency_s = parse_double_list(value);
    else if (key == "loads") s.loads = parse_uint_list(value);
    else if (key == "noise") s.noise = parse_double(value, key);
    else if (key == "seed") s.seed = parse_uint(value, key);
    else if (key == "reference_size") s.reference_size = parse_double(value, key);
    else if (key == "policies") {
      s.policies.clear();
      std::istringstream in(value);
      std::string item;
      while (std::getline(in, item, ',')) {
        auto b = item.find_first_not_of(" \t");
        auto e = item.find_last_not_of(" \t");
        s.policies.push_back(parse_policy(item.substr(b, e - b + 1)));
      }
    } else {
      fail(Errc::invalid_config, "unknown scenario key '" + key + "'");
    }
  }
  s.validate();
  return s;
}

SimScenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::invalid_config, "cannot open scenario '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

SimScenario paper_replication_scenario() {
  SimScenario s;
  s.speeds = {4.0, 3.0, 5.0, 3.5, 4.5, 1.0, 4.0, 3.5, 0.8};
  s.standalone_speed = 4.0;
  s.overhead_ms_per_row = 20.0;
  s.loads = {200, 400, 600, 800, 1000};
  s.policies = {Policy::Homogenized, Policy::EqualSplit};
  s.noise = 0.0;
  s.seed = 1;
  s.reference_size = 800.0;
  return s;
}

SimRun simulate_one(const SimScenario& scenario, Policy policy, std::uint64_t load,
                    std::size_t n_providers) {
  scenario.validate();
  if (n_providers == 0 || n_providers > scenario.speeds.size())
    fail(Errc::invalid_argument, "provider count out of range");

  double ref = scenario.reference_size;
  double l = static_cast<double>(load);
  double row_cost = (l * l) / (ref * ref);  // seconds per row at unit speed

  SimRun run;
  run.policy = policy;
  run.load = load;
  run.n_providers = n_providers;
  run.t_standalone_s = l * row_cost / scenario.standalone_speed;

  double p_total = 0.0;
  for (std::size_t i = 0; i < n_providers; ++i) p_total += scenario.speeds[i];
  run.n_h = p_total / scenario.standalone_speed;

  Lcg jitter(cell_seed(scenario, policy, load, n_providers));
  run.provider_finish_s.resize(n_providers);
  run.provider_share_rows.resize(n_providers);
  double worst = 0.0;
  for (std::size_t i = 0; i < n_providers; ++i) {
    double planned_speed = scenario.speeds[i];
    double share = policy == Policy::Homogenized ? l * (planned_speed / p_total)
                                                 : l / static_cast<double>(n_providers);
    // Plans come from the heartbeat snapshot; runtime speed differs by the
    // jitter draw. That gap is exactly the measured-versus-formula deviation.
    double runtime_speed = planned_speed;
    if (scenario.noise > 0.0)
      runtime_speed *= jitter.next_range(1.0 - scenario.noise, 1.0 + scenario.noise);
    double latency = scenario.latency_s.empty() ? 0.0 : scenario.latency_s[i];
    double finish = share * row_cost / runtime_speed + latency;
    run.provider_share_rows[i] = share;
    run.provider_finish_s[i] = finish;
    worst = std::max(worst, finish);
  }

  run.t_compute_max_s = worst;
  run.t_overhead_s = scenario.slope_m_s() * l;
  run.t_total_s = run.t_compute_max_s + run.t_overhead_s;
  run.speedup_measured = run.t_standalone_s / run.t_total_s;
  run.speedup_formula = predicted_speedup(
      SpeedupModel(run.t_standalone_s, run.n_h, OverheadModel(scenario.slope_m_s()), l));
  return run;
}

SimOutcome simulate(const SimScenario& scenario) {
  scenario.validate();
  SimOutcome out;
  for (Policy policy : scenario.policies)
    for (auto load : scenario.loads)
      out.runs.push_back(simulate_one(scenario, policy, load, scenario.speeds.size()));
  return out;
}

SimOutcome sweep(const SimScenario& scenario) {
  scenario.validate();
  SimOutcome out;
  for (Policy policy : scenario.policies)
    for (auto load : scenario.loads)
      for (std::size_t n = 1; n <= scenario.speeds.size(); ++n)
        out.runs.push_back(simulate_one(scenario, policy, load, n));
  return out;
}

std::string csv_header() {
  return "run_id,policy,load_rows,n_providers,n_h,t_standalone_s,t_total_s,t_compute_max_s,"
         "t_overhead_s,speedup_measured,speedup_formula";
}

std::string outcome_to_csv(const SimOutcome& outcome) {
  std::string out = csv_header() + "\n";
  std::size_t run_id = 0;
  for (const auto& r : outcome.runs) {
    out += std::to_string(++run_id);
    out += ",";
    out += to_string(r.policy);
    out += "," + std::to_string(r.load);
    out += "," + std::to_string(r.n_providers);
    out += "," + fmt_g9(r.n_h);
    out += "," + fmt_g9(r.t_standalone_s);
    out += "," + fmt_g9(r.t_total_s);
    out += "," + fmt_g9(r.t_compute_max_s);
    out += "," + fmt_g9(r.t_overhead_s);
    out += "," + fmt_g9(r.speedup_measured);
    out += "," + fmt_g9(r.speedup_formula);
    out += "\n";
  }
  return out;
}

std::vector<LiveReport> parse_reports_csv(const std::string& text) {
  std::vector<LiveReport> out;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first && line.rfind("run_id,", 0) == 0) {
      first = false;
      continue;
    }
    first = false;
    std::vector<std::string> cols;
    std::istringstream row(line);
    std::string col;
    while (std::getline(row, col, ',')) cols.push_back(col);
    if (cols.size() < 11) fail(Errc::invalid_config, "short CSV row: " + line);
    LiveReport r;
    r.policy = cols[1];
    r.load = parse_uint(cols[2], "load_rows");
    r.n_providers = parse_uint(cols[3], "n_providers");
    r.n_h = parse_double(cols[4], "n_h");
    r.t_standalone_s = parse_double(cols[5], "t_standalone_s");
    r.t_total_s = parse_double(cols[6], "t_total_s");
    r.speedup_measured = parse_double(cols[9], "speedup_measured");
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<Deviation> compare_live(const std::vector<LiveReport>& reports,
                                    const SimScenario& scenario) {
  if (reports.empty()) fail(Errc::empty_input, "no timing reports to compare");
  std::vector<Deviation> out;
  out.reserve(reports.size());
  for (const auto& r : reports) {
    Deviation d;
    d.report = r;
    d.speedup_formula = predicted_speedup(SpeedupModel(
        r.t_standalone_s, r.n_h, OverheadModel(scenario.slope_m_s()),
        static_cast<double>(r.load)));
    d.deviation_abs = r.speedup_measured - d.speedup_formula;
    d.deviation_rel = d.deviation_abs / d.speedup_formula;
    out.push_back(std::move(d));
  }
  return out;
}

std::string deviations_to_csv(const std::vector<Deviation>& deviations) {
  std::string out =
      "run_id,policy,load_rows,n_providers,n_h,t_standalone_s,t_total_s,speedup_measured,"
      "speedup_formula,deviation_abs,deviation_rel\n";
  std::size_t run_id = 0;
  for (const auto& d : deviations) {
    out += std::to_string(++run_id);
    out += "," + d.report.policy;
    out += "," + std::to_string(d.report.load);
    out += "," + std::to_string(d.report.n_providers);
    out += "," + fmt_g9(d.report.n_h);
    out += "," + fmt_g9(d.report.t_standalone_s);
    out += "," + fmt_g9(d.report.t_total_s);
    out += "," + fmt_g9(d.report.speedup_measured);
    out += "," + fmt_g9(d.speedup_formula);
    out += "," + fmt_g9(d.deviation_abs);
    out += "," + fmt_g9(d.deviation_rel);
    out += "\n";
  }
  return out;
}

}  // namespace tda
