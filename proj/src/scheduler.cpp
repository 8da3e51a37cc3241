#include "tda/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tda {

const char* to_string(Policy p) {
  return p == Policy::Homogenized ? "homogenized" : "equal";
}

Policy parse_policy(const std::string& text) {
  if (text == "homogenized") return Policy::Homogenized;
  if (text == "equal") return Policy::EqualSplit;
  fail(Errc::invalid_argument, "policy must be 'homogenized' or 'equal', got '" + text + "'");
}

HomogenizedPerformance homogenize_performance(const std::vector<PerformanceSample>& history,
                                              double now, const HomogenizeParams& params) {
  if (history.empty()) fail(Errc::no_samples, "no samples to homogenize");
  if (!(params.half_life > 0.0)) fail(Errc::invalid_argument, "half_life must be positive");

  double weight_sum = 0.0;
  double weighted = 0.0;
  double prev = -std::numeric_limits<double>::infinity();
  for (const auto& s : history) {
    if (s.reported_at < prev)
      fail(Errc::invalid_argument, "sample timestamps must be non-decreasing");
    prev = s.reported_at;
    if (!(s.raw_speed > 0.0)) fail(Errc::degenerate_performance, "sample raw_speed must be > 0");
    if (!(s.load_factor >= 0.0 && s.load_factor <= 1.0))
      fail(Errc::invalid_argument, "load_factor must be in [0, 1]");

    double age = std::max(0.0, now - s.reported_at);
    if (age > 64.0 * params.half_life) continue;  // weight is exactly zero
    double w = std::exp2(-age / params.half_life);
    weight_sum += w;
    weighted += w * s.raw_speed * (1.0 - s.load_factor);
  }

  double value = weight_sum > 0.0 ? weighted / weight_sum : 0.0;
  value = std::max(value, params.epsilon_floor);
  return HomogenizedPerformance{history.front().provider_id, value, now};
}

std::vector<std::pair<std::string, RowRange>> ScopePlan::row_ranges() const {
  std::vector<std::pair<std::string, RowRange>> out;
  out.reserve(allotments.size());
  std::uint64_t cursor = 0;
  for (const auto& a : allotments) {
    out.emplace_back(a.provider_id, RowRange{cursor, cursor + a.rows});
    cursor += a.rows;
  }
  return out;
}

ScopePlan compute_scope_lengths(std::uint64_t total_load, const PerformanceMap& performances) {
  if (performances.empty()) fail(Errc::empty_provider_set, "no providers to plan over");
  double p_total = 0.0;
  for (const auto& [id, p] : performances) {
    if (!(std::isfinite(p) && p > 0.0))
      fail(Errc::degenerate_performance, "provider '" + id + "' has non-positive performance");
    p_total += p;
  }

  struct Row {
    const std::string* id;
    double perf;
    std::uint64_t base;
    double remainder;
  };
  std::vector<Row> rows;
  rows.reserve(performances.size());
  std::uint64_t assigned = 0;
  for (const auto& [id, p] : performances) {
    double fair = static_cast<double>(total_load) * (p / p_total);
    double base = std::floor(fair);
    rows.push_back({&id, p, static_cast<std::uint64_t>(base), fair - base});
    assigned += static_cast<std::uint64_t>(base);
  }

  std::uint64_t leftover = total_load - assigned;
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (rows[a].remainder != rows[b].remainder) return rows[a].remainder > rows[b].remainder;
    if (rows[a].perf != rows[b].perf) return rows[a].perf > rows[b].perf;
    return *rows[a].id < *rows[b].id;
  });
  for (std::uint64_t k = 0; k < leftover; ++k) rows[order[k % order.size()]].base += 1;

  ScopePlan plan;
  plan.total_load = total_load;
  plan.allotments.reserve(rows.size());
  for (const auto& r : rows) plan.allotments.push_back({*r.id, r.base});
  return plan;
}

ScopePlan equal_scope_lengths(std::uint64_t total_load,
                              const std::vector<std::string>& provider_ids) {
  if (provider_ids.empty()) fail(Errc::empty_provider_set, "no providers to plan over");
  std::uint64_t n = provider_ids.size();
  std::uint64_t base = total_load / n;
  std::uint64_t remainder = total_load % n;

  ScopePlan plan;
  plan.total_load = total_load;
  plan.allotments.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i)
    plan.allotments.push_back({provider_ids[i], base + (i < remainder ? 1 : 0)});
  return plan;
}

std::map<std::string, double> predicted_finish_times(const ScopePlan& plan,
                                                     const PerformanceMap& performances) {
  if (plan.allotments.size() != performances.size())
    fail(Errc::plan_mismatch, "plan and performance map cover different provider sets");
  std::map<std::string, double> out;
  for (const auto& a : plan.allotments) {
    auto it = performances.find(a.provider_id);
    if (it == performances.end())
      fail(Errc::plan_mismatch, "no performance for provider '" + a.provider_id + "'");
    out[a.provider_id] = static_cast<double>(a.rows) / it->second;
  }
  return out;
}

}  // namespace tda
