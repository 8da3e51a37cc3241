#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tda/error.hpp"

namespace tda {

enum class Policy : std::uint8_t { Homogenized = 0, EqualSplit = 1 };

const char* to_string(Policy p);
Policy parse_policy(const std::string& text);

// One heartbeat-reported measurement from a provider.
struct PerformanceSample {
  std::string provider_id;
  double reported_at = 0.0;  // monotonic seconds
  double raw_speed = 0.0;    // work-units/second, > 0
  double load_factor = 0.0;  // busy fraction in [0, 1]
};

// The scalar the coordinator plans with: a provider's recent effective speed
// raw_speed * (1 - load_factor), recency-weighted.
struct HomogenizedPerformance {
  std::string provider_id;
  double value = 0.0;  // > 0 (clamped below by epsilon_floor)
  double computed_at = 0.0;
};

struct HomogenizeParams {
  double half_life = 30.0;      // seconds for a sample's weight to halve
  double epsilon_floor = 1e-6;  // lower clamp; values at or below it are
                                // treated as unusable by planners
};

// Exponentially weighted mean of effective speeds; a sample's weight halves
// every half_life seconds of age and is zero past 64 half-lives. History
// must be non-empty with non-decreasing timestamps.
HomogenizedPerformance homogenize_performance(const std::vector<PerformanceSample>& history,
                                              double now, const HomogenizeParams& params = {});

struct RowRange {
  std::uint64_t begin = 0;
  std::uint64_t end = 0;  // exclusive

  std::uint64_t length() const { return end - begin; }
  bool operator==(const RowRange&) const = default;
};

struct ScopeAllotment {
  std::string provider_id;
  std::uint64_t rows = 0;

  bool operator==(const ScopeAllotment&) const = default;
};

// Integer work allotments for one job. Allotments sum to total_load and keep
// planning order; row ranges are assigned contiguously in that order.
struct ScopePlan {
  std::uint64_t total_load = 0;
  std::vector<ScopeAllotment> allotments;

  // Contiguous [begin, end) per provider, in allotment order.
  std::vector<std::pair<std::string, RowRange>> row_ranges() const;

  bool operator==(const ScopePlan&) const = default;
};

using PerformanceMap = std::map<std::string, double>;  // provider -> work-units/s

// Proportional shares total_load * P_i / P_T rounded by the largest-remainder
// method; the sum is exactly total_load and every allotment is within one
// unit of its real fair share. Remainder ties go to higher performance, then
// lower provider id. Output is ordered by ascending provider id.
ScopePlan compute_scope_lengths(std::uint64_t total_load, const PerformanceMap& performances);

// The non-homogenized baseline: allotments differ by at most one, with the
// remainder absorbed by earlier providers in the list.
ScopePlan equal_scope_lengths(std::uint64_t total_load,
                              const std::vector<std::string>& provider_ids);

// Pure compute time per provider, rows / speed. Plan and map must cover
// identical provider sets.
std::map<std::string, double> predicted_finish_times(const ScopePlan& plan,
                                                     const PerformanceMap& performances);

}  // namespace tda
