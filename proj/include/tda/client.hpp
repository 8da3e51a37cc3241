#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tda/channel.hpp"
#include "tda/matrix.hpp"
#include "tda/scheduler.hpp"

namespace tda {

// Collects partial results until every expected row range has arrived, then
// concatenates them in ascending row order. Arrival order never matters.
class AssemblyBuffer {
public:
  AssemblyBuffer(std::vector<RowRange> expected, std::uint32_t cols);

  // The range must be one of the expected ones and not yet received;
  // anything else (including overlaps) is a DuplicateRange.
  void insert(const RowRange& range, Matrix block);

  bool complete() const { return blocks_.size() == expected_.size(); }
  std::size_t received() const { return blocks_.size(); }

  Matrix assemble() const;  // Incomplete until complete()

private:
  std::vector<RowRange> expected_;  // sorted by begin
  std::uint32_t cols_;
  std::map<std::uint64_t, Matrix> blocks_;  // keyed by range begin
};

struct SubmitOptions {
  Endpoint coordinator;
  Policy policy = Policy::Homogenized;
  std::string client_id = "client";
  std::string reply_host = "127.0.0.1";  // must be reachable by providers
  double p_standalone = 0.0;             // > 0 skips local calibration
  bool measure_standalone = true;        // time the local reference product
  double extra_deadline_s = 30.0;        // added to 10x predicted finish
  std::uint64_t job_id = 0;              // 0 derives one from the clock
};

struct ProviderTiming {
  std::string provider_id;
  std::uint64_t rows = 0;
  double received_at_s = 0.0;    // since the job request went out
  double compute_seconds = 0.0;  // provider-stamped pure compute time
};

struct TimingReport {
  std::uint64_t job_id = 0;
  Policy policy = Policy::Homogenized;
  std::uint64_t load_rows = 0;
  std::size_t n_providers = 0;
  double p_total = 0.0;
  double p_standalone = 0.0;
  double t_standalone_s = 0.0;  // NaN when not measured
  double t_total_s = 0.0;
  double t_compute_max_s = 0.0;  // max provider-stamped compute duration
  double t_overhead_s = 0.0;     // t_total_s - t_compute_max_s
  std::vector<ProviderTiming> provider_times;
  ScopePlan plan;  // participating providers only

  double n_h() const { return p_total / p_standalone; }
  double speedup_measured() const { return t_standalone_s / t_total_s; }

  // Same column set the simulator emits. The formula column carries the
  // zero-overhead prediction N_H; a live client has no overhead-slope
  // estimate (compare_live supplies one).
  static std::string csv_header();
  std::string csv_line() const;
};

struct SubmitResult {
  Matrix product;
  TimingReport timing;
};

// The full triangle: request through the coordinator, broadcast the second
// operand to the chosen providers, collect their partial results directly,
// assemble. The product is bit-identical to multiply_reference(a, b).
SubmitResult submit(const Matrix& a, const Matrix& b, const SubmitOptions& options,
                    Transport& transport);

// One-shot performance-table query (the `status` subcommand).
StatusReplyBody query_status(Transport& transport, const Endpoint& coordinator);

}  // namespace tda
