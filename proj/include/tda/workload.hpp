#pragma once

#include <memory>
#include <string>
#include <vector>

#include "tda/matrix.hpp"
#include "tda/scheduler.hpp"

namespace tda {

// One provider's slice of a row-granulated job.
struct RowChunk {
  std::string provider_id;
  RowRange range;
  Matrix block;
};

// Contract every linearly divisible workload satisfies: split the first
// operand by a plan, compute any chunk independently, and merging chunk
// results over any partition of the full range must reproduce the
// whole-range result exactly.
class DivisibleWorkload {
public:
  virtual ~DivisibleWorkload() = default;

  virtual std::string kind() const = 0;

  // Load measure in work-units; the quantity scope plans apportion.
  virtual std::uint64_t work_units(const Matrix& first_operand) const = 0;

  // Contiguous chunks in plan order. plan.total_load must equal the measure.
  virtual std::vector<RowChunk> split(const Matrix& first_operand,
                                      const ScopePlan& plan) const = 0;

  virtual Matrix compute(const Matrix& chunk, const Matrix& operand) const = 0;

  // Parts ordered by ascending row range, covering the full range.
  virtual Matrix merge(const std::vector<Matrix>& parts) const = 0;
};

// Row-granulated dense matrix multiplication, the reference workload.
class MatmulWorkload final : public DivisibleWorkload {
public:
  std::string kind() const override { return "matmul"; }
  std::uint64_t work_units(const Matrix& first_operand) const override;
  std::vector<RowChunk> split(const Matrix& first_operand,
                              const ScopePlan& plan) const override;
  Matrix compute(const Matrix& chunk, const Matrix& operand) const override;
  Matrix merge(const std::vector<Matrix>& parts) const override;
};

// Free-function forms used throughout the artifact.
std::uint64_t work_units(const Matrix& first_operand);
std::vector<RowChunk> split_rows(const Matrix& first_operand, const ScopePlan& plan);

// The workload registered under `kind`, or InvalidArgument.
const DivisibleWorkload& workload_for(const std::string& kind);

}  // namespace tda
