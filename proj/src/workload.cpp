#include "tda/workload.hpp"

#include <algorithm>

namespace tda {

std::uint64_t MatmulWorkload::work_units(const Matrix& first_operand) const {
  return first_operand.rows;
}

std::vector<RowChunk> MatmulWorkload::split(const Matrix& first_operand,
                                            const ScopePlan& plan) const {
  if (plan.total_load != first_operand.rows)
    fail(Errc::plan_mismatch, "plan totals " + std::to_string(plan.total_load) +
                                  " rows but matrix has " + std::to_string(first_operand.rows));
  std::vector<RowChunk> chunks;
  chunks.reserve(plan.allotments.size());
  for (const auto& [id, range] : plan.row_ranges())
    chunks.push_back({id, range, take_rows(first_operand, range.begin, range.end)});
  return chunks;
}

Matrix MatmulWorkload::compute(const Matrix& chunk, const Matrix& operand) const {
  return multiply_block(chunk, operand);
}

Matrix MatmulWorkload::merge(const std::vector<Matrix>& parts) const {
  if (parts.empty()) fail(Errc::empty_input, "nothing to merge");
  std::uint64_t rows = 0;
  for (const auto& p : parts) {
    if (p.cols != parts.front().cols)
      fail(Errc::plan_mismatch, "merge parts disagree on column count");
    rows += p.rows;
  }
  Matrix out(static_cast<std::uint32_t>(rows), parts.front().cols);
  std::size_t cursor = 0;
  for (const auto& p : parts) {
    std::copy(p.data.begin(), p.data.end(), out.data.begin() + cursor);
    cursor += p.data.size();
  }
  return out;
}

std::uint64_t work_units(const Matrix& first_operand) {
  return MatmulWorkload{}.work_units(first_operand);
}

std::vector<RowChunk> split_rows(const Matrix& first_operand, const ScopePlan& plan) {
  return MatmulWorkload{}.split(first_operand, plan);
}

const DivisibleWorkload& workload_for(const std::string& kind) {
  static const MatmulWorkload matmul;
  if (kind == matmul.kind()) return matmul;
  fail(Errc::invalid_argument, "unknown workload kind '" + kind + "'");
}

}  // namespace tda
