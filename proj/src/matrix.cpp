#include "tda/matrix.hpp"

#include <cstring>

#include "tda/rng.hpp"

namespace tda {

Matrix::Matrix(std::uint32_t r, std::uint32_t c, std::vector<double> d)
    : rows(r), cols(c), data(std::move(d)) {
  if (data.size() != static_cast<std::size_t>(r) * c)
    fail(Errc::invalid_argument, "matrix data length does not match dimensions");
}

Matrix multiply_reference(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows)
    fail(Errc::dimension_mismatch, "cannot multiply " + std::to_string(a.rows) + "x" +
                                       std::to_string(a.cols) + " by " + std::to_string(b.rows) +
                                       "x" + std::to_string(b.cols));
  Matrix c(a.rows, b.cols);
  for (std::uint32_t i = 0; i < a.rows; ++i)
    for (std::uint32_t j = 0; j < b.cols; ++j) {
      double acc = 0.0;
      for (std::uint32_t k = 0; k < a.cols; ++k) acc += a.at(i, k) * b.at(k, j);
      c.at(i, j) = acc;
    }
  return c;
}

Matrix multiply_block(const Matrix& block, const Matrix& b) { return multiply_reference(block, b); }

Matrix take_rows(const Matrix& a, std::uint64_t row_begin, std::uint64_t row_end) {
  if (row_begin > row_end || row_end > a.rows)
    fail(Errc::plan_mismatch, "row range [" + std::to_string(row_begin) + ", " +
                                  std::to_string(row_end) + ") outside matrix of " +
                                  std::to_string(a.rows) + " rows");
  Matrix out(static_cast<std::uint32_t>(row_end - row_begin), a.cols);
  std::memcpy(out.data.data(), a.data.data() + row_begin * a.cols,
              out.data.size() * sizeof(double));
  return out;
}

Matrix generate_matrix(std::uint32_t rows, std::uint32_t cols, std::uint64_t seed) {
  Matrix m(rows, cols);
  Lcg rng(seed);
  for (auto& x : m.data) x = rng.next_unit();
  return m;
}

bool bit_identical(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows || a.cols != b.cols) return false;
  return std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(double)) == 0;
}

}  // namespace tda
