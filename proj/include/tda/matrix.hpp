#pragma once

#include <cstdint>
#include <vector>

#include "tda/error.hpp"

namespace tda {

// Dense row-major matrix of 64-bit floats. All entries are finite; the wire
// codec enforces this when a matrix crosses a channel.
struct Matrix {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::uint32_t r, std::uint32_t c)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}
  Matrix(std::uint32_t r, std::uint32_t c, std::vector<double> d);

  double& at(std::uint32_t i, std::uint32_t j) {
    return data[static_cast<std::size_t>(i) * cols + j];
  }
  double at(std::uint32_t i, std::uint32_t j) const {
    return data[static_cast<std::size_t>(i) * cols + j];
  }

  bool operator==(const Matrix&) const = default;
};

// c[i][j] = sum_k a[i][k] * b[k][j], accumulated strictly in ascending k.
// The fixed accumulation order is what makes a distributed product
// bit-identical to this sequential one. Deliberately the plain three-loop
// algorithm; do not swap in a blocked or otherwise reordered kernel.
Matrix multiply_reference(const Matrix& a, const Matrix& b);

// Product of a horizontal slice of the first operand with the full second
// operand; same accumulation order as multiply_reference.
Matrix multiply_block(const Matrix& block, const Matrix& b);

// Rows [row_begin, row_end) of a as their own matrix.
Matrix take_rows(const Matrix& a, std::uint64_t row_begin, std::uint64_t row_end);

// Seeded generator, entries uniform in [0, 1). Identical output for
// identical seeds on every node (see rng.hpp for the documented constants).
Matrix generate_matrix(std::uint32_t rows, std::uint32_t cols, std::uint64_t seed);

// Bit-level equality, the check the distributed product is held to.
bool bit_identical(const Matrix& a, const Matrix& b);

}  // namespace tda
