#pragma once

#include <cstddef>
#include <vector>

namespace neosleep {

/// Dense row-major matrix of doubles. Rows are samples, columns features.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double operator()(std::size_t r, std::size_t c) const {
    return values[r * cols + c];
  }
  double& operator()(std::size_t r, std::size_t c) {
    return values[r * cols + c];
  }

  const double* row(std::size_t r) const { return values.data() + r * cols; }
  double* row(std::size_t r) { return values.data() + r * cols; }
};

} // namespace neosleep
