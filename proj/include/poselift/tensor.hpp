#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "poselift/errors.hpp"

namespace poselift {

// Row-major dense double matrix. Deliberately minimal: the heavy math goes
// through the kernels layer, this is just owned storage with shape checks.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

  double* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
  const double* row(int r) const { return data.data() + static_cast<size_t>(r) * cols; }

  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

  size_t size() const { return data.size(); }
  void fill(double v) { std::fill(data.begin(), data.end(), v); }

  void require_shape(int r, int c, const char* what) const {
    if (rows != r || cols != c)
      throw ShapeMismatch(std::string(what) + ": expected " + std::to_string(r) + "x" +
                          std::to_string(c) + ", got " + std::to_string(rows) + "x" +
                          std::to_string(cols));
  }
};

using Vector = std::vector<double>;

}  // namespace poselift
