#ifndef PFOLIO_MATRIX_HPP
#define PFOLIO_MATRIX_HPP

#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace pfolio {

// Dense row-major matrix of doubles. Missing entries are quiet NaNs.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) {
    assert(r < rows && c < cols);
    return data[r * cols + c];
  }
  double at(std::size_t r, std::size_t c) const {
    assert(r < rows && c < cols);
    return data[r * cols + c];
  }
  std::span<const double> row(std::size_t r) const {
    assert(r < rows);
    return {data.data() + r * cols, cols};
  }
  std::span<double> row(std::size_t r) {
    assert(r < rows);
    return {data.data() + r * cols, cols};
  }

  static bool is_missing(double v) { return std::isnan(v); }
  static double missing() { return std::nan(""); }
};

inline double squared_distance(std::span<const double> a,
                               std::span<const double> b) {
  assert(a.size() == b.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

}  // namespace pfolio

#endif
