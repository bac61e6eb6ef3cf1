#include "pfolio/preprocessing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pfolio/errors.hpp"

namespace pfolio {

NormalizationState fit_normalization(const Matrix& rows,
                                     NormalizationKind kind) {
  if (rows.rows == 0) {
    throw ValidationError("cannot fit normalization on empty input");
  }
  NormalizationState state;
  state.kind = kind;
  if (kind == NormalizationKind::none) return state;
  state.offset.assign(rows.cols, 0.0);
  state.scale.assign(rows.cols, 0.0);
  for (std::size_t j = 0; j < rows.cols; ++j) {
    if (kind == NormalizationKind::zscore) {
      double mean = 0.0;
      for (std::size_t i = 0; i < rows.rows; ++i) mean += rows.at(i, j);
      mean /= static_cast<double>(rows.rows);
      double var = 0.0;
      for (std::size_t i = 0; i < rows.rows; ++i) {
        double d = rows.at(i, j) - mean;
        var += d * d;
      }
      var /= static_cast<double>(rows.rows);
      state.offset[j] = mean;
      state.scale[j] = std::sqrt(var);
    } else {
      double lo = rows.at(0, j), hi = rows.at(0, j);
      for (std::size_t i = 1; i < rows.rows; ++i) {
        lo = std::min(lo, rows.at(i, j));
        hi = std::max(hi, rows.at(i, j));
      }
      state.offset[j] = lo;
      state.scale[j] = hi - lo;
    }
  }
  return state;
}

std::vector<double> apply_normalization(const NormalizationState& state,
                                        std::span<const double> row) {
  if (state.kind == NormalizationKind::none) {
    return {row.begin(), row.end()};
  }
  if (row.size() != state.offset.size()) {
    throw ValidationError("feature row length does not match normalization");
  }
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) {
    out[j] = state.scale[j] == 0.0
                 ? 0.0
                 : (row[j] - state.offset[j]) / state.scale[j];
  }
  return out;
}

Matrix apply_normalization(const NormalizationState& state,
                           const Matrix& rows) {
  Matrix out(rows.rows, rows.cols);
  for (std::size_t i = 0; i < rows.rows; ++i) {
    auto r = apply_normalization(state, rows.row(i));
    std::copy(r.begin(), r.end(), out.row(i).begin());
  }
  return out;
}

ImputationState fit_imputation(const Matrix& rows) {
  if (rows.rows == 0) {
    throw ValidationError("cannot fit imputation on empty input");
  }
  ImputationState state;
  state.fill.assign(rows.cols, 0.0);
  std::vector<double> column;
  for (std::size_t j = 0; j < rows.cols; ++j) {
    column.clear();
    for (std::size_t i = 0; i < rows.rows; ++i) {
      double v = rows.at(i, j);
      if (!Matrix::is_missing(v)) column.push_back(v);
    }
    if (column.empty()) continue;  // fill stays 0
    std::sort(column.begin(), column.end());
    std::size_t mid = column.size() / 2;
    state.fill[j] = column.size() % 2 == 1
                        ? column[mid]
                        : 0.5 * (column[mid - 1] + column[mid]);
  }
  return state;
}

std::vector<double> apply_imputation(const ImputationState& state,
                                     std::span<const double> row) {
  if (row.size() != state.fill.size()) {
    throw ValidationError("feature row length does not match imputation");
  }
  std::vector<double> out(row.begin(), row.end());
  for (std::size_t j = 0; j < out.size(); ++j) {
    if (Matrix::is_missing(out[j])) out[j] = state.fill[j];
  }
  return out;
}

Matrix apply_imputation(const ImputationState& state, const Matrix& rows) {
  Matrix out(rows.rows, rows.cols);
  for (std::size_t i = 0; i < rows.rows; ++i) {
    auto r = apply_imputation(state, rows.row(i));
    std::copy(r.begin(), r.end(), out.row(i).begin());
  }
  return out;
}

double par10_value(double runtime, bool solved, double cutoff) {
  return solved ? runtime : 10.0 * cutoff;
}

Matrix transform_performance(const PerformanceMatrix& matrix, double cutoff,
                             PerformanceTransform kind) {
  Matrix out(matrix.n_instances, matrix.n_algorithms);
  for (std::size_t i = 0; i < matrix.n_instances; ++i) {
    for (std::size_t a = 0; a < matrix.n_algorithms; ++a) {
      double rt = matrix.runtime(i, a);
      switch (kind) {
        case PerformanceTransform::raw:
          out.at(i, a) = rt;
          break;
        case PerformanceTransform::log:
          // Floor at 5 ms, below timing resolution.
          out.at(i, a) = std::log10(std::max(rt, 0.005));
          break;
        case PerformanceTransform::par10:
          out.at(i, a) = par10_value(rt, matrix.solved(i, a), cutoff);
          break;
      }
    }
  }
  return out;
}

Matrix par10_matrix(const Scenario& scenario) {
  return transform_performance(scenario.performance, scenario.cutoff,
                               PerformanceTransform::par10);
}

namespace {

// Mean PAR10 of the per-instance best algorithm, restricted to `active`.
double vbs_par10(const Matrix& par10, std::span<const std::size_t> training,
                 const std::vector<std::size_t>& active) {
  double total = 0.0;
  for (std::size_t i : training) {
    double best = par10.at(i, active.front());
    for (std::size_t a : active) best = std::min(best, par10.at(i, a));
    total += best;
  }
  return total / static_cast<double>(training.size());
}

}  // namespace

std::vector<std::size_t> filter_algorithms(
    const Scenario& scenario, std::span<const std::size_t> training) {
  if (training.empty()) {
    throw ValidationError("algorithm filtering needs training instances");
  }
  Matrix par10 = par10_matrix(scenario);
  const std::size_t m = scenario.n_algorithms();

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> solo(m, 0.0);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t i : training) solo[a] += par10.at(i, a);
    solo[a] /= static_cast<double>(training.size());
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a,
                                                   std::size_t b) {
    return solo[a] < solo[b];
  });

  std::vector<std::size_t> retained(m);
  std::iota(retained.begin(), retained.end(), 0);
  double reference = vbs_par10(par10, training, retained);
  for (std::size_t candidate : order) {
    if (retained.size() == 1) break;
    std::vector<std::size_t> without;
    without.reserve(retained.size() - 1);
    for (std::size_t a : retained) {
      if (a != candidate) without.push_back(a);
    }
    if (vbs_par10(par10, training, without) == reference) {
      retained = std::move(without);
    }
  }
  return retained;
}

}  // namespace pfolio
