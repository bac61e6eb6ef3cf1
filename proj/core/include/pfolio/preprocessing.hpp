#ifndef PFOLIO_PREPROCESSING_HPP
#define PFOLIO_PREPROCESSING_HPP

#include <span>
#include <vector>

#include "pfolio/matrix.hpp"
#include "pfolio/scenario.hpp"

namespace pfolio {

enum class NormalizationKind { none, zscore, linear };

// Per-feature statistics fitted on training rows only. Degenerate features
// (zero spread) transform to 0.
struct NormalizationState {
  NormalizationKind kind = NormalizationKind::none;
  std::vector<double> offset;  // mean (zscore) or min (linear)
  std::vector<double> scale;   // population stddev (zscore) or max-min
};

NormalizationState fit_normalization(const Matrix& rows,
                                     NormalizationKind kind);
std::vector<double> apply_normalization(const NormalizationState& state,
                                        std::span<const double> row);
Matrix apply_normalization(const NormalizationState& state,
                           const Matrix& rows);

// Training-median fill values; features with no observed value fall back
// to 0.
struct ImputationState {
  std::vector<double> fill;

  std::size_t n_features() const { return fill.size(); }
};

ImputationState fit_imputation(const Matrix& rows);
std::vector<double> apply_imputation(const ImputationState& state,
                                     std::span<const double> row);
Matrix apply_imputation(const ImputationState& state, const Matrix& rows);

enum class PerformanceTransform { raw, log, par10 };

// The PAR10 value of a single run.
double par10_value(double runtime, bool solved, double cutoff);

Matrix transform_performance(const PerformanceMatrix& matrix, double cutoff,
                             PerformanceTransform kind);

// PAR10 matrix (instances x algorithms) of a scenario.
Matrix par10_matrix(const Scenario& scenario);

// Drops algorithms whose removal leaves the virtual-best PAR10 on the
// training instances unchanged. Candidates are visited in ascending order
// of their solo training PAR10; at least one algorithm is always retained.
std::vector<std::size_t> filter_algorithms(
    const Scenario& scenario, std::span<const std::size_t> training);

}  // namespace pfolio

#endif
