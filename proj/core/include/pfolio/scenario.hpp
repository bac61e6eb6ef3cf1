#ifndef PFOLIO_SCENARIO_HPP
#define PFOLIO_SCENARIO_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pfolio/matrix.hpp"

namespace pfolio {

enum class RunStatus { solved, timeout, crashed };

std::string_view run_status_name(RunStatus status);

// Dense per-instance, per-algorithm runtime table. Timeouts and crashes are
// recorded at the cutoff; crashes keep their status but score like timeouts.
struct PerformanceMatrix {
  std::size_t n_instances = 0;
  std::size_t n_algorithms = 0;
  std::vector<double> runtimes;
  std::vector<RunStatus> statuses;

  PerformanceMatrix() = default;
  PerformanceMatrix(std::size_t n_inst, std::size_t n_alg)
      : n_instances(n_inst),
        n_algorithms(n_alg),
        runtimes(n_inst * n_alg, 0.0),
        statuses(n_inst * n_alg, RunStatus::timeout) {}

  double runtime(std::size_t instance, std::size_t algorithm) const {
    return runtimes[instance * n_algorithms + algorithm];
  }
  RunStatus status(std::size_t instance, std::size_t algorithm) const {
    return statuses[instance * n_algorithms + algorithm];
  }
  bool solved(std::size_t instance, std::size_t algorithm) const {
    return status(instance, algorithm) == RunStatus::solved;
  }
  void set(std::size_t instance, std::size_t algorithm, double runtime,
           RunStatus status) {
    runtimes[instance * n_algorithms + algorithm] = runtime;
    statuses[instance * n_algorithms + algorithm] = status;
  }
};

// Instance feature rows; missing values are NaN, never zero.
struct FeatureMatrix {
  std::vector<std::string> names;
  Matrix values;  // one row per instance

  std::size_t n_features() const { return names.size(); }
  std::span<const double> row(std::size_t instance) const {
    return values.row(instance);
  }
  bool row_all_missing(std::size_t instance) const {
    for (double v : values.row(instance)) {
      if (!Matrix::is_missing(v)) return false;
    }
    return true;
  }
};

// A complete algorithm selection dataset: runtimes, features, feature
// computation costs and optional cross validation folds.
struct Scenario {
  std::string name;
  double cutoff = 0.0;
  std::vector<std::string> instances;
  std::vector<std::string> algorithms;
  PerformanceMatrix performance;
  FeatureMatrix features;
  std::vector<double> feature_costs;
  std::vector<std::uint8_t> solved_by_features;
  std::vector<int> folds;  // empty when absent, else one 1-based index each

  std::size_t n_instances() const { return instances.size(); }
  std::size_t n_algorithms() const { return algorithms.size(); }
  bool has_folds() const { return !folds.empty(); }
  int n_folds() const;

  std::size_t instance_index(std::string_view id) const;
  std::size_t algorithm_index(std::string_view id) const;

  // Checks every structural invariant; throws ValidationError.
  void validate() const;
};

// Reads a scenario directory (description.txt, runtimes.csv, features.csv,
// feature_costs.csv, optional cv.csv). All diagnostics carry file and line.
Scenario load_scenario(const std::filesystem::path& directory);

void save_scenario(const Scenario& scenario,
                   const std::filesystem::path& directory);

// Deterministic k-fold assignment; fold sizes differ by at most one.
Scenario split_folds(Scenario scenario, int k, std::uint64_t seed);

std::vector<std::size_t> fold_instances(const Scenario& scenario, int fold);
std::vector<std::size_t> complement_instances(const Scenario& scenario,
                                              int fold);

// Copy with only the given algorithm columns (used by algorithm filtering).
Scenario restrict_algorithms(const Scenario& scenario,
                             std::span<const std::size_t> keep);

}  // namespace pfolio

#endif
