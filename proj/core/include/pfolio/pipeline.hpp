#ifndef PFOLIO_PIPELINE_HPP
#define PFOLIO_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pfolio/evaluation.hpp"
#include "pfolio/scenario.hpp"
#include "pfolio/scheduling.hpp"
#include "pfolio/selectors.hpp"

namespace pfolio {

// A trained portfolio solver: scoring model, aligned pre-solving schedule
// and backup algorithm. Algorithm indices in the schedule and model refer
// to model.algorithms (the post-filtering list).
struct TrainedPortfolioSolver {
  SelectionModel model;
  Schedule schedule;
  double selector_slice = 0.0;
  double cutoff = 0.0;
  bool ignore_presolved = false;

  std::size_t backup() const { return model.backup; }
};

struct SolveOutcome {
  enum class Kind { feature_extractor, presolver, selected, backup };

  bool solved = false;
  double time = 0.0;  // includes feature cost and executed slices
  Kind kind = Kind::backup;
  std::string algorithm;  // empty for the feature extractor
};

struct PipelineOptions {
  bool ignore_presolved = false;   // retrain on instances the schedule misses
  bool filter_algorithms = false;  // drop zero-contribution algorithms
  std::size_t inner_folds = 10;    // selector performance estimation
  std::size_t jobs = 1;
};

// Per-instance performance estimate of the selection step, obtained by
// cross validation over the training instances. Feature costs are not
// included; the solving simulation charges them separately.
std::vector<RunResult> estimate_selection_performance(
    const Scenario& scenario, std::span<const std::size_t> training,
    const ApproachSpec& spec, const Hyperparameters& hyperparameters,
    std::size_t folds, std::uint64_t seed, std::size_t jobs = 1);

// Full training phase: optional algorithm filtering, selector training,
// cross-validated selector estimate, schedule construction with the
// estimate as a simulated algorithm, and the optional retraining pass on
// instances the schedule leaves unsolved.
TrainedPortfolioSolver train_pipeline(const Scenario& scenario,
                                      std::span<const std::size_t> training,
                                      const ApproachSpec& spec,
                                      const Hyperparameters& hyperparameters,
                                      std::uint64_t seed,
                                      const PipelineOptions& options = {});

// Replays the solving workflow against recorded data: feature computation,
// scoring, schedule execution with the selected algorithm removed, and the
// final run with the remaining budget.
SolveOutcome simulate_solve(const TrainedPortfolioSolver& solver,
                            std::size_t instance, const Scenario& scenario);

struct EvaluateOptions : PipelineOptions {
  std::size_t grid_folds = 3;
  std::optional<Hyperparameters> fixed_hyperparameters;
  std::optional<Grid> grid_override;  // searched instead of the default grid
};

// K-fold cross validation: trains on k-1 folds (grid search nested inside)
// and simulates the held-out instances. Outcomes align with
// scenario.instances.
std::vector<SolveOutcome> evaluate_pipeline(const Scenario& scenario,
                                            const ApproachSpec& spec,
                                            int k_folds, std::uint64_t seed,
                                            const EvaluateOptions& options = {});

std::vector<RunResult> to_run_results(std::span<const SolveOutcome> outcomes);

// Versioned JSON model file (schedule slices serialize with 3 fractional
// digits); loading refuses other format versions.
void save_solver(const TrainedPortfolioSolver& solver,
                 const std::filesystem::path& path);
TrainedPortfolioSolver load_solver(const std::filesystem::path& path);

}  // namespace pfolio

#endif
