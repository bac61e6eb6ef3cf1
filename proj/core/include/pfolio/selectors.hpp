#ifndef PFOLIO_SELECTORS_HPP
#define PFOLIO_SELECTORS_HPP

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pfolio/learners.hpp"
#include "pfolio/preprocessing.hpp"
#include "pfolio/scenario.hpp"

namespace pfolio {

// The supported selection approaches. Every approach maps a preprocessed
// feature vector to per-algorithm scores where lower is better; aspeed is
// schedule-only and has no scoring model.
enum class Approach {
  aspeed,
  cf1,
  measp,
  isac,
  threes,
  satzilla09,
  satzilla11,
};

std::string_view approach_name(Approach approach);
Approach approach_from_name(std::string_view name);  // throws ValidationError
std::span<const Approach> all_approaches();

// One row of the approach table: normalization plus pre-solving caps.
// Time caps are stored in seconds at the 600 s reference cutoff and scale
// proportionally for other cutoffs.
struct ApproachSpec {
  Approach approach = Approach::aspeed;
  NormalizationKind normalization = NormalizationKind::none;
  std::size_t max_presolvers = 0;
  double max_presolve_time_at_600 = 0.0;  // +inf = unlimited

  double presolve_time_limit(double cutoff) const;
};

ApproachSpec approach_spec(Approach approach);

using Hyperparameters = std::map<std::string, double>;

double hyperparameter(const Hyperparameters& params, const std::string& name,
                      double fallback);

// Named parameter lattices; points enumerate in row-major order with the
// last axis varying fastest.
struct Grid {
  std::vector<std::pair<std::string, std::vector<double>>> axes;

  bool empty() const { return axes.empty(); }
  std::size_t n_points() const;
  Hyperparameters point(std::size_t index) const;
};

Grid default_grid(Approach approach, const Scenario& scenario);

// ---------------------------------------------------------------------------
// Trained selection model

struct RegressionState {  // satzilla09: one ridge model per algorithm
  std::vector<RidgeModel> models;
};
struct KernelRegressionState {  // cf1: one kernel ridge model per algorithm
  std::vector<KernelRidgeModel> models;
};
struct NeighborState {  // measp (k=1) and threes (k from grid search)
  Matrix features;      // normalized training rows
  Matrix par10;         // matching PAR10 rows
  std::size_t k = 1;
};
struct ClusterState {  // isac
  KMeansModel kmeans;
  std::vector<std::size_t> best_algorithm;  // per cluster
};
struct PairwiseState {  // satzilla11
  struct Pair {
    std::size_t first = 0;
    std::size_t second = 0;
    bool trained = false;  // untrained pairs vote for the lower index
    CostSensitiveForest forest;
  };
  std::vector<Pair> pairs;
};
struct ScheduleOnlyState {};  // aspeed

using SelectorState =
    std::variant<ScheduleOnlyState, RegressionState, KernelRegressionState,
                 NeighborState, ClusterState, PairwiseState>;

struct SelectionModel {
  ApproachSpec spec;
  ImputationState imputation;
  NormalizationState normalization;
  std::vector<std::string> algorithms;
  std::size_t backup = 0;  // index into algorithms
  Hyperparameters hyperparameters;
  SelectorState state;

  Approach approach() const { return spec.approach; }
  bool schedule_only() const { return spec.approach == Approach::aspeed; }
};

// Trains the scoring model of the given approach on the training instances.
// Imputation and normalization are fitted on the training rows only.
SelectionModel train_selector(const Scenario& scenario,
                              std::span<const std::size_t> training,
                              const ApproachSpec& spec,
                              const Hyperparameters& hyperparameters,
                              std::uint64_t seed, std::size_t jobs = 1);

// Applies imputation, normalization and the approach scoring; lower scores
// are better. Throws on length mismatch and for schedule-only models.
std::vector<double> score_algorithms(const SelectionModel& model,
                                     std::span<const double> raw_features);

std::size_t select_algorithm(const SelectionModel& model,
                             std::span<const double> raw_features);

// Picks the lattice point with the lowest mean inner-CV PAR10 of the
// simulated selection step; ties resolve to the earliest point.
Hyperparameters grid_search(const Scenario& scenario,
                            std::span<const std::size_t> training,
                            const ApproachSpec& spec, const Grid& grid,
                            std::size_t folds, std::uint64_t seed,
                            std::size_t jobs = 1);

}  // namespace pfolio

#endif
