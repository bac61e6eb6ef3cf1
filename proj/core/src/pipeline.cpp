#include "pfolio/pipeline.hpp"

#include <algorithm>
#include <numeric>

#include "pfolio/errors.hpp"
#include "pfolio/log.hpp"
#include "pfolio/parallel.hpp"
#include "pfolio/preprocessing.hpp"
#include "pfolio/random.hpp"

namespace pfolio {

namespace {

// Deterministic fold assignment of `ids` into 1..k (round-robin after a
// seeded shuffle).
std::vector<int> assign_folds(std::span<const std::size_t> ids, std::size_t k,
                              std::uint64_t seed) {
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  shuffle(order, rng);
  std::vector<int> folds(ids.size());
  for (std::size_t p = 0; p < order.size(); ++p) {
    folds[order[p]] = static_cast<int>(p % k) + 1;
  }
  return folds;
}

}  // namespace

std::vector<RunResult> estimate_selection_performance(
    const Scenario& scenario, std::span<const std::size_t> training,
    const ApproachSpec& spec, const Hyperparameters& hyperparameters,
    std::size_t folds, std::uint64_t seed, std::size_t jobs) {
  if (training.size() < 2) {
    throw ValidationError("selector estimation needs at least 2 instances");
  }
  const std::size_t k = std::clamp<std::size_t>(folds, 2, training.size());
  std::vector<int> fold_of = assign_folds(training, k, seed);

  std::vector<RunResult> estimates(training.size());
  parallel_for(k, jobs, [&](std::size_t fold_index) {
    const int fold = static_cast<int>(fold_index) + 1;
    std::vector<std::size_t> inner_training;
    std::vector<std::size_t> held_out;  // positions within `training`
    for (std::size_t p = 0; p < training.size(); ++p) {
      if (fold_of[p] == fold) {
        held_out.push_back(p);
      } else {
        inner_training.push_back(training[p]);
      }
    }
    if (held_out.empty()) return;
    SelectionModel model = train_selector(scenario, inner_training, spec,
                                          hyperparameters, seed, 1);
    for (std::size_t p : held_out) {
      std::size_t instance = training[p];
      std::size_t picked =
          scenario.features.row_all_missing(instance)
              ? model.backup
              : select_algorithm(model, scenario.features.row(instance));
      estimates[p] = {scenario.performance.solved(instance, picked),
                      scenario.performance.runtime(instance, picked)};
    }
  });
  return estimates;
}

TrainedPortfolioSolver train_pipeline(const Scenario& scenario,
                                      std::span<const std::size_t> training,
                                      const ApproachSpec& spec,
                                      const Hyperparameters& hyperparameters,
                                      std::uint64_t seed,
                                      const PipelineOptions& options) {
  if (training.empty()) {
    throw ValidationError("pipeline training needs training instances");
  }

  // 1. Optional algorithm filtering. Scoring approaches need at least two
  //    algorithms, so filtering never shrinks the portfolio below that.
  Scenario working = scenario;
  if (options.filter_algorithms) {
    auto retained = filter_algorithms(scenario, training);
    bool allowed = retained.size() >= 2 || spec.approach == Approach::aspeed;
    if (allowed && retained.size() < scenario.n_algorithms()) {
      working = restrict_algorithms(scenario, retained);
    }
  }

  TrainedPortfolioSolver solver;
  solver.cutoff = working.cutoff;
  solver.ignore_presolved = options.ignore_presolved;

  const ScheduleConstraints constraints{
      spec.max_presolvers, spec.presolve_time_limit(working.cutoff)};
  RuntimeTable table = make_runtime_table(working, training);

  if (spec.approach == Approach::aspeed) {
    // Schedule-only: no scoring model, plain schedule over the full budget.
    solver.model = train_selector(working, training, spec, hyperparameters,
                                  seed, options.jobs);
    solver.schedule = align_schedule(
        compute_schedule(table, working.cutoff, constraints));
    solver.selector_slice = 0.0;
    return solver;
  }

  // 2. Cross-validated estimate of the selection step.
  std::vector<RunResult> estimates = estimate_selection_performance(
      working, training, spec, hyperparameters, options.inner_folds, seed,
      options.jobs);

  // 3. Schedule with the estimated selector as a simulated algorithm.
  std::vector<double> est_runtime(training.size());
  std::vector<std::uint8_t> est_solved(training.size());
  for (std::size_t p = 0; p < training.size(); ++p) {
    est_runtime[p] = estimates[p].time;
    est_solved[p] = estimates[p].solved ? 1 : 0;
  }
  auto with_selector = compute_schedule_with_selector(
      table, est_runtime, est_solved, working.cutoff, constraints);
  solver.schedule = align_schedule(with_selector.presolve);
  solver.selector_slice = with_selector.selector_slice;

  // 4. Final scoring model, optionally restricted to the instances the
  //    pre-solving schedule leaves unsolved.
  std::vector<std::size_t> model_training(training.begin(), training.end());
  if (options.ignore_presolved) {
    std::vector<std::size_t> unsolved;
    for (std::size_t i : training) {
      bool solved_by_schedule = false;
      for (const auto& component : solver.schedule.components) {
        if (working.performance.solved(i, component.algorithm) &&
            working.performance.runtime(i, component.algorithm) <=
                component.slice) {
          solved_by_schedule = true;
          break;
        }
      }
      if (!solved_by_schedule) unsolved.push_back(i);
    }
    if (unsolved.size() < 2) {
      log_warn("pre-solving schedule solves the training set; "
               "training the scoring model on all instances");
    } else {
      model_training = std::move(unsolved);
    }
  }
  solver.model = train_selector(working, model_training, spec,
                                hyperparameters, seed, options.jobs);
  // The backup choice uses the full training split regardless of the
  // retraining pass.
  solver.model.backup = single_best_algorithm(working, training);
  return solver;
}

SolveOutcome simulate_solve(const TrainedPortfolioSolver& solver,
                            std::size_t instance, const Scenario& scenario) {
  const double cutoff = solver.cutoff;
  // Model algorithm indices -> scenario algorithm indices (the model may
  // have been trained on a filtered portfolio).
  std::vector<std::size_t> to_scenario(solver.model.algorithms.size());
  for (std::size_t a = 0; a < solver.model.algorithms.size(); ++a) {
    to_scenario[a] = scenario.algorithm_index(solver.model.algorithms[a]);
  }
  auto runtime = [&](std::size_t model_alg) {
    return scenario.performance.runtime(instance, to_scenario[model_alg]);
  };
  auto solved = [&](std::size_t model_alg) {
    return scenario.performance.solved(instance, to_scenario[model_alg]);
  };

  double spent = 0.0;
  std::size_t final_algorithm = solver.backup();
  SolveOutcome::Kind final_kind = SolveOutcome::Kind::backup;

  if (!solver.model.schedule_only()) {
    // (a) Feature computation is charged first.
    double feature_cost = scenario.feature_costs[instance];
    spent += feature_cost;
    if (scenario.solved_by_features[instance] && feature_cost <= cutoff) {
      return {true, spent, SolveOutcome::Kind::feature_extractor, ""};
    }
    if (spent >= cutoff || scenario.features.row_all_missing(instance)) {
      // Feature computation failed: the backup gets the remaining budget.
      double remaining = cutoff - spent;
      if (remaining > 0.0 && solved(final_algorithm) &&
          runtime(final_algorithm) <= remaining) {
        return {true, spent + runtime(final_algorithm),
                SolveOutcome::Kind::backup,
                solver.model.algorithms[final_algorithm]};
      }
      return {false, cutoff, SolveOutcome::Kind::backup,
              solver.model.algorithms[final_algorithm]};
    }
    // (b) Score and pick the best algorithm.
    final_algorithm =
        select_algorithm(solver.model, scenario.features.row(instance));
    final_kind = SolveOutcome::Kind::selected;
  }

  // (c) Running the final algorithm twice cannot help, so its schedule
  // component is dropped.
  // (d) Execute the remaining schedule components in order.
  for (const auto& component : solver.schedule.components) {
    if (component.algorithm == final_algorithm) continue;
    double remaining = cutoff - spent;
    if (remaining <= 0.0) break;
    double slice = std::min(component.slice, remaining);
    if (solved(component.algorithm) && runtime(component.algorithm) <= slice) {
      return {true, spent + runtime(component.algorithm),
              SolveOutcome::Kind::presolver,
              solver.model.algorithms[component.algorithm]};
    }
    spent += slice;
  }

  // (e) The final algorithm gets the whole remaining budget.
  double remaining = cutoff - spent;
  if (remaining > 0.0 && solved(final_algorithm) &&
      runtime(final_algorithm) <= remaining) {
    return {true, spent + runtime(final_algorithm), final_kind,
            solver.model.algorithms[final_algorithm]};
  }
  return {false, cutoff, final_kind,
          solver.model.algorithms[final_algorithm]};
}

std::vector<SolveOutcome> evaluate_pipeline(const Scenario& scenario,
                                            const ApproachSpec& spec,
                                            int k_folds, std::uint64_t seed,
                                            const EvaluateOptions& options) {
  if (k_folds < 2) throw ValidationError("evaluation needs at least 2 folds");

  // Reuse a matching stored fold assignment, otherwise split here.
  Scenario folded =
      scenario.has_folds() && scenario.n_folds() == k_folds
          ? scenario
          : split_folds(scenario, k_folds, seed);

  std::vector<SolveOutcome> outcomes(folded.n_instances());
  parallel_for(static_cast<std::size_t>(k_folds), options.jobs,
               [&](std::size_t fold_index) {
    const int fold = static_cast<int>(fold_index) + 1;
    const std::uint64_t fold_seed = seed + fold_index;
    auto training = complement_instances(folded, fold);
    auto held_out = fold_instances(folded, fold);
    if (held_out.empty()) return;

    Hyperparameters hp;
    if (options.fixed_hyperparameters) {
      hp = *options.fixed_hyperparameters;
    } else {
      Grid grid = options.grid_override ? *options.grid_override
                                        : default_grid(spec.approach, folded);
      if (!grid.empty()) {
        hp = grid_search(folded, training, spec, grid, options.grid_folds,
                         fold_seed, 1);
      }
    }
    PipelineOptions train_options = options;
    train_options.jobs = 1;
    TrainedPortfolioSolver solver =
        train_pipeline(folded, training, spec, hp, fold_seed, train_options);
    for (std::size_t i : held_out) {
      outcomes[i] = simulate_solve(solver, i, folded);
    }
  });
  return outcomes;
}

std::vector<RunResult> to_run_results(std::span<const SolveOutcome> outcomes) {
  std::vector<RunResult> results(outcomes.size());
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    results[i] = {outcomes[i].solved, outcomes[i].time};
  }
  return results;
}

}  // namespace pfolio
