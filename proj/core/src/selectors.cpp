#include "pfolio/selectors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "pfolio/errors.hpp"
#include "pfolio/evaluation.hpp"
#include "pfolio/parallel.hpp"
#include "pfolio/pipeline.hpp"

namespace pfolio {

namespace {

constexpr std::array<Approach, 7> kAllApproaches = {
    Approach::aspeed,     Approach::cf1,        Approach::measp,
    Approach::isac,       Approach::threes,     Approach::satzilla09,
    Approach::satzilla11,
};

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kNoCap = std::numeric_limits<std::size_t>::max();

}  // namespace

std::string_view approach_name(Approach approach) {
  switch (approach) {
    case Approach::aspeed:
      return "aspeed";
    case Approach::cf1:
      return "cf1";
    case Approach::measp:
      return "measp";
    case Approach::isac:
      return "isac";
    case Approach::threes:
      return "threes";
    case Approach::satzilla09:
      return "satzilla09";
    case Approach::satzilla11:
      return "satzilla11";
  }
  return "unknown";
}

Approach approach_from_name(std::string_view name) {
  for (Approach a : kAllApproaches) {
    if (approach_name(a) == name) return a;
  }
  std::string valid;
  for (Approach a : kAllApproaches) {
    if (!valid.empty()) valid += ", ";
    valid += approach_name(a);
  }
  throw ValidationError("unknown approach '" + std::string(name) +
                        "'; valid approaches: " + valid);
}

std::span<const Approach> all_approaches() { return kAllApproaches; }

double ApproachSpec::presolve_time_limit(double cutoff) const {
  return max_presolve_time_at_600 * (cutoff / 600.0);
}

ApproachSpec approach_spec(Approach approach) {
  switch (approach) {
    case Approach::aspeed:
      return {approach, NormalizationKind::none, kNoCap, kInf};
    case Approach::cf1:
      return {approach, NormalizationKind::zscore, 0, 0.0};
    case Approach::measp:
      return {approach, NormalizationKind::none, 0, 0.0};
    case Approach::isac:
      return {approach, NormalizationKind::linear, 0, 0.0};
    case Approach::threes:
      return {approach, NormalizationKind::linear, kNoCap, 60.0};
    case Approach::satzilla09:
      return {approach, NormalizationKind::zscore, 2, 20.0};
    case Approach::satzilla11:
      return {approach, NormalizationKind::zscore, 3, 30.0};
  }
  throw ValidationError("unknown approach");
}

double hyperparameter(const Hyperparameters& params, const std::string& name,
                      double fallback) {
  auto it = params.find(name);
  return it == params.end() ? fallback : it->second;
}

std::size_t Grid::n_points() const {
  std::size_t n = 1;
  for (const auto& [name, values] : axes) n *= values.size();
  return axes.empty() ? 0 : n;
}

Hyperparameters Grid::point(std::size_t index) const {
  Hyperparameters point;
  for (std::size_t axis = axes.size(); axis-- > 0;) {
    const auto& [name, values] = axes[axis];
    point[name] = values[index % values.size()];
    index /= values.size();
  }
  return point;
}

Grid default_grid(Approach approach, const Scenario& scenario) {
  const double d = static_cast<double>(
      std::max<std::size_t>(1, scenario.features.n_features()));
  Grid grid;
  switch (approach) {
    case Approach::aspeed:
    case Approach::measp:
      break;  // nothing to tune
    case Approach::cf1:
      grid.axes.push_back({"lambda", {0.01, 0.1, 1.0}});
      grid.axes.push_back({"gamma", {0.25 / d, 1.0 / d, 4.0 / d}});
      break;
    case Approach::isac:
      grid.axes.push_back({"k", {2, 3, 4, 6, 8}});
      break;
    case Approach::threes:
      grid.axes.push_back({"k", {1, 3, 5, 9}});
      break;
    case Approach::satzilla09:
      grid.axes.push_back({"lambda", {0.01, 0.1, 1.0, 10.0}});
      break;
    case Approach::satzilla11:
      grid.axes.push_back({"max_depth", {6, 12}});
      break;
  }
  return grid;
}

namespace {

// Preprocessed training data shared by the approach-specific trainers.
struct TrainingData {
  Matrix features;  // imputed + normalized, one row per training instance
  Matrix par10;     // training x algorithms
  Matrix log_runtime;
};

TrainingData preprocess(const Scenario& scenario,
                        std::span<const std::size_t> training,
                        SelectionModel& model) {
  Matrix raw(training.size(), scenario.features.n_features());
  for (std::size_t r = 0; r < training.size(); ++r) {
    auto row = scenario.features.row(training[r]);
    std::copy(row.begin(), row.end(), raw.row(r).begin());
  }
  model.imputation = fit_imputation(raw);
  Matrix imputed = apply_imputation(model.imputation, raw);
  model.normalization = fit_normalization(imputed, model.spec.normalization);

  TrainingData data;
  data.features = apply_normalization(model.normalization, imputed);
  data.par10 = Matrix(training.size(), scenario.n_algorithms());
  data.log_runtime = Matrix(training.size(), scenario.n_algorithms());
  for (std::size_t r = 0; r < training.size(); ++r) {
    for (std::size_t a = 0; a < scenario.n_algorithms(); ++a) {
      double rt = scenario.performance.runtime(training[r], a);
      bool solved = scenario.performance.solved(training[r], a);
      data.par10.at(r, a) = par10_value(rt, solved, scenario.cutoff);
      data.log_runtime.at(r, a) = std::log10(std::max(rt, 0.005));
    }
  }
  return data;
}

std::vector<double> column(const Matrix& m, std::size_t col) {
  std::vector<double> out(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) out[i] = m.at(i, col);
  return out;
}

PairwiseState train_pairwise(const TrainingData& data,
                             const Hyperparameters& hp, std::uint64_t seed,
                             std::size_t jobs) {
  const std::size_t m = data.par10.cols;
  PairwiseState state;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      state.pairs.push_back({a, b, false, {}});
    }
  }
  ForestParams params;
  params.n_trees = static_cast<std::size_t>(hyperparameter(hp, "trees", 99));
  params.max_depth =
      static_cast<std::size_t>(hyperparameter(hp, "max_depth", 16));
  parallel_for(state.pairs.size(), jobs, [&](std::size_t p) {
    auto& pair = state.pairs[p];
    Matrix X(0, data.features.cols);
    std::vector<int> labels;
    std::vector<double> weights;
    for (std::size_t i = 0; i < data.features.rows; ++i) {
      double pa = data.par10.at(i, pair.first);
      double pb = data.par10.at(i, pair.second);
      if (pa == pb) continue;  // zero-cost example, carries no signal
      X.data.insert(X.data.end(), data.features.row(i).begin(),
                    data.features.row(i).end());
      ++X.rows;
      labels.push_back(pb < pa ? 1 : 0);
      weights.push_back(std::abs(pa - pb));
    }
    if (X.rows == 0) return;  // identical algorithms: leave the pair untrained
    pair.forest = train_forest(X, labels, weights, params,
                               seed + p * 100003, 1);
    pair.trained = true;
  });
  return state;
}

ClusterState train_cluster(const TrainingData& data,
                           const Hyperparameters& hp, std::uint64_t seed) {
  const std::size_t n = data.features.rows;
  std::size_t k = static_cast<std::size_t>(hyperparameter(hp, "k", 3));
  k = std::clamp<std::size_t>(k, 1, n);
  ClusterState state;
  state.kmeans = train_kmeans(data.features, k, seed);

  // Per-cluster best algorithm by mean training PAR10.
  const std::size_t m = data.par10.cols;
  Matrix totals(k, m);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = state.kmeans.assign(data.features.row(i));
    ++counts[c];
    for (std::size_t a = 0; a < m; ++a) {
      totals.at(c, a) += data.par10.at(i, a);
    }
  }
  std::vector<double> global(m, 0.0);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t i = 0; i < n; ++i) global[a] += data.par10.at(i, a);
  }
  state.best_algorithm.assign(k, 0);
  for (std::size_t c = 0; c < k; ++c) {
    // Clusters left empty after max_iters fall back to the global best.
    const bool empty = counts[c] == 0;
    std::size_t best = 0;
    double best_score = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
      double s = empty ? global[a] : totals.at(c, a);
      if (a == 0 || s < best_score) {
        best = a;
        best_score = s;
      }
    }
    state.best_algorithm[c] = best;
  }
  return state;
}

}  // namespace

SelectionModel train_selector(const Scenario& scenario,
                              std::span<const std::size_t> training,
                              const ApproachSpec& spec,
                              const Hyperparameters& hyperparameters,
                              std::uint64_t seed, std::size_t jobs) {
  SelectionModel model;
  model.spec = spec;
  model.algorithms = scenario.algorithms;
  model.hyperparameters = hyperparameters;
  if (training.empty()) {
    throw ValidationError("selector training needs training instances");
  }
  model.backup = single_best_algorithm(scenario, training);
  if (spec.approach == Approach::aspeed) {
    model.state = ScheduleOnlyState{};
    return model;
  }
  if (training.size() < 2) {
    throw ValidationError("selector training needs at least 2 instances");
  }
  if (scenario.n_algorithms() < 2) {
    throw ValidationError("selector training needs at least 2 algorithms");
  }
  bool any_solved = false;
  for (std::size_t i : training) {
    for (std::size_t a = 0; a < scenario.n_algorithms() && !any_solved; ++a) {
      any_solved = scenario.performance.solved(i, a);
    }
  }
  if (!any_solved) {
    throw ValidationError(
        "degenerate training data: no algorithm solves any instance");
  }

  TrainingData data = preprocess(scenario, training, model);
  const std::size_t m = scenario.n_algorithms();

  switch (spec.approach) {
    case Approach::satzilla09: {
      RegressionState state;
      state.models.resize(m);
      double lambda = hyperparameter(hyperparameters, "lambda", 1.0);
      parallel_for(m, jobs, [&](std::size_t a) {
        state.models[a] =
            train_ridge(data.features, column(data.log_runtime, a), lambda);
      });
      model.state = std::move(state);
      break;
    }
    case Approach::cf1: {
      KernelRegressionState state;
      state.models.resize(m);
      double lambda = hyperparameter(hyperparameters, "lambda", 1.0);
      double gamma = hyperparameter(
          hyperparameters, "gamma",
          1.0 / static_cast<double>(std::max<std::size_t>(
                    1, scenario.features.n_features())));
      parallel_for(m, jobs, [&](std::size_t a) {
        state.models[a] = train_kernel_ridge(
            data.features, column(data.par10, a), gamma, lambda);
      });
      model.state = std::move(state);
      break;
    }
    case Approach::measp: {
      model.state = NeighborState{data.features, data.par10, 1};
      break;
    }
    case Approach::threes: {
      std::size_t k = static_cast<std::size_t>(
          hyperparameter(hyperparameters, "k", 3));
      k = std::clamp<std::size_t>(k, 1, training.size());
      model.state = NeighborState{data.features, data.par10, k};
      break;
    }
    case Approach::isac: {
      model.state = train_cluster(data, hyperparameters, seed);
      break;
    }
    case Approach::satzilla11: {
      model.state = train_pairwise(data, hyperparameters, seed, jobs);
      break;
    }
    case Approach::aspeed:
      break;  // handled above
  }
  return model;
}

std::vector<double> score_algorithms(const SelectionModel& model,
                                     std::span<const double> raw_features) {
  if (model.schedule_only()) {
    throw std::logic_error("schedule-only model has no scoring model");
  }
  if (raw_features.size() != model.imputation.n_features()) {
    throw ValidationError("feature vector length mismatch: expected " +
                          std::to_string(model.imputation.n_features()) +
                          ", got " + std::to_string(raw_features.size()));
  }
  std::vector<double> row = apply_imputation(model.imputation, raw_features);
  row = apply_normalization(model.normalization, row);

  const std::size_t m = model.algorithms.size();
  std::vector<double> scores(m, 0.0);
  if (const auto* reg = std::get_if<RegressionState>(&model.state)) {
    for (std::size_t a = 0; a < m; ++a) {
      scores[a] = reg->models[a].predict(row);
    }
  } else if (const auto* kreg =
                 std::get_if<KernelRegressionState>(&model.state)) {
    for (std::size_t a = 0; a < m; ++a) {
      scores[a] = kreg->models[a].predict(row);
    }
  } else if (const auto* nn = std::get_if<NeighborState>(&model.state)) {
    auto neighbors = nearest_neighbors(nn->features, row,
                                       std::min(nn->k, nn->features.rows));
    for (std::size_t a = 0; a < m; ++a) {
      double total = 0.0;
      for (std::size_t i : neighbors) total += nn->par10.at(i, a);
      scores[a] = total / static_cast<double>(neighbors.size());
    }
  } else if (const auto* cl = std::get_if<ClusterState>(&model.state)) {
    std::size_t cluster = cl->kmeans.assign(row);
    for (std::size_t a = 0; a < m; ++a) {
      scores[a] = a == cl->best_algorithm[cluster] ? 0.0 : 1.0;
    }
  } else if (const auto* pw = std::get_if<PairwiseState>(&model.state)) {
    for (const auto& pair : pw->pairs) {
      // Vote 1 means the second algorithm is predicted strictly faster;
      // an untrained pair keeps the tie rule (lower index wins).
      if (pair.trained && pair.forest.predict(row) == 1) {
        scores[pair.first] += 1.0;
      } else {
        scores[pair.second] += 1.0;
      }
    }
  }
  return scores;
}

std::size_t select_algorithm(const SelectionModel& model,
                             std::span<const double> raw_features) {
  std::vector<double> scores = score_algorithms(model, raw_features);
  std::size_t best = 0;
  for (std::size_t a = 1; a < scores.size(); ++a) {
    if (scores[a] < scores[best]) best = a;
  }
  return best;
}

Hyperparameters grid_search(const Scenario& scenario,
                            std::span<const std::size_t> training,
                            const ApproachSpec& spec, const Grid& grid,
                            std::size_t folds, std::uint64_t seed,
                            std::size_t jobs) {
  if (grid.empty()) return {};
  if (folds < 2) throw ValidationError("grid search needs at least 2 folds");
  const std::size_t n_points = grid.n_points();
  if (n_points == 1) return grid.point(0);
  std::vector<double> objective(n_points, 0.0);
  parallel_for(n_points, jobs, [&](std::size_t p) {
    auto estimates = estimate_selection_performance(
        scenario, training, spec, grid.point(p), folds, seed, 1);
    objective[p] = score(estimates, scenario.cutoff).par10;
  });
  std::size_t best = 0;
  for (std::size_t p = 1; p < n_points; ++p) {
    if (objective[p] < objective[best]) best = p;
  }
  return grid.point(best);
}

}  // namespace pfolio
