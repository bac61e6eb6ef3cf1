#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>  // vendored nlohmann/json

#include "pfolio/errors.hpp"
#include "pfolio/pipeline.hpp"
#include "pfolio/text.hpp"

namespace pfolio {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

Matrix matrix_from_json(const json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  m.data = j.at("data").get<std::vector<double>>();
  if (m.data.size() != m.rows * m.cols) {
    throw ValidationError("model file: matrix shape mismatch");
  }
  return m;
}

std::string_view normalization_name(NormalizationKind kind) {
  switch (kind) {
    case NormalizationKind::none:
      return "none";
    case NormalizationKind::zscore:
      return "zscore";
    case NormalizationKind::linear:
      return "linear";
  }
  return "none";
}

NormalizationKind normalization_from_name(const std::string& name) {
  if (name == "none") return NormalizationKind::none;
  if (name == "zscore") return NormalizationKind::zscore;
  if (name == "linear") return NormalizationKind::linear;
  throw ValidationError("model file: unknown normalization " + name);
}

json state_to_json(const SelectorState& state) {
  json j;
  if (std::holds_alternative<ScheduleOnlyState>(state)) {
    j["type"] = "schedule_only";
  } else if (const auto* reg = std::get_if<RegressionState>(&state)) {
    j["type"] = "ridge_per_algorithm";
    json models = json::array();
    for (const auto& m : reg->models) {
      models.push_back({{"weights", m.weights},
                        {"intercept", m.intercept},
                        {"lambda", m.lambda}});
    }
    j["models"] = std::move(models);
  } else if (const auto* kreg = std::get_if<KernelRegressionState>(&state)) {
    j["type"] = "kernel_ridge_per_algorithm";
    json models = json::array();
    for (const auto& m : kreg->models) {
      models.push_back({{"support", matrix_to_json(m.support)},
                        {"alpha", m.alpha},
                        {"gamma", m.gamma},
                        {"lambda", m.lambda}});
    }
    j["models"] = std::move(models);
  } else if (const auto* nn = std::get_if<NeighborState>(&state)) {
    j["type"] = "nearest_neighbors";
    j["k"] = nn->k;
    j["features"] = matrix_to_json(nn->features);
    j["par10"] = matrix_to_json(nn->par10);
  } else if (const auto* cl = std::get_if<ClusterState>(&state)) {
    j["type"] = "kmeans";
    j["centroids"] = matrix_to_json(cl->kmeans.centroids);
    j["inertia"] = cl->kmeans.inertia;
    j["best_algorithm"] = cl->best_algorithm;
  } else if (const auto* pw = std::get_if<PairwiseState>(&state)) {
    j["type"] = "pairwise_forest";
    json pairs = json::array();
    for (const auto& pair : pw->pairs) {
      json trees = json::array();
      for (const auto& tree : pair.forest.trees) {
        json nodes = json::array();
        for (const auto& node : tree.nodes) {
          nodes.push_back({node.feature, node.threshold, node.left,
                           node.right, node.label});
        }
        trees.push_back(std::move(nodes));
      }
      pairs.push_back({{"first", pair.first},
                       {"second", pair.second},
                       {"trained", pair.trained},
                       {"trees", std::move(trees)}});
    }
    j["pairs"] = std::move(pairs);
  }
  return j;
}

SelectorState state_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "schedule_only") return ScheduleOnlyState{};
  if (type == "ridge_per_algorithm") {
    RegressionState state;
    for (const auto& m : j.at("models")) {
      RidgeModel model;
      model.weights = m.at("weights").get<std::vector<double>>();
      model.intercept = m.at("intercept").get<double>();
      model.lambda = m.at("lambda").get<double>();
      state.models.push_back(std::move(model));
    }
    return state;
  }
  if (type == "kernel_ridge_per_algorithm") {
    KernelRegressionState state;
    for (const auto& m : j.at("models")) {
      KernelRidgeModel model;
      model.support = matrix_from_json(m.at("support"));
      model.alpha = m.at("alpha").get<std::vector<double>>();
      model.gamma = m.at("gamma").get<double>();
      model.lambda = m.at("lambda").get<double>();
      state.models.push_back(std::move(model));
    }
    return state;
  }
  if (type == "nearest_neighbors") {
    NeighborState state;
    state.k = j.at("k").get<std::size_t>();
    state.features = matrix_from_json(j.at("features"));
    state.par10 = matrix_from_json(j.at("par10"));
    return state;
  }
  if (type == "kmeans") {
    ClusterState state;
    state.kmeans.centroids = matrix_from_json(j.at("centroids"));
    state.kmeans.inertia = j.at("inertia").get<double>();
    state.best_algorithm =
        j.at("best_algorithm").get<std::vector<std::size_t>>();
    return state;
  }
  if (type == "pairwise_forest") {
    PairwiseState state;
    for (const auto& p : j.at("pairs")) {
      PairwiseState::Pair pair;
      pair.first = p.at("first").get<std::size_t>();
      pair.second = p.at("second").get<std::size_t>();
      pair.trained = p.at("trained").get<bool>();
      for (const auto& t : p.at("trees")) {
        DecisionTree tree;
        for (const auto& n : t) {
          DecisionTree::Node node;
          node.feature = n.at(0).get<int>();
          node.threshold = n.at(1).get<double>();
          node.left = n.at(2).get<int>();
          node.right = n.at(3).get<int>();
          node.label = n.at(4).get<int>();
          tree.nodes.push_back(node);
        }
        pair.forest.trees.push_back(std::move(tree));
      }
      state.pairs.push_back(std::move(pair));
    }
    return state;
  }
  throw ValidationError("model file: unknown state type " + type);
}

}  // namespace

void save_solver(const TrainedPortfolioSolver& solver,
                 const std::filesystem::path& path) {
  json j;
  j["format_version"] = kFormatVersion;
  j["approach"] = approach_name(solver.model.approach());
  j["cutoff"] = solver.cutoff;
  j["ignore_presolved"] = solver.ignore_presolved;
  j["selector_slice"] = solver.selector_slice;
  j["algorithms"] = solver.model.algorithms;
  j["backup"] = solver.model.algorithms[solver.model.backup];
  j["max_presolvers"] =
      solver.model.spec.max_presolvers ==
              std::numeric_limits<std::size_t>::max()
          ? json()
          : json(solver.model.spec.max_presolvers);
  j["max_presolve_time_at_600"] =
      std::isinf(solver.model.spec.max_presolve_time_at_600)
          ? json()
          : json(solver.model.spec.max_presolve_time_at_600);
  json schedule = json::array();
  for (const auto& component : solver.schedule.components) {
    schedule.push_back({solver.model.algorithms[component.algorithm],
                        format_fixed(component.slice, 3)});
  }
  j["schedule"] = std::move(schedule);
  j["normalization"] = {
      {"kind", normalization_name(solver.model.normalization.kind)},
      {"offset", solver.model.normalization.offset},
      {"scale", solver.model.normalization.scale}};
  j["imputation"] = {{"fill", solver.model.imputation.fill}};
  j["hyperparameters"] = solver.model.hyperparameters;
  j["state"] = state_to_json(solver.model.state);

  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write model file: " + path.string());
  out << j.dump(2) << "\n";
}

TrainedPortfolioSolver load_solver(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read model file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("model file " + path.string() + ": " + e.what());
  }
  try {
    if (j.at("format_version").get<int>() != kFormatVersion) {
      throw ValidationError(
          "model file format version mismatch: expected " +
          std::to_string(kFormatVersion) + ", got " +
          j.at("format_version").dump());
    }
    TrainedPortfolioSolver solver;
    solver.model.spec = approach_spec(
        approach_from_name(j.at("approach").get<std::string>()));
    solver.cutoff = j.at("cutoff").get<double>();
    solver.ignore_presolved = j.at("ignore_presolved").get<bool>();
    solver.selector_slice = j.at("selector_slice").get<double>();
    solver.model.algorithms =
        j.at("algorithms").get<std::vector<std::string>>();
    const std::string backup = j.at("backup").get<std::string>();
    solver.model.backup = 0;
    for (std::size_t a = 0; a < solver.model.algorithms.size(); ++a) {
      if (solver.model.algorithms[a] == backup) solver.model.backup = a;
    }
    for (const auto& component : j.at("schedule")) {
      const std::string id = component.at(0).get<std::string>();
      auto slice = parse_double(component.at(1).get<std::string>());
      if (!slice) throw ValidationError("model file: bad schedule slice");
      std::size_t index = 0;
      bool found = false;
      for (std::size_t a = 0; a < solver.model.algorithms.size(); ++a) {
        if (solver.model.algorithms[a] == id) {
          index = a;
          found = true;
        }
      }
      if (!found) {
        throw ValidationError("model file: schedule references unknown "
                              "algorithm " + id);
      }
      solver.schedule.components.push_back({index, *slice});
    }
    solver.model.normalization.kind = normalization_from_name(
        j.at("normalization").at("kind").get<std::string>());
    solver.model.normalization.offset =
        j.at("normalization").at("offset").get<std::vector<double>>();
    solver.model.normalization.scale =
        j.at("normalization").at("scale").get<std::vector<double>>();
    solver.model.imputation.fill =
        j.at("imputation").at("fill").get<std::vector<double>>();
    solver.model.hyperparameters =
        j.at("hyperparameters").get<Hyperparameters>();
    solver.model.state = state_from_json(j.at("state"));
    return solver;
  } catch (const json::exception& e) {
    throw ValidationError("model file " + path.string() + ": " + e.what());
  }
}

}  // namespace pfolio
