// pfolio: train, evaluate and query portfolio-based algorithm selectors
// from recorded runtime data, and extract features from ground programs
// in smodels format.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "pfolio/aspfeatures.hpp"
#include "pfolio/errors.hpp"
#include "pfolio/evaluation.hpp"
#include "pfolio/pipeline.hpp"
#include "pfolio/text.hpp"

namespace {

using namespace pfolio;

constexpr std::uint64_t kDefaultSeed = 42;

struct CommonOptions {
  std::uint64_t seed = kDefaultSeed;
  std::size_t jobs = 1;
  std::string format = "text";
};

// Grid override syntax: "k=1:3:5,lambda=0.1" — colon-separated lattice
// values per named axis. A grid of single values fixes the point outright.
Grid parse_grid(const std::string& text) {
  Grid grid;
  if (trim(text).empty()) return grid;
  for (const std::string& part : split(text, ',')) {
    auto eq = part.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("bad grid axis '" + part +
                            "', expected name=v1:v2:...");
    }
    std::vector<double> values;
    for (const std::string& token : split(part.substr(eq + 1), ':')) {
      auto value = parse_double(token);
      if (!value) {
        throw ValidationError("bad grid value in '" + part + "'");
      }
      values.push_back(*value);
    }
    grid.axes.push_back({std::string(trim(part.substr(0, eq))), values});
  }
  return grid;
}

std::vector<std::size_t> all_instances(const Scenario& scenario) {
  std::vector<std::size_t> ids(scenario.n_instances());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  return ids;
}

void print_schedule(std::ostream& out, const TrainedPortfolioSolver& solver) {
  if (solver.schedule.empty()) {
    out << "pre-solving schedule: (empty)\n";
  } else {
    out << "pre-solving schedule:\n";
    for (const auto& component : solver.schedule.components) {
      out << "  " << solver.model.algorithms[component.algorithm] << " "
          << format_fixed(component.slice, 3) << "s\n";
    }
  }
}

int cmd_train(const std::string& scenario_path, const std::string& approach_id,
              const std::string& out_path, const std::string& grid_override,
              int grid_folds, bool ignore_presolved, bool filter,
              const CommonOptions& common) {
  Scenario scenario = load_scenario(scenario_path);
  ApproachSpec spec = approach_spec(approach_from_name(approach_id));
  auto training = all_instances(scenario);

  Grid grid = grid_override.empty() ? default_grid(spec.approach, scenario)
                                    : parse_grid(grid_override);
  Hyperparameters hp;
  if (!grid.empty()) {
    hp = grid_search(scenario, training, spec, grid,
                     static_cast<std::size_t>(grid_folds), common.seed,
                     common.jobs);
  }

  PipelineOptions options;
  options.ignore_presolved = ignore_presolved;
  options.filter_algorithms = filter;
  options.jobs = common.jobs;
  TrainedPortfolioSolver solver =
      train_pipeline(scenario, training, spec, hp, common.seed, options);
  save_solver(solver, out_path);

  std::cout << "approach: " << approach_name(spec.approach) << "\n";
  std::cout << "algorithms: " << join(solver.model.algorithms, ',') << "\n";
  std::cout << "backup: " << solver.model.algorithms[solver.backup()] << "\n";
  print_schedule(std::cout, solver);
  std::cout << "selector slice: " << format_fixed(solver.selector_slice, 3)
            << "s\n";
  if (!solver.model.schedule_only()) {
    auto estimates = estimate_selection_performance(
        scenario, training, spec, hp, options.inner_folds, common.seed,
        common.jobs);
    std::cout << "inner-cv selection PAR10: "
              << format_fixed(score(estimates, scenario.cutoff).par10, 2)
              << "\n";
  } else {
    std::cout << "selector: (none, schedule only)\n";
  }
  for (const auto& [name, value] : solver.model.hyperparameters) {
    std::cout << "hyperparameter " << name << ": " << format_double(value)
              << "\n";
  }
  std::cout << "model written to " << out_path << "\n";
  return 0;
}

int cmd_evaluate(const std::string& scenario_path,
                 std::vector<std::string> approach_ids, int folds,
                 const std::string& out_prefix,
                 const std::string& grid_override, int grid_folds,
                 bool ignore_presolved, bool filter,
                 const CommonOptions& common) {
  Scenario scenario = load_scenario(scenario_path);
  if (approach_ids.empty()) {
    for (Approach a : all_approaches()) {
      approach_ids.emplace_back(approach_name(a));
    }
  }
  auto ids = all_instances(scenario);

  std::vector<ComparisonRow> rows;
  for (const std::string& id : approach_ids) {
    ApproachSpec spec = approach_spec(approach_from_name(id));
    EvaluateOptions options;
    options.ignore_presolved = ignore_presolved;
    options.filter_algorithms = filter;
    options.jobs = common.jobs;
    options.grid_folds = static_cast<std::size_t>(grid_folds);
    if (!grid_override.empty()) options.grid_override = parse_grid(grid_override);
    auto outcomes =
        evaluate_pipeline(scenario, spec, folds, common.seed, options);
    rows.push_back({std::string(approach_name(spec.approach)),
                    score(to_run_results(outcomes), scenario.cutoff), false,
                    false});
  }

  // Baselines: the oracle and the single best algorithm, evaluated with the
  // same fold structure.
  Scenario folded = scenario.has_folds() && scenario.n_folds() == folds
                        ? scenario
                        : split_folds(scenario, folds, common.seed);
  rows.push_back({"vbs", vbs(folded, ids), true, false});
  {
    std::vector<RunResult> outcomes(folded.n_instances());
    for (int fold = 1; fold <= folds; ++fold) {
      auto training = complement_instances(folded, fold);
      auto held_out = fold_instances(folded, fold);
      std::size_t best = single_best_algorithm(folded, training);
      for (std::size_t i : held_out) {
        outcomes[i] = {folded.performance.solved(i, best),
                       folded.performance.runtime(i, best)};
      }
    }
    rows.push_back({"single_best", score(outcomes, folded.cutoff), false,
                    false});
  }

  Comparison comparison =
      compare_approaches(std::move(rows), 100000, 0.05, common.seed);

  if (common.format == "csv") {
    std::cout << render_comparison_csv(comparison);
  } else {
    std::cout << render_comparison_text(comparison);
  }
  if (!out_prefix.empty()) {
    std::ofstream summary(out_prefix + ".summary.csv");
    summary << render_comparison_csv(comparison);
    std::ofstream pvalues(out_prefix + ".pvalues.csv");
    pvalues << render_pvalues_csv(comparison);
    std::cout << "reports written to " << out_prefix << ".summary.csv and "
              << out_prefix << ".pvalues.csv\n";
  }
  return 0;
}

int cmd_select(const std::string& model_path, const std::string& features_text,
               const CommonOptions& common) {
  TrainedPortfolioSolver solver = load_solver(model_path);
  const bool csv = common.format == "csv";

  // Parse the feature row; '?' marks missing values, an empty row means
  // feature computation failed.
  std::vector<double> features;
  bool all_missing = true;
  if (!trim(features_text).empty()) {
    for (const std::string& token : split(features_text, ',')) {
      auto t = trim(token);
      if (t == "?") {
        features.push_back(Matrix::missing());
      } else {
        auto v = parse_double(t);
        if (!v) {
          throw ValidationError("bad feature value: " + std::string(t));
        }
        features.push_back(*v);
        all_missing = false;
      }
    }
  }

  auto plan_line = [&](const std::string& step, const std::string& algorithm,
                       double seconds) {
    if (csv) {
      std::cout << step << ',' << algorithm << ','
                << format_fixed(seconds, 3) << "\n";
    } else {
      std::cout << step << ": " << algorithm << " ("
                << format_fixed(seconds, 3) << "s)\n";
    }
  };
  if (csv) std::cout << "step,algorithm,seconds\n";

  if (solver.model.schedule_only()) {
    for (const auto& component : solver.schedule.components) {
      plan_line("presolve", solver.model.algorithms[component.algorithm],
                component.slice);
    }
    plan_line("backup", solver.model.algorithms[solver.backup()],
              solver.cutoff - solver.schedule.total_time());
    return 0;
  }
  if (features.empty() || all_missing) {
    plan_line("backup", solver.model.algorithms[solver.backup()],
              solver.cutoff);
    return 0;
  }
  std::size_t picked = select_algorithm(solver.model, features);
  double presolve_time = 0.0;
  for (const auto& component : solver.schedule.components) {
    if (component.algorithm == picked) continue;  // removed from the schedule
    plan_line("presolve", solver.model.algorithms[component.algorithm],
              component.slice);
    presolve_time += component.slice;
  }
  plan_line("selected", solver.model.algorithms[picked],
            solver.cutoff - presolve_time);
  return 0;
}

int cmd_features(const std::string& input_path, bool use_stdin,
                 const std::string& instance_id) {
  GroundProgram program;
  if (use_stdin) {
    program = parse_smodels(std::cin, "<stdin>");
  } else {
    std::ifstream in(input_path);
    if (!in) throw ValidationError("cannot read file: " + input_path);
    program = parse_smodels(in, input_path);
  }
  StaticFeatures features = compute_static_features(program);
  std::string id = instance_id;
  if (id.empty()) {
    id = use_stdin
             ? "instance"
             : std::filesystem::path(input_path).stem().string();
  }
  std::cout << feature_header_row() << "\n";
  std::cout << feature_value_row(features, id) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Portfolio-based algorithm selection toolkit"};
  app.require_subcommand(1);

  CommonOptions common;

  std::string scenario_path, approach_id, out_path, grid_override;
  std::string model_path, features_text, input_path, instance_id;
  std::vector<std::string> approach_ids;
  int folds = 10;
  int grid_folds = 3;
  bool ignore_presolved = false;
  bool filter = false;
  bool use_stdin = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", common.seed, "Random seed")
        ->default_val(kDefaultSeed);
    cmd->add_option("--jobs", common.jobs, "Worker threads")->default_val(1);
    cmd->add_option("--format", common.format, "Output format")
        ->check(CLI::IsMember({"text", "csv"}))
        ->default_val("text");
  };

  CLI::App* train = app.add_subcommand("train", "Train a portfolio solver");
  train->add_option("--scenario", scenario_path, "Scenario directory")
      ->required();
  train->add_option("--approach", approach_id, "Selection approach")
      ->required();
  train->add_option("--out", out_path, "Output model file")->required();
  train->add_option("--grid", grid_override,
                    "Hyperparameter grid override (name=v1:v2,...); single "
                    "values fix the point");
  train->add_option("--grid-folds", grid_folds, "Grid search folds")
      ->default_val(3);
  train->add_flag("--ignore-presolved", ignore_presolved,
                  "Retrain the scoring model on instances the schedule "
                  "leaves unsolved");
  train->add_flag("--filter-algorithms", filter,
                  "Drop algorithms with zero marginal contribution");
  add_common(train);

  CLI::App* evaluate =
      app.add_subcommand("evaluate", "Cross-validate selection approaches");
  evaluate->add_option("--scenario", scenario_path, "Scenario directory")
      ->required();
  evaluate->add_option("--approach", approach_ids,
                       "Approaches to evaluate (default: all)");
  evaluate->add_option("--folds", folds, "Cross validation folds")
      ->default_val(10);
  evaluate->add_option("--out", out_path, "Report file prefix");
  evaluate->add_option("--grid", grid_override,
                       "Hyperparameter grid override (name=v1:v2,...)");
  evaluate->add_option("--grid-folds", grid_folds, "Grid search folds")
      ->default_val(3);
  evaluate->add_flag("--ignore-presolved", ignore_presolved,
                     "Retrain scoring models on unsolved instances");
  evaluate->add_flag("--filter-algorithms", filter,
                     "Drop algorithms with zero marginal contribution");
  add_common(evaluate);

  CLI::App* select =
      app.add_subcommand("select", "Print the execution plan for a feature "
                                   "row");
  select->add_option("--model", model_path, "Model file")->required();
  select->add_option("--features", features_text,
                     "Comma-separated feature row ('?' = missing)");
  add_common(select);

  CLI::App* features_cmd = app.add_subcommand(
      "features", "Compute static features of a ground program in smodels "
                  "format");
  features_cmd->add_option("file", input_path, "Input file");
  features_cmd->add_flag("--stdin", use_stdin, "Read from standard input");
  features_cmd->add_option("--instance", instance_id,
                           "Instance id for the emitted row");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (train->parsed()) {
      return cmd_train(scenario_path, approach_id, out_path, grid_override,
                       grid_folds, ignore_presolved, filter, common);
    }
    if (evaluate->parsed()) {
      return cmd_evaluate(scenario_path, approach_ids, folds, out_path,
                          grid_override, grid_folds, ignore_presolved, filter,
                          common);
    }
    if (select->parsed()) {
      return cmd_select(model_path, features_text, common);
    }
    if (features_cmd->parsed()) {
      if (!use_stdin && input_path.empty()) {
        throw ValidationError("features: give an input file or --stdin");
      }
      return cmd_features(input_path, use_stdin, instance_id);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
