// Acceptance suite: runs the project's acceptance criteria end to end and
// prints one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "../asp_corpus.hpp"
#include "../testutil.hpp"
#include "pfolio/aspfeatures.hpp"
#include "pfolio/evaluation.hpp"
#include "pfolio/pipeline.hpp"
#include "pfolio/text.hpp"

namespace {

using namespace pfolio;

void require(bool condition, const std::string& message) {
  if (!condition) throw std::runtime_error(message);
}

std::size_t worker_count() {
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : std::min<std::size_t>(hw, 4);
}

// ---------------------------------------------------------------------------

void metric_definitions() {
  std::vector<RunResult> outcomes{{true, 100.0}, {false, 600.0}};
  MetricReport r = score(outcomes, 600.0);
  require(r.par10 == 3050.0, "PAR10 of {solved 100, timeout} must be 3050");
  require(r.par1 == 350.0, "PAR1 of {solved 100, timeout} must be 350");
  require(r.timeouts == 1, "timeout count must be 1");

  Rng rng(2024);
  for (int round = 0; round < 1000; ++round) {
    double cutoff = uniform_real(rng, 1, 2000);
    std::size_t n = 1 + uniform_index(rng, 80);
    std::vector<RunResult> set;
    for (std::size_t i = 0; i < n; ++i) {
      bool solved = uniform01(rng) < 0.6;
      set.push_back({solved, solved ? uniform_real(rng, 1e-3, cutoff)
                                    : cutoff});
    }
    MetricReport report = score(set, cutoff);
    double identity = report.par1 + 9.0 * cutoff *
                                        static_cast<double>(report.timeouts) /
                                        static_cast<double>(n);
    require(std::abs(report.par10 - identity) < 1e-9,
            "PAR identity violated at round " + std::to_string(round));
  }
}

void schedule_oracle() {
  Rng rng(99);
  for (int round = 0; round < 200; ++round) {
    std::size_t n = 2 + uniform_index(rng, 11);   // <= 12 instances
    std::size_t m = 1 + uniform_index(rng, 4);    // <= 4 algorithms
    double cutoff = uniform_real(rng, 20, 100);
    Scenario s = test::make_random_scenario(rng, n, m, cutoff,
                                            uniform_real(rng, 0.3, 0.9));
    RuntimeTable table = make_runtime_table(s, test::iota_ids(n));
    double budget = uniform_real(rng, cutoff * 0.2, cutoff * 1.5);

    Schedule got = compute_schedule(table, budget);
    auto oracle = test::schedule_oracle(table, budget);
    std::size_t unsolved = 0;
    for (std::size_t i = 0; i < n; ++i) {
      bool covered = false;
      for (const auto& c : got.components) {
        if (table.is_solved(i, c.algorithm) &&
            table.runtime(i, c.algorithm) <= c.slice) {
          covered = true;
        }
      }
      if (!covered) ++unsolved;
    }
    require(unsolved == oracle.unsolved,
            "unsolved mismatch at round " + std::to_string(round) + ": got " +
                std::to_string(unsolved) + ", oracle " +
                std::to_string(oracle.unsolved));
    require(got.total_time() == oracle.total,
            "total time mismatch at round " + std::to_string(round) +
                ": got " + format_double(got.total_time()) + ", oracle " +
                format_double(oracle.total));
  }
}

void permutation_exactness() {
  // With 100000 permutations requested, every n <= 12 fits into a full 2^n
  // enumeration; the production path must agree with an independent
  // enumeration oracle.
  Rng rng(7);
  for (std::size_t n = 1; n <= 12; ++n) {
    for (int variant = 0; variant < 3; ++variant) {
      std::vector<double> a, b;
      for (std::size_t i = 0; i < n; ++i) {
        a.push_back(uniform_real(rng, 0, 6000));
        b.push_back(uniform_real(rng, 0, 6000));
      }
      double exact = test::exact_sign_flip_p(a, b);
      auto got = permutation_test(a, b, 100000, 0.05, 12345);
      require(got.n_permutations == (std::size_t{1} << n),
              "expected full enumeration at n=" + std::to_string(n));
      require(std::abs(got.p_value - exact) <= 0.01,
              "enumeration disagreement at n=" + std::to_string(n) + ": got " +
                  format_double(got.p_value) + ", oracle " +
                  format_double(exact));
      // Forced sampling must land within tolerance as well once the add-one
      // smoothing term is below it.
      if (n == 12) {
        auto sampled = permutation_test(a, b, 100000, 0.05, 12345,
                                        PermutationMode::sampled);
        require(std::abs(sampled.p_value - exact) <= 0.01,
                "sampled/exact disagreement at n=12: sampled " +
                    format_double(sampled.p_value) + ", exact " +
                    format_double(exact));
      }
    }
  }
  std::vector<double> same{3, 1, 4, 1, 5};
  require(permutation_test(same, same, 100000, 0.05, 1).p_value == 1.0,
          "identical vectors must give p = 1.0");
  require(permutation_test(same, same, 100000, 0.05, 1,
                           PermutationMode::sampled)
                  .p_value == 1.0,
          "identical vectors must give p = 1.0 in sampled mode");
}

test::ClusteredOptions relational_scenario() {
  test::ClusteredOptions opt;
  opt.clusters = 4;
  opt.per_cluster = 50;
  opt.cutoff = 600.0;
  opt.fast_lo = 5.0;
  opt.fast_hi = 30.0;
  opt.slow_lo = 200.0;
  opt.slow_hi = 550.0;
  opt.separation = 100.0;
  opt.noise = 5.0;
  opt.extra_noise_features = 2;
  opt.cost_lo = 0.1;
  opt.cost_hi = 0.5;
  opt.seed = 2024;
  return opt;
}

void relational_check() {
  Scenario s = test::make_clustered_scenario(relational_scenario());
  const int folds = 10;
  const std::uint64_t seed = 1;
  auto ids = test::iota_ids(s.n_instances());

  Scenario folded = split_folds(s, folds, seed);
  MetricReport oracle = vbs(folded, ids);
  std::vector<RunResult> sb_outcomes(folded.n_instances());
  for (int fold = 1; fold <= folds; ++fold) {
    auto training = complement_instances(folded, fold);
    std::size_t best = single_best_algorithm(folded, training);
    for (std::size_t i : fold_instances(folded, fold)) {
      sb_outcomes[i] = {folded.performance.solved(i, best),
                        folded.performance.runtime(i, best)};
    }
  }
  MetricReport single_best_report = score(sb_outcomes, s.cutoff);

  EvaluateOptions options;
  options.jobs = worker_count();
  for (Approach approach : all_approaches()) {
    auto outcomes = evaluate_pipeline(s, approach_spec(approach), folds, seed,
                                      options);
    MetricReport report = score(to_run_results(outcomes), s.cutoff);
    std::fprintf(stderr, "  %-12s PAR10 %10.2f  (#TO %zu)\n",
                 std::string(approach_name(approach)).c_str(), report.par10,
                 report.timeouts);
    if (approach != Approach::aspeed) {
      require(report.par10 <= single_best_report.par10,
              std::string(approach_name(approach)) + " PAR10 " +
                  format_double(report.par10) + " exceeds single best " +
                  format_double(single_best_report.par10));
    }
    if (approach == Approach::satzilla11) {
      require(report.par10 <= 1.25 * oracle.par10,
              "satzilla11 PAR10 " + format_double(report.par10) +
                  " not within 25% of oracle " +
                  format_double(oracle.par10));
    }
  }
}

void selector_schedule_interplay() {
  test::ClusteredOptions opt;
  opt.clusters = 4;
  opt.per_cluster = 25;
  opt.cutoff = 600.0;
  opt.fast_lo = 3.0;
  opt.fast_hi = 12.0;
  opt.others_timeout = true;
  opt.separation = 100.0;
  opt.noise = 1.0;
  opt.extra_noise_features = 0;
  opt.cost_lo = 0.01;
  opt.cost_hi = 0.05;
  opt.seed = 4242;
  Scenario informative = test::make_clustered_scenario(opt);
  Scenario blind = informative;
  for (auto& v : blind.features.values.data) v = 1.0;

  auto training = test::iota_ids(informative.n_instances());
  Hyperparameters hp{{"k", 3}};
  PipelineOptions train_options;
  train_options.jobs = worker_count();
  auto spec = approach_spec(Approach::threes);
  auto with_features = train_pipeline(informative, training, spec, hp, 5,
                                      train_options);
  auto without_features = train_pipeline(blind, training, spec, hp, 5,
                                         train_options);
  std::fprintf(stderr,
               "  selector slice: informative %.1fs, uninformative %.1fs\n",
               with_features.selector_slice, without_features.selector_slice);
  require(without_features.selector_slice < with_features.selector_slice,
          "uninformative features must shrink the selector slice (" +
              format_double(without_features.selector_slice) + " vs " +
              format_double(with_features.selector_slice) + ")");

  const int folds = 10;
  EvaluateOptions options;
  options.jobs = worker_count();
  options.fixed_hyperparameters = hp;
  auto threes_outcomes = evaluate_pipeline(blind, spec, folds, 5, options);
  auto aspeed_outcomes = evaluate_pipeline(
      blind, approach_spec(Approach::aspeed), folds, 5, options);
  double threes_par10 = score(to_run_results(threes_outcomes),
                              blind.cutoff).par10;
  double aspeed_par10 = score(to_run_results(aspeed_outcomes),
                              blind.cutoff).par10;
  std::fprintf(stderr, "  PAR10: blind threes %.2f, aspeed %.2f\n",
               threes_par10, aspeed_par10);
  require(std::abs(threes_par10 - aspeed_par10) <= 0.05 * aspeed_par10,
          "blind pipeline PAR10 " + format_double(threes_par10) +
              " not within 5% of schedule-only PAR10 " +
              format_double(aspeed_par10));
}

void vbs_dominance() {
  // Random scenarios: the oracle never loses to any solo algorithm.
  Rng rng(77);
  for (int round = 0; round < 100; ++round) {
    std::size_t n = 5 + uniform_index(rng, 20);
    std::size_t m = 2 + uniform_index(rng, 5);
    Scenario s = test::make_random_scenario(rng, n, m, 300,
                                            uniform_real(rng, 0.2, 0.95));
    auto ids = test::iota_ids(n);
    MetricReport oracle = vbs(s, ids);
    for (std::size_t a = 0; a < m; ++a) {
      MetricReport solo = solo_report(s, a, ids);
      require(oracle.par10 <= solo.par10, "oracle beaten by a solo run");
      require(oracle.timeouts <= solo.timeouts,
              "oracle has more timeouts than a solo run");
    }
  }

  // Clustered scenario: the oracle never loses to any simulated portfolio
  // solver either.
  test::ClusteredOptions opt;
  opt.clusters = 3;
  opt.per_cluster = 20;
  opt.cutoff = 600.0;
  opt.others_timeout = true;
  opt.extra_noise_features = 1;
  opt.seed = 909;
  Scenario s = test::make_clustered_scenario(opt);
  auto ids = test::iota_ids(s.n_instances());
  MetricReport oracle = vbs(s, ids);
  EvaluateOptions options;
  options.jobs = worker_count();
  for (Approach approach : all_approaches()) {
    auto outcomes = evaluate_pipeline(s, approach_spec(approach), 5, 3,
                                      options);
    MetricReport report = score(to_run_results(outcomes), s.cutoff);
    require(oracle.par10 <= report.par10,
            std::string("oracle beaten by ") +
                std::string(approach_name(approach)));
  }
  for (std::size_t a = 0; a < s.n_algorithms(); ++a) {
    require(oracle.par10 <= solo_report(s, a, ids).par10,
            "oracle beaten by a solo algorithm");
  }
}

void smodels_features() {
  for (const auto& entry : test::asp_corpus()) {
    GroundProgram program = parse_smodels(entry.text, entry.name);
    StaticFeatures features = compute_static_features(program);
    for (const auto& [name, expected] : entry.expected) {
      const FeatureValue& got = features.at(name);
      require(got.computed, entry.name + ": " + name + " not computed");
      require(got.value == expected,
              entry.name + ": " + name + " = " + format_double(got.value) +
                  ", expected " + format_double(expected));
    }
    // Everything outside the expected map must be a not-computed marker.
    for (std::size_t j = 0; j < static_feature_names().size(); ++j) {
      const std::string& name = static_feature_names()[j];
      if (entry.expected.find(name) == entry.expected.end()) {
        require(!features.values[j].computed,
                entry.name + ": " + name + " should not be computed");
      }
    }
  }
}

void determinism() {
  namespace fs = std::filesystem;
  const char* cli = std::getenv("PFOLIO_CLI");
  std::string binary = cli != nullptr ? cli : PFOLIO_CLI_PATH;

  test::ClusteredOptions opt;
  opt.clusters = 3;
  opt.per_cluster = 8;
  opt.cutoff = 600.0;
  opt.others_timeout = true;
  opt.extra_noise_features = 1;
  opt.seed = 31;
  fs::path dir = fs::temp_directory_path() / "pfolio_acceptance_determinism";
  fs::remove_all(dir);
  save_scenario(test::make_clustered_scenario(opt), dir / "scenario");

  auto run = [&](const std::string& tag, int jobs) {
    std::string prefix = (dir / tag).string();
    std::string command =
        binary + " evaluate --scenario " + (dir / "scenario").string() +
        " --approach measp --approach satzilla11 --folds 3 --seed 7 --jobs " +
        std::to_string(jobs) + " --out " + prefix + " > " + prefix +
        ".stdout 2>&1";
    require(std::system(command.c_str()) == 0, "evaluate run failed: " + tag);
    std::ifstream summary(prefix + ".summary.csv");
    std::ifstream pvalues(prefix + ".pvalues.csv");
    std::ostringstream bytes;
    bytes << summary.rdbuf() << "|" << pvalues.rdbuf();
    return bytes.str();
  };
  std::string first = run("run1", 1);
  std::string second = run("run2", 1);
  std::string parallel = run("run3", 8);
  require(!first.empty(), "no report produced");
  require(first == second, "same seed produced different reports");
  require(first == parallel, "--jobs changed the report bytes");
  fs::remove_all(dir);
}

}  // namespace

int main(int argc, char** argv) {
  std::map<std::string, std::function<void()>> criteria = {
      {"metric-definitions", metric_definitions},
      {"schedule-oracle", schedule_oracle},
      {"permutation-exactness", permutation_exactness},
      {"relational-check", relational_check},
      {"selector-schedule-interplay", selector_schedule_interplay},
      {"vbs-dominance", vbs_dominance},
      {"smodels-features", smodels_features},
      {"determinism", determinism},
  };

  std::vector<std::string> selected;
  for (int i = 1; i < argc; ++i) selected.emplace_back(argv[i]);
  if (selected.empty()) {
    for (const auto& [name, fn] : criteria) selected.push_back(name);
  }

  int failures = 0;
  for (const std::string& name : selected) {
    auto it = criteria.find(name);
    if (it == criteria.end()) {
      std::fprintf(stderr, "unknown criterion: %s\n", name.c_str());
      return 2;
    }
    auto start = std::chrono::steady_clock::now();
    try {
      it->second();
      double seconds = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start)
                           .count();
      std::printf("PASS  %s (%.1fs)\n", name.c_str(), seconds);
    } catch (const std::exception& e) {
      double seconds = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start)
                           .count();
      std::printf("FAIL  %s (%.1fs): %s\n", name.c_str(), seconds, e.what());
      ++failures;
    }
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
