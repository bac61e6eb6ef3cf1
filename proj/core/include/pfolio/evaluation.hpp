#ifndef PFOLIO_EVALUATION_HPP
#define PFOLIO_EVALUATION_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pfolio/scenario.hpp"

namespace pfolio {

struct RunResult {
  bool solved = false;
  double time = 0.0;
};

struct MetricReport {
  std::size_t timeouts = 0;
  double par10 = 0.0;
  double par1 = 0.0;
  std::vector<double> scored_times;  // per-instance PAR10 values
};

// PAR10/PAR1/timeout metrics; unsolved runs score 10x (resp. 1x) cutoff.
MetricReport score(std::span<const RunResult> outcomes, double cutoff);

// Oracle that runs the per-instance best algorithm at zero feature cost.
MetricReport vbs(const Scenario& scenario,
                 std::span<const std::size_t> instance_ids);

// Algorithm with the lowest training PAR10 (ties to the lower index).
std::size_t single_best_algorithm(const Scenario& scenario,
                                  std::span<const std::size_t> training);

MetricReport single_best(const Scenario& scenario,
                         std::span<const std::size_t> training,
                         std::span<const std::size_t> evaluation);

// Solo performance of one algorithm on the given instances.
MetricReport solo_report(const Scenario& scenario, std::size_t algorithm,
                         std::span<const std::size_t> instance_ids);

enum class PermutationMode { automatic, exact, sampled };

struct SignificanceResult {
  double p_value = 1.0;
  std::size_t n_permutations = 0;
  double statistic = 0.0;
  bool significant = false;
};

// Two-sided paired sign-flip test on per-instance differences with
// statistic |mean(a - b)| and add-one smoothing. Enumerates all 2^n sign
// patterns when that fits into n_permutations, otherwise samples with the
// given seed.
SignificanceResult permutation_test(std::span<const double> a,
                                    std::span<const double> b,
                                    std::size_t n_permutations, double alpha,
                                    std::uint64_t seed,
                                    PermutationMode mode =
                                        PermutationMode::automatic);

// ---------------------------------------------------------------------------
// Comparison reports

struct ComparisonRow {
  std::string name;
  MetricReport report;
  bool oracle = false;  // oracles are shown but do not compete
  bool significant_best = false;
};

struct Comparison {
  std::vector<ComparisonRow> rows;
  Matrix p_values;  // square, aligned with rows; NaN on the diagonal/oracles
  double alpha = 0.05;
};

// Pairwise permutation tests over the scored per-instance times; a row is
// significant_best when it beats every other non-oracle row.
Comparison compare_approaches(std::vector<ComparisonRow> rows,
                              std::size_t n_permutations, double alpha,
                              std::uint64_t seed);

std::string render_comparison_text(const Comparison& comparison);
std::string render_comparison_csv(const Comparison& comparison);
std::string render_pvalues_csv(const Comparison& comparison);

}  // namespace pfolio

#endif
