#include "pfolio/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "pfolio/errors.hpp"
#include "pfolio/preprocessing.hpp"
#include "pfolio/random.hpp"
#include "pfolio/text.hpp"

namespace pfolio {

MetricReport score(std::span<const RunResult> outcomes, double cutoff) {
  if (outcomes.empty()) {
    throw ValidationError("cannot score an empty outcome set");
  }
  MetricReport report;
  report.scored_times.reserve(outcomes.size());
  double par1_total = 0.0, par10_total = 0.0;
  for (const RunResult& r : outcomes) {
    if (r.solved) {
      par1_total += r.time;
      par10_total += r.time;
      report.scored_times.push_back(r.time);
    } else {
      ++report.timeouts;
      par1_total += cutoff;
      par10_total += 10.0 * cutoff;
      report.scored_times.push_back(10.0 * cutoff);
    }
  }
  report.par1 = par1_total / static_cast<double>(outcomes.size());
  report.par10 = par10_total / static_cast<double>(outcomes.size());
  return report;
}

MetricReport vbs(const Scenario& scenario,
                 std::span<const std::size_t> instance_ids) {
  if (instance_ids.empty()) {
    throw ValidationError("vbs needs at least one instance");
  }
  std::vector<RunResult> outcomes;
  outcomes.reserve(instance_ids.size());
  for (std::size_t i : instance_ids) {
    RunResult best{false, scenario.cutoff};
    for (std::size_t a = 0; a < scenario.n_algorithms(); ++a) {
      if (scenario.performance.solved(i, a)) {
        double rt = scenario.performance.runtime(i, a);
        if (!best.solved || rt < best.time) best = {true, rt};
      }
    }
    outcomes.push_back(best);
  }
  return score(outcomes, scenario.cutoff);
}

std::size_t single_best_algorithm(const Scenario& scenario,
                                  std::span<const std::size_t> training) {
  if (training.empty()) {
    throw ValidationError("single best needs training instances");
  }
  std::size_t best = 0;
  double best_par10 = 0.0;
  for (std::size_t a = 0; a < scenario.n_algorithms(); ++a) {
    double total = 0.0;
    for (std::size_t i : training) {
      total += par10_value(scenario.performance.runtime(i, a),
                           scenario.performance.solved(i, a),
                           scenario.cutoff);
    }
    double par10 = total / static_cast<double>(training.size());
    if (a == 0 || par10 < best_par10) {
      best = a;
      best_par10 = par10;
    }
  }
  return best;
}

MetricReport solo_report(const Scenario& scenario, std::size_t algorithm,
                         std::span<const std::size_t> instance_ids) {
  std::vector<RunResult> outcomes;
  outcomes.reserve(instance_ids.size());
  for (std::size_t i : instance_ids) {
    outcomes.push_back({scenario.performance.solved(i, algorithm),
                        scenario.performance.runtime(i, algorithm)});
  }
  return score(outcomes, scenario.cutoff);
}

MetricReport single_best(const Scenario& scenario,
                         std::span<const std::size_t> training,
                         std::span<const std::size_t> evaluation) {
  if (evaluation.empty()) {
    throw ValidationError("single best needs evaluation instances");
  }
  return solo_report(scenario, single_best_algorithm(scenario, training),
                     evaluation);
}

SignificanceResult permutation_test(std::span<const double> a,
                                    std::span<const double> b,
                                    std::size_t n_permutations, double alpha,
                                    std::uint64_t seed, PermutationMode mode) {
  if (a.size() != b.size()) {
    throw ValidationError("paired vectors must have equal length");
  }
  if (a.empty()) throw ValidationError("paired vectors must be nonempty");
  const std::size_t n = a.size();
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = a[i] - b[i];
  const double inv_n = 1.0 / static_cast<double>(n);
  const double observed = std::abs(std::accumulate(diff.begin(), diff.end(),
                                                   0.0) *
                                   inv_n);

  bool exact = mode == PermutationMode::exact;
  if (mode == PermutationMode::automatic) {
    exact = n < 64 && (std::uint64_t{1} << n) <= n_permutations;
  }

  SignificanceResult result;
  result.statistic = observed;
  std::size_t at_least = 0;
  std::size_t evaluated = 0;
  if (exact) {
    const std::uint64_t patterns = std::uint64_t{1} << n;
    for (std::uint64_t p = 0; p < patterns; ++p) {
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        sum += (p >> i) & 1 ? -diff[i] : diff[i];
      }
      if (std::abs(sum) * inv_n >= observed) ++at_least;
    }
    evaluated = patterns;
  } else {
    Rng rng(seed);
    for (std::size_t p = 0; p < n_permutations; ++p) {
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        sum += rng() & 1 ? -diff[i] : diff[i];
      }
      if (std::abs(sum) * inv_n >= observed) ++at_least;
    }
    evaluated = n_permutations;
  }
  result.n_permutations = evaluated;
  result.p_value = static_cast<double>(1 + at_least) /
                   static_cast<double>(1 + evaluated);
  result.significant = result.p_value < alpha;
  return result;
}

Comparison compare_approaches(std::vector<ComparisonRow> rows,
                              std::size_t n_permutations, double alpha,
                              std::uint64_t seed) {
  Comparison comparison;
  comparison.alpha = alpha;
  const std::size_t n = rows.size();
  comparison.p_values = Matrix(n, n, Matrix::missing());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rows[i].oracle || rows[j].oracle) continue;
      auto r = permutation_test(rows[i].report.scored_times,
                                rows[j].report.scored_times, n_permutations,
                                alpha, seed);
      comparison.p_values.at(i, j) = r.p_value;
      comparison.p_values.at(j, i) = r.p_value;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].oracle) continue;
    bool best = true;
    for (std::size_t j = 0; j < n && best; ++j) {
      if (j == i || rows[j].oracle) continue;
      double p = comparison.p_values.at(i, j);
      best = p < alpha && rows[i].report.par10 < rows[j].report.par10;
    }
    rows[i].significant_best = best;
  }
  comparison.rows = std::move(rows);
  return comparison;
}

namespace {

std::string metric_cell(double v) { return format_fixed(v, 2); }

}  // namespace

std::string render_comparison_text(const Comparison& comparison) {
  std::ostringstream out;
  std::size_t name_width = 8;
  for (const auto& row : comparison.rows) {
    name_width = std::max(name_width, row.name.size());
  }
  out << std::string(name_width, ' ') << "  " << "   #TOs" << "      PAR10"
      << "       PAR1" << "  best\n";
  for (const auto& row : comparison.rows) {
    std::string name = row.name;
    name.resize(name_width, ' ');
    std::string tos = std::to_string(row.report.timeouts);
    std::string par10 = metric_cell(row.report.par10);
    std::string par1 = metric_cell(row.report.par1);
    out << name << "  " << std::string(7 - std::min<std::size_t>(7, tos.size()), ' ')
        << tos << "  " << std::string(9 - std::min<std::size_t>(9, par10.size()), ' ')
        << par10 << "  " << std::string(9 - std::min<std::size_t>(9, par1.size()), ' ')
        << par1 << "  " << (row.oracle ? "oracle" : (row.significant_best ? "*" : ""))
        << "\n";
  }
  out << "* significantly better than every other approach (alpha="
      << format_double(comparison.alpha) << ")\n";
  return out.str();
}

std::string render_comparison_csv(const Comparison& comparison) {
  std::ostringstream out;
  out << "approach,timeouts,par10,par1,significant_best\n";
  for (const auto& row : comparison.rows) {
    out << row.name << ',' << row.report.timeouts << ','
        << format_double(row.report.par10) << ','
        << format_double(row.report.par1) << ','
        << (row.significant_best ? 1 : 0) << "\n";
  }
  return out.str();
}

std::string render_pvalues_csv(const Comparison& comparison) {
  std::ostringstream out;
  out << "approach";
  for (const auto& row : comparison.rows) out << ',' << row.name;
  out << "\n";
  for (std::size_t i = 0; i < comparison.rows.size(); ++i) {
    out << comparison.rows[i].name;
    for (std::size_t j = 0; j < comparison.rows.size(); ++j) {
      double p = comparison.p_values.at(i, j);
      out << ',' << (Matrix::is_missing(p) ? "?" : format_double(p));
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace pfolio
