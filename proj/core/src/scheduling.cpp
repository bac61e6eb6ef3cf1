#include "pfolio/scheduling.hpp"

#include <algorithm>
#include <bit>
#include <cassert>

#include "pfolio/errors.hpp"

namespace pfolio {

RuntimeTable make_runtime_table(const Scenario& scenario,
                                std::span<const std::size_t> instances) {
  RuntimeTable table;
  table.runtimes = Matrix(instances.size(), scenario.n_algorithms());
  table.solved.assign(instances.size() * scenario.n_algorithms(), 0);
  for (std::size_t r = 0; r < instances.size(); ++r) {
    for (std::size_t a = 0; a < scenario.n_algorithms(); ++a) {
      table.runtimes.at(r, a) = scenario.performance.runtime(instances[r], a);
      table.solved[r * scenario.n_algorithms() + a] =
          scenario.performance.solved(instances[r], a) ? 1 : 0;
    }
  }
  return table;
}

namespace {

// Bitset over training instances.
struct Cover {
  std::vector<std::uint64_t> words;

  explicit Cover(std::size_t n_bits = 0) : words((n_bits + 63) / 64, 0) {}
  void set(std::size_t i) { words[i / 64] |= std::uint64_t{1} << (i % 64); }
  void or_with(const Cover& other) {
    for (std::size_t w = 0; w < words.size(); ++w) words[w] |= other.words[w];
  }
  std::size_t count() const {
    std::size_t c = 0;
    for (std::uint64_t w : words) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  std::size_t count_new(const Cover& base) const {
    std::size_t c = 0;
    for (std::size_t w = 0; w < words.size(); ++w) {
      c += static_cast<std::size_t>(std::popcount(words[w] & ~base.words[w]));
    }
    return c;
  }
};

// One column of the optimization problem: a real algorithm or the simulated
// selector (rank -1, exempt from the pre-solving caps).
struct Column {
  int rank = 0;        // tie-break order; the simulated selector sorts first
  bool simulated = false;
  std::vector<double> slices;  // ascending, > 0
  std::vector<Cover> covers;   // aligned with slices
};

struct Assignment {
  // (column index, slice index) pairs, at most one per column.
  std::vector<std::pair<std::size_t, std::size_t>> picks;
  std::size_t unsolved = 0;
  double total = 0.0;
};

struct Problem {
  std::vector<Column> columns;
  std::size_t n_instances = 0;
  double budget = 0.0;
  ScheduleConstraints constraints;

  bool feasible(const std::vector<std::pair<std::size_t, std::size_t>>& picks)
      const {
    double total = 0.0, real_total = 0.0;
    std::size_t real_count = 0;
    for (auto [c, s] : picks) {
      double slice = columns[c].slices[s];
      total += slice;
      if (!columns[c].simulated) {
        real_total += slice;
        ++real_count;
      }
    }
    return total <= budget && real_total <= constraints.max_total_time &&
           real_count <= constraints.max_components;
  }

  Assignment evaluate(
      std::vector<std::pair<std::size_t, std::size_t>> picks) const {
    Assignment a;
    Cover covered(n_instances);
    double total = 0.0;
    for (auto [c, s] : picks) {
      covered.or_with(columns[c].covers[s]);
      total += columns[c].slices[s];
    }
    a.picks = std::move(picks);
    a.unsolved = n_instances - covered.count();
    a.total = total;
    return a;
  }

  // Lexicographic (rank, slice) component comparison used as final
  // tie-break; lower algorithm indices win, the simulated column wins
  // against any real column.
  bool lex_less(const Assignment& a, const Assignment& b) const {
    auto key = [&](const Assignment& x) {
      std::vector<std::pair<int, double>> components;
      for (auto [c, s] : x.picks) {
        components.emplace_back(columns[c].rank, columns[c].slices[s]);
      }
      std::sort(components.begin(), components.end());
      return components;
    };
    return key(a) < key(b);
  }

  bool better(const Assignment& a, const Assignment& b) const {
    if (a.unsolved != b.unsolved) return a.unsolved < b.unsolved;
    if (a.total != b.total) return a.total < b.total;
    return lex_less(a, b);
  }
};

Problem build_problem(const RuntimeTable& table, double budget,
                      const ScheduleConstraints& constraints,
                      std::span<const double> estimate_runtime,
                      std::span<const std::uint8_t> estimate_solved) {
  Problem problem;
  problem.n_instances = table.n_instances();
  problem.budget = budget;
  problem.constraints = constraints;

  auto add_column = [&](int rank, bool simulated, auto runtime_of,
                        auto solved_of) {
    Column column;
    column.rank = rank;
    column.simulated = simulated;
    std::vector<double> values;
    double cap = simulated
                     ? budget
                     : std::min(budget, constraints.max_total_time);
    for (std::size_t i = 0; i < table.n_instances(); ++i) {
      if (solved_of(i) && runtime_of(i) <= cap) {
        values.push_back(runtime_of(i));
      }
    }
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (double v : values) {
      Cover cover(table.n_instances());
      for (std::size_t i = 0; i < table.n_instances(); ++i) {
        if (solved_of(i) && runtime_of(i) <= v) cover.set(i);
      }
      column.slices.push_back(v);
      column.covers.push_back(std::move(cover));
    }
    problem.columns.push_back(std::move(column));
  };

  for (std::size_t a = 0; a < table.n_algorithms(); ++a) {
    add_column(static_cast<int>(a), false,
               [&, a](std::size_t i) { return table.runtime(i, a); },
               [&, a](std::size_t i) { return table.is_solved(i, a); });
  }
  if (!estimate_runtime.empty()) {
    add_column(-1, true,
               [&](std::size_t i) { return estimate_runtime[i]; },
               [&](std::size_t i) { return estimate_solved[i] != 0; });
  }
  return problem;
}

constexpr std::size_t kExactCombinationLimit = 2'000'000;

bool exact_feasible(const Problem& problem) {
  if (problem.columns.size() > 4) return false;
  std::size_t combinations = 1;
  for (const auto& column : problem.columns) {
    combinations *= column.slices.size() + 1;
    if (combinations > kExactCombinationLimit) return false;
  }
  return true;
}

Assignment solve_exact(const Problem& problem) {
  Assignment best = problem.evaluate({});
  std::vector<std::pair<std::size_t, std::size_t>> picks;

  // Depth-first over columns; slices ascend, so the budget prune can break.
  auto recurse = [&](auto&& self, std::size_t col, double total,
                     double real_total, std::size_t real_count) -> void {
    if (col == problem.columns.size()) {
      Assignment a = problem.evaluate(picks);
      if (problem.better(a, best)) best = std::move(a);
      return;
    }
    self(self, col + 1, total, real_total, real_count);  // slice 0
    const Column& column = problem.columns[col];
    for (std::size_t s = 0; s < column.slices.size(); ++s) {
      double slice = column.slices[s];
      if (total + slice > problem.budget) break;
      if (!column.simulated) {
        if (real_count + 1 > problem.constraints.max_components) break;
        if (real_total + slice > problem.constraints.max_total_time) break;
      }
      picks.emplace_back(col, s);
      self(self, col + 1, total + slice,
           column.simulated ? real_total : real_total + slice,
           column.simulated ? real_count : real_count + 1);
      picks.pop_back();
    }
  };
  recurse(recurse, 0, 0.0, 0.0, 0);
  return best;
}

Assignment solve_greedy(const Problem& problem) {
  std::vector<std::pair<std::size_t, std::size_t>> picks;

  auto used = [&](std::size_t col) {
    for (auto [c, s] : picks) {
      if (c == col) return true;
    }
    return false;
  };

  // Greedy construction: repeatedly add the candidate with the best
  // marginal coverage per second.
  for (;;) {
    Cover covered(problem.n_instances);
    double total = 0.0, real_total = 0.0;
    std::size_t real_count = 0;
    for (auto [c, s] : picks) {
      covered.or_with(problem.columns[c].covers[s]);
      total += problem.columns[c].slices[s];
      if (!problem.columns[c].simulated) {
        real_total += problem.columns[c].slices[s];
        ++real_count;
      }
    }
    double best_ratio = 0.0;
    std::size_t best_new = 0;
    double best_slice = 0.0;
    int best_rank = 0;
    std::pair<std::size_t, std::size_t> best_pick;
    bool found = false;
    for (std::size_t c = 0; c < problem.columns.size(); ++c) {
      const Column& column = problem.columns[c];
      if (used(c)) continue;
      if (!column.simulated &&
          real_count + 1 > problem.constraints.max_components) {
        continue;
      }
      for (std::size_t s = 0; s < column.slices.size(); ++s) {
        double slice = column.slices[s];
        if (total + slice > problem.budget) break;
        if (!column.simulated &&
            real_total + slice > problem.constraints.max_total_time) {
          break;
        }
        std::size_t gained = column.covers[s].count_new(covered);
        if (gained == 0) continue;
        double ratio = static_cast<double>(gained) / slice;
        bool wins = !found || ratio > best_ratio ||
                    (ratio == best_ratio &&
                     (gained > best_new ||
                      (gained == best_new &&
                       (slice < best_slice ||
                        (slice == best_slice && column.rank < best_rank)))));
        if (wins) {
          found = true;
          best_ratio = ratio;
          best_new = gained;
          best_slice = slice;
          best_rank = column.rank;
          best_pick = {c, s};
        }
      }
    }
    if (!found) break;
    picks.push_back(best_pick);
  }

  Assignment current = problem.evaluate(picks);

  // Slice shortlist per column for the pair moves below: roughly evenly
  // spaced coverage steps, largest last.
  std::vector<std::vector<std::size_t>> shortlist(problem.columns.size());
  for (std::size_t c = 0; c < problem.columns.size(); ++c) {
    const Column& column = problem.columns[c];
    if (column.slices.empty()) continue;
    std::size_t max_cover = column.covers.back().count();
    std::size_t step = std::max<std::size_t>(1, max_cover / 12);
    std::size_t last_cover = 0;
    for (std::size_t s = 0; s < column.slices.size(); ++s) {
      std::size_t cover = column.covers[s].count();
      if (s + 1 == column.slices.size() || cover >= last_cover + step) {
        shortlist[c].push_back(s);
        last_cover = cover;
      }
    }
  }

  // Local search over add/drop/replace moves, including pairwise exchanges
  // (1-for-2 and 2-for-1), until no move improves (unsolved, total, lex).
  for (int round = 0; round < 64; ++round) {
    bool improved = false;
    Assignment best = current;

    auto consider = [&](std::vector<std::pair<std::size_t, std::size_t>> t) {
      if (!problem.feasible(t)) return;
      Assignment a = problem.evaluate(std::move(t));
      if (problem.better(a, best)) {
        best = std::move(a);
        improved = true;
      }
    };
    auto contains_col = [](const std::vector<std::pair<std::size_t,
                                                       std::size_t>>& t,
                           std::size_t col) {
      for (auto [c, s] : t) {
        if (c == col) return true;
      }
      return false;
    };
    auto singles_from = [&](const std::vector<std::pair<std::size_t,
                                                        std::size_t>>& base) {
      for (std::size_t c = 0; c < problem.columns.size(); ++c) {
        if (contains_col(base, c)) continue;
        for (std::size_t s = 0; s < problem.columns[c].slices.size(); ++s) {
          auto tentative = base;
          tentative.emplace_back(c, s);
          consider(std::move(tentative));
        }
      }
    };
    auto pairs_from = [&](const std::vector<std::pair<std::size_t,
                                                      std::size_t>>& base) {
      for (std::size_t c1 = 0; c1 < problem.columns.size(); ++c1) {
        if (contains_col(base, c1)) continue;
        for (std::size_t c2 = c1 + 1; c2 < problem.columns.size(); ++c2) {
          if (contains_col(base, c2)) continue;
          for (std::size_t s1 : shortlist[c1]) {
            for (std::size_t s2 : shortlist[c2]) {
              auto tentative = base;
              tentative.emplace_back(c1, s1);
              tentative.emplace_back(c2, s2);
              consider(std::move(tentative));
            }
          }
        }
      }
    };

    singles_from(current.picks);  // pure additions
    pairs_from(current.picks);
    for (std::size_t p = 0; p < current.picks.size(); ++p) {
      auto base = current.picks;
      base.erase(base.begin() + static_cast<std::ptrdiff_t>(p));
      consider(base);     // drop
      singles_from(base); // replace one with one
      pairs_from(base);   // replace one with two
      for (std::size_t q = p + 1; q < current.picks.size(); ++q) {
        auto smaller = base;
        smaller.erase(smaller.begin() + static_cast<std::ptrdiff_t>(q - 1));
        singles_from(smaller);  // replace two with one
      }
    }
    if (!improved) break;
    current = std::move(best);
  }

  // A single component can beat a ratio-driven construction; make sure we
  // never return something worse than the best lone component (or nothing).
  for (std::size_t c = 0; c < problem.columns.size(); ++c) {
    for (std::size_t s = 0; s < problem.columns[c].slices.size(); ++s) {
      std::vector<std::pair<std::size_t, std::size_t>> lone{{c, s}};
      if (!problem.feasible(lone)) continue;
      Assignment a = problem.evaluate(std::move(lone));
      if (problem.better(a, current)) current = std::move(a);
    }
  }
  return current;
}

Assignment solve(const Problem& problem) {
  return exact_feasible(problem) ? solve_exact(problem)
                                 : solve_greedy(problem);
}

}  // namespace

Schedule compute_schedule(const RuntimeTable& table, double budget,
                          const ScheduleConstraints& constraints) {
  if (budget <= 0.0) throw ValidationError("schedule budget must be positive");
  if (table.n_algorithms() == 0) {
    throw ValidationError("schedule needs at least one algorithm");
  }
  Problem problem = build_problem(table, budget, constraints, {}, {});
  Assignment best = solve(problem);
  Schedule schedule;
  std::sort(best.picks.begin(), best.picks.end());
  for (auto [c, s] : best.picks) {
    schedule.components.push_back({c, problem.columns[c].slices[s]});
  }
  assert(schedule.total_time() <= budget + 1e-9);
  return schedule;
}

ScheduleWithSelector compute_schedule_with_selector(
    const RuntimeTable& table, std::span<const double> estimate_runtime,
    std::span<const std::uint8_t> estimate_solved, double budget,
    const ScheduleConstraints& constraints) {
  if (budget <= 0.0) throw ValidationError("schedule budget must be positive");
  if (estimate_runtime.size() != table.n_instances() ||
      estimate_solved.size() != table.n_instances()) {
    throw ValidationError("selector estimate must cover all instances");
  }
  Problem problem = build_problem(table, budget, constraints,
                                  estimate_runtime, estimate_solved);
  Assignment best = solve(problem);

  ScheduleWithSelector result;
  double sim_slice = 0.0;
  std::sort(best.picks.begin(), best.picks.end());
  for (auto [c, s] : best.picks) {
    if (problem.columns[c].simulated) {
      sim_slice = problem.columns[c].slices[s];
    } else {
      result.presolve.components.push_back({c, problem.columns[c].slices[s]});
    }
  }
  // A selector the optimizer gave no time is de facto ignored; otherwise it
  // owns whatever the pre-solving schedule leaves of the budget.
  result.selector_slice =
      sim_slice > 0.0 ? budget - result.presolve.total_time() : 0.0;
  return result;
}

Schedule align_schedule(Schedule schedule) {
  std::stable_sort(schedule.components.begin(), schedule.components.end(),
                   [](const ScheduleComponent& a, const ScheduleComponent& b) {
                     if (a.slice != b.slice) return a.slice < b.slice;
                     return a.algorithm < b.algorithm;
                   });
  return schedule;
}

}  // namespace pfolio
