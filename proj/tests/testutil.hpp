#ifndef PFOLIO_TESTUTIL_HPP
#define PFOLIO_TESTUTIL_HPP

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "pfolio/preprocessing.hpp"
#include "pfolio/random.hpp"
#include "pfolio/scenario.hpp"
#include "pfolio/scheduling.hpp"

namespace pfolio::test {

// Timeout marker for runtime tables in tests.
inline constexpr double TO = -1.0;

// Builds a validated scenario from a runtime table. Instances are named
// i1..iN. A runtime of TO records a timeout at the cutoff. Without explicit
// features every instance gets its index as a single feature; feature costs
// default to zero.
inline Scenario make_scenario(std::vector<std::string> algorithms,
                              const std::vector<std::vector<double>>& runtimes,
                              double cutoff,
                              std::vector<std::vector<double>> features = {},
                              std::vector<double> costs = {}) {
  Scenario s;
  s.name = "test";
  s.cutoff = cutoff;
  s.algorithms = std::move(algorithms);
  const std::size_t n = runtimes.size();
  const std::size_t m = s.algorithms.size();
  for (std::size_t i = 0; i < n; ++i) {
    s.instances.push_back("i" + std::to_string(i + 1));
  }
  s.performance = PerformanceMatrix(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < m; ++a) {
      double rt = runtimes[i][a];
      if (rt == TO) {
        s.performance.set(i, a, cutoff, RunStatus::timeout);
      } else {
        s.performance.set(i, a, rt, RunStatus::solved);
      }
    }
  }
  if (features.empty()) {
    for (std::size_t i = 0; i < n; ++i) {
      features.push_back({static_cast<double>(i)});
    }
  }
  const std::size_t d = features.front().size();
  s.features.names.clear();
  for (std::size_t j = 0; j < d; ++j) {
    s.features.names.push_back("f" + std::to_string(j + 1));
  }
  s.features.values = Matrix(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      s.features.values.at(i, j) = features[i][j];
    }
  }
  s.feature_costs = costs.empty() ? std::vector<double>(n, 0.0) : costs;
  s.solved_by_features.assign(n, 0);
  s.validate();
  return s;
}

// Random scenario for oracle-style checks: each run solves with probability
// solve_prob at a uniform runtime, otherwise it times out.
inline Scenario make_random_scenario(Rng& rng, std::size_t n_instances,
                                     std::size_t n_algorithms, double cutoff,
                                     double solve_prob = 0.7) {
  std::vector<std::vector<double>> runtimes(n_instances);
  for (auto& row : runtimes) {
    for (std::size_t a = 0; a < n_algorithms; ++a) {
      if (uniform01(rng) < solve_prob) {
        row.push_back(uniform_real(rng, 0.1, cutoff));
      } else {
        row.push_back(TO);
      }
    }
  }
  std::vector<std::string> names;
  for (std::size_t a = 0; a < n_algorithms; ++a) {
    names.push_back("alg" + std::to_string(a + 1));
  }
  return make_scenario(std::move(names), runtimes, cutoff);
}

// Scenario with cluster-structured complementary strengths: instance group c
// is fast for algorithm c and slow (or a timeout) for the others; features
// separate the groups unless informative is false.
struct ClusteredOptions {
  std::size_t clusters = 4;
  std::size_t per_cluster = 50;
  double cutoff = 600.0;
  double fast_lo = 5.0, fast_hi = 30.0;
  double slow_lo = 200.0, slow_hi = 550.0;
  bool others_timeout = false;  // slow runs become timeouts
  bool informative = true;      // constant features when false
  double separation = 100.0;
  double noise = 5.0;
  std::size_t extra_noise_features = 2;
  double cost_lo = 0.1, cost_hi = 0.5;
  std::uint64_t seed = 7;
};

inline Scenario make_clustered_scenario(const ClusteredOptions& opt) {
  Rng rng(opt.seed);
  const std::size_t n = opt.clusters * opt.per_cluster;
  std::vector<std::vector<double>> runtimes(n);
  std::vector<std::vector<double>> features(n);
  std::vector<double> costs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cluster = i % opt.clusters;
    for (std::size_t a = 0; a < opt.clusters; ++a) {
      if (a == cluster) {
        runtimes[i].push_back(uniform_real(rng, opt.fast_lo, opt.fast_hi));
      } else if (opt.others_timeout) {
        runtimes[i].push_back(TO);
      } else {
        runtimes[i].push_back(uniform_real(rng, opt.slow_lo, opt.slow_hi));
      }
    }
    for (std::size_t j = 0; j < opt.clusters; ++j) {
      double base = j == cluster ? opt.separation : 0.0;
      features[i].push_back(
          opt.informative ? base + normal(rng, 0.0, opt.noise) : 1.0);
    }
    for (std::size_t j = 0; j < opt.extra_noise_features; ++j) {
      features[i].push_back(opt.informative ? normal(rng, 0.0, 4 * opt.noise)
                                            : 1.0);
    }
    costs[i] = uniform_real(rng, opt.cost_lo, opt.cost_hi);
  }
  std::vector<std::string> names;
  for (std::size_t a = 0; a < opt.clusters; ++a) {
    names.push_back("alg" + std::to_string(a + 1));
  }
  return make_scenario(std::move(names), runtimes, opt.cutoff, features,
                       costs);
}

// ---------------------------------------------------------------------------
// Independent oracles

// Exhaustive schedule search straight from the definition: slice values are
// drawn from {0} and every observed runtime within the budget, and the
// objective is (unsolved count, total time). Exponential; small inputs only.
struct ScheduleOracleResult {
  std::size_t unsolved = 0;
  double total = 0.0;
};

inline ScheduleOracleResult schedule_oracle(
    const RuntimeTable& table, double budget,
    const ScheduleConstraints& constraints = {}) {
  const std::size_t m = table.n_algorithms();
  const std::size_t n = table.n_instances();
  std::vector<std::vector<double>> candidates(m);
  for (std::size_t a = 0; a < m; ++a) {
    candidates[a].push_back(0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (table.runtime(i, a) <= budget) {
        candidates[a].push_back(table.runtime(i, a));
      }
    }
  }
  ScheduleOracleResult best{n + 1, 0.0};
  std::vector<double> slices(m, 0.0);
  auto evaluate = [&]() {
    double total = std::accumulate(slices.begin(), slices.end(), 0.0);
    std::size_t components = 0;
    for (double s : slices) {
      if (s > 0.0) ++components;
    }
    if (total > budget || total > constraints.max_total_time ||
        components > constraints.max_components) {
      return;
    }
    std::size_t unsolved = 0;
    for (std::size_t i = 0; i < n; ++i) {
      bool covered = false;
      for (std::size_t a = 0; a < m && !covered; ++a) {
        covered = table.is_solved(i, a) && table.runtime(i, a) <= slices[a];
      }
      if (!covered) ++unsolved;
    }
    if (unsolved < best.unsolved ||
        (unsolved == best.unsolved && total < best.total)) {
      best = {unsolved, total};
    }
  };
  auto recurse = [&](auto&& self, std::size_t a) -> void {
    if (a == m) {
      evaluate();
      return;
    }
    for (double s : candidates[a]) {
      slices[a] = s;
      self(self, a + 1);
    }
    slices[a] = 0.0;
  };
  recurse(recurse, 0);
  return best;
}

// Unregularized least squares (with intercept) by Gauss-Jordan elimination
// on the normal equations; independent of the production solver.
inline std::vector<double> least_squares_oracle(
    const std::vector<std::vector<double>>& X, const std::vector<double>& y) {
  const std::size_t n = X.size();
  const std::size_t d = X.front().size() + 1;  // + intercept
  std::vector<std::vector<double>> a(d, std::vector<double>(d + 1, 0.0));
  auto cell = [&](std::size_t i, std::size_t j) {
    return j == 0 ? 1.0 : X[i][j - 1];
  };
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      for (std::size_t i = 0; i < n; ++i) a[r][c] += cell(i, r) * cell(i, c);
    }
    for (std::size_t i = 0; i < n; ++i) a[r][d] += cell(i, r) * y[i];
  }
  for (std::size_t col = 0; col < d; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < d; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    std::swap(a[col], a[pivot]);
    for (std::size_t r = 0; r < d; ++r) {
      if (r == col || a[col][col] == 0.0) continue;
      double factor = a[r][col] / a[col][col];
      for (std::size_t c = col; c <= d; ++c) a[r][c] -= factor * a[col][c];
    }
  }
  std::vector<double> solution(d, 0.0);  // [intercept, weights...]
  for (std::size_t r = 0; r < d; ++r) solution[r] = a[r][d] / a[r][r];
  return solution;
}

// Exact sign-flip p-value by full enumeration, written independently of the
// production test.
inline double exact_sign_flip_p(const std::vector<double>& a,
                                const std::vector<double>& b) {
  const std::size_t n = a.size();
  double observed = 0.0;
  for (std::size_t i = 0; i < n; ++i) observed += a[i] - b[i];
  observed = std::abs(observed / static_cast<double>(n));
  std::size_t hits = 0;
  const std::uint64_t patterns = std::uint64_t{1} << n;
  for (std::uint64_t p = 0; p < patterns; ++p) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = a[i] - b[i];
      sum += (p >> i) & 1 ? -d : d;
    }
    if (std::abs(sum / static_cast<double>(n)) >= observed) ++hits;
  }
  return static_cast<double>(1 + hits) / static_cast<double>(1 + patterns);
}

// Mean PAR10 of the per-instance best algorithm within a subset.
inline double vbs_par10_oracle(const Scenario& s,
                               const std::vector<std::size_t>& ids,
                               const std::vector<std::size_t>& algorithms) {
  double total = 0.0;
  for (std::size_t i : ids) {
    double best = 10.0 * s.cutoff;
    for (std::size_t a : algorithms) {
      double v = par10_value(s.performance.runtime(i, a),
                             s.performance.solved(i, a), s.cutoff);
      best = std::min(best, v);
    }
    total += best;
  }
  return total / static_cast<double>(ids.size());
}

inline std::vector<std::size_t> iota_ids(std::size_t n) {
  std::vector<std::size_t> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

}  // namespace pfolio::test

#endif
