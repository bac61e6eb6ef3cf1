#ifndef PFOLIO_SCHEDULING_HPP
#define PFOLIO_SCHEDULING_HPP

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "pfolio/matrix.hpp"
#include "pfolio/scenario.hpp"

namespace pfolio {

struct ScheduleComponent {
  std::size_t algorithm = 0;
  double slice = 0.0;  // seconds, > 0

  friend bool operator==(const ScheduleComponent&,
                         const ScheduleComponent&) = default;
};

// Ordered pre-solving schedule; execution order is component order.
struct Schedule {
  std::vector<ScheduleComponent> components;

  double total_time() const {
    double t = 0.0;
    for (const auto& c : components) t += c.slice;
    return t;
  }
  bool contains(std::size_t algorithm) const {
    for (const auto& c : components) {
      if (c.algorithm == algorithm) return true;
    }
    return false;
  }
  bool empty() const { return components.empty(); }

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

struct ScheduleConstraints {
  std::size_t max_components = std::numeric_limits<std::size_t>::max();
  double max_total_time = std::numeric_limits<double>::infinity();
};

// Runtime table restricted to a set of training instances; the unit the
// schedule optimizer works on.
struct RuntimeTable {
  Matrix runtimes;  // rows: instances, cols: algorithms
  std::vector<std::uint8_t> solved;

  std::size_t n_instances() const { return runtimes.rows; }
  std::size_t n_algorithms() const { return runtimes.cols; }
  double runtime(std::size_t i, std::size_t a) const {
    return runtimes.at(i, a);
  }
  bool is_solved(std::size_t i, std::size_t a) const {
    return solved[i * runtimes.cols + a] != 0;
  }
};

RuntimeTable make_runtime_table(const Scenario& scenario,
                                std::span<const std::size_t> instances);

// Timeout-minimal schedule: minimizes unsolved training instances, then
// total scheduled time, then breaks ties toward lower algorithm indices.
// Candidate slices are the observed solved runtimes; small inputs are
// solved exactly, larger ones by greedy construction with swap-based
// local search.
Schedule compute_schedule(const RuntimeTable& table, double budget,
                          const ScheduleConstraints& constraints = {});

struct ScheduleWithSelector {
  Schedule presolve;
  double selector_slice = 0.0;
};

// Adds the estimated selector performance as a simulated algorithm that is
// exempt from the component and pre-solving time caps, then splits the
// result. A useless estimate yields selector_slice 0; otherwise the
// selector receives the budget left over by the pre-solving schedule.
ScheduleWithSelector compute_schedule_with_selector(
    const RuntimeTable& table, std::span<const double> estimate_runtime,
    std::span<const std::uint8_t> estimate_solved, double budget,
    const ScheduleConstraints& constraints = {});

// Reorders components by ascending slice, ties by algorithm index.
Schedule align_schedule(Schedule schedule);

}  // namespace pfolio

#endif
