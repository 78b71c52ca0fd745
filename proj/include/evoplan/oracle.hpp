#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "evoplan/scenario.hpp"
#include "evoplan/schedule.hpp"

namespace evoplan {

/// Brute-force reference implementations. They deliberately repeat the model
/// arithmetic instead of calling into the planner or the assessor.

struct OracleBudget {
  std::size_t max_requests = 8;
  Period max_horizon = 6;
  std::size_t max_stations = 6;
  std::size_t max_clusters = 8;
};

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OracleSchedule {
  bool feasible = false;
  long lateness = 0;              ///< minimum sum (k* - k-hat)
  std::vector<Period> placement;  ///< one optimal k-hat per request
};

/// Exhaustive over k-hat_i in [1, k*_i] with at most N changes per period.
OracleSchedule oracle_schedule(std::span<const Period> deadlines, int change_rate, Period horizon,
                               const OracleBudget& budget = {});

/// `count` random deadline multisets (sorted) satisfying the prefix condition,
/// drawn by rejection sampling. Deterministic per seed.
std::vector<std::vector<Period>> oracle_feasible_sets(Period horizon, int change_rate, std::size_t count,
                                                      std::uint64_t seed);

struct OracleCost {
  bool feasible = false;
  double cost = 0.0;             ///< sum over k and b of kappa(b, T(b,k))
  std::vector<Change> schedule;  ///< one optimal schedule
};

/// Minimum total cost over every schedule meeting demand per operator, the
/// competition fraction at every period and the change budget. Dynamic
/// programming over the joint station types, period by period.
OracleCost oracle_min_cost_plan(const Scenario& sc, Mode mode, const OracleBudget& budget = {});

}  // namespace evoplan
