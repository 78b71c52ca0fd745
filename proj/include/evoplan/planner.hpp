#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evoplan/assessment.hpp"
#include "evoplan/deadline.hpp"
#include "evoplan/schedule.hpp"

namespace evoplan {

enum class Phase { capacity = 1, competition = 2, cost = 3 };
std::string_view to_string(Phase p);

enum class PlanStatus { success, infeasible, nonconvergent };
std::string_view to_string(PlanStatus s);

enum class LogAction {
  commit,    ///< new change x(b, k-hat, t) = 1
  retarget,  ///< existing change of b* re-pointed to t* (no free period after it)
  drop,      ///< later change of b* removed because the new type dominates it
  revert,    ///< phase-3 trial undone
  skip,      ///< phase-3 candidate with no free period or a stale saving
};
std::string_view to_string(LogAction a);

struct PhaseLogEntry {
  Phase phase = Phase::capacity;
  std::size_t iteration = 0;
  LogAction action = LogAction::commit;
  ClusterId cluster{};           ///< c* (phases 1-2)
  Period problem_period = 0;     ///< k* (phases 1-2)
  StationId station{};
  TypeId from{};
  TypeId to{};
  Period scheduled = 0;          ///< k-hat
  std::string note;              ///< evidence for reverts, reason for skips
};

struct PlannedChange {
  Change change;
  TypeId from{};
  ChangeKind kind = ChangeKind::enhance;
  Phase phase = Phase::capacity;
};

struct PlanResult {
  Schedule schedule;
  std::vector<PlannedChange> changes;  ///< ordered by (period, station)
  std::vector<PhaseLogEntry> log;
  PlanStatus status = PlanStatus::success;
  Phase failed_phase = Phase::capacity;
  Period failed_period = 0;
  std::string reason;

  bool ok() const noexcept { return status == PlanStatus::success; }
};

struct PlanOptions {
  /// Test hook: placing capacity fixes as early as possible instead of as late
  /// as possible must lose scheduling optimality.
  Direction fix_direction = Direction::latest;
  /// Safety net per phase; 0 selects 4 * |T| * |B|.
  std::size_t iteration_cap = 0;
  /// Re-assess every period after each schedule mutation and throw
  /// std::logic_error unless the cached sigma is bitwise identical. Slow.
  bool audit = false;
};

/// Capacity-preserving predicate pi(b, from, to): `to` keeps the coverage of
/// `from` (or `from` covers nothing) with at least its nominal capacity.
bool capacity_preserving(const Scenario& sc, StationId b, TypeId from, TypeId to);

/// Runs demand satisfaction, competition compliance and cost reduction in
/// that order. The assessor must be bound to `sc`.
PlanResult plan(const Scenario& sc, Mode mode, const Assessor& assessor, const PlanOptions& opts = {});

/// The individual phases, each starting from `start`. They are what plan()
/// chains together; exposed for testing phase contracts in isolation.
PlanResult phase1_capacity(const Assessor& assessor, const Schedule& start, Mode mode, const PlanOptions& opts = {});
PlanResult phase2_competition(const Assessor& assessor, const Schedule& start, Mode mode,
                              const PlanOptions& opts = {});
PlanResult phase3_cost(const Assessor& assessor, const Schedule& start, Mode mode, const PlanOptions& opts = {});

/// Smallest N in [1, limit] for which plan() succeeds with the reference
/// allocator, or nullopt.
std::optional<int> minimum_change_rate(const Scenario& sc, Mode mode, int limit);

}  // namespace evoplan
