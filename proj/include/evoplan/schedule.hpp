#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "evoplan/ids.hpp"
#include "evoplan/scenario.hpp"

namespace evoplan {

/// Shared: operators plan one joint network, pool their demand and count as a
/// single market participant. Independent: every operator plans its own
/// stations for its own demand under its own change budget.
enum class Mode { shared, independent };

std::string_view to_string(Mode m);
Mode parse_mode(std::string_view s);

/// Budget group a station's changes are charged to.
BudgetGroup budget_group(const Scenario& sc, StationId b, Mode m);
std::size_t num_budget_groups(const Scenario& sc, Mode m);

/// x(b,k,t) = 1.
struct Change {
  StationId station{};
  Period period = 0;
  TypeId to{};

  friend bool operator==(const Change&, const Change&) = default;
};

enum class ChangeKind { create, enhance, decommission };

std::string_view to_string(ChangeKind k);
ChangeKind classify(const TypeTable& types, TypeId from, TypeId to);

/// The set of committed type changes and the per-period type trajectory they
/// induce. At most one change per (station, period); T(b,0) is the initial type
/// and T(b,k) is the destination of the latest change at or before k.
class Schedule {
 public:
  struct Entry {
    Period period = 0;
    TypeId to{};
  };

  explicit Schedule(const Scenario& sc);

  Period horizon() const noexcept { return K_; }
  std::size_t num_stations() const noexcept { return initial_.size(); }

  TypeId type_at(StationId b, Period k) const;
  TypeId final_type(StationId b) const { return type_at(b, K_); }
  std::span<const Entry> changes_of(StationId b) const { return per_station_[idx(b)]; }
  bool has_change(StationId b, Period k) const;
  /// Latest change period of `b` that is <= k, or 0 when none.
  Period last_change_until(StationId b, Period k) const;

  void add(StationId b, Period k, TypeId to);
  void remove(StationId b, Period k);
  void retarget(StationId b, Period k, TypeId to);

  /// All changes ordered by (period, station).
  std::vector<Change> changes() const;
  std::size_t size() const noexcept { return total_; }

  friend bool operator==(const Schedule& a, const Schedule& b) {
    return a.K_ == b.K_ && a.initial_ == b.initial_ && a.changes() == b.changes();
  }

 private:
  Period K_ = 0;
  std::vector<TypeId> initial_;
  std::vector<std::vector<Entry>> per_station_;
  std::size_t total_ = 0;
};

/// Per budget group, the number of changes at each period: counts[g][k], k in [0, K].
std::vector<std::vector<int>> change_counts(const Scenario& sc, const Schedule& s, Mode m);

/// Schedule invariants: budget per period (per operator in independent mode),
/// allowed destination types and change-graph conformity.
std::vector<Violation> validate_schedule(const Scenario& sc, const Schedule& s, Mode m);

}  // namespace evoplan
