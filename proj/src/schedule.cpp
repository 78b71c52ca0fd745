#include "evoplan/schedule.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace evoplan {

std::string_view to_string(Mode m) { return m == Mode::shared ? "shared" : "independent"; }

Mode parse_mode(std::string_view s) {
  if (s == "shared") return Mode::shared;
  if (s == "independent") return Mode::independent;
  throw std::invalid_argument("unknown mode '" + std::string(s) + "' (expected shared|independent)");
}

BudgetGroup budget_group(const Scenario& sc, StationId b, Mode m) {
  return m == Mode::shared ? 0 : static_cast<BudgetGroup>(idx(sc.station(b).owner));
}

std::size_t num_budget_groups(const Scenario& sc, Mode m) { return m == Mode::shared ? 1 : sc.num_operators(); }

std::string_view to_string(ChangeKind k) {
  switch (k) {
    case ChangeKind::create: return "create";
    case ChangeKind::enhance: return "enhance";
    case ChangeKind::decommission: return "decommission";
  }
  return "?";
}

ChangeKind classify(const TypeTable& types, TypeId from, TypeId to) {
  if (to == types.off()) return ChangeKind::decommission;
  if (from == types.off()) return ChangeKind::create;
  return ChangeKind::enhance;
}

Schedule::Schedule(const Scenario& sc) : K_(sc.horizon()), per_station_(sc.num_stations()) {
  initial_.reserve(sc.num_stations());
  for (const auto& s : sc.stations()) initial_.push_back(s.initial);
}

TypeId Schedule::type_at(StationId b, Period k) const {
  const auto& e = per_station_[idx(b)];
  auto it = std::upper_bound(e.begin(), e.end(), k, [](Period p, const Entry& x) { return p < x.period; });
  return it == e.begin() ? initial_[idx(b)] : std::prev(it)->to;
}

bool Schedule::has_change(StationId b, Period k) const {
  const auto& e = per_station_[idx(b)];
  auto it = std::lower_bound(e.begin(), e.end(), k, [](const Entry& x, Period p) { return x.period < p; });
  return it != e.end() && it->period == k;
}

Period Schedule::last_change_until(StationId b, Period k) const {
  const auto& e = per_station_[idx(b)];
  auto it = std::upper_bound(e.begin(), e.end(), k, [](Period p, const Entry& x) { return p < x.period; });
  return it == e.begin() ? 0 : std::prev(it)->period;
}

void Schedule::add(StationId b, Period k, TypeId to) {
  if (k < 1 || k > K_) throw std::out_of_range("change period " + std::to_string(k) + " outside [1, K]");
  auto& e = per_station_.at(idx(b));
  auto it = std::lower_bound(e.begin(), e.end(), k, [](const Entry& x, Period p) { return x.period < p; });
  if (it != e.end() && it->period == k) throw std::logic_error("station already changes at period " + std::to_string(k));
  e.insert(it, Entry{k, to});
  ++total_;
}

void Schedule::remove(StationId b, Period k) {
  auto& e = per_station_.at(idx(b));
  auto it = std::lower_bound(e.begin(), e.end(), k, [](const Entry& x, Period p) { return x.period < p; });
  if (it == e.end() || it->period != k) throw std::logic_error("no change to remove at period " + std::to_string(k));
  e.erase(it);
  --total_;
}

void Schedule::retarget(StationId b, Period k, TypeId to) {
  auto& e = per_station_.at(idx(b));
  auto it = std::lower_bound(e.begin(), e.end(), k, [](const Entry& x, Period p) { return x.period < p; });
  if (it == e.end() || it->period != k) throw std::logic_error("no change to retarget at period " + std::to_string(k));
  it->to = to;
}

std::vector<Change> Schedule::changes() const {
  std::vector<Change> out;
  out.reserve(total_);
  for (std::size_t b = 0; b < per_station_.size(); ++b) {
    for (const auto& e : per_station_[b]) out.push_back({make_id<StationId>(b), e.period, e.to});
  }
  std::stable_sort(out.begin(), out.end(), [](const Change& a, const Change& b) { return a.period < b.period; });
  return out;
}

std::vector<std::vector<int>> change_counts(const Scenario& sc, const Schedule& s, Mode m) {
  std::vector<std::vector<int>> counts(num_budget_groups(sc, m), std::vector<int>(sc.horizon() + 1, 0));
  for (std::size_t b = 0; b < s.num_stations(); ++b) {
    const auto id = make_id<StationId>(b);
    for (const auto& e : s.changes_of(id)) ++counts[budget_group(sc, id, m)][e.period];
  }
  return counts;
}

std::vector<Violation> validate_schedule(const Scenario& sc, const Schedule& s, Mode m) {
  std::vector<Violation> out;
  const auto counts = change_counts(sc, s, m);
  for (std::size_t g = 0; g < counts.size(); ++g) {
    for (Period k = 1; k <= sc.horizon(); ++k) {
      if (counts[g][k] > sc.change_rate()) {
        out.push_back({"change budget", "period " + std::to_string(k),
                       std::to_string(counts[g][k]) + " changes exceed N=" + std::to_string(sc.change_rate()) +
                           (m == Mode::independent ? " for operator " + sc.operators()[g] : std::string{})});
      }
    }
  }
  for (std::size_t b = 0; b < s.num_stations(); ++b) {
    const auto id = make_id<StationId>(b);
    TypeId prev = sc.station(id).initial;
    for (const auto& e : s.changes_of(id)) {
      const std::string who = "station " + sc.station(id).name + " at period " + std::to_string(e.period);
      if (!sc.allowed(id, e.to)) out.push_back({"allowed destination", who, "type " + sc.types()[e.to].name});
      if (!sc.types().can_change(prev, e.to)) {
        out.push_back({"change graph", who, sc.types()[prev].name + " -> " + sc.types()[e.to].name});
      }
      prev = e.to;
    }
  }
  return out;
}

}  // namespace evoplan
