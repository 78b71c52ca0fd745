#include "evoplan/planner.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace evoplan {

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::capacity: return "capacity";
    case Phase::competition: return "competition";
    case Phase::cost: return "cost";
  }
  return "?";
}

std::string_view to_string(PlanStatus s) {
  switch (s) {
    case PlanStatus::success: return "success";
    case PlanStatus::infeasible: return "infeasible";
    case PlanStatus::nonconvergent: return "nonconvergent";
  }
  return "?";
}

std::string_view to_string(LogAction a) {
  switch (a) {
    case LogAction::commit: return "commit";
    case LogAction::retarget: return "retarget";
    case LogAction::drop: return "drop";
    case LogAction::revert: return "revert";
    case LogAction::skip: return "skip";
  }
  return "?";
}

bool capacity_preserving(const Scenario& sc, StationId b, TypeId from, TypeId to) {
  if (sc.capacity(to) < sc.capacity(from)) return false;
  // Coverage sets are distance prefixes of the station's reach, so comparing
  // their sizes compares the sets.
  const std::size_t before = sc.coverage(b, from).size();
  const std::size_t after = sc.coverage(b, to).size();
  return before == 0 || before == after;
}

namespace {

using Cell = std::pair<Period, ClusterId>;

struct Action {
  StationId station{};
  double distance = 0.0;
  TypeId current{};
  std::vector<TypeId> types;
};

class Planner {
 public:
  Planner(const Assessor& a, const Schedule& start, Mode m, const PlanOptions& o)
      : a_(a),
        sc_(a.scenario()),
        mode_(m),
        opts_(o),
        sched_(start),
        K_(static_cast<std::size_t>(sc_.horizon())),
        C_(sc_.num_clusters()),
        O_(sc_.num_operators()),
        G_(num_budget_groups(sc_, m)),
        N_(sc_.change_rate()) {
    cap_ = opts_.iteration_cap ? opts_.iteration_cap
                               : std::max<std::size_t>(1, 4 * sc_.types().size() * sc_.num_stations());
    counts_ = change_counts(sc_, sched_, mode_);
    sigma_.assign(C_ * K_, 0.0);
    sigma_op_.assign(C_ * K_ * O_, 0.0);
    shortage_.resize(G_);
    compliant_.assign(C_ * K_, 0);
    compliant_count_.assign(K_ + 1, 0);
    counted_.assign(K_ + 1, 0);
    influence_.resize(sc_.num_stations());
    demanded_by_.assign(C_ * O_, 0);
    for (std::size_t c = 0; c < C_; ++c) {
      for (Period k = 1; k <= sc_.horizon(); ++k) {
        const auto cid = make_id<ClusterId>(c);
        if (sc_.demand(cid, k) > 0.0) ++counted_[static_cast<std::size_t>(k)];
        for (std::size_t o = 0; o < O_; ++o) {
          if (sc_.demand(cid, k, make_id<OperatorId>(o)) > 0.0) demanded_by_[c * O_ + o] = 1;
        }
      }
    }
    // Every counted cell starts non-compliant; refresh() promotes it.
    for (std::size_t c = 0; c < C_; ++c) {
      for (Period k = 1; k <= sc_.horizon(); ++k) {
        if (sc_.demand(make_id<ClusterId>(c), k) > 0.0) noncompliant_.insert({k, make_id<ClusterId>(c)});
      }
    }
    for (Period k = 1; k <= sc_.horizon(); ++k) {
      if (!meets_fraction(0, counted_[static_cast<std::size_t>(k)], sc_.phi())) failing_.insert(k);
    }
    for (std::size_t c = 0; c < C_; ++c) {
      for (Period k = 1; k <= sc_.horizon(); ++k) refresh(make_id<ClusterId>(c), k);
    }
    for (const auto& ch : sched_.changes()) origin_[{idx(ch.station), ch.period}] = Phase::capacity;
  }

  bool run_capacity() {
    for (std::size_t g = 0; g < G_; ++g) {
      std::size_t iter = 0;
      std::vector<Period> due;
      while (!shortage_[g].empty()) {
        if (++iter > cap_) return fail(PlanStatus::nonconvergent, Phase::capacity, 0, "iteration cap reached in demand phase");
        const auto [k, c] = *shortage_[g].begin();
        const std::optional<Action> act = find_action(c, k, static_cast<BudgetGroup>(g));
        if (!act) {
          return fail(PlanStatus::infeasible, Phase::capacity, k,
                      coverable(c, static_cast<BudgetGroup>(g))
                          ? "no capacity-preserving change left for cluster " + cluster_name(c) + " at period " +
                                std::to_string(k)
                          : "uncoverable cluster " + cluster_name(c));
        }
        const TypeId t = pick_restoring(*act, c, k, static_cast<BudgetGroup>(g));
        if (!place(act->station, act->current, t, c, k, static_cast<BudgetGroup>(g), Phase::capacity, iter, due)) {
          return false;
        }
      }
    }
    return true;
  }

  bool run_competition() {
    std::set<Cell> stuck;
    std::vector<std::vector<Period>> due(G_);
    std::size_t turn = 0;
    std::size_t iter = 0;
    while (!failing_.empty()) {
      if (++iter > cap_) return fail(PlanStatus::nonconvergent, Phase::competition, 0, "iteration cap reached in competition phase");
      const Period k = *failing_.begin();
      bool fixed = false;
      for (auto it = noncompliant_.lower_bound({k, ClusterId{}}); it != noncompliant_.end() && it->first == k; ++it) {
        const ClusterId c = it->second;
        if (stuck.count({k, c})) continue;
        for (std::size_t step = 0; step < G_ && !fixed; ++step) {
          const auto g = static_cast<BudgetGroup>((turn + step) % G_);
          const std::optional<Action> act = find_action(c, k, g);
          if (!act) continue;
          const TypeId t = pick_strongest(*act, c, k);
          const double before = current_hhi(c, k);
          const double after = hypothetical_hhi(*act, t, c, k);
          if (!(after < before)) continue;
          // place() may invalidate `it`; leave the scan right after.
          if (!place(act->station, act->current, t, c, k, g, Phase::competition, iter, due[static_cast<std::size_t>(g)])) {
            return false;
          }
          turn = static_cast<std::size_t>(g) + 1;
          fixed = true;
        }
        if (fixed) break;
        stuck.insert({k, c});
      }
      if (!fixed) {
        std::ostringstream why;
        why << "no capacity-preserving change lowers the HHI at period " << k << " (" << compliant_count_[static_cast<std::size_t>(k)]
            << " of " << counted_[static_cast<std::size_t>(k)] << " clusters compliant, phi=" << sc_.phi() << ")";
        return fail(PlanStatus::infeasible, Phase::competition, k, why.str());
      }
    }
    for (std::size_t g = 0; g < G_; ++g) {
      if (!shortage_[g].empty()) throw std::logic_error("competition phase broke demand satisfaction");
    }
    return true;
  }

  void run_cost() {
    if (!goals_hold()) {
      fail(PlanStatus::infeasible, Phase::cost, 0, "cost phase requires demand and competition goals to hold");
      return;
    }
    struct Candidate {
      double save;
      StationId station;
      TypeId from;
      TypeId to;
    };
    std::size_t iter = 0;
    for (std::size_t g = 0; g < G_; ++g) {
      std::vector<Candidate> list;
      for (std::size_t bi = 0; bi < sc_.num_stations(); ++bi) {
        const auto b = make_id<StationId>(bi);
        if (static_cast<std::size_t>(budget_group(sc_, b, mode_)) != g) continue;
        const TypeId f = sched_.final_type(b);
        for (TypeId t : sc_.station(b).allowed) {
          if (t == f || !sc_.types().can_change(f, t)) continue;
          const double save = std::max(0.0, sc_.cost(b, f) - sc_.cost(b, t));
          if (save > 0.0) list.push_back({save, b, f, t});
        }
      }
      std::sort(list.begin(), list.end(), [](const Candidate& x, const Candidate& y) {
        return std::tie(y.save, x.station, x.to) < std::tie(x.save, y.station, y.to);
      });
      for (const Candidate& cand : list) {
        ++iter;
        PhaseLogEntry e{Phase::cost, iter, LogAction::skip, ClusterId{}, 0, cand.station, cand.from, cand.to, 0, {}};
        if (sched_.final_type(cand.station) != cand.from) {
          e.note = "station type changed earlier in this phase";
          log_.push_back(std::move(e));
          continue;
        }
        const Period last = sched_.last_change_until(cand.station, sc_.horizon());
        const ChangeRequest req{cand.station, cand.to, sc_.horizon(), Direction::earliest};
        const std::optional<Period> slot = schedule_change(counts_[g], req, N_, last + 1);
        if (!slot) {
          e.note = "no period with spare budget";
          log_.push_back(std::move(e));
          continue;
        }
        e.scheduled = *slot;
        add_change(cand.station, *slot, cand.to, Phase::cost);
        std::string evidence = violation_after(cand.station, cand.from, *slot);
        if (!evidence.empty()) {
          remove_change(cand.station, *slot);
          e.action = LogAction::revert;
          e.note = std::move(evidence);
        } else {
          e.action = LogAction::commit;
        }
        log_.push_back(std::move(e));
      }
    }
  }

  PlanResult finish() && {
    PlanResult r{sched_, {}, std::move(log_), status_, failed_phase_, failed_period_, reason_};
    for (const auto& ch : sched_.changes()) {
      const TypeId from = sched_.type_at(ch.station, ch.period - 1);
      auto it = origin_.find({idx(ch.station), ch.period});
      r.changes.push_back({ch, from, classify(sc_.types(), from, ch.to), it == origin_.end() ? Phase::capacity : it->second});
    }
    return r;
  }

 private:
  std::size_t cell(ClusterId c, Period k) const { return idx(c) * K_ + static_cast<std::size_t>(k - 1); }

  std::string cluster_name(ClusterId c) const { return sc_.clusters()[idx(c)].name; }

  double view_sigma(ClusterId c, Period k, BudgetGroup g) const {
    return mode_ == Mode::shared ? sigma_[cell(c, k)] : sigma_op_[cell(c, k) * O_ + static_cast<std::size_t>(g)];
  }

  double view_demand(ClusterId c, Period k, BudgetGroup g) const {
    return mode_ == Mode::shared ? sc_.demand(c, k) : sc_.demand(c, k, make_id<OperatorId>(static_cast<std::size_t>(g)));
  }

  double hhi_for(ClusterId c, Period k, double sigma) const {
    if (mode_ == Mode::shared) {
      const double joint[1] = {sc_.demand(c, k)};
      return hhi(sigma, joint).value;
    }
    std::vector<double> d(O_);
    for (std::size_t o = 0; o < O_; ++o) d[o] = sc_.demand(c, k, make_id<OperatorId>(o));
    return hhi(sigma, d).value;
  }

  double current_hhi(ClusterId c, Period k) const { return hhi_for(c, k, sigma_[cell(c, k)]); }

  double hypothetical_sigma(const Action& act, TypeId t, ClusterId c, Period k, BudgetGroup g) const {
    const double now = a_.station_supply(sched_, act.station, act.current, c, k, mode_);
    const double then = a_.station_supply(sched_, act.station, t, c, k, mode_);
    return view_sigma(c, k, g) - now + then;
  }

  double hypothetical_hhi(const Action& act, TypeId t, ClusterId c, Period k) const {
    const double now = a_.station_supply(sched_, act.station, act.current, c, k, mode_);
    const double then = a_.station_supply(sched_, act.station, t, c, k, mode_);
    return hhi_for(c, k, sigma_[cell(c, k)] - now + then);
  }

  void refresh(ClusterId c, Period k) {
    const std::size_t i = cell(c, k);
    sigma_[i] = a_.cluster_sigma(sched_, c, k, mode_, std::span<double>(sigma_op_).subspan(i * O_, O_));
    for (std::size_t g = 0; g < G_; ++g) {
      const auto grp = static_cast<BudgetGroup>(g);
      if (view_sigma(c, k, grp) < view_demand(c, k, grp)) {
        shortage_[g].insert({k, c});
      } else {
        shortage_[g].erase({k, c});
      }
    }
    if (!(sc_.demand(c, k) > 0.0)) return;
    const bool ok = sigma_[i] > 0.0 && hhi_for(c, k, sigma_[i]) <= sc_.h_max();
    if (ok == static_cast<bool>(compliant_[i])) return;
    compliant_[i] = ok;
    const auto ku = static_cast<std::size_t>(k);
    if (ok) {
      ++compliant_count_[ku];
      noncompliant_.erase({k, c});
    } else {
      --compliant_count_[ku];
      noncompliant_.insert({k, c});
    }
    if (meets_fraction(compliant_count_[ku], counted_[ku], sc_.phi())) {
      failing_.erase(k);
    } else {
      failing_.insert(k);
    }
  }

  const std::vector<ClusterId>& influence(StationId b) {
    auto& v = influence_[idx(b)];
    if (!v) v = a_.influence(b);
    return *v;
  }

  // Re-assesses every cell the type of b can affect from period k until its next change.
  void refresh_from(StationId b, Period k) {
    Period end = sc_.horizon();
    for (const auto& e : sched_.changes_of(b)) {
      if (e.period > k) {
        end = e.period - 1;
        break;
      }
    }
    for (ClusterId c : influence(b)) {
      for (Period h = k; h <= end; ++h) refresh(c, h);
    }
  }

  void add_change(StationId b, Period k, TypeId t, Phase phase) {
    sched_.add(b, k, t);
    ++counts_[static_cast<std::size_t>(budget_group(sc_, b, mode_))][static_cast<std::size_t>(k)];
    origin_[{idx(b), k}] = phase;
    refresh_from(b, k);
    audit();
  }

  void remove_change(StationId b, Period k) {
    sched_.remove(b, k);
    --counts_[static_cast<std::size_t>(budget_group(sc_, b, mode_))][static_cast<std::size_t>(k)];
    origin_.erase({idx(b), k});
    refresh_from(b, k);
    audit();
  }

  void audit() const {
    if (!opts_.audit) return;
    for (Period k = 1; k <= sc_.horizon(); ++k) {
      const AssessmentResult full = a_.assess(sched_, k, mode_);
      for (std::size_t c = 0; c < C_; ++c) {
        const std::size_t i = cell(make_id<ClusterId>(c), k);
        bool same = full.sigma_cluster[c] == sigma_[i];
        for (std::size_t o = 0; o < O_; ++o) same = same && full.sigma_cluster_op[c * O_ + o] == sigma_op_[i * O_ + o];
        if (!same) {
          throw std::logic_error("cached sigma differs from a full assessment for cluster " + cluster_name(make_id<ClusterId>(c)) +
                                 " at period " + std::to_string(k));
        }
      }
    }
  }

  std::optional<std::pair<Period, TypeId>> next_change(StationId b, Period k) const {
    for (const auto& e : sched_.changes_of(b)) {
      if (e.period > k) return std::make_pair(e.period, e.to);
    }
    return std::nullopt;
  }

  bool coverable(ClusterId c, BudgetGroup g) const {
    for (const auto& r : sc_.nearest(c)) {
      if (budget_group(sc_, r.station, mode_) != g) continue;
      for (TypeId t : sc_.station(r.station).allowed) {
        if (t != sc_.types().off() && sc_.covers_at(r.distance, t)) return true;
      }
    }
    return false;
  }

  // Nearest station of group g with a capacity-preserving change that adds
  // capacity for c at period k; ties go to the lowest station id.
  std::optional<Action> find_action(ClusterId c, Period k, BudgetGroup g) const {
    for (const auto& r : sc_.nearest(c)) {
      const StationId b = r.station;
      if (budget_group(sc_, b, mode_) != g) continue;
      const TypeId cur = sched_.type_at(b, k);
      const auto later = next_change(b, k);
      Action act{b, r.distance, cur, {}};
      for (TypeId t : sc_.station(b).allowed) {
        if (t == cur || !sc_.types().can_change(cur, t) || !sc_.covers_at(r.distance, t)) continue;
        if (!capacity_preserving(sc_, b, cur, t)) continue;
        if (sc_.covers_at(r.distance, cur) && !(sc_.capacity(t) > sc_.capacity(cur))) continue;
        if (later && !capacity_preserving(sc_, b, t, later->second) && !capacity_preserving(sc_, b, later->second, t)) {
          continue;
        }
        act.types.push_back(t);
      }
      if (!act.types.empty()) return act;
    }
    return std::nullopt;
  }

  // Cheapest type restoring sigma >= tau at (c,k); the largest one if none does.
  TypeId pick_restoring(const Action& act, ClusterId c, Period k, BudgetGroup g) const {
    const double need = view_demand(c, k, g);
    std::optional<TypeId> best;
    for (TypeId t : act.types) {
      if (hypothetical_sigma(act, t, c, k, g) < need) continue;
      if (!best) {
        best = t;
        continue;
      }
      const auto key = [&](TypeId x) { return std::make_tuple(sc_.cost(act.station, x), sc_.capacity(x), x); };
      if (key(t) < key(*best)) best = t;
    }
    return best ? *best : pick_strongest(act, c, k);
  }

  TypeId pick_strongest(const Action& act, ClusterId c, Period k) const {
    TypeId best = act.types.front();
    double best_supply = -1.0;
    for (TypeId t : act.types) {
      const double s = a_.station_supply(sched_, act.station, t, c, k, mode_);
      if (s > best_supply || (s == best_supply && sc_.cost(act.station, t) < sc_.cost(act.station, best))) {
        best = t;
        best_supply = s;
      }
    }
    return best;
  }

  bool place(StationId b, TypeId current, TypeId t, ClusterId c, Period k, BudgetGroup g, Phase phase,
             std::size_t iter, std::vector<Period>& due) {
    const auto gi = static_cast<std::size_t>(g);
    const Period p = sched_.last_change_until(b, k);
    const ChangeRequest req{b, t, k, opts_.fix_direction};
    std::optional<Period> slot = schedule_change(counts_[gi], req, N_, p + 1);
    if (slot && *slot > k) slot.reset();
    PhaseLogEntry e{phase, iter, LogAction::commit, c, k, b, current, t, 0, {}};
    if (slot) {
      e.scheduled = *slot;
      add_change(b, *slot, t, phase);
      due.push_back(k);
      log_.push_back(std::move(e));
      drop_dominated(b, *slot, t, phase, iter);
      return true;
    }
    if (p >= 1) {
      const TypeId prev = sched_.type_at(b, p - 1);
      if (sc_.types().can_change(prev, t) && capacity_preserving(sc_, b, prev, t)) {
        sched_.retarget(b, p, t);
        origin_[{idx(b), p}] = phase;
        refresh_from(b, p);
        audit();
        e.action = LogAction::retarget;
        e.scheduled = p;
        e.note = "no free period in (" + std::to_string(p) + ", " + std::to_string(k) + "]";
        log_.push_back(std::move(e));
        drop_dominated(b, p, t, phase, iter);
        return true;
      }
    }
    std::vector<Period> all = due;
    all.push_back(k);
    const NecessaryCheck nc = check_necessary(all, N_, sc_.horizon());
    std::string why;
    Period at = k;
    if (!nc.feasible) {
      at = nc.first_violation;
      why = "change budget exhausted: more than " + std::to_string(static_cast<long>(at) * N_) +
            " changes due by period " + std::to_string(at) + " (N=" + std::to_string(N_) + ")";
    } else {
      why = "no free period in [" + std::to_string(p + 1) + ", " + std::to_string(k) + "] for station " +
            sc_.station(b).name + " (N=" + std::to_string(N_) + ")";
    }
    if (mode_ == Mode::independent) why += " for operator " + sc_.operators()[gi];
    return fail(PlanStatus::infeasible, phase, at, why);
  }

  void drop_dominated(StationId b, Period h, TypeId t, Phase phase, std::size_t iter) {
    while (auto later = next_change(b, h)) {
      if (!capacity_preserving(sc_, b, later->second, t)) break;
      remove_change(b, later->first);
      log_.push_back({phase, iter, LogAction::drop, ClusterId{}, 0, b, t, later->second, later->first,
                      "superseded by an earlier change"});
    }
  }

  bool goals_hold() const {
    for (const auto& s : shortage_) {
      if (!s.empty()) return false;
    }
    return failing_.empty();
  }

  // Empty when goals 1-2 and coverage of demanded clusters survive the trial
  // change of b (previously `from`) at `slot`; otherwise the first breach found.
  std::string violation_after(StationId b, TypeId from, Period slot) const {
    for (std::size_t g = 0; g < G_; ++g) {
      if (!shortage_[g].empty()) {
        const auto [k, c] = *shortage_[g].begin();
        return "demand unmet for cluster " + cluster_name(c) + " at period " + std::to_string(k);
      }
    }
    if (!failing_.empty()) {
      const Period k = *failing_.begin();
      return "competition fraction below phi at period " + std::to_string(k);
    }
    const BudgetGroup g = budget_group(sc_, b, mode_);
    const TypeId to = sched_.final_type(b);
    for (const auto& e : sc_.coverage(b, from)) {
      if (sc_.covers_at(e.distance, to)) continue;
      const bool demanded = mode_ == Mode::shared ? sc_.demanded(e.cluster)
                                                  : demanded_by_[idx(e.cluster) * O_ + static_cast<std::size_t>(g)] != 0;
      if (!demanded) continue;
      for (Period k = slot; k <= sc_.horizon(); ++k) {
        bool covered = false;
        for (const auto& r : sc_.candidates(e.cluster)) {
          if (budget_group(sc_, r.station, mode_) != g) continue;
          if (sc_.covers_at(r.distance, sched_.type_at(r.station, k))) {
            covered = true;
            break;
          }
        }
        if (!covered) return "cluster " + cluster_name(e.cluster) + " loses coverage at period " + std::to_string(k);
      }
    }
    return {};
  }

  bool fail(PlanStatus s, Phase p, Period k, std::string why) {
    status_ = s;
    failed_phase_ = p;
    failed_period_ = k;
    reason_ = std::move(why);
    return false;
  }

  const Assessor& a_;
  const Scenario& sc_;
  Mode mode_;
  PlanOptions opts_;
  Schedule sched_;
  std::size_t K_, C_, O_, G_;
  int N_;
  std::size_t cap_ = 0;

  std::vector<std::vector<int>> counts_;
  std::vector<double> sigma_;
  std::vector<double> sigma_op_;
  std::vector<std::set<Cell>> shortage_;
  std::vector<char> compliant_;
  std::vector<std::size_t> compliant_count_;
  std::vector<std::size_t> counted_;
  std::set<Period> failing_;
  std::set<Cell> noncompliant_;
  std::vector<std::optional<std::vector<ClusterId>>> influence_;
  std::vector<char> demanded_by_;
  std::map<std::pair<std::size_t, Period>, Phase> origin_;

  std::vector<PhaseLogEntry> log_;
  PlanStatus status_ = PlanStatus::success;
  Phase failed_phase_ = Phase::capacity;
  Period failed_period_ = 0;
  std::string reason_;
};

void require_bound(const Scenario& sc, const Assessor& a) {
  if (&a.scenario() != &sc) throw std::invalid_argument("assessor is bound to a different scenario");
}

}  // namespace

PlanResult plan(const Scenario& sc, Mode mode, const Assessor& assessor, const PlanOptions& opts) {
  require_bound(sc, assessor);
  Planner p(assessor, Schedule(sc), mode, opts);
  if (p.run_capacity() && p.run_competition()) p.run_cost();
  return std::move(p).finish();
}

PlanResult phase1_capacity(const Assessor& assessor, const Schedule& start, Mode mode, const PlanOptions& opts) {
  Planner p(assessor, start, mode, opts);
  p.run_capacity();
  return std::move(p).finish();
}

PlanResult phase2_competition(const Assessor& assessor, const Schedule& start, Mode mode, const PlanOptions& opts) {
  Planner p(assessor, start, mode, opts);
  p.run_competition();
  return std::move(p).finish();
}

PlanResult phase3_cost(const Assessor& assessor, const Schedule& start, Mode mode, const PlanOptions& opts) {
  Planner p(assessor, start, mode, opts);
  p.run_cost();
  return std::move(p).finish();
}

std::optional<int> minimum_change_rate(const Scenario& sc, Mode mode, int limit) {
  for (int n = 1; n <= limit; ++n) {
    const Scenario trial = sc.with_settings(n, sc.h_max(), sc.phi());
    const ProportionalAssessor a(trial);
    if (plan(trial, mode, a).ok()) return n;
  }
  return std::nullopt;
}

}  // namespace evoplan
