#include "evoplan/assessment.hpp"

#include <algorithm>
#include <stdexcept>

namespace evoplan {

std::vector<ClusterId> Assessor::influence(StationId) const {
  std::vector<ClusterId> all(scenario().num_clusters());
  for (std::size_t c = 0; c < all.size(); ++c) all[c] = make_id<ClusterId>(c);
  return all;
}

AssessmentResult Assessor::assess(const Schedule& s, Period k, Mode m) const {
  const Scenario& sc = scenario();
  const std::size_t C = sc.num_clusters();
  const std::size_t O = sc.num_operators();
  AssessmentResult r;
  r.period = k;
  r.num_operators = O;
  r.sigma_cluster.resize(C);
  r.sigma_cluster_op.resize(C * O);
  for (std::size_t c = 0; c < C; ++c) {
    r.sigma_cluster[c] =
        cluster_sigma(s, make_id<ClusterId>(c), k, m, std::span<double>(r.sigma_cluster_op).subspan(c * O, O));
  }
  for (std::size_t b = 0; b < sc.num_stations(); ++b) {
    const auto id = make_id<StationId>(b);
    const TypeId t = s.type_at(id, k);
    for (const auto& e : sc.coverage(id, t)) {
      const double v = station_supply(s, id, t, e.cluster, k, m);
      if (v != 0.0) r.sigma_station_cluster.push_back({id, e.cluster, v});
    }
  }
  std::sort(r.sigma_station_cluster.begin(), r.sigma_station_cluster.end(),
            [](const StationShare& a, const StationShare& b) {
              return a.station != b.station ? a.station < b.station : a.cluster < b.cluster;
            });
  return r;
}

ProportionalAssessor::ProportionalAssessor(const Scenario& sc) : sc_(sc), K_(static_cast<std::size_t>(sc.horizon())) {
  const std::size_t B = sc.num_stations();
  const std::size_t T = sc.types().size();
  slot_.assign(B * T, -1);
  slot_base_.assign(B + 1, 0);
  std::size_t slots = 0;
  for (std::size_t b = 0; b < B; ++b) {
    const auto id = make_id<StationId>(b);
    slot_base_[b] = slots;
    int local = 0;
    for (std::size_t t = 0; t < T; ++t) {
      const auto tid = make_id<TypeId>(t);
      if (sc.allowed(id, tid) || sc.station(id).initial == tid) slot_[b * T + t] = local++;
    }
    slots += static_cast<std::size_t>(local);
  }
  slot_base_[B] = slots;
  load_shared_.assign(slots * K_, 0.0);
  load_own_.assign(slots * K_, 0.0);
  cover_count_.assign(slots, 0);
  for (std::size_t b = 0; b < B; ++b) {
    const auto id = make_id<StationId>(b);
    const OperatorId owner = sc.station(id).owner;
    for (std::size_t t = 0; t < T; ++t) {
      const int local = slot_[b * T + t];
      if (local < 0) continue;
      const std::size_t slot = slot_base_[b] + static_cast<std::size_t>(local);
      const auto cov = sc.coverage(id, make_id<TypeId>(t));
      cover_count_[slot] = cov.size();
      for (std::size_t k = 0; k < K_; ++k) {
        double shared = 0.0;
        double own = 0.0;
        for (const auto& e : cov) {
          shared += sc.demand(e.cluster, static_cast<Period>(k + 1));
          own += sc.demand(e.cluster, static_cast<Period>(k + 1), owner);
        }
        load_shared_[slot * K_ + k] = shared;
        load_own_[slot * K_ + k] = own;
      }
    }
  }
}

double ProportionalAssessor::covered_demand(StationId b, TypeId t, Period k, Mode m) const {
  const int local = slot_[idx(b) * sc_.types().size() + idx(t)];
  if (local < 0) throw std::invalid_argument("type not allowed for station " + sc_.station(b).name);
  const std::size_t slot = slot_base_[idx(b)] + static_cast<std::size_t>(local);
  return (m == Mode::shared ? load_shared_ : load_own_)[slot * K_ + static_cast<std::size_t>(k - 1)];
}

double ProportionalAssessor::supply_at(StationId b, TypeId t, ClusterId c, double distance, Period k, Mode m) const {
  if (!sc_.covers_at(distance, t)) return 0.0;
  const double cap = sc_.capacity(t);
  const int local = slot_[idx(b) * sc_.types().size() + idx(t)];
  if (local < 0) throw std::invalid_argument("type not allowed for station " + sc_.station(b).name);
  const std::size_t slot = slot_base_[idx(b)] + static_cast<std::size_t>(local);
  const double load = (m == Mode::shared ? load_shared_ : load_own_)[slot * K_ + static_cast<std::size_t>(k - 1)];
  if (load > 0.0) {
    const double tau = m == Mode::shared ? sc_.demand(c, k) : sc_.demand(c, k, sc_.station(b).owner);
    return cap * (tau / load);
  }
  return cap / static_cast<double>(cover_count_[slot]);
}

double ProportionalAssessor::station_supply(const Schedule&, StationId b, TypeId t, ClusterId c, Period k,
                                            Mode m) const {
  return supply_at(b, t, c, sc_.distance(b, c), k, m);
}

double ProportionalAssessor::cluster_sigma(const Schedule& s, ClusterId c, Period k, Mode m,
                                           std::span<double> per_operator) const {
  std::fill(per_operator.begin(), per_operator.end(), 0.0);
  double total = 0.0;
  for (const auto& r : sc_.candidates(c)) {
    const TypeId t = s.type_at(r.station, k);
    const double v = supply_at(r.station, t, c, r.distance, k, m);
    if (v == 0.0) continue;
    total += v;
    if (m == Mode::independent) per_operator[idx(sc_.station(r.station).owner)] += v;
  }
  if (m == Mode::shared) {
    const double tau = sc_.demand(c, k);
    const std::size_t O = per_operator.size();
    if (tau > 0.0) {
      // ratio >= 1 exactly whenever total >= tau, so goal 1 per operator
      // coincides with goal 1 on the total.
      const double ratio = total / tau;
      for (std::size_t o = 0; o < O; ++o) per_operator[o] = sc_.demand(c, k, make_id<OperatorId>(o)) * ratio;
    } else {
      for (std::size_t o = 0; o < O; ++o) per_operator[o] = total / static_cast<double>(O);
    }
  }
  return total;
}

std::vector<ClusterId> ProportionalAssessor::influence(StationId b) const {
  std::vector<ClusterId> out;
  for (const auto& e : sc_.reach(b)) out.push_back(e.cluster);
  std::sort(out.begin(), out.end());
  return out;
}

HhiValue hhi(double sigma, std::span<const double> participant_demand) {
  if (!(sigma > 0.0)) return {1.0, true};
  double tau = 0.0;
  for (double d : participant_demand) tau += d;
  const double spare = std::max(0.0, (sigma - tau) / sigma);
  double h = spare * spare;
  for (double d : participant_demand) {
    const double share = d / sigma;
    h += share * share;
  }
  return {h, false};
}

HhiValue hhi(const Scenario& sc, const AssessmentResult& r, ClusterId c, Mode m) {
  const double sigma = r.cluster(c);
  if (m == Mode::shared) {
    const double joint[1] = {sc.demand(c, r.period)};
    return hhi(sigma, joint);
  }
  std::vector<double> d(sc.num_operators());
  for (std::size_t o = 0; o < d.size(); ++o) d[o] = sc.demand(c, r.period, make_id<OperatorId>(o));
  return hhi(sigma, d);
}

bool meets_fraction(std::size_t compliant, std::size_t counted, double phi) {
  // Tolerance absorbs representation error in phi * counted (0.7 * 10 etc.).
  return static_cast<double>(compliant) + 1e-9 >= phi * static_cast<double>(counted);
}

std::vector<std::pair<ClusterId, Period>> goal1_violations(const Assessor& a, const Schedule& s, Mode m) {
  const Scenario& sc = a.scenario();
  std::vector<std::pair<ClusterId, Period>> out;
  std::vector<double> per_op(sc.num_operators());
  for (Period k = 1; k <= sc.horizon(); ++k) {
    for (std::size_t c = 0; c < sc.num_clusters(); ++c) {
      const auto cid = make_id<ClusterId>(c);
      a.cluster_sigma(s, cid, k, m, per_op);
      for (std::size_t o = 0; o < per_op.size(); ++o) {
        if (per_op[o] < sc.demand(cid, k, make_id<OperatorId>(o))) {
          out.emplace_back(cid, k);
          break;
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

ComplianceSummary goal2_satisfied(const Assessor& a, const Schedule& s, Period k, Mode m) {
  const Scenario& sc = a.scenario();
  const AssessmentResult r = a.assess(s, k, m);
  ComplianceSummary out;
  for (std::size_t c = 0; c < sc.num_clusters(); ++c) {
    const auto cid = make_id<ClusterId>(c);
    if (!(sc.demand(cid, k) > 0.0)) continue;
    ++out.counted;
    const HhiValue h = hhi(sc, r, cid, m);
    if (!h.degenerate && h.value <= sc.h_max()) ++out.compliant;
  }
  out.fraction = out.counted == 0 ? 1.0 : static_cast<double>(out.compliant) / static_cast<double>(out.counted);
  out.satisfied = meets_fraction(out.compliant, out.counted, sc.phi());
  return out;
}

HhiReport hhi_report(const Assessor& a, const Schedule& s, Mode m) {
  const Scenario& sc = a.scenario();
  const std::size_t C = sc.num_clusters();
  const auto K = static_cast<std::size_t>(sc.horizon());
  HhiReport rep;
  rep.num_clusters = C;
  rep.value.assign(C * K, 1.0);
  rep.compliant.assign(C * K, 0);
  rep.per_period.resize(K);
  for (Period k = 1; k <= sc.horizon(); ++k) {
    const AssessmentResult r = a.assess(s, k, m);
    auto& sum = rep.per_period[static_cast<std::size_t>(k - 1)];
    for (std::size_t c = 0; c < C; ++c) {
      const auto cid = make_id<ClusterId>(c);
      const HhiValue h = hhi(sc, r, cid, m);
      const std::size_t cell = c * K + static_cast<std::size_t>(k - 1);
      rep.value[cell] = h.value;
      rep.compliant[cell] = !h.degenerate && h.value <= sc.h_max();
      if (sc.demand(cid, k) > 0.0) {
        ++sum.counted;
        if (rep.compliant[cell]) ++sum.compliant;
      }
    }
    sum.fraction = sum.counted == 0 ? 1.0 : static_cast<double>(sum.compliant) / static_cast<double>(sum.counted);
    sum.satisfied = meets_fraction(sum.compliant, sum.counted, sc.phi());
  }
  return rep;
}

}  // namespace evoplan
