#include "evoplan/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace evoplan {

TypeTable::TypeTable(std::vector<StationType> types, TypeId off) : types_(std::move(types)), off_(off) {
  if (idx(off_) >= types_.size()) throw std::invalid_argument("off type index out of range");
  for (const auto& t : types_) {
    for (TypeId s : t.successors) {
      if (idx(s) >= types_.size()) throw std::invalid_argument("type '" + t.name + "' has an unknown successor");
    }
  }
}

std::optional<TypeId> TypeTable::find(std::string_view name) const {
  for (std::size_t i = 0; i < types_.size(); ++i) {
    if (types_[i].name == name) return make_id<TypeId>(i);
  }
  return std::nullopt;
}

bool TypeTable::can_change(TypeId from, TypeId to) const {
  const auto& s = types_.at(idx(from)).successors;
  return std::find(s.begin(), s.end(), to) != s.end();
}

TypeTable default_type_table() {
  // Placeholder magnitudes: capacity in busy-hour Mbit, radius in km, cost per period.
  const auto id = [](int i) { return make_id<TypeId>(static_cast<std::size_t>(i)); };
  std::vector<StationType> types{
      {"off", 0.0, 0.0, 0.0, {id(2), id(3), id(4)}},
      {"3G", 100.0, 5.0, 1.0, {id(0)}},
      {"LTE-1", 300.0, 3.0, 1.2, {id(3), id(4)}},
      {"LTE-2", 600.0, 3.0, 1.5, {id(4)}},
      {"LTE-3", 900.0, 3.0, 1.8, {}},
  };
  return TypeTable(std::move(types), id(0));
}

namespace {

double euclid(double x0, double y0, double x1, double y1) { return std::hypot(x1 - x0, y1 - y0); }

std::int64_t cell_key(std::int64_t cx, std::int64_t cy) { return (cx << 32) ^ (cy & 0xffffffffLL); }

}  // namespace

Scenario::Scenario(ScenarioInput input) : in_(std::move(input)) {
  K_ = static_cast<std::size_t>(std::max<Period>(in_.horizon, 0));
  O_ = in_.operators.size();
  T_ = in_.types.size();
  const std::size_t B = in_.stations.size();
  const std::size_t C = in_.clusters.size();

  if (in_.horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (O_ == 0) throw std::invalid_argument("at least one operator is required");
  if (T_ == 0) throw std::invalid_argument("type table is empty");
  if (in_.demand.size() != C * K_ * O_) {
    throw std::invalid_argument("demand table has " + std::to_string(in_.demand.size()) + " cells, expected " +
                                std::to_string(C * K_ * O_));
  }
  for (auto& s : in_.stations) {
    if (idx(s.initial) >= T_) throw std::invalid_argument("station '" + s.name + "' has an unknown initial type");
    if (idx(s.owner) >= O_) throw std::invalid_argument("station '" + s.name + "' has an unknown owner");
    for (TypeId t : s.allowed) {
      if (idx(t) >= T_) throw std::invalid_argument("station '" + s.name + "' allows an unknown type");
    }
    std::sort(s.allowed.begin(), s.allowed.end());
    s.allowed.erase(std::unique(s.allowed.begin(), s.allowed.end()), s.allowed.end());
  }

  demand_total_.assign(C * K_, 0.0);
  demanded_.assign(C, 0);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t k = 0; k < K_; ++k) {
      double sum = 0.0;
      for (std::size_t o = 0; o < O_; ++o) sum += in_.demand[(c * K_ + k) * O_ + o];
      demand_total_[c * K_ + k] = sum;
      if (sum > 0.0) demanded_[c] = 1;
    }
  }

  cost_.assign(B * T_, 0.0);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t t = 0; t < T_; ++t) cost_[b * T_ + t] = in_.types.types()[t].cost;
  }
  for (const auto& o : in_.cost_overrides) {
    if (idx(o.station) >= B || idx(o.type) >= T_) throw std::invalid_argument("cost override out of range");
    cost_[idx(o.station) * T_ + idx(o.type)] = o.cost;
  }

  // Uniform grid over clusters; cell side is the widest radius in the table.
  double max_radius = 0.0;
  for (const auto& t : in_.types.types()) max_radius = std::max(max_radius, t.radius_km);
  const double cell = max_radius > 0.0 ? max_radius : 1.0;
  std::unordered_map<std::int64_t, std::vector<std::size_t>> grid;
  grid.reserve(C);
  for (std::size_t c = 0; c < C; ++c) {
    const auto cx = static_cast<std::int64_t>(std::floor(in_.clusters[c].x / cell));
    const auto cy = static_cast<std::int64_t>(std::floor(in_.clusters[c].y / cell));
    grid[cell_key(cx, cy)].push_back(c);
  }

  station_offsets_.assign(B + 1, 0);
  std::vector<std::size_t> per_cluster(C, 0);
  for (std::size_t b = 0; b < B; ++b) {
    const auto& s = in_.stations[b];
    double reach = 0.0;
    for (TypeId t : s.allowed) reach = std::max(reach, in_.types[t].radius_km);
    reach = std::max(reach, in_.types[s.initial].radius_km);
    std::vector<StationReach> found;
    if (reach > 0.0 && std::isfinite(s.x) && std::isfinite(s.y)) {
      const auto span = static_cast<std::int64_t>(std::ceil(reach / cell));
      const auto cx = static_cast<std::int64_t>(std::floor(s.x / cell));
      const auto cy = static_cast<std::int64_t>(std::floor(s.y / cell));
      for (std::int64_t dx = -span; dx <= span; ++dx) {
        for (std::int64_t dy = -span; dy <= span; ++dy) {
          auto it = grid.find(cell_key(cx + dx, cy + dy));
          if (it == grid.end()) continue;
          for (std::size_t c : it->second) {
            const double d = euclid(s.x, s.y, in_.clusters[c].x, in_.clusters[c].y);
            if (d <= reach) found.push_back({make_id<ClusterId>(c), d});
          }
        }
      }
    }
    std::sort(found.begin(), found.end(), [](const StationReach& a, const StationReach& b) {
      return a.distance != b.distance ? a.distance < b.distance : a.cluster < b.cluster;
    });
    for (const auto& r : found) ++per_cluster[idx(r.cluster)];
    station_reach_.insert(station_reach_.end(), found.begin(), found.end());
    station_offsets_[b + 1] = station_reach_.size();
  }

  cluster_offsets_.assign(C + 1, 0);
  for (std::size_t c = 0; c < C; ++c) cluster_offsets_[c + 1] = cluster_offsets_[c] + per_cluster[c];
  cluster_by_id_.resize(station_reach_.size());
  std::vector<std::size_t> fill(cluster_offsets_.begin(), cluster_offsets_.end() - 1);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t i = station_offsets_[b]; i < station_offsets_[b + 1]; ++i) {
      const auto& r = station_reach_[i];
      cluster_by_id_[fill[idx(r.cluster)]++] = {make_id<StationId>(b), r.distance};
    }
  }
  // Stations were visited in id order, so each cluster's slice is already id-sorted.
  cluster_by_distance_ = cluster_by_id_;
  for (std::size_t c = 0; c < C; ++c) {
    std::sort(cluster_by_distance_.begin() + static_cast<std::ptrdiff_t>(cluster_offsets_[c]),
              cluster_by_distance_.begin() + static_cast<std::ptrdiff_t>(cluster_offsets_[c + 1]),
              [](const ClusterReach& a, const ClusterReach& b) {
                return a.distance != b.distance ? a.distance < b.distance : a.station < b.station;
              });
  }
}

double Scenario::distance(StationId b, ClusterId c) const {
  const auto& s = in_.stations.at(idx(b));
  const auto& cl = in_.clusters.at(idx(c));
  return euclid(s.x, s.y, cl.x, cl.y);
}

bool Scenario::covers(StationId b, ClusterId c, TypeId t) const { return covers_at(distance(b, c), t); }

bool Scenario::allowed(StationId b, TypeId t) const {
  const auto& a = in_.stations[idx(b)].allowed;
  return std::binary_search(a.begin(), a.end(), t);
}

std::span<const StationReach> Scenario::reach(StationId b) const {
  return {station_reach_.data() + station_offsets_[idx(b)], station_offsets_[idx(b) + 1] - station_offsets_[idx(b)]};
}

std::span<const StationReach> Scenario::coverage(StationId b, TypeId t) const {
  auto all = reach(b);
  const double r = in_.types[t].radius_km;
  if (!(r > 0.0)) return all.first(0);
  auto end = std::upper_bound(all.begin(), all.end(), r,
                              [](double radius, const StationReach& e) { return radius < e.distance; });
  return all.first(static_cast<std::size_t>(end - all.begin()));
}

std::span<const ClusterReach> Scenario::candidates(ClusterId c) const {
  return {cluster_by_id_.data() + cluster_offsets_[idx(c)], cluster_offsets_[idx(c) + 1] - cluster_offsets_[idx(c)]};
}

std::span<const ClusterReach> Scenario::nearest(ClusterId c) const {
  return {cluster_by_distance_.data() + cluster_offsets_[idx(c)],
          cluster_offsets_[idx(c) + 1] - cluster_offsets_[idx(c)]};
}

Scenario Scenario::with_settings(int change_rate, double h_max, double phi) const {
  ScenarioInput copy = in_;
  copy.change_rate = change_rate;
  copy.h_max = h_max;
  copy.phi = phi;
  return Scenario(std::move(copy));
}

namespace {

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

// Types reachable from `from` through the change graph without leaving `allowed`.
std::vector<char> reachable_types(const TypeTable& types, TypeId from, std::span<const TypeId> allowed) {
  std::vector<char> seen(types.size(), 0);
  std::vector<TypeId> stack{from};
  seen[idx(from)] = 1;
  while (!stack.empty()) {
    TypeId t = stack.back();
    stack.pop_back();
    for (TypeId s : types[t].successors) {
      if (seen[idx(s)] || std::find(allowed.begin(), allowed.end(), s) == allowed.end()) continue;
      seen[idx(s)] = 1;
      stack.push_back(s);
    }
  }
  return seen;
}

}  // namespace

std::vector<Violation> validate(const Scenario& sc) {
  std::vector<Violation> out;
  const auto& types = sc.types();
  const TypeId off = types.off();

  if (sc.horizon() < 1) out.push_back({"horizon", "scenario", "K must be >= 1"});
  if (sc.change_rate() < 0) out.push_back({"change rate", "scenario", "N must be >= 0"});
  if (!(sc.h_max() >= 0.0 && sc.h_max() <= 1.0)) out.push_back({"hhi ceiling", "scenario", "h_max must lie in [0,1]"});
  if (!(sc.phi() >= 0.0 && sc.phi() <= 1.0)) out.push_back({"compliance fraction", "scenario", "phi must lie in [0,1]"});

  for (const auto& t : types.types()) {
    if (!finite_nonneg(t.capacity) || !finite_nonneg(t.cost) || !finite_nonneg(t.radius_km)) {
      out.push_back({"finite non-negative type attributes", "type " + t.name, "capacity, radius and cost must be >= 0"});
    }
  }
  if (types[off].capacity != 0.0 || types[off].cost != 0.0) {
    out.push_back({"off-type zero capacity and cost", "type " + types[off].name, "decommissioned type must be free and empty"});
  }

  for (std::size_t bi = 0; bi < sc.num_stations(); ++bi) {
    const auto b = make_id<StationId>(bi);
    const auto& s = sc.station(b);
    const std::string who = "station " + s.name;
    if (!std::isfinite(s.x) || !std::isfinite(s.y)) out.push_back({"finite position", who, "non-finite coordinates"});
    if (!sc.allowed(b, s.initial)) out.push_back({"initial type allowed", who, "initial type not in allowed_types"});
    if (!sc.allowed(b, off)) out.push_back({"off type allowed", who, "decommissioned type not in allowed_types"});
    const auto seen = reachable_types(types, s.initial, s.allowed);
    for (TypeId t : s.allowed) {
      if (!seen[idx(t)]) {
        out.push_back({"change graph", who, "allowed type " + types[t].name + " unreachable from " + types[s.initial].name});
      }
    }
    if (!sc.coverage(b, off).empty()) {
      out.push_back({"off-type coverage", who,
                     std::to_string(sc.coverage(b, off).size()) + " clusters covered while decommissioned"});
    }
    for (TypeId t : s.allowed) {
      if (!finite_nonneg(sc.cost(b, t))) out.push_back({"finite non-negative cost", who, "cost override for " + types[t].name});
    }
    if (sc.cost(b, off) != 0.0) out.push_back({"off-type zero capacity and cost", who, "decommissioned cost override is non-zero"});
  }

  const std::size_t O = sc.num_operators();
  for (std::size_t ci = 0; ci < sc.num_clusters(); ++ci) {
    const auto c = make_id<ClusterId>(ci);
    const std::string who = "cluster " + sc.clusters()[ci].name;
    if (!std::isfinite(sc.clusters()[ci].x) || !std::isfinite(sc.clusters()[ci].y)) {
      out.push_back({"finite position", who, "non-finite coordinates"});
    }
    bool negative = false;
    for (Period k = 1; k <= sc.horizon(); ++k) {
      for (std::size_t o = 0; o < O; ++o) {
        const double v = sc.demand(c, k, make_id<OperatorId>(o));
        if (!finite_nonneg(v)) negative = true;
      }
    }
    if (negative) out.push_back({"non-negative demand", who, "negative or non-finite traffic"});
    if (sc.demanded(c)) {
      bool coverable = false;
      for (const auto& r : sc.candidates(c)) {
        for (TypeId t : sc.station(r.station).allowed) {
          if (t != off && sc.covers_at(r.distance, t)) {
            coverable = true;
            break;
          }
        }
        if (coverable) break;
      }
      if (!coverable) out.push_back({"uncoverable cluster", who, "positive demand but no station can cover it"});
    }
  }
  return out;
}

}  // namespace evoplan
