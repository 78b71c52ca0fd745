#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evoplan/ids.hpp"

namespace evoplan {

/// A technology/configuration state of a base station.
///
/// `radius_km` is the coverage class: a station of this type covers every
/// cluster within that distance. `successors` is the change graph, i.e. the
/// types a station of this type may be changed into.
struct StationType {
  std::string name;
  double capacity = 0.0;
  double radius_km = 0.0;
  double cost = 0.0;
  std::vector<TypeId> successors;
};

class TypeTable {
 public:
  TypeTable() = default;
  TypeTable(std::vector<StationType> types, TypeId off);

  std::size_t size() const noexcept { return types_.size(); }
  const StationType& operator[](TypeId t) const { return types_.at(idx(t)); }
  std::span<const StationType> types() const noexcept { return types_; }
  TypeId off() const noexcept { return off_; }

  std::optional<TypeId> find(std::string_view name) const;
  bool can_change(TypeId from, TypeId to) const;

 private:
  std::vector<StationType> types_;
  TypeId off_{};
};

/// off / 3G / LTE with 1..3 sectors. 3G may only be decommissioned, off may
/// become any LTE type (creation) and LTE may gain sectors (enhancement).
TypeTable default_type_table();

struct BaseStation {
  std::string name;
  double x = 0.0;
  double y = 0.0;
  TypeId initial{};
  OperatorId owner{};
  std::vector<TypeId> allowed;
};

struct SubscriberCluster {
  std::string name;
  double x = 0.0;
  double y = 0.0;
};

struct CostOverride {
  StationId station{};
  TypeId type{};
  double cost = 0.0;
};

/// Raw, mutable description of a planning instance. `Scenario` is built from
/// it and derives distances and coverage.
struct ScenarioInput {
  TypeTable types;
  std::vector<std::string> operators;
  std::vector<BaseStation> stations;
  std::vector<SubscriberCluster> clusters;
  Period horizon = 1;
  int change_rate = 1;
  double h_max = 1.0;
  double phi = 0.7;
  /// tau(c,k,o) laid out as [(c * K + (k - 1)) * O + o].
  std::vector<double> demand;
  std::vector<CostOverride> cost_overrides;
};

/// A station/cluster pair within reach of the station's widest allowed type.
struct StationReach {
  ClusterId cluster{};
  double distance = 0.0;
};

struct ClusterReach {
  StationId station{};
  double distance = 0.0;
};

/// Immutable planning instance. Distances are Euclidean on the plane and
/// coverage is gamma(b,c,t) = [radius(t) > 0 and delta(b,c) <= radius(t)].
class Scenario {
 public:
  explicit Scenario(ScenarioInput input);

  const ScenarioInput& input() const noexcept { return in_; }
  const TypeTable& types() const noexcept { return in_.types; }
  std::span<const BaseStation> stations() const noexcept { return in_.stations; }
  std::span<const SubscriberCluster> clusters() const noexcept { return in_.clusters; }
  std::span<const std::string> operators() const noexcept { return in_.operators; }
  const BaseStation& station(StationId b) const { return in_.stations[idx(b)]; }

  std::size_t num_stations() const noexcept { return in_.stations.size(); }
  std::size_t num_clusters() const noexcept { return in_.clusters.size(); }
  std::size_t num_operators() const noexcept { return in_.operators.size(); }
  Period horizon() const noexcept { return in_.horizon; }
  int change_rate() const noexcept { return in_.change_rate; }
  double h_max() const noexcept { return in_.h_max; }
  double phi() const noexcept { return in_.phi; }

  double demand(ClusterId c, Period k, OperatorId o) const {
    return in_.demand[(idx(c) * K_ + (k - 1)) * O_ + idx(o)];
  }
  /// tau(c,k) summed over operators in operator order.
  double demand(ClusterId c, Period k) const { return demand_total_[idx(c) * K_ + (k - 1)]; }
  /// True when tau(c,k) > 0 for some period.
  bool demanded(ClusterId c) const { return demanded_[idx(c)] != 0; }

  double cost(StationId b, TypeId t) const { return cost_[idx(b) * T_ + idx(t)]; }
  double capacity(TypeId t) const { return in_.types[t].capacity; }

  double distance(StationId b, ClusterId c) const;
  bool covers(StationId b, ClusterId c, TypeId t) const;
  bool covers_at(double distance, TypeId t) const {
    const double r = in_.types[t].radius_km;
    return r > 0.0 && distance <= r;
  }
  bool allowed(StationId b, TypeId t) const;

  /// Clusters within the widest allowed radius of `b`, ordered by (distance, id).
  std::span<const StationReach> reach(StationId b) const;
  /// Clusters covered by `b` under type `t`: a prefix of reach(b).
  std::span<const StationReach> coverage(StationId b, TypeId t) const;
  /// Stations that may cover `c` under some allowed type, ordered by station id.
  std::span<const ClusterReach> candidates(ClusterId c) const;
  /// Same set as candidates(c), ordered by (distance, station id).
  std::span<const ClusterReach> nearest(ClusterId c) const;

  /// Copy with the planning knobs replaced (CLI overrides of meta.json).
  Scenario with_settings(int change_rate, double h_max, double phi) const;

 private:
  ScenarioInput in_;
  std::size_t K_ = 0;
  std::size_t O_ = 0;
  std::size_t T_ = 0;
  std::vector<double> demand_total_;
  std::vector<char> demanded_;
  std::vector<double> cost_;
  std::vector<std::size_t> station_offsets_;
  std::vector<StationReach> station_reach_;
  std::vector<std::size_t> cluster_offsets_;
  std::vector<ClusterReach> cluster_by_id_;
  std::vector<ClusterReach> cluster_by_distance_;
};

struct Violation {
  std::string invariant;
  std::string entity;
  std::string detail;
};

/// Checks every instance invariant; an empty result means the scenario is
/// well-formed. Violations are data, never exceptions.
std::vector<Violation> validate(const Scenario& scenario);

}  // namespace evoplan
