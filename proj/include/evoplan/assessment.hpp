#pragma once

#include <span>
#include <utility>
#include <vector>

#include "evoplan/ids.hpp"
#include "evoplan/scenario.hpp"
#include "evoplan/schedule.hpp"

namespace evoplan {

struct StationShare {
  StationId station{};
  ClusterId cluster{};
  double sigma = 0.0;
};

/// Served capacity at one period.
struct AssessmentResult {
  Period period = 0;
  std::size_t num_operators = 0;
  std::vector<double> sigma_cluster;     ///< sigma(c,k)
  std::vector<double> sigma_cluster_op;  ///< sigma(c,k,o) at [c * O + o]
  std::vector<StationShare> sigma_station_cluster;  ///< non-zero sigma(b,c,k), by station then cluster id

  double cluster(ClusterId c) const { return sigma_cluster[idx(c)]; }
  double cluster_op(ClusterId c, OperatorId o) const { return sigma_cluster_op[idx(c) * num_operators + idx(o)]; }
};

/// The performance-assessment block: maps (topology, demand, schedule) to the
/// capacity sigma each cluster can be served with.
///
/// Implementations must be pure (equal inputs give bitwise-equal sigma) and
/// monotone: giving a station a type with the same coverage and at least the
/// same nominal capacity never lowers any sigma(c,k). The planner only relies
/// on these two properties.
class Assessor {
 public:
  virtual ~Assessor() = default;

  virtual const Scenario& scenario() const = 0;

  /// sigma(b,c,k) if station b had type t at period k, every other station
  /// following `s`.
  virtual double station_supply(const Schedule& s, StationId b, TypeId t, ClusterId c, Period k, Mode m) const = 0;

  /// Writes sigma(c,k,o) into `per_operator` (size |O|) and returns sigma(c,k).
  virtual double cluster_sigma(const Schedule& s, ClusterId c, Period k, Mode m,
                               std::span<double> per_operator) const = 0;

  /// Clusters whose sigma may change when the type of `b` changes.
  virtual std::vector<ClusterId> influence(StationId b) const;

  /// Full assessment of one period. Built from cluster_sigma, so any cache of
  /// per-cluster results stays bitwise identical to it.
  AssessmentResult assess(const Schedule& s, Period k, Mode m) const;
};

/// Reference allocator. Each active station offers the nominal capacity of its
/// type, split across the clusters it covers in proportion to their demand
/// (evenly when that demand is zero). In shared mode the weights use total
/// demand and sigma(c,k,o) splits sigma(c,k) in proportion to tau(c,k,o); in
/// independent mode a station serves only its owner's demand.
class ProportionalAssessor final : public Assessor {
 public:
  explicit ProportionalAssessor(const Scenario& sc);

  const Scenario& scenario() const override { return sc_; }
  double station_supply(const Schedule& s, StationId b, TypeId t, ClusterId c, Period k, Mode m) const override;
  double cluster_sigma(const Schedule& s, ClusterId c, Period k, Mode m, std::span<double> per_operator) const override;
  std::vector<ClusterId> influence(StationId b) const override;

  /// Covered demand of b under t at k, i.e. the denominator of its split.
  double covered_demand(StationId b, TypeId t, Period k, Mode m) const;

 private:
  double supply_at(StationId b, TypeId t, ClusterId c, double distance, Period k, Mode m) const;

  const Scenario& sc_;
  std::size_t K_ = 0;
  std::vector<int> slot_;                 // [b * T + t] -> slot index or -1
  std::vector<std::size_t> slot_base_;    // first slot of station b
  std::vector<double> load_shared_;       // [(slot) * K + k - 1]
  std::vector<double> load_own_;
  std::vector<std::size_t> cover_count_;  // clusters covered per slot
};

struct HhiValue {
  double value = 1.0;
  bool degenerate = false;  ///< sigma(c,k) == 0: maximal concentration by convention
};

/// Local Herfindahl index: squared share of spare capacity (a potential
/// entrant) plus the squared shares of each participant's demand. The spare
/// share is clamped at zero when demand exceeds sigma.
HhiValue hhi(double sigma, std::span<const double> participant_demand);

/// H(c,k) from an assessment. Shared mode counts all operators as one.
HhiValue hhi(const Scenario& sc, const AssessmentResult& r, ClusterId c, Mode m);

/// True when `compliant` out of `counted` clusters meets the fraction phi.
bool meets_fraction(std::size_t compliant, std::size_t counted, double phi);

/// (c,k) pairs where sigma(c,k,o) < tau(c,k,o) for some operator o.
std::vector<std::pair<ClusterId, Period>> goal1_violations(const Assessor& a, const Schedule& s, Mode m);

struct ComplianceSummary {
  std::size_t counted = 0;    ///< clusters with tau(c,k) > 0
  std::size_t compliant = 0;  ///< of those, H(c,k) <= H_max
  double fraction = 1.0;
  bool satisfied = true;
};

/// Competition goal at one period. Zero-demand clusters are left out of both
/// counts; uncovered demanded clusters count as H = 1.
ComplianceSummary goal2_satisfied(const Assessor& a, const Schedule& s, Period k, Mode m);

struct HhiReport {
  std::size_t num_clusters = 0;
  std::vector<double> value;      ///< [c * K + k - 1]
  std::vector<char> compliant;    ///< [c * K + k - 1]
  std::vector<ComplianceSummary> per_period;  ///< index k - 1
};

HhiReport hhi_report(const Assessor& a, const Schedule& s, Mode m);

}  // namespace evoplan
