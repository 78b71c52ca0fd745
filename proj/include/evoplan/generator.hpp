#pragma once

#include <cstdint>
#include <string>

#include "evoplan/scenario.hpp"

namespace evoplan {

/// Synthetic instance parameters. Sites (legacy stations) and clusters are
/// drawn from a two-component mixture: dense urban disks plus a uniform rural
/// background. A share of sites also hosts an LTE candidate that starts
/// decommissioned; creating it is a change off -> LTE-s.
struct GeneratorParams {
  std::size_t stations = 200;  ///< legacy sites; LTE candidates come on top
  std::size_t clusters = 800;
  std::size_t operators = 2;
  double area_km = 60.0;
  std::uint64_t seed = 1;
  double growth = 6.0;
  Period horizon = 60;
  int change_rate = 4;
  double h_max = 1.0;
  double phi = 0.7;

  std::size_t urban_centers = 3;
  double urban_radius_km = 5.0;
  double urban_station_share = 0.5;
  double urban_cluster_share = 0.6;
  double urban_demand_weight = 3.0;  ///< mean demand of an urban cluster relative to a rural one
  double lte_candidate_share = 1.0;
  /// Market share of operator o is proportional to 1 + market_lead * (O-1-o),
  /// jittered per cluster; 0 gives equal markets.
  double market_lead = 0.2;
  /// Share of sites of the second and later operators placed next to an
  /// earlier site of another operator (redundant coverage).
  double colocation_share = 0.5;
  double colocation_radius_km = 0.5;
  /// 0 keeps demand independent of the network; 1 scales each cluster towards
  /// the capacity serving it, as a network dimensioned to its traffic.
  double demand_balance = 0.0;
  /// sigma/tau at period 1 with the initial types, taken at `headroom_quantile`
  /// over demanded clusters; per cluster the tighter of the pooled ratio and
  /// each operator's own ratio.
  double initial_headroom = 4.0;
  double headroom_quantile = 0.5;
  /// Every (cluster, operator) keeps at least this sigma/tau margin at period K
  /// when all of the operator's covering stations run their strongest type.
  double final_margin = 1.05;

  std::string legacy_type = "3G";
  TypeTable types = default_type_table();
};

/// Throws std::invalid_argument for non-positive counts, growth < 1, K < 2 or
/// a type table without the legacy type.
void check_params(const GeneratorParams& p);

Scenario generate(const GeneratorParams& p);

}  // namespace evoplan
