#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "evoplan/assessment.hpp"
#include "evoplan/planner.hpp"

namespace evoplan {

/// One row of metrics.csv.
struct PeriodMetrics {
  Period period = 0;
  double demand = 0.0;    ///< sum tau(c,k)
  double capacity = 0.0;  ///< sum sigma(c,k)
  double unused = 0.0;    ///< sum (sigma(c,k) - tau(c,k))
  int creates = 0;
  int enhances = 0;
  int decommissions = 0;
  int creates_dense = 0;
  int enhances_dense = 0;
  int decommissions_dense = 0;
  double cost = 0.0;  ///< sum_b kappa(b, T(b,k)), stations in id order
  double cumulative_cost = 0.0;
  std::size_t hhi_counted = 0;
  std::size_t hhi_compliant = 0;
  double hhi_fraction = 1.0;
  std::vector<double> served_by_type;  ///< served traffic attributed to the station types, type id order
};

struct PlanReport {
  Mode mode = Mode::shared;
  std::vector<PeriodMetrics> periods;
  double total_cost = 0.0;
  int creates = 0;
  int enhances = 0;
  int decommissions = 0;
  /// Earliest period whose total sigma is below that of the unchanged
  /// network at period 1; 0 when capacity never dips.
  Period first_capacity_dip = 0;
  std::size_t phase3_commits = 0;
  std::size_t phase3_reverts = 0;
};

/// Stations whose reach holds at least the median number of clusters.
std::vector<char> dense_stations(const Scenario& sc);

PlanReport build_report(const Scenario& sc, const Assessor& a, const PlanResult& r, Mode m);

/// station,period,from_type,to_type,kind,phase rows ordered by (period, station).
std::string schedule_csv(const Scenario& sc, const PlanResult& r);
std::string metrics_csv(const Scenario& sc, const PlanReport& rep);
std::string phase_log_csv(const Scenario& sc, const PlanResult& r);
std::string summary_json(const Scenario& sc, const PlanReport& rep, const PlanResult& r);

/// Writes schedule.csv, metrics.csv, phase_log.csv and summary.json.
void write_report(const std::filesystem::path& dir, const Scenario& sc, const PlanReport& rep, const PlanResult& r);

}  // namespace evoplan
