#include "evoplan/report.hpp"

#include <algorithm>
#include <fstream>

#include "evoplan/text.hpp"
#include "json.hpp"

namespace evoplan {

using nlohmann::json;

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + p.string());
}

json num(double v) { return json::parse(format_double(v)); }

}  // namespace

std::vector<char> dense_stations(const Scenario& sc) {
  std::vector<std::size_t> sizes;
  for (std::size_t b = 0; b < sc.num_stations(); ++b) sizes.push_back(sc.reach(make_id<StationId>(b)).size());
  std::vector<char> dense(sizes.size(), 0);
  if (sizes.empty()) return dense;
  std::vector<std::size_t> sorted = sizes;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
  const std::size_t median = sorted[sorted.size() / 2];
  for (std::size_t b = 0; b < sizes.size(); ++b) dense[b] = sizes[b] >= median;
  return dense;
}

PlanReport build_report(const Scenario& sc, const Assessor& a, const PlanResult& r, Mode m) {
  PlanReport rep;
  rep.mode = m;
  const std::vector<char> dense = dense_stations(sc);
  const std::size_t T = sc.types().size();
  const AssessmentResult base = a.assess(Schedule(sc), 1, m);
  double base_capacity = 0.0;
  for (double v : base.sigma_cluster) base_capacity += v;

  double cumulative = 0.0;
  for (Period k = 1; k <= sc.horizon(); ++k) {
    PeriodMetrics pm;
    pm.period = k;
    pm.served_by_type.assign(T, 0.0);
    const AssessmentResult ar = a.assess(r.schedule, k, m);
    for (std::size_t c = 0; c < sc.num_clusters(); ++c) {
      const auto cid = make_id<ClusterId>(c);
      const double tau = sc.demand(cid, k);
      const double sigma = ar.cluster(cid);
      pm.demand += tau;
      pm.capacity += sigma;
      pm.unused += sigma - tau;
      if (tau > 0.0) {
        ++pm.hhi_counted;
        const HhiValue h = hhi(sc, ar, cid, m);
        if (!h.degenerate && h.value <= sc.h_max()) ++pm.hhi_compliant;
      }
    }
    pm.hhi_fraction =
        pm.hhi_counted == 0 ? 1.0 : static_cast<double>(pm.hhi_compliant) / static_cast<double>(pm.hhi_counted);
    // Served traffic min(sigma, tau) is split over the serving stations in
    // proportion to their sigma(b,c,k).
    for (const StationShare& s : ar.sigma_station_cluster) {
      const double sigma = ar.cluster(s.cluster);
      const double served = std::min(sigma, sc.demand(s.cluster, k));
      if (sigma > 0.0) pm.served_by_type[idx(r.schedule.type_at(s.station, k))] += served * (s.sigma / sigma);
    }
    for (std::size_t b = 0; b < sc.num_stations(); ++b) {
      const auto id = make_id<StationId>(b);
      pm.cost += sc.cost(id, r.schedule.type_at(id, k));
    }
    cumulative += pm.cost;
    pm.cumulative_cost = cumulative;
    if (rep.first_capacity_dip == 0 && pm.capacity < base_capacity) rep.first_capacity_dip = k;
    rep.periods.push_back(std::move(pm));
  }
  for (const PlannedChange& pc : r.changes) {
    PeriodMetrics& pm = rep.periods[static_cast<std::size_t>(pc.change.period - 1)];
    const bool d = dense[idx(pc.change.station)] != 0;
    switch (pc.kind) {
      case ChangeKind::create:
        ++pm.creates;
        pm.creates_dense += d;
        ++rep.creates;
        break;
      case ChangeKind::enhance:
        ++pm.enhances;
        pm.enhances_dense += d;
        ++rep.enhances;
        break;
      case ChangeKind::decommission:
        ++pm.decommissions;
        pm.decommissions_dense += d;
        ++rep.decommissions;
        break;
    }
  }
  rep.total_cost = cumulative;
  for (const PhaseLogEntry& e : r.log) {
    if (e.phase != Phase::cost) continue;
    rep.phase3_commits += e.action == LogAction::commit;
    rep.phase3_reverts += e.action == LogAction::revert;
  }
  return rep;
}

std::string schedule_csv(const Scenario& sc, const PlanResult& r) {
  std::string out = "station,period,from_type,to_type,kind,phase\n";
  const TypeTable& types = sc.types();
  for (const PlannedChange& pc : r.changes) {
    out += sc.station(pc.change.station).name + "," + std::to_string(pc.change.period) + "," + types[pc.from].name +
           "," + types[pc.change.to].name + "," + std::string(to_string(pc.kind)) + "," +
           std::to_string(static_cast<int>(pc.phase)) + "\n";
  }
  return out;
}

std::string metrics_csv(const Scenario& sc, const PlanReport& rep) {
  std::string out =
      "period,demand,capacity,unused,creates,enhances,decommissions,creates_dense,creates_sparse,enhances_dense,"
      "enhances_sparse,decommissions_dense,decommissions_sparse,cost,cumulative_cost,hhi_counted,hhi_compliant,"
      "hhi_fraction";
  for (const auto& t : sc.types().types()) out += ",served_" + t.name;
  out += "\n";
  for (const PeriodMetrics& pm : rep.periods) {
    out += std::to_string(pm.period) + "," + format_double(pm.demand) + "," + format_double(pm.capacity) + "," +
           format_double(pm.unused) + "," + std::to_string(pm.creates) + "," + std::to_string(pm.enhances) + "," +
           std::to_string(pm.decommissions) + "," + std::to_string(pm.creates_dense) + "," +
           std::to_string(pm.creates - pm.creates_dense) + "," + std::to_string(pm.enhances_dense) + "," +
           std::to_string(pm.enhances - pm.enhances_dense) + "," + std::to_string(pm.decommissions_dense) + "," +
           std::to_string(pm.decommissions - pm.decommissions_dense) + "," + format_double(pm.cost) + "," +
           format_double(pm.cumulative_cost) + "," + std::to_string(pm.hhi_counted) + "," +
           std::to_string(pm.hhi_compliant) + "," + format_double(pm.hhi_fraction);
    for (double v : pm.served_by_type) out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

std::string phase_log_csv(const Scenario& sc, const PlanResult& r) {
  std::string out = "phase,iteration,action,cluster,problem_period,station,from_type,to_type,scheduled,note\n";
  const TypeTable& types = sc.types();
  for (const PhaseLogEntry& e : r.log) {
    const bool has_cluster = e.phase != Phase::cost && e.action != LogAction::drop;
    std::string note = e.note;
    std::replace(note.begin(), note.end(), ',', ';');
    out += std::to_string(static_cast<int>(e.phase)) + "," + std::to_string(e.iteration) + "," +
           std::string(to_string(e.action)) + "," + (has_cluster ? sc.clusters()[idx(e.cluster)].name : "") + "," +
           (has_cluster ? std::to_string(e.problem_period) : "") + "," + sc.station(e.station).name + "," +
           types[e.from].name + "," + types[e.to].name + "," + std::to_string(e.scheduled) + "," + note + "\n";
  }
  return out;
}

std::string summary_json(const Scenario& sc, const PlanReport& rep, const PlanResult& r) {
  json j;
  j["status"] = std::string(to_string(r.status));
  if (!r.ok()) {
    j["reason"] = r.reason;
    j["failed_phase"] = static_cast<int>(r.failed_phase);
    j["failed_period"] = r.failed_period;
  }
  j["settings"] = {{"mode", std::string(to_string(rep.mode))},
                   {"change_rate", sc.change_rate()},
                   {"h_max", num(sc.h_max())},
                   {"phi", num(sc.phi())},
                   {"horizon", sc.horizon()},
                   {"stations", sc.num_stations()},
                   {"clusters", sc.num_clusters()},
                   {"operators", sc.input().operators}};
  j["totals"] = {{"cost", num(rep.total_cost)},
                 {"changes", r.changes.size()},
                 {"creates", rep.creates},
                 {"enhances", rep.enhances},
                 {"decommissions", rep.decommissions},
                 {"phase3_commits", rep.phase3_commits},
                 {"phase3_reverts", rep.phase3_reverts},
                 {"first_capacity_dip", rep.first_capacity_dip}};
  std::size_t zero = 0;
  for (std::size_t c = 0; c < sc.num_clusters(); ++c) zero += !sc.demanded(make_id<ClusterId>(c));
  j["notes"] = {{"zero_demand_clusters_excluded_from_hhi", zero}};
  return j.dump(2) + "\n";
}

void write_report(const std::filesystem::path& dir, const Scenario& sc, const PlanReport& rep, const PlanResult& r) {
  std::filesystem::create_directories(dir);
  write_file(dir / "schedule.csv", schedule_csv(sc, r));
  write_file(dir / "metrics.csv", metrics_csv(sc, rep));
  write_file(dir / "phase_log.csv", phase_log_csv(sc, r));
  write_file(dir / "summary.json", summary_json(sc, rep, r));
}

}  // namespace evoplan
