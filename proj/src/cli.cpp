#include "evoplan/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "evoplan/generator.hpp"
#include "evoplan/oracle.hpp"
#include "evoplan/planner.hpp"
#include "evoplan/report.hpp"
#include "evoplan/scenario_io.hpp"
#include "evoplan/text.hpp"
#include "json.hpp"

namespace evoplan {

using nlohmann::json;
namespace fs = std::filesystem;

unsigned worker_threads() {
  if (const char* env = std::getenv("EVOPLAN_THREADS")) {
    if (const auto v = parse_long(env); v && *v > 0) return static_cast<unsigned>(*v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

json read_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ParseError(path, 0, "", e.what());
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  for (auto f : split_fields(s)) out.emplace_back(f);
  return out;
}

std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

struct PlanSettings {
  std::optional<int> change_rate;
  std::optional<double> h_max;
  std::optional<double> phi;
  std::string mode = "shared";
};

// Config "plan" block first, explicit flags on top.
void apply_plan_config(const json& cfg, PlanSettings& s, const CLI::App& app) {
  if (!cfg.contains("plan")) return;
  const json& p = cfg["plan"];
  if (p.contains("change_rate") && !app.count("--change-rate")) s.change_rate = p["change_rate"].get<int>();
  if (p.contains("h_max") && !app.count("--hmax")) s.h_max = p["h_max"].get<double>();
  if (p.contains("phi") && !app.count("--phi")) s.phi = p["phi"].get<double>();
  if (p.contains("mode") && !app.count("--mode")) s.mode = p["mode"].get<std::string>();
}

Scenario apply_settings(const Scenario& sc, const PlanSettings& s) {
  return sc.with_settings(s.change_rate.value_or(sc.change_rate()), s.h_max.value_or(sc.h_max()),
                          s.phi.value_or(sc.phi()));
}

bool report_violations(const std::vector<Violation>& v, std::ostream& err) {
  for (const auto& x : v) err << "invalid scenario: " << x.invariant << " (" << x.entity << "): " << x.detail << "\n";
  return !v.empty();
}

int exit_for(const PlanResult& r) {
  switch (r.status) {
    case PlanStatus::success: return exit_ok;
    case PlanStatus::infeasible: return exit_infeasible;
    case PlanStatus::nonconvergent: return exit_error;
  }
  return exit_error;
}

// --- generate --------------------------------------------------------------

struct GenerateArgs {
  std::size_t stations = 0, clusters = 0, operators = 0;
  double area = 0, growth = 0, hmax = 0, phi = 0, lte_share = 0;
  Period horizon = 0;
  int change_rate = 0;
  std::uint64_t seed = 0;
  std::string config, out;
};

int cmd_generate(const CLI::App& app, const GenerateArgs& a, bool quiet, std::ostream& out, std::ostream& err) {
  GeneratorParams p;
  const json cfg = read_config(a.config);
  if (cfg.contains("types")) p.types = parse_type_table(cfg.dump(), a.config);
  if (cfg.contains("generator")) {
    const json& g = cfg["generator"];
    p.stations = g.value("stations", p.stations);
    p.clusters = g.value("clusters", p.clusters);
    p.operators = g.value("operators", p.operators);
    p.area_km = g.value("area_km", p.area_km);
    p.seed = g.value("seed", p.seed);
    p.growth = g.value("growth", p.growth);
    p.horizon = g.value("horizon", p.horizon);
    p.change_rate = g.value("change_rate", p.change_rate);
    p.h_max = g.value("h_max", p.h_max);
    p.phi = g.value("phi", p.phi);
    p.urban_centers = g.value("urban_centers", p.urban_centers);
    p.urban_radius_km = g.value("urban_radius_km", p.urban_radius_km);
    p.urban_station_share = g.value("urban_station_share", p.urban_station_share);
    p.urban_cluster_share = g.value("urban_cluster_share", p.urban_cluster_share);
    p.urban_demand_weight = g.value("urban_demand_weight", p.urban_demand_weight);
    p.lte_candidate_share = g.value("lte_candidate_share", p.lte_candidate_share);
    p.market_lead = g.value("market_lead", p.market_lead);
    p.colocation_share = g.value("colocation_share", p.colocation_share);
    p.colocation_radius_km = g.value("colocation_radius_km", p.colocation_radius_km);
    p.initial_headroom = g.value("initial_headroom", p.initial_headroom);
    p.headroom_quantile = g.value("headroom_quantile", p.headroom_quantile);
    p.demand_balance = g.value("demand_balance", p.demand_balance);
    p.final_margin = g.value("final_margin", p.final_margin);
    p.legacy_type = g.value("legacy_type", p.legacy_type);
  }
  if (app.count("--stations")) p.stations = a.stations;
  if (app.count("--clusters")) p.clusters = a.clusters;
  if (app.count("--operators")) p.operators = a.operators;
  if (app.count("--area")) p.area_km = a.area;
  if (app.count("--growth")) p.growth = a.growth;
  if (app.count("--horizon")) p.horizon = a.horizon;
  if (app.count("--change-rate")) p.change_rate = a.change_rate;
  if (app.count("--hmax")) p.h_max = a.hmax;
  if (app.count("--phi")) p.phi = a.phi;
  if (app.count("--seed")) p.seed = a.seed;
  if (app.count("--lte-share")) p.lte_candidate_share = a.lte_share;

  const Scenario sc = generate(p);
  if (report_violations(validate(sc), err)) return exit_error;
  save_scenario(sc, a.out);
  if (!quiet) {
    double total1 = 0.0;
    double totalK = 0.0;
    for (std::size_t c = 0; c < sc.num_clusters(); ++c) {
      total1 += sc.demand(make_id<ClusterId>(c), 1);
      totalK += sc.demand(make_id<ClusterId>(c), sc.horizon());
    }
    out << "wrote " << a.out << ": " << sc.num_stations() << " stations, " << sc.num_clusters() << " clusters, "
        << sc.num_operators() << " operators, K=" << sc.horizon() << ", N=" << sc.change_rate()
        << ", demand " << format_double(total1) << " -> " << format_double(totalK) << "\n";
  }
  return exit_ok;
}

// --- plan --------------------------------------------------------------------

int cmd_plan(const CLI::App& app, const std::string& scenario, PlanSettings s, const std::string& config,
             const std::string& out_dir, bool quiet, std::ostream& out, std::ostream& err) {
  apply_plan_config(read_config(config), s, app);
  const Scenario sc = apply_settings(load_scenario(scenario), s);
  if (report_violations(validate(sc), err)) return exit_error;
  const Mode mode = parse_mode(s.mode);
  const ProportionalAssessor a(sc);
  const PlanResult r = plan(sc, mode, a);
  const PlanReport rep = build_report(sc, a, r, mode);
  write_report(out_dir, sc, rep, r);
  if (!quiet) {
    out << to_string(r.status) << ": " << r.changes.size() << " changes (" << rep.creates << " create, "
        << rep.enhances << " enhance, " << rep.decommissions << " decommission), total cost "
        << format_double(rep.total_cost) << "\n";
  }
  if (!r.ok()) err << to_string(r.status) << " in phase " << static_cast<int>(r.failed_phase) << ": " << r.reason << "\n";
  return exit_for(r);
}

// --- sweep -------------------------------------------------------------------

struct SweepCell {
  Mode mode;
  int change_rate;
  double h_max;
};

std::string sweep_row(const Scenario& base, const SweepCell& cell, std::optional<double> phi) {
  std::ostringstream row;
  row << to_string(cell.mode) << "," << cell.change_rate << "," << format_double(cell.h_max) << ",";
  try {
    const Scenario sc = base.with_settings(cell.change_rate, cell.h_max, phi.value_or(base.phi()));
    const ProportionalAssessor a(sc);
    const PlanResult r = plan(sc, cell.mode, a);
    const PlanReport rep = build_report(sc, a, r, cell.mode);
    double unused = 0.0;
    for (const auto& pm : rep.periods) unused += pm.unused;
    row << to_string(r.status) << "," << format_double(rep.total_cost) << "," << rep.creates << "," << rep.enhances
        << "," << rep.decommissions << "," << format_double(unused) << "," << rep.first_capacity_dip << ","
        << r.failed_period << "," << csv_safe(r.reason);
  } catch (const std::exception& e) {
    row << "error,,,,,,,," << csv_safe(e.what());
  }
  return row.str();
}

int cmd_sweep(const std::string& scenario, const std::string& rates, const std::string& hmaxes,
              const std::string& modes, std::optional<double> phi, const std::string& out_file, bool quiet,
              std::ostream& out) {
  const Scenario base = load_scenario(scenario);
  std::vector<SweepCell> cells;
  for (const auto& m : split_list(modes)) {
    for (const auto& n : split_list(rates)) {
      for (const auto& h : split_list(hmaxes)) {
        const auto nv = parse_long(n);
        const auto hv = parse_double(h);
        if (!nv || !hv) throw std::invalid_argument("bad grid value '" + n + "' or '" + h + "'");
        cells.push_back({parse_mode(m), static_cast<int>(*nv), *hv});
      }
    }
  }
  std::vector<std::string> rows(cells.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) rows[i] = sweep_row(base, cells[i], phi);
  };
  const unsigned n = std::min<unsigned>(worker_threads(), static_cast<unsigned>(std::max<std::size_t>(cells.size(), 1)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  std::string csv =
      "mode,change_rate,h_max,status,total_cost,creates,enhances,decommissions,unused_total,first_capacity_dip,"
      "failed_period,reason\n";
  for (const auto& r : rows) csv += r + "\n";
  if (out_file.empty() || out_file == "-") {
    out << csv;
  } else {
    std::ofstream f(out_file, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + out_file);
    f << csv;
    if (!quiet) out << "wrote " << cells.size() << " rows to " << out_file << "\n";
  }
  return exit_ok;
}

// --- verify ------------------------------------------------------------------

struct VerifyArgs {
  std::size_t max_requests = 6;
  Period max_horizon = 5;
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  bool flip = false;
};

struct Verdict {
  std::string property;
  std::size_t checked = 0;
  std::size_t failures = 0;
  std::string example;

  void fail(const std::string& what) {
    if (failures++ == 0) example = what;
  }
};

std::string show(const std::vector<Period>& d) {
  std::string s = "{";
  for (std::size_t i = 0; i < d.size(); ++i) s += (i ? "," : "") + std::to_string(d[i]);
  return s + "}";
}

// Calls f on every nondecreasing sequence over [1, K] of length <= max_len.
template <typename F>
void for_each_multiset(Period K, std::size_t max_len, F&& f) {
  std::vector<Period> cur;
  auto rec = [&](auto&& self, Period lo) -> void {
    f(cur);
    if (cur.size() == max_len) return;
    for (Period d = lo; d <= K; ++d) {
      cur.push_back(d);
      self(self, d);
      cur.pop_back();
    }
  };
  rec(rec, 1);
}

GeneratorParams tiny_params(std::uint64_t seed) {
  GeneratorParams p;
  p.stations = 3;
  p.clusters = 6;
  p.operators = 2;
  p.area_km = 6.0;
  p.urban_centers = 1;
  p.urban_radius_km = 2.0;
  p.horizon = 4;
  p.growth = 3.0;
  p.change_rate = 1;
  p.seed = seed;
  return p;
}

int cmd_verify(const VerifyArgs& v, bool quiet, std::ostream& out, std::ostream& err) {
  const OracleBudget budget;
  if (v.max_requests > budget.max_requests || v.max_horizon > budget.max_horizon) {
    err << "refusing to verify: oracle budget allows at most " << budget.max_requests << " requests and K <= "
        << budget.max_horizon << " (asked for " << v.max_requests << " requests, K <= " << v.max_horizon << ")\n";
    return exit_error;
  }
  const Direction dir = v.flip ? Direction::earliest : Direction::latest;
  std::vector<Verdict> verdicts;

  Verdict opt{"greedy lateness equals oracle optimum", 0, 0, {}};
  Verdict lemma{"prefix condition iff oracle feasible", 0, 0, {}};
  for (Period K = 1; K <= v.max_horizon; ++K) {
    for (int n = 1; n <= 3; ++n) {
      for_each_multiset(K, v.max_requests, [&](const std::vector<Period>& d) {
        const OracleSchedule o = oracle_schedule(d, n, K);
        const NecessaryCheck nc = check_necessary(d, n, K);
        ++lemma.checked;
        if (nc.feasible != o.feasible) lemma.fail(show(d) + " N=" + std::to_string(n));
        const auto g = greedy_schedule(d, n, K, dir);
        ++opt.checked;
        if (g.has_value() != o.feasible || (g && lateness(d, *g) != o.lateness)) {
          opt.fail(show(d) + " N=" + std::to_string(n) + " K=" + std::to_string(K));
        }
      });
    }
  }
  verdicts.push_back(opt);
  verdicts.push_back(lemma);

  Verdict feas{"greedy succeeds iff prefix condition holds", 0, 0, {}};
  std::mt19937_64 rng(v.seed);
  for (std::size_t i = 0; i < v.samples; ++i) {
    const Period K = std::uniform_int_distribution<Period>(1, 12)(rng);
    const int n = std::uniform_int_distribution<int>(1, 4)(rng);
    const long len = std::uniform_int_distribution<long>(0, static_cast<long>(K) * n + 2)(rng);
    std::vector<Period> d(static_cast<std::size_t>(len));
    for (auto& x : d) x = std::uniform_int_distribution<Period>(1, K)(rng);
    ++feas.checked;
    if (greedy_schedule(d, n, K, dir).has_value() != check_necessary(d, n, K).feasible) {
      feas.fail(show(d) + " N=" + std::to_string(n));
    }
  }
  verdicts.push_back(feas);

  Verdict goals{"plan postconditions (demand, competition, budget)", 0, 0, {}};
  Verdict cost{"oracle cost <= greedy cost on tiny instances", 0, 0, {}};
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Scenario sc = generate(tiny_params(seed));
    const ProportionalAssessor a(sc);
    for (Mode m : {Mode::shared, Mode::independent}) {
      PlanOptions po;
      po.fix_direction = dir;
      const PlanResult r = plan(sc, m, a, po);
      if (!r.ok()) continue;
      ++goals.checked;
      bool ok = goal1_violations(a, r.schedule, m).empty() && validate_schedule(sc, r.schedule, m).empty();
      for (Period k = 1; k <= sc.horizon() && ok; ++k) ok = goal2_satisfied(a, r.schedule, k, m).satisfied;
      if (!ok) goals.fail("seed " + std::to_string(seed) + " " + std::string(to_string(m)));
      const OracleCost oc = oracle_min_cost_plan(sc, m);
      const double greedy = build_report(sc, a, r, m).total_cost;
      ++cost.checked;
      if (!oc.feasible || oc.cost > greedy + 1e-9) cost.fail("seed " + std::to_string(seed) + " " + std::string(to_string(m)));
    }
  }
  verdicts.push_back(goals);
  verdicts.push_back(cost);

  bool all = true;
  if (!quiet) out << std::left << std::setw(52) << "property" << std::setw(10) << "checked" << std::setw(10) << "failed" << "verdict\n";
  for (const auto& x : verdicts) {
    all = all && x.failures == 0;
    if (quiet && x.failures == 0) continue;
    out << std::left << std::setw(52) << x.property << std::setw(10) << x.checked << std::setw(10) << x.failures
        << (x.failures == 0 ? "pass" : "FAIL (e.g. " + x.example + ")") << "\n";
  }
  if (!all) {
    for (const auto& x : verdicts) {
      if (x.failures) err << "failed: " << x.property << "\n";
    }
  }
  return all ? exit_ok : exit_error;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cellular network evolution planner"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Only print errors");

  GenerateArgs g;
  auto* gen = app.add_subcommand("generate", "Generate a synthetic scenario directory");
  gen->add_option("--stations", g.stations, "Legacy sites (LTE candidates come on top)");
  gen->add_option("--clusters", g.clusters, "Subscriber clusters");
  gen->add_option("--operators", g.operators, "Operators");
  gen->add_option("--area", g.area, "Side of the square area in km");
  gen->add_option("--growth", g.growth, "Demand growth factor between period 1 and K");
  gen->add_option("--horizon", g.horizon, "Number of periods K");
  gen->add_option("--change-rate", g.change_rate, "Changes per period N");
  gen->add_option("--hmax", g.hmax, "HHI ceiling");
  gen->add_option("--phi", g.phi, "Required compliant fraction");
  gen->add_option("--seed", g.seed, "Random seed");
  gen->add_option("--lte-share", g.lte_share, "Share of sites with an LTE candidate");
  gen->add_option("--config", g.config, "JSON with a type table and/or generator defaults");
  gen->add_option("-o,--out", g.out, "Output directory")->required();

  std::string plan_scenario, plan_out, plan_config;
  PlanSettings ps;
  int plan_rate = 0;
  double plan_hmax = 0, plan_phi = 0;
  auto* pl = app.add_subcommand("plan", "Plan a scenario and write reports");
  pl->add_option("scenario", plan_scenario, "Scenario directory")->required();
  pl->add_option("--change-rate", plan_rate, "Override N");
  pl->add_option("--hmax", plan_hmax, "Override the HHI ceiling");
  pl->add_option("--phi", plan_phi, "Override the compliant fraction");
  pl->add_option("--mode", ps.mode, "shared | independent");
  pl->add_option("--config", plan_config, "JSON with plan defaults");
  pl->add_option("--seed", g.seed, "Accepted for symmetry; planning is deterministic");
  pl->add_option("-o,--out", plan_out, "Report directory")->required();

  std::string sw_scenario, sw_rates, sw_hmax, sw_modes = "shared", sw_out;
  double sw_phi = 0;
  auto* sw = app.add_subcommand("sweep", "Plan over a grid of N, H_max and modes");
  sw->add_option("scenario", sw_scenario, "Scenario directory")->required();
  sw->add_option("--change-rates", sw_rates, "Comma-separated N values (default: scenario N)");
  sw->add_option("--hmax", sw_hmax, "Comma-separated H_max values (default: scenario H_max)");
  sw->add_option("--modes", sw_modes, "Comma-separated modes");
  sw->add_option("--phi", sw_phi, "Override the compliant fraction");
  sw->add_option("-o,--out", sw_out, "Output CSV (default stdout)");

  VerifyArgs va;
  auto* ve = app.add_subcommand("verify", "Certify scheduling and planning against brute-force oracles");
  ve->add_option("--max-requests", va.max_requests, "Largest enumerated request multiset");
  ve->add_option("--max-horizon", va.max_horizon, "Largest enumerated horizon");
  ve->add_option("--samples", va.samples, "Random multisets for the feasibility check");
  ve->add_option("--seed", va.seed, "Random seed");
  ve->add_flag("--flip-direction", va.flip, "Test hook: place capacity fixes as early as possible");

  for (auto* sub : {gen, pl, sw, ve}) sub->add_flag("-q,--quiet", quiet, "Only print errors");

  std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return exit_ok;
    }
    err << e.what() << "\n";
    return exit_error;
  }

  try {
    if (gen->parsed()) return cmd_generate(*gen, g, quiet, out, err);
    if (pl->parsed()) {
      if (pl->count("--change-rate")) ps.change_rate = plan_rate;
      if (pl->count("--hmax")) ps.h_max = plan_hmax;
      if (pl->count("--phi")) ps.phi = plan_phi;
      return cmd_plan(*pl, plan_scenario, ps, plan_config, plan_out, quiet, out, err);
    }
    if (sw->parsed()) {
      const Scenario probe = load_scenario(sw_scenario);
      const std::string rates = sw->count("--change-rates") ? sw_rates : std::to_string(probe.change_rate());
      const std::string hm = sw->count("--hmax") ? sw_hmax : format_double(probe.h_max());
      return cmd_sweep(sw_scenario, rates, hm, sw_modes, sw->count("--phi") ? std::optional(sw_phi) : std::nullopt,
                       sw_out, quiet, out);
    }
    if (ve->parsed()) return cmd_verify(va, quiet, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_error;
  }
  return exit_error;
}

}  // namespace evoplan
