#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

#include "evoplan/assessment.hpp"
#include "evoplan/deadline.hpp"
#include "evoplan/generator.hpp"
#include "evoplan/oracle.hpp"
#include "evoplan/planner.hpp"
#include "evoplan/report.hpp"
#include "evoplan/scenario_io.hpp"

namespace py = pybind11;
using namespace evoplan;

namespace {

Scenario generate_kw(const py::kwargs& kw) {
  GeneratorParams p;
  for (const auto& [key, value] : kw) {
    const auto k = key.cast<std::string>();
    if (k == "stations") p.stations = value.cast<std::size_t>();
    else if (k == "clusters") p.clusters = value.cast<std::size_t>();
    else if (k == "operators") p.operators = value.cast<std::size_t>();
    else if (k == "area_km") p.area_km = value.cast<double>();
    else if (k == "seed") p.seed = value.cast<std::uint64_t>();
    else if (k == "growth") p.growth = value.cast<double>();
    else if (k == "horizon") p.horizon = value.cast<Period>();
    else if (k == "change_rate") p.change_rate = value.cast<int>();
    else if (k == "h_max") p.h_max = value.cast<double>();
    else if (k == "phi") p.phi = value.cast<double>();
    else if (k == "urban_centers") p.urban_centers = value.cast<std::size_t>();
    else if (k == "colocation_share") p.colocation_share = value.cast<double>();
    else if (k == "demand_balance") p.demand_balance = value.cast<double>();
    else if (k == "initial_headroom") p.initial_headroom = value.cast<double>();
    else if (k == "headroom_quantile") p.headroom_quantile = value.cast<double>();
    else if (k == "market_lead") p.market_lead = value.cast<double>();
    else if (k == "types") p.types = parse_type_table(value.cast<std::string>());
    else throw py::key_error("unknown generator parameter: " + k);
  }
  return generate(p);
}

py::dict plan_dict(const Scenario& sc, const std::string& mode, std::optional<std::filesystem::path> out) {
  const Mode m = parse_mode(mode);
  const ProportionalAssessor a(sc);
  py::gil_scoped_release nogil;
  const PlanResult r = plan(sc, m, a);
  const PlanReport rep = build_report(sc, a, r, m);
  if (out) write_report(*out, sc, rep, r);
  py::gil_scoped_acquire gil;
  py::list changes;
  for (const PlannedChange& c : r.changes) {
    changes.append(py::make_tuple(sc.station(c.change.station).name, c.change.period, sc.types()[c.from].name,
                                  sc.types()[c.change.to].name, std::string(to_string(c.kind)),
                                  static_cast<int>(c.phase)));
  }
  py::list periods;
  for (const PeriodMetrics& pm : rep.periods) {
    py::dict d;
    d["period"] = pm.period;
    d["demand"] = pm.demand;
    d["capacity"] = pm.capacity;
    d["unused"] = pm.unused;
    d["cost"] = pm.cost;
    d["cumulative_cost"] = pm.cumulative_cost;
    d["hhi_fraction"] = pm.hhi_fraction;
    periods.append(d);
  }
  py::dict d;
  d["status"] = std::string(to_string(r.status));
  d["reason"] = r.reason;
  d["failed_period"] = r.failed_period;
  d["changes"] = changes;
  d["periods"] = periods;
  d["total_cost"] = rep.total_cost;
  d["creates"] = rep.creates;
  d["enhances"] = rep.enhances;
  d["decommissions"] = rep.decommissions;
  d["first_capacity_dip"] = rep.first_capacity_dip;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cellular network evolution planner";

  py::class_<Scenario>(m, "Scenario")
      .def_property_readonly("num_stations", &Scenario::num_stations)
      .def_property_readonly("num_clusters", &Scenario::num_clusters)
      .def_property_readonly("num_operators", &Scenario::num_operators)
      .def_property_readonly("horizon", &Scenario::horizon)
      .def_property_readonly("change_rate", &Scenario::change_rate)
      .def_property_readonly("h_max", &Scenario::h_max)
      .def_property_readonly("phi", &Scenario::phi)
      .def("with_settings", &Scenario::with_settings, py::arg("change_rate"), py::arg("h_max"), py::arg("phi"))
      .def("validate", [](const Scenario& sc) {
        std::vector<std::string> out;
        for (const Violation& v : validate(sc)) out.push_back(v.invariant + " " + v.entity + ": " + v.detail);
        return out;
      });

  m.def("generate", &generate_kw, "Synthetic scenario; keyword arguments mirror the generator parameters.");
  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def("save_scenario", &save_scenario, py::arg("scenario"), py::arg("path"));
  m.def("plan", &plan_dict, py::arg("scenario"), py::arg("mode") = "shared", py::arg("out") = py::none(),
        "Runs the three phases; writes the report files when `out` is given.");
  m.def("minimum_change_rate",
        [](const Scenario& sc, const std::string& mode, int limit) { return minimum_change_rate(sc, parse_mode(mode), limit); },
        py::arg("scenario"), py::arg("mode") = "shared", py::arg("limit") = 64);
  m.def("hhi", [](double sigma, const std::vector<double>& demand) { return hhi(sigma, demand).value; },
        py::arg("sigma"), py::arg("demand"));
  m.def("check_necessary",
        [](const std::vector<Period>& d, int n, Period k) {
          const NecessaryCheck c = check_necessary(d, n, k);
          return py::make_tuple(c.feasible, c.first_violation);
        },
        py::arg("deadlines"), py::arg("change_rate"), py::arg("horizon"));
  m.def("greedy_schedule",
        [](const std::vector<Period>& d, int n, Period k) { return greedy_schedule(d, n, k); },
        py::arg("deadlines"), py::arg("change_rate"), py::arg("horizon"));
  m.def("oracle_lateness",
        [](const std::vector<Period>& d, int n, Period k) -> std::optional<long> {
          const OracleSchedule o = oracle_schedule(d, n, k);
          if (!o.feasible) return std::nullopt;
          return o.lateness;
        },
        py::arg("deadlines"), py::arg("change_rate"), py::arg("horizon"));
  m.def("lateness", [](const std::vector<Period>& d, const std::vector<Period>& p) { return lateness(d, p); });
}
