#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "builders.hpp"
#include "evoplan/generator.hpp"
#include "evoplan/planner.hpp"
#include "evoplan/scenario_io.hpp"
#include "evoplan/text.hpp"

using namespace evoplan;
using namespace evoplan::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("evoplan_io_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

void expect_same(const Scenario& a, const Scenario& b) {
  ASSERT_EQ(a.num_stations(), b.num_stations());
  ASSERT_EQ(a.num_clusters(), b.num_clusters());
  ASSERT_EQ(a.num_operators(), b.num_operators());
  ASSERT_EQ(a.types().size(), b.types().size());
  EXPECT_EQ(a.horizon(), b.horizon());
  EXPECT_EQ(a.change_rate(), b.change_rate());
  EXPECT_EQ(a.h_max(), b.h_max());
  EXPECT_EQ(a.phi(), b.phi());
  for (std::size_t t = 0; t < a.types().size(); ++t) {
    const auto& x = a.types()[make_id<TypeId>(t)];
    const auto& y = b.types()[make_id<TypeId>(t)];
    EXPECT_EQ(x.name, y.name);
    EXPECT_EQ(x.capacity, y.capacity);
    EXPECT_EQ(x.radius_km, y.radius_km);
    EXPECT_EQ(x.cost, y.cost);
    EXPECT_EQ(x.successors, y.successors);
  }
  for (std::size_t i = 0; i < a.num_stations(); ++i) {
    const auto& x = a.stations()[i];
    const auto& y = b.stations()[i];
    EXPECT_EQ(x.name, y.name);
    EXPECT_EQ(x.x, y.x);
    EXPECT_EQ(x.y, y.y);
    EXPECT_EQ(x.initial, y.initial);
    EXPECT_EQ(x.owner, y.owner);
    EXPECT_EQ(x.allowed, y.allowed);
    for (std::size_t t = 0; t < a.types().size(); ++t) {
      EXPECT_EQ(a.cost(make_id<StationId>(i), make_id<TypeId>(t)), b.cost(make_id<StationId>(i), make_id<TypeId>(t)));
    }
  }
  for (std::size_t c = 0; c < a.num_clusters(); ++c) {
    EXPECT_EQ(a.clusters()[c].x, b.clusters()[c].x);
    EXPECT_EQ(a.clusters()[c].y, b.clusters()[c].y);
  }
  EXPECT_EQ(a.input().demand, b.input().demand);
}

}  // namespace

TEST(Text, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, 2.5e17}) EXPECT_EQ(parse_double(format_double(v)), v);
  EXPECT_EQ(format_double(-0.0), "0");
  EXPECT_EQ(format_double(1.5), "1.5");
  EXPECT_FALSE(parse_double("1.5x").has_value());
  EXPECT_FALSE(parse_double("").has_value());
  EXPECT_EQ(parse_long("42"), 42);
  EXPECT_FALSE(parse_long("4.2").has_value());
}

TEST(ScenarioFiles, RoundTripIsExact) {
  GeneratorParams p;
  p.stations = 12;
  p.clusters = 40;
  p.area_km = 10;
  p.horizon = 5;
  p.operators = 3;
  p.seed = 17;
  const Scenario sc = generate(p);
  const fs::path d = scratch_dir("rt");
  save_scenario(sc, d);
  const Scenario back = load_scenario(d);
  expect_same(sc, back);
  const fs::path d2 = scratch_dir("rt2");
  save_scenario(back, d2);
  for (const char* f : {"meta.json", "stations.csv", "clusters.csv", "demand.csv"}) EXPECT_EQ(slurp(d / f), slurp(d2 / f));
  fs::remove_all(d);
  fs::remove_all(d2);
}

TEST(ScenarioFiles, CostOverridesSurvive) {
  ScenarioInput in = worked_example().input();
  in.cost_overrides.push_back({StationId{1}, *in.types.find("t2"), 7.25});
  const Scenario sc(in);
  const fs::path d = scratch_dir("costs");
  save_scenario(sc, d);
  EXPECT_TRUE(fs::exists(d / "costs.csv"));
  const Scenario back = load_scenario(d);
  EXPECT_EQ(back.cost(StationId{1}, *in.types.find("t2")), 7.25);
  expect_same(sc, back);
  save_scenario(worked_example(), d);
  EXPECT_FALSE(fs::exists(d / "costs.csv"));
  fs::remove_all(d);
}

TEST(ScenarioFiles, MissingDemandCellNamesTheCell) {
  const fs::path d = scratch_dir("missing");
  save_scenario(worked_example(), d);
  std::string demand = slurp(d / "demand.csv");
  const std::string row = "c2,3,op1,";
  const auto at = demand.find(row);
  ASSERT_NE(at, std::string::npos);
  demand.erase(at, demand.find('\n', at) - at + 1);
  spit(d / "demand.csv", demand);
  try {
    load_scenario(d);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("c2"), std::string::npos) << e.what();
    EXPECT_NE(e.file().find("demand.csv"), std::string::npos);
  }
  fs::remove_all(d);
}

TEST(ScenarioFiles, BadNumberNamesLineAndField) {
  const fs::path d = scratch_dir("badnum");
  save_scenario(worked_example(), d);
  std::string st = slurp(d / "stations.csv");
  const auto at = st.find("b2,10,");
  ASSERT_NE(at, std::string::npos);
  st.replace(at, 6, "b2,ten,");
  spit(d / "stations.csv", st);
  try {
    load_scenario(d);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.field(), "x");
  }
  fs::remove_all(d);
}

TEST(ScenarioFiles, UnknownTypeAndMissingFiles) {
  const fs::path d = scratch_dir("unknown");
  save_scenario(worked_example(), d);
  std::string st = slurp(d / "stations.csv");
  st.replace(st.find("t1"), 2, "t9");
  spit(d / "stations.csv", st);
  EXPECT_THROW(load_scenario(d), ParseError);
  fs::remove(d / "clusters.csv");
  EXPECT_THROW(load_scenario(d), ParseError);
  fs::remove_all(d);
}

TEST(ScenarioFiles, ZeroChangeRateLoadsButCannotPlanGrowth) {
  const fs::path d = scratch_dir("n0");
  save_scenario(worked_example().with_settings(0, 1.0, 0.7), d);
  const Scenario sc = load_scenario(d);
  EXPECT_EQ(sc.change_rate(), 0);
  EXPECT_TRUE(validate(sc).empty());
  const ProportionalAssessor a(sc);
  const PlanResult r = plan(sc, Mode::shared, a);
  EXPECT_EQ(r.status, PlanStatus::infeasible);
  EXPECT_EQ(r.failed_period, 2);
  fs::remove_all(d);
}

TEST(TypeTableConfig, ParsesAndRejects) {
  const TypeTable t = parse_type_table(R"({"types":[
      {"name":"off","capacity":0,"radius_km":0,"cost":0,"successors":["a"]},
      {"name":"a","capacity":10,"radius_km":2,"cost":1,"successors":["off"]}]})");
  EXPECT_EQ(t.size(), 2u);
  EXPECT_TRUE(t.can_change(*t.find("off"), *t.find("a")));
  EXPECT_THROW(parse_type_table(R"({"types":[{"name":"a","capacity":1,"radius_km":1,"cost":1,"successors":["zz"]}]})"),
               ParseError);
  EXPECT_THROW(parse_type_table("{not json"), ParseError);
}
