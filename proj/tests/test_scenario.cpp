#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "builders.hpp"
#include "evoplan/assessment.hpp"
#include "evoplan/generator.hpp"
#include "evoplan/scenario_io.hpp"

using namespace evoplan;
using namespace evoplan::testing;
namespace fs = std::filesystem;

namespace {

bool has(const std::vector<Violation>& v, const std::string& invariant) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.invariant == invariant; });
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("evoplan_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  return d;
}

GeneratorParams tiny(std::uint64_t seed) {
  GeneratorParams p;
  p.stations = 15;
  p.clusters = 60;
  p.area_km = 12;
  p.horizon = 6;
  p.seed = seed;
  return p;
}

}  // namespace

TEST(Validate, WorkedExampleIsClean) { EXPECT_TRUE(validate(worked_example()).empty()); }

TEST(Validate, ReportsEachBrokenInvariant) {
  Builder b(ladder_types(), 2, 1);
  b.station("no-off", 0, 0, "t1", {"t1", "t2"});
  b.station("bad-initial", 5, 0, "t2", {"off", "t1"});
  b.flat_cluster("lost", 100, 100, {5});
  b.flat_cluster("negative", 0, 0.5, {-1});
  ScenarioInput in = b.input();
  in.h_max = 1.5;
  in.phi = -0.1;
  in.change_rate = -1;
  const auto v = validate(Scenario(in));
  EXPECT_TRUE(has(v, "off type allowed"));
  EXPECT_TRUE(has(v, "initial type allowed"));
  EXPECT_TRUE(has(v, "uncoverable cluster"));
  EXPECT_TRUE(has(v, "non-negative demand"));
  EXPECT_TRUE(has(v, "hhi ceiling"));
  EXPECT_TRUE(has(v, "compliance fraction"));
  EXPECT_TRUE(has(v, "change rate"));
}

TEST(Validate, UnreachableAllowedType) {
  // LTE-3 is terminal, so neither 3G nor off can follow it.
  const Scenario sc = Builder(default_type_table(), 1, 1).station("b", 0, 0, "LTE-3", {"off", "3G", "LTE-3"}).build();
  EXPECT_TRUE(has(validate(sc), "change graph"));
}

TEST(Validate, ZeroDemandClusterNeedNotBeCoverable) {
  const Scenario sc = Builder(ladder_types(), 1, 1)
                          .station("b", 0, 0, "t1", {"off", "t1"})
                          .flat_cluster("far", 100, 100, {0})
                          .build();
  EXPECT_TRUE(validate(sc).empty());
  EXPECT_FALSE(sc.demanded(ClusterId{0}));
}

TEST(Validate, StructuralErrorsThrow) {
  ScenarioInput in = worked_example().input();
  in.demand.pop_back();
  EXPECT_THROW(Scenario{in}, std::invalid_argument);
  in = worked_example().input();
  in.operators.clear();
  EXPECT_THROW(Scenario{in}, std::invalid_argument);
}

TEST(Geometry, CoverageGrowsWithRadius) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Scenario sc = generate(tiny(seed));
    const TypeTable& T = sc.types();
    for (std::size_t b = 0; b < sc.num_stations(); ++b) {
      const auto id = make_id<StationId>(b);
      for (std::size_t i = 0; i < T.size(); ++i) {
        for (std::size_t j = 0; j < T.size(); ++j) {
          const auto ti = make_id<TypeId>(i);
          const auto tj = make_id<TypeId>(j);
          if (!sc.allowed(id, ti) || !sc.allowed(id, tj) || T[ti].radius_km > T[tj].radius_km) continue;
          for (const auto& e : sc.coverage(id, ti)) EXPECT_TRUE(sc.covers(id, e.cluster, tj));
        }
      }
      EXPECT_TRUE(sc.coverage(id, T.off()).empty());
    }
  }
}

TEST(Geometry, CandidateOrders) {
  const Scenario sc = generate(tiny(2));
  for (std::size_t c = 0; c < sc.num_clusters(); ++c) {
    const auto id = make_id<ClusterId>(c);
    const auto by_id = sc.candidates(id);
    const auto near = sc.nearest(id);
    ASSERT_EQ(by_id.size(), near.size());
    for (std::size_t i = 1; i < by_id.size(); ++i) {
      EXPECT_LT(by_id[i - 1].station, by_id[i].station);
      EXPECT_TRUE(near[i - 1].distance < near[i].distance ||
                  (near[i - 1].distance == near[i].distance && near[i - 1].station < near[i].station));
    }
  }
}

TEST(Generator, DemandFollowsGrowthLaw) {
  for (double g : {1.0, 2.5, 6.0}) {
    GeneratorParams p = tiny(9);
    p.growth = g;
    const Scenario sc = generate(p);
    ASSERT_TRUE(validate(sc).empty());
    const double K = sc.horizon();
    for (std::size_t c = 0; c < sc.num_clusters(); ++c) {
      const auto cid = make_id<ClusterId>(c);
      for (std::size_t o = 0; o < sc.num_operators(); ++o) {
        const auto oid = make_id<OperatorId>(o);
        const double base = sc.demand(cid, 1, oid);
        for (Period k = 1; k <= sc.horizon(); ++k) {
          const double want = base * std::pow(g, (k - 1) / (K - 1));
          EXPECT_NEAR(sc.demand(cid, k, oid), want, 1e-9 * want);
          if (g == 1.0) EXPECT_EQ(sc.demand(cid, k, oid), base);
        }
      }
    }
  }
}

TEST(Generator, SameSeedSameBytes) {
  const fs::path a = scratch_dir("gen_a");
  const fs::path b = scratch_dir("gen_b");
  save_scenario(generate(tiny(4)), a);
  save_scenario(generate(tiny(4)), b);
  for (const char* f : {"meta.json", "stations.csv", "clusters.csv", "demand.csv"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  const fs::path c = scratch_dir("gen_c");
  save_scenario(generate(tiny(5)), c);
  EXPECT_NE(slurp(a / "stations.csv"), slurp(c / "stations.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
  fs::remove_all(c);
}

TEST(Generator, RejectsBadParameters) {
  GeneratorParams p = tiny(1);
  p.stations = 0;
  EXPECT_THROW(generate(p), std::invalid_argument);
  p = tiny(1);
  p.growth = 0.5;
  EXPECT_THROW(generate(p), std::invalid_argument);
  p = tiny(1);
  p.horizon = 1;
  EXPECT_THROW(generate(p), std::invalid_argument);
  p = tiny(1);
  p.legacy_type = "5G";
  EXPECT_THROW(generate(p), std::invalid_argument);
  p = tiny(1);
  p.demand_balance = 1.5;
  EXPECT_THROW(generate(p), std::invalid_argument);
  p = tiny(1);
  p.market_lead = -0.1;
  EXPECT_THROW(generate(p), std::invalid_argument);
}

namespace {

// p90/p10 of pooled sigma/tau over demanded clusters at period 1.
double ratio_spread(const Scenario& sc) {
  const ProportionalAssessor a(sc);
  const AssessmentResult r = a.assess(Schedule(sc), 1, Mode::shared);
  std::vector<double> v;
  for (std::size_t c = 0; c < sc.num_clusters(); ++c) {
    const auto cid = make_id<ClusterId>(c);
    if (sc.demand(cid, 1) > 0.0) v.push_back(r.cluster(cid) / sc.demand(cid, 1));
  }
  std::sort(v.begin(), v.end());
  return v[v.size() * 9 / 10] / v[v.size() / 10];
}

}  // namespace

TEST(Generator, BalancedDemandNarrowsHeadroom) {
  GeneratorParams p;
  p.stations = 60;
  p.clusters = 240;
  p.area_km = 30;
  p.horizon = 12;
  p.seed = 6;
  const double plain = ratio_spread(generate(p));
  p.demand_balance = 1.0;
  const Scenario balanced = generate(p);
  EXPECT_TRUE(validate(balanced).empty());
  EXPECT_LT(ratio_spread(balanced), 0.5 * plain);
}

TEST(Generator, StartsWithLegacyOnlyAndFeasibleFirstPeriod) {
  const Scenario sc = generate(tiny(3));
  const TypeId legacy = *sc.types().find("3G");
  for (const auto& b : sc.stations()) EXPECT_TRUE(b.initial == legacy || b.initial == sc.types().off()) << b.name;
}
