#include <gtest/gtest.h>

#include <random>

#include "builders.hpp"
#include "evoplan/assessment.hpp"
#include "evoplan/generator.hpp"
#include "evoplan/planner.hpp"

using namespace evoplan;
using namespace evoplan::testing;

namespace {

constexpr StationId s0{0};
constexpr StationId s1{1};
constexpr ClusterId c0{0};
constexpr ClusterId c1{1};

Scenario split_example() {
  return Builder(ladder_types(5), 1, 1)
      .station("b", 0, 0, "t1", {"off", "t1", "t2", "t3"})
      .flat_cluster("heavy", 1, 0, {75})
      .flat_cluster("light", 0, 1, {25})
      .build();
}

}  // namespace

TEST(Supply, SplitsCapacityByDemandShare) {
  const Scenario sc = split_example();
  const ProportionalAssessor a(sc);
  const Schedule s(sc);
  EXPECT_DOUBLE_EQ(a.station_supply(s, s0, type(sc.types(), "t1"), c0, 1, Mode::shared), 75.0);
  EXPECT_DOUBLE_EQ(a.station_supply(s, s0, type(sc.types(), "t1"), c1, 1, Mode::shared), 25.0);
  EXPECT_DOUBLE_EQ(a.station_supply(s, s0, type(sc.types(), "off"), c0, 1, Mode::shared), 0.0);
}

TEST(Supply, DoublesWithCapacity) {
  const Scenario sc = split_example();
  const ProportionalAssessor a(sc);
  const Schedule s(sc);
  for (ClusterId c : {c0, c1}) {
    EXPECT_DOUBLE_EQ(a.station_supply(s, s0, type(sc.types(), "t2"), c, 1, Mode::shared),
                     2 * a.station_supply(s, s0, type(sc.types(), "t1"), c, 1, Mode::shared));
  }
}

TEST(Supply, WithoutDemandCapacityIsSplitEvenly) {
  const Scenario sc = Builder(ladder_types(5), 1, 1)
                          .station("b", 0, 0, "t1", {"t1"})
                          .flat_cluster("a", 1, 0, {0})
                          .flat_cluster("b", 2, 0, {0})
                          .flat_cluster("c", 3, 0, {0})
                          .flat_cluster("d", 4, 0, {0})
                          .build();
  const ProportionalAssessor a(sc);
  const AssessmentResult r = a.assess(Schedule(sc), 1, Mode::shared);
  for (double v : r.sigma_cluster) EXPECT_DOUBLE_EQ(v, 25.0);
}

TEST(Supply, IndependentStationsServeTheirOwner) {
  const Scenario sc = Builder(ladder_types(5), 1, 1, 2)
                          .station("a", 0, 0, "t1", {"t1"}, 0)
                          .station("b", 0, 0, "t2", {"t2"}, 1)
                          .flat_cluster("c", 1, 0, {30, 10})
                          .build();
  const ProportionalAssessor a(sc);
  const AssessmentResult ind = a.assess(Schedule(sc), 1, Mode::independent);
  EXPECT_DOUBLE_EQ(ind.cluster_op(c0, OperatorId{0}), 100.0);
  EXPECT_DOUBLE_EQ(ind.cluster_op(c0, OperatorId{1}), 200.0);
  const AssessmentResult sh = a.assess(Schedule(sc), 1, Mode::shared);
  EXPECT_DOUBLE_EQ(sh.cluster(c0), 300.0);
  // Shared supply is attributed to operators in proportion to their demand.
  EXPECT_DOUBLE_EQ(sh.cluster_op(c0, OperatorId{0}), 225.0);
  EXPECT_DOUBLE_EQ(sh.cluster_op(c0, OperatorId{1}), 75.0);
}

namespace {

Scenario random_instance(std::uint64_t seed) {
  GeneratorParams p;
  p.stations = 20;
  p.clusters = 80;
  p.area_km = 12;
  p.horizon = 3;
  p.operators = 2;
  p.seed = seed;
  return generate(p);
}

}  // namespace

TEST(Supply, AdditiveAndBoundedByCapacity) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Scenario sc = random_instance(seed);
    const ProportionalAssessor a(sc);
    const Schedule s(sc);
    for (Mode m : {Mode::shared, Mode::independent}) {
      for (Period k = 1; k <= sc.horizon(); ++k) {
        const AssessmentResult r = a.assess(s, k, m);
        std::vector<double> by_cluster(sc.num_clusters(), 0.0);
        std::vector<double> by_station(sc.num_stations(), 0.0);
        for (const auto& e : r.sigma_station_cluster) {
          by_cluster[idx(e.cluster)] += e.sigma;
          by_station[idx(e.station)] += e.sigma;
        }
        for (std::size_t c = 0; c < sc.num_clusters(); ++c) {
          EXPECT_NEAR(by_cluster[c], r.sigma_cluster[c], 1e-9 * (1 + r.sigma_cluster[c]));
          double ops = 0;
          for (std::size_t o = 0; o < sc.num_operators(); ++o) ops += r.cluster_op(make_id<ClusterId>(c), make_id<OperatorId>(o));
          EXPECT_NEAR(ops, r.sigma_cluster[c], 1e-9 * (1 + r.sigma_cluster[c]));
        }
        for (std::size_t b = 0; b < sc.num_stations(); ++b) {
          const auto id = make_id<StationId>(b);
          EXPECT_LE(by_station[b], sc.capacity(s.type_at(id, k)) * (1 + 1e-12));
        }
      }
    }
  }
}

TEST(Supply, CapacityPreservingChangesNeverReduceService) {
  std::mt19937_64 rng(11);
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const Scenario sc = random_instance(seed);
    const ProportionalAssessor a(sc);
    const TypeTable& T = sc.types();
    for (int trial = 0; trial < 200; ++trial) {
      const auto b = make_id<StationId>(rng() % sc.num_stations());
      Schedule before(sc);
      const TypeId from = before.type_at(b, 1);
      std::vector<TypeId> options;
      for (std::size_t t = 0; t < T.size(); ++t) {
        const auto to = make_id<TypeId>(t);
        if (to != from && T.can_change(from, to) && sc.allowed(b, to)) options.push_back(to);
      }
      if (options.empty()) continue;
      const TypeId to = options[rng() % options.size()];
      Schedule after = before;
      after.add(b, 1, to);
      const Mode m = trial % 2 ? Mode::shared : Mode::independent;
      const AssessmentResult r0 = a.assess(before, 1, m);
      const AssessmentResult r1 = a.assess(after, 1, m);
      if (capacity_preserving(sc, b, from, to)) {
        for (std::size_t c = 0; c < sc.num_clusters(); ++c) EXPECT_GE(r1.sigma_cluster[c], r0.sigma_cluster[c]);
      }
    }
  }
}

TEST(Concentration, KnownValues) {
  const double one[1] = {100};
  EXPECT_DOUBLE_EQ(hhi(100, one).value, 1.0);
  EXPECT_DOUBLE_EQ(hhi(200, one).value, 0.5);
  EXPECT_NEAR(hhi(300, one).value, 5.0 / 9.0, 1e-15);
  const double two[2] = {50, 50};
  EXPECT_DOUBLE_EQ(hhi(100, two).value, 0.5);
  EXPECT_NEAR(hhi(150, two).value, 1.0 / 3.0, 1e-15);
}

TEST(Concentration, NoCapacityIsMaximal) {
  const double one[1] = {10};
  const HhiValue h = hhi(0, one);
  EXPECT_TRUE(h.degenerate);
  EXPECT_DOUBLE_EQ(h.value, 1.0);
}

TEST(Concentration, ShortfallDoesNotCountAsSpare) {
  const double one[1] = {100};
  // Demand share above one, spare share clamped at zero.
  EXPECT_DOUBLE_EQ(hhi(50, one).value, 4.0);
}

TEST(Concentration, BoundsWhenDemandIsMet) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t n = 1 + rng() % 4;
    std::vector<double> d(n);
    double tau = 0;
    for (double& x : d) tau += (x = u(rng));
    const double sigma = tau * (1.0 + u(rng) / 10.0);
    if (!(sigma > 0)) continue;
    const double h = hhi(sigma, d).value;
    EXPECT_LE(h, 1.0 + 1e-12);
    EXPECT_GE(h, 1.0 / static_cast<double>(n + 1) - 1e-12);
  }
}

TEST(Concentration, SingleParticipantMinimumAtDoubleSupply) {
  const double one[1] = {1.0};
  double best = 2.0;
  double at = 0.0;
  for (int i = 100; i <= 1000; ++i) {
    const double sigma = i / 100.0;
    const double h = hhi(sigma, one).value;
    if (h < best) best = h, at = sigma;
  }
  EXPECT_DOUBLE_EQ(at, 2.0);
  EXPECT_DOUBLE_EQ(best, 0.5);
}

TEST(Goals, DemandShortfallsAreListed) {
  const Scenario sc = worked_example();
  const ProportionalAssessor a(sc);
  const auto v = goal1_violations(a, Schedule(sc), Mode::shared);
  const std::vector<std::pair<ClusterId, Period>> want{{c0, 2}, {c0, 3}, {c0, 4}, {c1, 2}, {c1, 3}, {c1, 4}};
  EXPECT_EQ(v, want);
}

TEST(Goals, CompliantShareIgnoresClustersWithoutDemand) {
  const Scenario sc = worked_example().with_settings(1, 0.65, 1.0);
  const ProportionalAssessor a(sc);
  Schedule s(sc);
  s.add(s0, 1, type(sc.types(), "t3"));
  s.add(s1, 1, type(sc.types(), "t3"));
  const ComplianceSummary g = goal2_satisfied(a, s, 1, Mode::shared);
  EXPECT_EQ(g.counted, 2u);
  EXPECT_EQ(g.compliant, 2u);
  EXPECT_TRUE(g.satisfied);
  const ComplianceSummary g4 = goal2_satisfied(a, s, 4, Mode::shared);
  EXPECT_EQ(g4.compliant, 1u);
  EXPECT_FALSE(g4.satisfied);
}

TEST(Goals, FractionBoundaryIsInclusive) {
  EXPECT_TRUE(meets_fraction(7, 10, 0.7));
  EXPECT_FALSE(meets_fraction(6, 10, 0.7));
  EXPECT_TRUE(meets_fraction(0, 0, 0.7));
  EXPECT_TRUE(meets_fraction(1, 3, 1.0 / 3.0));
}
