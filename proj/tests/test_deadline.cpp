#include <gtest/gtest.h>

#include <random>

#include "evoplan/deadline.hpp"
#include "evoplan/oracle.hpp"

using namespace evoplan;

namespace {

std::vector<int> counts_with(Period K, std::initializer_list<std::pair<Period, int>> used) {
  std::vector<int> c(static_cast<std::size_t>(K) + 1, 0);
  for (auto [k, n] : used) c[static_cast<std::size_t>(k)] = n;
  return c;
}

ChangeRequest req(Period deadline, Direction d = Direction::latest) { return {StationId{}, TypeId{}, deadline, d}; }

}  // namespace

TEST(ScheduleChange, EmptyScheduleTakesDeadline) {
  EXPECT_EQ(schedule_change(counts_with(5, {}), req(5), 1), 5);
}

TEST(ScheduleChange, ScansDownPastFullPeriods) {
  EXPECT_EQ(schedule_change(counts_with(5, {{3, 1}, {4, 1}, {5, 1}}), req(5), 1), 2);
}

TEST(ScheduleChange, EarliestScansUp) {
  EXPECT_EQ(schedule_change(counts_with(3, {{1, 1}}), req(3, Direction::earliest), 1), 2);
}

TEST(ScheduleChange, NoSlotWhenAllFull) {
  EXPECT_EQ(schedule_change(counts_with(2, {{1, 2}, {2, 2}}), req(2), 2), std::nullopt);
  EXPECT_EQ(schedule_change(counts_with(2, {}), req(2), 0), std::nullopt);
}

TEST(ScheduleChange, RespectsLowerBound) {
  EXPECT_EQ(schedule_change(counts_with(5, {{4, 1}, {5, 1}}), req(5), 1, 4), std::nullopt);
  EXPECT_EQ(schedule_change(counts_with(5, {{1, 1}}), req(5, Direction::earliest), 1, 3), 3);
}

TEST(ScheduleChange, DeadlineBeyondHorizonIsClamped) {
  EXPECT_EQ(schedule_change(counts_with(3, {}), req(9), 1), 3);
}

TEST(CheckNecessary, Examples) {
  const std::vector<Period> a{1, 1};
  const auto r = check_necessary(a, 1, 3);
  EXPECT_FALSE(r.feasible);
  EXPECT_EQ(r.first_violation, 1);
  const std::vector<Period> b{1, 2};
  EXPECT_TRUE(check_necessary(b, 1, 2).feasible);
  const std::vector<Period> c{2, 2, 2};
  EXPECT_EQ(check_necessary(c, 1, 3).first_violation, 2);
  EXPECT_TRUE(check_necessary(std::vector<Period>{}, 0, 3).feasible);
  EXPECT_FALSE(check_necessary(std::vector<Period>{3}, 0, 3).feasible);
}

TEST(CheckNecessary, RejectsDeadlinesOutsideHorizon) {
  EXPECT_THROW(check_necessary(std::vector<Period>{0}, 1, 3), std::invalid_argument);
  EXPECT_THROW(check_necessary(std::vector<Period>{4}, 1, 3), std::invalid_argument);
}

TEST(Greedy, PlacesFeasibleMultisetsFromSampler) {
  for (const auto& d : oracle_feasible_sets(8, 2, 1000, 11)) {
    const auto placed = greedy_schedule(d, 2, 8);
    ASSERT_TRUE(placed.has_value());
    std::vector<int> used(9, 0);
    for (std::size_t i = 0; i < d.size(); ++i) {
      EXPECT_LE((*placed)[i], d[i]);
      EXPECT_GE((*placed)[i], 1);
      ++used[static_cast<std::size_t>((*placed)[i])];
    }
    for (int u : used) EXPECT_LE(u, 2);
  }
}

// Feasibility: the greedy succeeds exactly when the prefix condition holds.
TEST(Greedy, SucceedsIffPrefixConditionHolds) {
  std::mt19937_64 rng(2024);
  std::size_t feasible = 0;
  for (int i = 0; i < 10000; ++i) {
    const Period K = std::uniform_int_distribution<Period>(1, 12)(rng);
    const int n = std::uniform_int_distribution<int>(1, 4)(rng);
    const long len = std::uniform_int_distribution<long>(0, static_cast<long>(K) * n + 2)(rng);
    std::vector<Period> d(static_cast<std::size_t>(len));
    for (auto& x : d) x = std::uniform_int_distribution<Period>(1, K)(rng);
    const bool ok = check_necessary(d, n, K).feasible;
    feasible += ok;
    ASSERT_EQ(greedy_schedule(d, n, K).has_value(), ok) << "instance " << i;
  }
  // Both outcomes must be well represented for the check to mean anything.
  EXPECT_GT(feasible, 1000u);
  EXPECT_LT(feasible, 9000u);
}

// Lateness optimality against exhaustive enumeration.
TEST(Greedy, LatenessMatchesOracleExhaustively) {
  for (Period K = 1; K <= 5; ++K) {
    for (int n = 1; n <= 3; ++n) {
      std::vector<Period> cur;
      auto rec = [&](auto&& self, Period lo) -> void {
        const auto o = oracle_schedule(cur, n, K);
        const auto g = greedy_schedule(cur, n, K);
        ASSERT_EQ(g.has_value(), o.feasible);
        if (g) ASSERT_EQ(lateness(cur, *g), o.lateness);
        if (cur.size() == 6) return;
        for (Period d = lo; d <= K; ++d) {
          cur.push_back(d);
          self(self, d);
          cur.pop_back();
        }
      };
      rec(rec, 1);
    }
  }
}

TEST(Greedy, EarliestPlacementLosesOptimality) {
  const std::vector<Period> d{2};
  const auto g = greedy_schedule(d, 1, 2, Direction::earliest);
  ASSERT_TRUE(g);
  EXPECT_EQ(lateness(d, *g), 1);
  EXPECT_EQ(oracle_schedule(d, 1, 2).lateness, 0);
}

TEST(Greedy, ReturnsPlacementsInInputOrder) {
  const std::vector<Period> d{3, 1, 3};
  const auto g = greedy_schedule(d, 1, 3);
  ASSERT_TRUE(g);
  EXPECT_EQ((*g)[1], 1);
  EXPECT_EQ((*g)[0] + (*g)[2], 5);  // periods 3 and 2
}
