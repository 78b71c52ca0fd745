#pragma once

#include <optional>
#include <span>
#include <vector>

#include "evoplan/ids.hpp"

namespace evoplan {

/// Capacity and competition fixes are placed as late as possible before their
/// deadline; cost-saving changes as early as possible.
enum class Direction { latest, earliest };

/// A change that must be active by `deadline` (k*).
struct ChangeRequest {
  StationId station{};
  TypeId to{};
  Period deadline = 1;
  Direction direction = Direction::latest;
};

/// Picks the period for `req` given per-period change counts (`counts[h]`
/// for h in [0, K]; index 0 is unused). Latest: max{h in [not_before, k*] :
/// counts[h] < N}. Earliest: min{h in [not_before, K] : counts[h] < N}.
/// Returns nullopt when every candidate period is full. Mutates nothing.
std::optional<Period> schedule_change(std::span<const int> counts, const ChangeRequest& req, int change_rate,
                                      Period not_before = 1);

struct NecessaryCheck {
  bool feasible = true;
  Period first_violation = 0;  ///< smallest k with more than k*N changes due by k
};

/// Prefix condition sum_{h<=k} x_h <= k*N for every k in [1, K], where x_h is
/// the number of deadlines equal to h.
NecessaryCheck check_necessary(std::span<const Period> deadlines, int change_rate, Period horizon);

/// Places every deadline with schedule_change, taking requests in
/// nondecreasing deadline order. Returns k-hat per input position, or nullopt
/// if some request finds no slot.
std::optional<std::vector<Period>> greedy_schedule(std::span<const Period> deadlines, int change_rate, Period horizon,
                                                   Direction direction = Direction::latest);

/// sum (k* - k-hat).
long lateness(std::span<const Period> deadlines, std::span<const Period> placed);

}  // namespace evoplan
