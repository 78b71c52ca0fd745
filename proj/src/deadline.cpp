#include "evoplan/deadline.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace evoplan {

std::optional<Period> schedule_change(std::span<const int> counts, const ChangeRequest& req, int change_rate,
                                      Period not_before) {
  const auto K = static_cast<Period>(counts.size()) - 1;
  const Period lo = std::max<Period>(1, not_before);
  if (req.direction == Direction::latest) {
    for (Period h = std::min(req.deadline, K); h >= lo; --h) {
      if (counts[static_cast<std::size_t>(h)] < change_rate) return h;
    }
  } else {
    for (Period h = lo; h <= K; ++h) {
      if (counts[static_cast<std::size_t>(h)] < change_rate) return h;
    }
  }
  return std::nullopt;
}

NecessaryCheck check_necessary(std::span<const Period> deadlines, int change_rate, Period horizon) {
  std::vector<long> due(static_cast<std::size_t>(horizon) + 1, 0);
  for (Period d : deadlines) {
    if (d < 1 || d > horizon) throw std::invalid_argument("deadline " + std::to_string(d) + " outside [1, K]");
    ++due[static_cast<std::size_t>(d)];
  }
  long prefix = 0;
  for (Period k = 1; k <= horizon; ++k) {
    prefix += due[static_cast<std::size_t>(k)];
    if (prefix > static_cast<long>(k) * change_rate) return {false, k};
  }
  return {};
}

std::optional<std::vector<Period>> greedy_schedule(std::span<const Period> deadlines, int change_rate, Period horizon,
                                                   Direction direction) {
  std::vector<std::size_t> order(deadlines.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return deadlines[a] < deadlines[b]; });
  std::vector<int> counts(static_cast<std::size_t>(horizon) + 1, 0);
  std::vector<Period> placed(deadlines.size(), 0);
  for (std::size_t i : order) {
    const ChangeRequest req{StationId{}, TypeId{}, deadlines[i], direction};
    // Earliest placement is still bounded by the deadline here: a request
    // scheduled after its deadline is not a placement at all.
    std::optional<Period> slot = schedule_change(counts, req, change_rate);
    if (!slot || *slot > deadlines[i]) return std::nullopt;
    placed[i] = *slot;
    ++counts[static_cast<std::size_t>(*slot)];
  }
  return placed;
}

long lateness(std::span<const Period> deadlines, std::span<const Period> placed) {
  long sum = 0;
  for (std::size_t i = 0; i < deadlines.size(); ++i) sum += deadlines[i] - placed[i];
  return sum;
}

}  // namespace evoplan
