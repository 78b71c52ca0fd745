#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace evoplan {

// Dense indices into the scenario tables. Distinct enum types keep a station
// index from being passed where a cluster index is expected.
enum class StationId : std::int32_t {};
enum class ClusterId : std::int32_t {};
enum class TypeId : std::int16_t {};
enum class OperatorId : std::int16_t {};

template <typename E>
constexpr std::size_t idx(E e) noexcept {
  return static_cast<std::size_t>(e);
}

template <typename E>
constexpr E make_id(std::size_t i) noexcept {
  return static_cast<E>(i);
}

/// Planning periods are 1-based: k in [1, K]. Period 0 denotes the initial
/// configuration, before any change is applied.
using Period = int;

/// Budget groups for the change-rate limit N. In shared mode all stations
/// draw from group 0; in independent mode each operator has its own group.
using BudgetGroup = int;

}  // namespace evoplan
