"""Cellular network evolution planner."""

from ._core import (
    Scenario,
    check_necessary,
    generate,
    greedy_schedule,
    hhi,
    lateness,
    load_scenario,
    minimum_change_rate,
    oracle_lateness,
    plan,
    save_scenario,
)

__all__ = [
    "Scenario",
    "check_necessary",
    "generate",
    "greedy_schedule",
    "hhi",
    "lateness",
    "load_scenario",
    "minimum_change_rate",
    "oracle_lateness",
    "plan",
    "save_scenario",
]
