"""Repair-and-maintenance scheduling on networks: exact DP, index and polling heuristics, and OPI."""

from ._core import (
    CapacityError,
    Instance,
    SchemaError,
    appendix_d_instances,
    benchmark_csv,
    evaluate_index,
    example1_instance,
    generate_instance,
    run_opi,
    simulate,
    solve_dp,
    verify_fixtures,
)

__all__ = [
    "CapacityError",
    "Instance",
    "SchemaError",
    "appendix_d_instances",
    "benchmark_csv",
    "evaluate_index",
    "example1_instance",
    "generate_instance",
    "run_opi",
    "simulate",
    "solve_dp",
    "verify_fixtures",
]
