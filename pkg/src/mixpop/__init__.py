"""Best-response dynamics in well-mixed populations of coordinators and anticoordinators."""

from .population import (
    BenchmarkQuad,
    PopulationSpec,
    SpecError,
    State,
    example1,
    load_spec,
    total_a,
)

__all__ = [
    "BenchmarkQuad",
    "PopulationSpec",
    "SpecError",
    "State",
    "example1",
    "load_spec",
    "total_a",
]
