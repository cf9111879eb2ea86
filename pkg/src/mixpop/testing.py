"""Random small populations for property checks."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .population import PopulationSpec


def random_spec(
    rng: np.random.Generator,
    *,
    max_types: int = 4,
    max_count: int = 5,
    distinct_floors: bool = False,
    fractional: bool = True,
) -> PopulationSpec:
    """Draw type counts, agent counts and tempers in ``[0, n-1]`` with the required orderings.

    Tempers are multiples of 1/2 when ``fractional`` so that integer and
    non-integer thresholds both occur. ``distinct_floors`` forces the
    anticoordinator tempers to have pairwise different floors.
    """
    b = int(rng.integers(1, max_types + 1))
    bc = int(rng.integers(1, max_types + 1))
    anti_counts = [int(v) for v in rng.integers(1, max_count + 1, size=b)]
    coor_counts = [int(v) for v in rng.integers(1, max_count + 1, size=bc)]
    n = sum(anti_counts) + sum(coor_counts)
    step = Fraction(1, 2) if fractional else Fraction(1)
    grid = [k * step for k in range(int((n - 1) / step) + 1)]

    if distinct_floors:
        floors = sorted(rng.choice(n, size=b, replace=False).tolist(), reverse=True)
        anti = []
        for f in floors:
            options = [g for g in grid if f <= g < f + 1]
            anti.append(options[int(rng.integers(len(options)))])
    else:
        picks = rng.choice(len(grid), size=min(b, len(grid)), replace=False)
        anti = sorted((grid[k] for k in picks), reverse=True)
    picks = rng.choice(len(grid), size=min(bc, len(grid)), replace=False)
    coor = sorted(grid[k] for k in picks)
    return PopulationSpec.from_lists(anti, anti_counts[: len(anti)], coor, coor_counts[: len(coor)])
