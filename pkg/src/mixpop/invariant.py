"""Candidate positively invariant sets built from acceptable benchmark pairs.

For each pair ``(r, delta)`` the construction starts from the state ``y`` in
which only types ``1..r`` (anticoordinating) and ``1..delta`` (coordinating)
play A, pushes it to the largest reachable A-count with right-to-left sweeps,
and to the smallest with left-to-right sweeps. The tight benchmarks of those
extreme states give the quadruple ``(r, eta, sigma', zeta')``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from . import dynamics
from .population import (
    BenchmarkQuad,
    PopulationSpec,
    SpecError,
    State,
    check_omega,
    in_box,
    require_valid,
    tight_benchmarks,
    total_a,
)

DEFAULT_ENUM_CAP = 10**6


class CapExceeded(RuntimeError):
    pass


@dataclass
class CandidateSet:
    r: int
    delta: int
    benchmarks: BenchmarkQuad
    witness_states: dict[str, State]
    a_bounds: tuple[int, int]
    generating_pairs: list[tuple[int, int]] = field(default_factory=list)
    members: list[State] | None = None
    candidate_count: int = 0

    @property
    def is_singleton(self) -> bool:
        return self.members is not None and len(self.members) == 1

    def to_json(self) -> dict:
        return {
            "generating_pairs": [list(p) for p in self.generating_pairs],
            "benchmarks": dict(zip(("p", "q", "q_c", "p_c"), self.benchmarks.as_tuple())),
            "label": str(self.benchmarks),
            "witness_states": {k: list(v.canonical()) for k, v in self.witness_states.items()},
            "a_bounds": list(self.a_bounds),
            "member_count": None if self.members is None else len(self.members),
            "enumerated": self.members is not None,
        }


def y_state(spec: PopulationSpec, r: int, delta: int) -> State:
    """Types ``1..r`` and ``1..delta`` saturated, everyone else playing B."""
    anti = tuple(spec.n_anti(i) if i <= r else 0 for i in range(1, spec.b + 1))
    coor = tuple(spec.n_coor(j) if j <= delta else 0 for j in range(1, spec.bc + 1))
    return State(anti, coor)


def delta_set(spec: PopulationSpec, r: int) -> list[int]:
    if not 0 <= r <= spec.b:
        raise SpecError(f"r={r} outside 0..{spec.b}")
    base = spec.anti_prefix(r)
    return [
        d
        for d in range(spec.bc + 1)
        if spec.tau_c(d) + 1 <= base + spec.coor_prefix(d) <= spec.tau(r) + 1
    ]


def peak_state(spec: PopulationSpec, r: int, delta: int) -> State:
    """Right-to-left anticoordinator sweep followed by the coordinator one, from ``y``."""
    y_hat = dynamics.sweep_anti_rl(spec, y_state(spec, r, delta)).final_state
    return dynamics.sweep_coor_rl(spec, y_hat).final_state


def psi_set(spec: PopulationSpec) -> list[tuple[int, int]]:
    require_valid(spec, analytic=True)
    pairs = []
    for r in range(spec.b + 1):
        for d in delta_set(spec, r):
            peak = total_a(spec, peak_state(spec, r, d))
            if spec.tau(r + 1) < peak <= spec.tau(r) + 1:
                pairs.append((r, d))
    return pairs


def a_bounds(spec: PopulationSpec, bm: BenchmarkQuad) -> tuple[int, int]:
    """Bounds on A along trajectories inside ``I_{r, eta, sigma', zeta'}``."""
    p, q, q_c, p_c = bm.as_tuple()
    lo = max(math.ceil(spec.tau_c(p_c)) + 1, math.floor(spec.tau(q)) + 1)
    hi = min(math.ceil(spec.tau_c(q_c)) - 1, math.floor(spec.tau(p)) + 1)
    return lo, hi


def benchmarks(spec: PopulationSpec, r: int, delta: int, *, check: bool = True) -> CandidateSet:
    if check and (r, delta) not in psi_set(spec):
        raise SpecError(f"(r, delta)=({r}, {delta}) is not an acceptable pair")
    y = y_state(spec, r, delta)
    y_hat = dynamics.sweep_anti_rl(spec, y).final_state
    y_tilde = dynamics.sweep_coor_rl(spec, y_hat).final_state
    eta = tight_benchmarks(spec, y_hat).q
    sigma_c = tight_benchmarks(spec, y_tilde).q_c
    z = State(
        tuple(spec.n_anti(i) if i < eta else 0 for i in range(1, spec.b + 1)),
        tuple(spec.n_coor(j) if j < sigma_c else 0 for j in range(1, spec.bc + 1)),
    )
    z_hat = z if r + 1 > spec.b else dynamics.sweep_anti_lr_from(spec, z, r + 1).final_state
    z_tilde = dynamics.sweep_coor_lr(spec, z_hat).final_state
    zeta_c = tight_benchmarks(spec, z_tilde).p_c
    bm = BenchmarkQuad(r, eta, sigma_c, zeta_c)
    witnesses = {"y": y, "y_hat": y_hat, "y_tilde": y_tilde, "z": z, "z_hat": z_hat, "z_tilde": z_tilde}
    return CandidateSet(r, delta, bm, witnesses, a_bounds(spec, bm), [(r, delta)])


def _l_lhs(spec: PopulationSpec, bm: BenchmarkQuad, anti: tuple[int, ...], i: int) -> int:
    return spec.coor_prefix(bm.p_c) + spec.anti_prefix(bm.p) + sum(anti[i - 1 : bm.q - 1])


def _r_lhs(spec: PopulationSpec, bm: BenchmarkQuad, anti: tuple[int, ...], i: int) -> int:
    return (
        spec.coor_prefix(bm.q_c - 1)
        + spec.anti_prefix(bm.p)
        + sum(anti[bm.p : i])
        + sum(spec.n_anti(k) for k in range(i + 1, bm.q))
    )


def l_condition_lhs(spec, bm, x: State, i: int) -> int:
    """Left-hand side of the upper inequality for wandering type ``i``."""
    return _l_lhs(spec, bm, x.anti, i)


def r_condition_lhs(spec, bm, x: State, i: int) -> int:
    """Left-hand side of the lower inequality for wandering type ``i``."""
    return _r_lhs(spec, bm, x.anti, i)


def _wandering_ok(spec: PopulationSpec, bm: BenchmarkQuad, anti: tuple[int, ...]) -> bool:
    for i in range(bm.p + 1, bm.q):
        bound = math.floor(spec.tau(i)) + 1
        if _l_lhs(spec, bm, anti, i) > bound or _r_lhs(spec, bm, anti, i) < bound:
            return False
    return True


def membership(spec: PopulationSpec, bm: BenchmarkQuad, x: State) -> bool:
    check_omega(spec, bm)
    return in_box(spec, bm, x) and _wandering_ok(spec, bm, x.anti)


def candidate_count(spec: PopulationSpec, bm: BenchmarkQuad) -> int:
    """Size of the box: the product of the wandering ranges."""
    return math.prod(spec.n_anti(i) + 1 for i in range(bm.p + 1, bm.q)) * math.prod(
        spec.n_coor(j) + 1 for j in range(bm.p_c + 1, bm.q_c)
    )


def enumerate_set(spec: PopulationSpec, bm: BenchmarkQuad, cap: int = DEFAULT_ENUM_CAP) -> list[State]:
    """All members in canonical lexicographic order."""
    check_omega(spec, bm)
    total = candidate_count(spec, bm)
    if total > cap:
        raise CapExceeded(f"{bm}: {total} candidate states exceed the cap of {cap}")
    anti_ranges = [
        [spec.n_anti(i)] if i <= bm.p else (range(spec.n_anti(i) + 1) if i < bm.q else [0])
        for i in range(1, spec.b + 1)
    ]
    # coordinator coordinates in canonical (descending type) order
    coor_ranges_desc = [
        [spec.n_coor(j)] if j <= bm.p_c else (range(spec.n_coor(j) + 1) if j < bm.q_c else [0])
        for j in range(spec.bc, 0, -1)
    ]
    anti_parts = [a for a in itertools.product(*anti_ranges) if _wandering_ok(spec, bm, a)]
    members = []
    for a in anti_parts:
        for c in itertools.product(*coor_ranges_desc):
            members.append(State(a, tuple(reversed(c))))
    return members


def characterize(spec: PopulationSpec, cap: int = DEFAULT_ENUM_CAP) -> list[CandidateSet]:
    """Every candidate from the acceptable pairs, deduplicated on the quadruple."""
    by_quad: dict[BenchmarkQuad, CandidateSet] = {}
    for r, d in psi_set(spec):
        cs = benchmarks(spec, r, d, check=False)
        if cs.benchmarks in by_quad:
            by_quad[cs.benchmarks].generating_pairs.append((r, d))
            continue
        cs.candidate_count = candidate_count(spec, cs.benchmarks)
        if cs.candidate_count <= cap:
            cs.members = enumerate_set(spec, cs.benchmarks, cap)
        by_quad[cs.benchmarks] = cs
    return list(by_quad.values())
