"""Stability of positively invariant sets under unit perturbations.

A set is stable when every trajectory that starts at L1 distance one from it
stays within distance one. Because a single activation moves the state by at
most one, it is enough to look one step ahead from every adjacent state; that
is what :func:`verify_one_step` does by brute force. :func:`check_proposition`
and :func:`check_theorem` decide the same question from the equality index
sets and the markers of each member.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import dynamics
from .invariant import CapExceeded, l_condition_lhs, membership, r_condition_lhs
from .population import (
    BenchmarkQuad,
    PopulationSpec,
    SpecError,
    State,
    check_omega,
    require_valid,
    total_a,
    validate_spec,
)

DEFAULT_NEIGHBOR_CAP = 10**7


class AssumptionError(SpecError):
    """Raised when anticoordinator tempers share a floor, which the analytic tests need to avoid."""


@dataclass(frozen=True)
class EqualityIndexSets:
    L: frozenset[int]
    R: frozenset[int]


@dataclass(frozen=True)
class StateMarkers:
    z_e: int
    z_f: int
    z_W: int
    n_W: int
    w_A: int
    w_B: int
    v_A: int
    v_B: int
    defaulted: tuple[str, ...] = ()


@dataclass
class StabilityVerdict:
    stable: bool
    method: str
    failing_condition: str | None = None
    witness_state: State | None = None
    witness_perturbation: dict | None = None
    clause_passes: dict[str, int] = field(default_factory=dict)
    matrix: list[dict] | None = None
    convention_sensitive_members: int = 0
    pinned_edges: bool = False

    def to_json(self) -> dict:
        out = {
            "method": self.method,
            "stable": self.stable,
            "failing_condition": self.failing_condition,
            "witness_state": None if self.witness_state is None else list(self.witness_state.canonical()),
            "witness_perturbation": self.witness_perturbation,
            "clause_passes": self.clause_passes,
        }
        if self.method != "onestep":
            out["marker_conventions"] = "pinned-edges" if self.pinned_edges else "formula"
            out["convention_sensitive_members"] = self.convention_sensitive_members
        if self.matrix is not None:
            out["matrix"] = self.matrix
        return out


def _require_assumption(spec: PopulationSpec) -> None:
    require_valid(spec, analytic=True)
    if not validate_spec(spec).stability_assumption:
        raise AssumptionError("anticoordinator tempers must have distinct floors for the analytic stability test")


def set_distance(x: State, members) -> int:
    """L1 distance from ``x`` to the nearest member."""
    arr = members if isinstance(members, np.ndarray) else np.array([m.canonical() for m in members])
    if arr.size == 0:
        raise ValueError("distance to an empty set is undefined")
    return int(np.abs(arr - np.asarray(x.canonical())).sum(axis=1).min())


def _require_member(spec, bm, z) -> None:
    if not membership(spec, bm, z):
        raise SpecError(f"{z} is not a member of {bm}")


def lr_index_sets(spec: PopulationSpec, bm: BenchmarkQuad, z: State) -> EqualityIndexSets:
    _require_member(spec, bm, z)
    L, R = set(), set()
    for i in range(bm.p + 1, bm.q):
        bound = math.floor(spec.tau(i)) + 1
        if l_condition_lhs(spec, bm, z, i) == bound:
            L.add(i)
        if r_condition_lhs(spec, bm, z, i) == bound:
            R.add(i)
    return EqualityIndexSets(frozenset(L), frozenset(R))


def markers(spec: PopulationSpec, bm: BenchmarkQuad, z: State, *, edge_overrides: bool = True) -> StateMarkers:
    """Wandering-type markers of a member.

    Empty candidate sets fall back to ``max = p`` and ``min = q``; their names
    are listed in ``defaulted``. With ``edge_overrides`` the pair ``(w_A, w_B)``
    is pinned to ``(p, q)`` when all wandering anticoordinators play A, and
    ``(v_A, v_B)`` likewise when none do.
    """
    _require_member(spec, bm, z)
    p, q = bm.p, bm.q
    wandering = range(p + 1, q)
    a = total_a(spec, z)
    zi = lambda i: z.anti[i - 1]  # noqa: E731
    ni = spec.n_anti
    defaulted = []

    def pick(name, fn, cands, empty):
        cands = list(cands)
        if not cands:
            defaulted.append(name)
            return empty
        return fn(cands)

    z_e = max((i for i in wandering if zi(i) < ni(i)), default=p)
    z_f = min((i for i in wandering if zi(i) > 0), default=q)
    z_W = sum(zi(i) for i in wandering)
    n_W = sum(ni(i) for i in wandering)
    if edge_overrides and z_W == n_W:
        w_A, w_B = p, q
    else:
        w_B = pick("w_B", min, (i for i in wandering if zi(i) > 0 and a > spec.tau(i)), q)
        w_A = pick("w_A", max, (i for i in wandering if zi(i) < ni(i) and a <= spec.tau(i) - 1), p)
    if edge_overrides and z_W == 0:
        v_A, v_B = p, q
    else:
        v_B = pick("v_B", min, (i for i in wandering if zi(i) > 0 and a > spec.tau(i) + 2), q)
        v_A = pick("v_A", max, (i for i in wandering if zi(i) < ni(i) and a <= spec.tau(i) + 1), p)
    return StateMarkers(z_e, z_f, z_W, n_W, w_A, w_B, v_A, v_B, tuple(defaulted))


def _span(lo: int, hi: int) -> set[int]:
    """Integer interval ``[lo, hi]``."""
    return set(range(lo, hi + 1))


def proposition_conditions(
    spec: PopulationSpec, bm: BenchmarkQuad, z: State, *, pinned_edges: bool = False
) -> dict[str, bool | None]:
    """Per-clause outcome at one member; ``None`` marks a clause whose guard is off.

    By default the w/v markers come straight from their defining formulas. With
    ``pinned_edges`` they are pinned to ``(p, q)`` when every wandering
    anticoordinator plays A (for w) or B (for v); that shortcut overlooks unit
    perturbations of fixed types, see :func:`check_proposition`.
    """
    p, q, qc, pc = bm.as_tuple()
    b, bc = spec.b, spec.bc
    a = total_a(spec, z)
    sets = lr_index_sets(spec, bm, z)
    L, R = sets.L, sets.R
    m = markers(spec, bm, z, edge_overrides=pinned_edges)
    fl_p, fl_q = math.floor(spec.tau(p)), math.floor(spec.tau(q))
    ce_qc, ce_pc = math.ceil(spec.tau_c(qc)), math.ceil(spec.tau_c(pc))
    upper_open = q + qc <= b + bc + 1
    lower_open = p + pc >= 1
    out: dict[str, bool | None] = {}

    out["1"] = not (L & _span(p + 1, m.z_e)) if a in (fl_p + 1, ce_qc - 1) else None
    out["2"] = not (R & _span(m.z_f, q - 1)) if a in (fl_q + 1, ce_pc + 1) else None
    if upper_open:
        out["3a"] = a <= min(fl_p, ce_qc - 2)
        out["3b"] = not (R & _span(m.w_B, q - 1))
    else:
        out["3a"] = out["3b"] = None
    if lower_open:
        out["4a"] = a >= max(fl_q + 2, ce_pc + 2)
        out["4b"] = not (L & _span(p + 1, m.v_A))
    else:
        out["4a"] = out["4b"] = None
    out["5a"] = (
        len(R & _span(m.w_B, m.z_e - 1)) * len(L & _span(m.w_B + 1, m.z_e)) == 0 if m.z_W < m.n_W else None
    )
    out["5b"] = (
        len(R & _span(m.z_f, m.v_A - 1)) * len(L & _span(m.z_f + 1, m.v_A)) == 0 if m.z_W > 0 else None
    )
    out["6"] = not (L & _span(p + 1, m.w_A)) if (m.z_W < m.n_W - 1 or upper_open) else None
    out["7"] = not (R & _span(m.v_B, q - 1)) if (m.z_W > 1 or lower_open) else None
    return out


PROPOSITION_CLAUSES = ("1", "2", "3a", "3b", "4a", "4b", "5a", "5b", "6", "7")
THEOREM_CLAUSES = ("window", "L_vA", "R_wB")


def _sorted_members(members) -> list[State]:
    return sorted(members, key=lambda s: s.canonical())


def _reduce(spec, members, clauses, evaluate, method, verbose, pinned_edges) -> StabilityVerdict:
    if not members:
        raise ValueError("member list is empty")
    passes = {c: 0 for c in clauses}
    first = None
    matrix = [] if verbose else None
    sensitive = 0
    for z in _sorted_members(members):
        row = evaluate(z, pinned_edges)
        if evaluate(z, not pinned_edges) != row:
            sensitive += 1
        for c in clauses:
            if row[c] is not False:
                passes[c] += 1
            elif first is None:
                first = (c, z)
        if verbose:
            matrix.append({"state": list(z.canonical()), **row})
    verdict = StabilityVerdict(
        first is None,
        method,
        clause_passes=passes,
        matrix=matrix,
        convention_sensitive_members=sensitive,
        pinned_edges=pinned_edges,
    )
    if first is not None:
        verdict.failing_condition, verdict.witness_state = first
        verdict.witness_perturbation = find_perturbation_near(spec, members, first[1])
    return verdict


def check_proposition(
    spec: PopulationSpec, bm: BenchmarkQuad, members, *, verbose: bool = False, pinned_edges: bool = False
) -> StabilityVerdict:
    """Stable iff every member passes every applicable clause.

    Members are scanned in canonical order and the first failing clause is the
    witness. With ``pinned_edges`` the w/v markers use the pinned edge
    values. Take one anticoordinator (temper 1) and two coordinators (temper 0):
    the set ``{(0|2)}`` is then reported stable, yet from ``(0|1)`` the
    anticoordinator joins and lands on ``(1|1)``, two steps from the set.
    """
    _require_assumption(spec)
    check_omega(spec, bm)
    return _reduce(
        spec, members, PROPOSITION_CLAUSES,
        lambda z, pc: proposition_conditions(spec, bm, z, pinned_edges=pc),
        "proposition", verbose, pinned_edges,
    )


def theorem_guards_hold(spec: PopulationSpec, bm: BenchmarkQuad) -> bool:
    return bm.p + bm.p_c >= 1 and bm.q + bm.q_c <= spec.b + spec.bc + 1


def a_window(spec: PopulationSpec, bm: BenchmarkQuad) -> tuple[int, int]:
    """Range of A that every member of a stable set must respect when both guards hold."""
    lo = max(math.floor(spec.tau(bm.q)), math.ceil(spec.tau_c(bm.p_c))) + 2
    hi = min(math.floor(spec.tau(bm.p)), math.ceil(spec.tau_c(bm.q_c)) - 2)
    return lo, hi


def theorem_conditions(
    spec: PopulationSpec, bm: BenchmarkQuad, z: State, *, pinned_edges: bool = False
) -> dict[str, bool]:
    lo, hi = a_window(spec, bm)
    sets = lr_index_sets(spec, bm, z)
    m = markers(spec, bm, z, edge_overrides=pinned_edges)
    return {
        "window": lo <= total_a(spec, z) <= hi,
        "L_vA": not (sets.L & _span(bm.p + 1, m.v_A)),
        "R_wB": not (sets.R & _span(m.w_B, bm.q - 1)),
    }


def check_theorem(
    spec: PopulationSpec, bm: BenchmarkQuad, members, *, verbose: bool = False, pinned_edges: bool = False
) -> StabilityVerdict:
    """Two-clause test, valid when some type is A-fixed and some type is B-fixed."""
    _require_assumption(spec)
    check_omega(spec, bm)
    if not theorem_guards_hold(spec, bm):
        raise SpecError(f"{bm} has p+p'=0 or q+q'>b+b'+1; use the proposition test instead")
    return _reduce(
        spec, members, THEOREM_CLAUSES,
        lambda z, pc: theorem_conditions(spec, bm, z, pinned_edges=pc),
        "theorem", verbose, pinned_edges,
    )


# brute-force definition check ------------------------------------------------


def _unit_moves(radices: tuple[int, ...], x: tuple[int, ...]):
    for k, r in enumerate(radices):
        for d in (-1, 1):
            v = x[k] + d
            if 0 <= v < r:
                yield x[:k] + (v,) + x[k + 1 :]


def _boundary(spec: PopulationSpec, members: set[tuple[int, ...]], cap: int) -> set[tuple[int, ...]]:
    radices = spec.radices()
    if len(members) * 2 * len(radices) > cap:
        raise CapExceeded(f"{len(members)} members exceed the neighbor scan cap of {cap}")
    return {y for x in members for y in _unit_moves(radices, x) if y not in members}


def _escape_from(spec, x: tuple[int, ...], inside: set, near: set):
    """First activation at ``x`` (in canonical activation order) whose successor is at distance two."""
    xs = State.from_canonical(x, spec.b)
    for who in dynamics.valid_activations(spec, xs):
        y = dynamics.step(spec, xs, who).canonical()
        if y not in inside and y not in near:
            return who, y
    return None


def _perturbation_record(spec, z, x, who, y) -> dict:
    return {
        "member": list(z),
        "start": list(x),
        "activation": {"role": who.role.value, "type": who.type_index, "from": who.current_strategy.value},
        "next": list(y),
        "next_distance": 2,
    }


def find_perturbation_near(spec: PopulationSpec, members, z: State, cap: int = DEFAULT_NEIGHBOR_CAP) -> dict | None:
    """Search the unit neighbors of ``z`` for a start that leaves distance one in a single step."""
    inside = {m.canonical() for m in members}
    near = _boundary(spec, inside, cap)
    zc = z.canonical()
    for x in sorted(_unit_moves(spec.radices(), zc)):
        if x in inside:
            continue
        hit = _escape_from(spec, x, inside, near)
        if hit is not None:
            return _perturbation_record(spec, zc, x, *hit)
    return None


def verify_one_step(spec: PopulationSpec, members, cap: int = DEFAULT_NEIGHBOR_CAP) -> StabilityVerdict:
    """Every start at distance one, every activation: does the next state stay within distance one?"""
    if not members:
        raise ValueError("member list is empty")
    inside = {m.canonical() for m in members}
    near = _boundary(spec, inside, cap)
    radices = spec.radices()
    for x in sorted(near):
        hit = _escape_from(spec, x, inside, near)
        if hit is not None:
            z = min(y for y in _unit_moves(radices, x) if y in inside)
            return StabilityVerdict(
                False,
                "onestep",
                failing_condition="distance",
                witness_state=State.from_canonical(z, spec.b),
                witness_perturbation=_perturbation_record(spec, z, x, *hit),
                clause_passes={"boundary_states": len(near)},
            )
    return StabilityVerdict(True, "onestep", clause_passes={"boundary_states": len(near)})
