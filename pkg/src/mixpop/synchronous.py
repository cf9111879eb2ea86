"""Synchronous updates: every agent revises at once from the same A-count.

``beta`` is the exact simultaneous best response. ``beta_hat`` drops the
one-agent correction and depends on the state only through ``A(x)``, which
collapses the dynamics to the scalar map ``A -> F(A) = F^c(A) + F^a(A)``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from .invariant import CapExceeded
from .oracle import StateSpace
from .population import PopulationSpec, State, check_state, total_a

DEFAULT_SYNC_CAP = 10**7


def beta(spec: PopulationSpec, x: State) -> State:
    a = total_a(spec, x)
    anti = []
    for i, xi in enumerate(x.anti, start=1):
        tau = spec.tau(i)
        if a <= tau:
            anti.append(spec.n_anti(i))
        elif a == math.floor(tau) + 1:
            anti.append(xi)
        else:
            anti.append(0)
    coor = []
    for j, xj in enumerate(x.coor, start=1):
        tau = spec.tau_c(j)
        if a >= tau + 1:
            coor.append(spec.n_coor(j))
        elif a == math.ceil(tau):
            coor.append(spec.n_coor(j) - xj)
        else:
            coor.append(0)
    return State(tuple(anti), tuple(coor))


def is_rest_point(spec: PopulationSpec, x: State) -> bool:
    """A fixed point of ``beta`` at which no individual agent changes strategy.

    A coordinator type sitting exactly at ``A = ceil(tau')`` flips every agent,
    so a half-split type can leave the counts unchanged while agents swap.
    """
    a = total_a(spec, x)
    if any(a == math.ceil(spec.tau_c(j)) for j in range(1, spec.bc + 1)):
        return False
    return beta(spec, x) == x


def beta_hat(spec: PopulationSpec, x: State) -> State:
    a = total_a(spec, x)
    anti = tuple(spec.n_anti(i) if a <= spec.tau(i) else 0 for i in range(1, spec.b + 1))
    coor = tuple(spec.n_coor(j) if a >= spec.tau_c(j) else 0 for j in range(1, spec.bc + 1))
    return State(anti, coor)


@dataclass(frozen=True)
class ScalarProfile:
    values: tuple[int, ...]
    fc: tuple[int, ...]
    fa: tuple[int, ...]

    def __call__(self, a: int) -> int:
        return self.values[a]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["A", "F_A", "F_c", "F_a"])
        for a, (f, c, an) in enumerate(zip(self.values, self.fc, self.fa)):
            w.writerow([a, f, c, an])
        return buf.getvalue()


def f_profile(spec: PopulationSpec) -> ScalarProfile:
    """Coordinators whose temper is at most A plus anticoordinators whose temper is at least A."""
    fc, fa = [], []
    for a in range(spec.n + 1):
        fc.append(sum(spec.n_coor(j) for j in range(1, spec.bc + 1) if spec.tau_c(j) <= a))
        fa.append(sum(spec.n_anti(i) for i in range(1, spec.b + 1) if spec.tau(i) >= a))
    return ScalarProfile(tuple(c + a for c, a in zip(fc, fa)), tuple(fc), tuple(fa))


def _rotate_min(cycle: list) -> list:
    k = cycle.index(min(cycle))
    return cycle[k:] + cycle[:k]


@dataclass
class CycleReport:
    """Terminal orbits of a deterministic map and which initial condition falls into which."""

    cycles: list[list]
    basins: dict = field(default_factory=dict)
    basin_sizes: list[int] = field(default_factory=list)
    generators: list = field(default_factory=list)

    def basin_of(self, cycle_id: int) -> list:
        return sorted(k for k, v in self.basins.items() if v == cycle_id)


def find_cycles_f(spec: PopulationSpec) -> CycleReport:
    f = f_profile(spec)
    cycles: list[list[int]] = []
    cycle_id: dict[int, int] = {}
    basins: dict[int, int] = {}
    for a0 in range(spec.n + 1):
        path, seen = [], {}
        a = a0
        while a not in seen and a not in cycle_id:
            seen[a] = len(path)
            path.append(a)
            a = f(a)
        if a not in cycle_id:
            cyc = _rotate_min(path[seen[a] :])
            for v in cyc:
                cycle_id[v] = len(cycles)
            cycles.append(cyc)
        basins[a0] = cycle_id[a]
    sizes = [sum(1 for v in basins.values() if v == c) for c in range(len(cycles))]
    gens = [min(k for k, v in basins.items() if v == c) for c in range(len(cycles))]
    return CycleReport(cycles, basins, sizes, gens)


def beta_codes(spec: PopulationSpec, space: StateSpace, coords: np.ndarray) -> np.ndarray:
    """Image of every row of ``coords`` under ``beta``, encoded."""
    a = coords.sum(axis=1)
    out = np.zeros_like(coords)
    for i in range(1, spec.b + 1):
        col, fl, cap = i - 1, math.floor(spec.tau(i)), spec.n_anti(i)
        out[:, col] = np.where(a <= fl, cap, np.where(a == fl + 1, coords[:, col], 0))
    for j in range(1, spec.bc + 1):
        col, ce, cap = spec.b + spec.bc - j, math.ceil(spec.tau_c(j)), spec.n_coor(j)
        out[:, col] = np.where(a >= ce + 1, cap, np.where(a == ce, cap - coords[:, col], 0))
    return out @ np.asarray(space.strides, dtype=np.int64)


def _functional_cycles(nxt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cycle label of every node's eventual cycle, and a mask of the cycle nodes themselves."""
    n = nxt.size
    # pointer doubling: after 2^k >= n jumps every node sits on its terminal cycle
    land = nxt.copy()
    jumps = 1
    while jumps < n:
        land = land[land]
        jumps *= 2
    on_cycle = np.zeros(n, dtype=bool)
    on_cycle[land] = True
    nodes = np.flatnonzero(on_cycle)
    g = sparse.csr_matrix((np.ones(nodes.size, dtype=np.int8), (nodes, nxt[nodes])), shape=(n, n))
    _, labels = connected_components(g, directed=True, connection="weak")
    _, compact = np.unique(labels[land], return_inverse=True)
    return compact, on_cycle


def _orbit(f, x):
    cyc = [x]
    y = f(x)
    while y != x:
        cyc.append(y)
        y = f(y)
    return cyc


def find_cycles_beta(spec: PopulationSpec, initials="all", cap: int = DEFAULT_SYNC_CAP) -> CycleReport:
    """Terminal cycles of ``beta``; cycles are lists of canonical tuples starting at their minimum."""
    if isinstance(initials, str):
        if initials != "all":
            raise ValueError(f"unknown initial-state selector {initials!r}")
        return _cycles_beta_all(spec, cap)
    f = lambda t: beta(spec, State.from_canonical(t, spec.b)).canonical()  # noqa: E731
    cycles: list[list[tuple]] = []
    where: dict[tuple, int] = {}
    basins: dict[tuple, int] = {}
    for x0 in initials:
        check_state(spec, x0)
        seen = set()
        x = x0.canonical()
        while x not in seen and x not in where:
            seen.add(x)
            x = f(x)
        if x not in where:
            cyc = _rotate_min(_orbit(f, x))
            for s in cyc:
                where[s] = len(cycles)
            cycles.append(cyc)
        basins[x0.canonical()] = where[x]
    sizes = [sum(1 for v in basins.values() if v == c) for c in range(len(cycles))]
    gens = [min(k for k, v in basins.items() if v == c) for c in range(len(cycles))]
    return CycleReport(cycles, basins, sizes, gens)


def _cycles_beta_all(spec: PopulationSpec, cap: int) -> CycleReport:
    space = StateSpace(spec)
    if space.size > cap:
        raise CapExceeded(f"state space of {space.size} states exceeds the cap of {cap}")
    coords = space.decode_all()
    nxt = beta_codes(spec, space, coords)
    labels, on_cycle = _functional_cycles(nxt)
    # discovery order: by the smallest node in each basin
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first, kind="stable")
    relabel = np.empty_like(order)
    relabel[order] = np.arange(order.size)
    node_cycle = relabel[labels]
    sizes = np.bincount(node_cycle).tolist()
    gens = [tuple(int(v) for v in coords[first[c]]) for c in order]
    cycles = []
    for c in order:
        start = int(np.flatnonzero(on_cycle & (labels == c))[0])
        cyc = _orbit(lambda v: int(nxt[v]), start)
        cycles.append([tuple(int(v) for v in coords[k]) for k in _rotate_min(cyc)])
    report = CycleReport(cycles, {}, sizes, gens)
    report.node_cycle = node_cycle
    return report


def a_projection(cycle: list[tuple]) -> frozenset[int]:
    return frozenset(sum(s) for s in cycle)


def cycle_report_json(report: CycleReport, *, states: bool) -> dict:
    out = []
    for k, cyc in enumerate(report.cycles):
        entry = {
            "id": k,
            "length": len(cyc),
            "basin_size": report.basin_sizes[k],
            "generator": list(report.generators[k]) if states else report.generators[k],
        }
        if states:
            entry["a_projection"] = sorted(a_projection(cyc))
            entry["states"] = [list(s) for s in cyc]
        else:
            entry["values"] = cyc
            entry["basin"] = report.basin_of(k)
        out.append(entry)
    return {"cycles": out}
