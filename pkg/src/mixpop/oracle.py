"""Exhaustive transition graph of the asynchronous dynamics.

Nodes are states in mixed-radix encoding over the canonical coordinate order
``(x_1..x_b, x'_{b'}..x'_1)`` with the last coordinate varying fastest, so node
order coincides with lexicographic order of canonical tuples. An edge joins
``x`` to ``step(x, a)`` for every activation ``a`` valid at ``x``; no-op
activations give self-loops.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from . import dynamics
from .invariant import CapExceeded, CandidateSet
from .population import PopulationSpec, State, check_state

DEFAULT_GRAPH_CAP = 10**7


class StateSpace:
    def __init__(self, spec: PopulationSpec):
        self.spec = spec
        self.radices = spec.radices()
        self.size = math.prod(self.radices)
        strides = [1] * len(self.radices)
        for k in range(len(self.radices) - 2, -1, -1):
            strides[k] = strides[k + 1] * self.radices[k + 1]
        self.strides = tuple(strides)

    def encode(self, x: State) -> int:
        return sum(c * s for c, s in zip(x.canonical(), self.strides))

    def decode(self, code: int) -> State:
        return State.from_canonical(np.unravel_index(code, self.radices), self.spec.b)

    def decode_all(self, codes=None) -> np.ndarray:
        """Canonical coordinates as an ``(m, b+b')`` integer array."""
        if codes is None:
            codes = np.arange(self.size, dtype=np.int64)
        return np.stack(np.unravel_index(codes, self.radices), axis=1).astype(np.int64)

    def coordinate(self, role_is_anti: bool, t: int) -> int:
        """Column of type ``t`` in the canonical layout."""
        b, bc = self.spec.b, self.spec.bc
        return t - 1 if role_is_anti else b + (bc - t)


def _check_cap(space: StateSpace, cap: int) -> None:
    if space.size > cap:
        raise CapExceeded(f"state space of {space.size} states exceeds the cap of {cap}")


def switch_masks(spec: PopulationSpec, coords: np.ndarray, a: np.ndarray):
    """Yield ``(column, A-players switch, B-players switch)`` for every type, with integer thresholds."""
    for i in range(1, spec.b + 1):
        fl = math.floor(spec.tau(i))
        # A-player leaves when A > tau+1; B-player joins when A <= tau
        yield i - 1, spec.n_anti(i), a > fl + 1, a <= fl
    for j in range(1, spec.bc + 1):
        ce = math.ceil(spec.tau_c(j))
        # A-player leaves when A < tau'+1; B-player joins when A >= tau'
        yield spec.b + spec.bc - j, spec.n_coor(j), a <= ce, a >= ce


@dataclass
class TransitionGraph:
    space: StateSpace
    adjacency: sparse.csr_matrix

    @property
    def n_nodes(self) -> int:
        return self.space.size

    def successors(self, code: int) -> np.ndarray:
        a = self.adjacency
        return a.indices[a.indptr[code] : a.indptr[code + 1]]

    def dump(self, path: str | Path) -> tuple[Path, Path]:
        """Binary adjacency (``.npz``) and a JSON sidecar describing the encoding."""
        path = Path(path)
        npz = path.with_suffix(".npz")
        np.savez_compressed(npz, indptr=self.adjacency.indptr, indices=self.adjacency.indices)
        sidecar = path.with_suffix(".json")
        spec = self.space.spec
        sidecar.write_text(
            json.dumps(
                {
                    "nodes": self.n_nodes,
                    "edges": int(self.adjacency.nnz),
                    "radices": list(self.space.radices),
                    "strides": list(self.space.strides),
                    "coordinate_order": [f"x_{i}" for i in range(1, spec.b + 1)]
                    + [f"xp_{j}" for j in range(spec.bc, 0, -1)],
                    "encoding": "node = sum(coordinate[k] * strides[k]); last coordinate varies fastest",
                    "adjacency": "CSR arrays indptr/indices; successors of node v are indices[indptr[v]:indptr[v+1]]",
                },
                indent=2,
            )
            + "\n"
        )
        return npz, sidecar


def build_graph(spec: PopulationSpec, cap: int = DEFAULT_GRAPH_CAP) -> TransitionGraph:
    space = StateSpace(spec)
    _check_cap(space, cap)
    codes = np.arange(space.size, dtype=np.int64)
    coords = space.decode_all(codes)
    a = coords.sum(axis=1)
    idx_dtype = np.int32 if space.size < 2**31 else np.int64
    src, dst = [], []
    has_noop = np.zeros(space.size, dtype=bool)
    for col, cap_k, a_leave, b_join in switch_masks(spec, coords, a):
        k = coords[:, col]
        stride = space.strides[col]
        has_a, has_b = k > 0, k < cap_k
        down = has_a & a_leave
        up = has_b & b_join
        has_noop |= (has_a & ~a_leave) | (has_b & ~b_join)
        src += [codes[down], codes[up]]
        dst += [codes[down] - stride, codes[up] + stride]
    src.append(codes[has_noop])
    dst.append(codes[has_noop])
    rows = np.concatenate(src).astype(idx_dtype)
    cols = np.concatenate(dst).astype(idx_dtype)
    adj = sparse.csr_matrix(
        (np.ones(rows.size, dtype=np.int8), (rows, cols)), shape=(space.size, space.size)
    )
    adj.sum_duplicates()
    adj.sort_indices()
    return TransitionGraph(space, adj)


def terminal_classes(graph: TransitionGraph) -> list[np.ndarray]:
    """Strong components with no edge leaving them, ordered by their smallest node."""
    n_comp, labels = connected_components(graph.adjacency, directed=True, connection="strong")
    coo = graph.adjacency.tocoo()
    leaving = labels[coo.row] != labels[coo.col]
    open_comp = np.zeros(n_comp, dtype=bool)
    open_comp[labels[coo.row[leaving]]] = True
    closed = np.flatnonzero(~open_comp)
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(n_comp + 1))
    groups = [np.sort(order[bounds[c] : bounds[c + 1]]) for c in closed]
    groups.sort(key=lambda g: int(g[0]))
    return groups


@dataclass
class MinimalSet:
    states: list[State]
    kind: str
    matched_candidate: str | None = None
    relation: str | None = None

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "size": len(self.states),
            "matched_candidate": self.matched_candidate,
            "relation": self.relation,
            "states": [list(s.canonical()) for s in self.states],
        }


@dataclass
class MinimalSetReport:
    sets: list[MinimalSet]
    n_nodes: int
    n_edges: int

    def to_json(self) -> dict:
        return {"nodes": self.n_nodes, "edges": self.n_edges, "sets": [s.to_json() for s in self.sets]}


def minimal_invariant_sets(
    spec: PopulationSpec,
    graph: TransitionGraph | None = None,
    candidates: list[CandidateSet] | None = None,
    cap: int = DEFAULT_GRAPH_CAP,
) -> MinimalSetReport:
    graph = graph or build_graph(spec, cap)
    out = []
    for group in terminal_classes(graph):
        states = [graph.space.decode(int(c)) for c in group]
        ms = MinimalSet(states, "equilibrium" if len(states) == 1 else "oscillatory")
        if candidates:
            ms.matched_candidate, ms.relation = match_candidate(states, candidates)
        out.append(ms)
    return MinimalSetReport(out, graph.n_nodes, int(graph.adjacency.nnz))


def match_candidate(states: list[State], candidates: list[CandidateSet]) -> tuple[str | None, str | None]:
    mine = {s.canonical() for s in states}
    for cs in candidates:
        if cs.members is None:
            continue
        theirs = {m.canonical() for m in cs.members}
        if mine == theirs:
            return str(cs.benchmarks), "equal"
        if mine <= theirs:
            return str(cs.benchmarks), "contained"
    return None, None


@dataclass(frozen=True)
class ClosureResult:
    closed: bool
    state: State | None = None
    activation: dynamics.Activation | None = None
    successor: State | None = None


def is_invariant(spec: PopulationSpec, members) -> ClosureResult:
    """Check that no single activation leads out of ``members``; reports the first escape."""
    inside = {m.canonical() for m in members}
    for x in sorted(members, key=lambda s: s.canonical()):
        for who in dynamics.valid_activations(spec, x):
            y = dynamics.step(spec, x, who)
            if y.canonical() not in inside:
                return ClosureResult(False, x, who, y)
    return ClosureResult(True)


def reach_closure(spec: PopulationSpec, x0: State, cap: int = DEFAULT_GRAPH_CAP) -> list[State]:
    """Every state reachable from ``x0`` (itself included), in canonical order."""
    check_state(spec, x0)
    seen = {x0.canonical(): x0}
    todo = deque([x0])
    while todo:
        x = todo.popleft()
        for who in dynamics.valid_activations(spec, x):
            y = dynamics.step(spec, x, who)
            key = y.canonical()
            if key not in seen:
                if len(seen) >= cap:
                    raise CapExceeded(f"reachable set from {x0} exceeds {cap} states")
                seen[key] = y
                todo.append(y)
    return [seen[k] for k in sorted(seen)]


def tarjan_scc(n: int, successors) -> list[int]:
    """Strong component label per node, using an explicit stack.

    ``successors(v)`` returns an iterable of node ids. Labels are assigned in
    the order components are completed (reverse topological order).
    """
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    label = [-1] * n
    stack: list[int] = []
    counter = 0
    n_comp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, iter(successors(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter(successors(w))))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    label[w] = n_comp
                    if w == v:
                        break
                n_comp += 1
    return label
