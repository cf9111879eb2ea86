"""Asynchronous best-response updates: single activations, replays and sweeps.

An activation names a class ``(role, type, current strategy)`` rather than an
individual, since same-type same-strategy agents are interchangeable.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .population import PopulationSpec, Role, SpecError, State, Strategy, total_a


class InvalidActivation(ValueError):
    def __init__(self, message: str, index: int | None = None):
        super().__init__(message if index is None else f"activation #{index}: {message}")
        self.index = index


@dataclass(frozen=True)
class Activation:
    role: Role
    type_index: int
    current_strategy: Strategy

    def __str__(self) -> str:
        return f"type-{self.type_index} {self.role.value} playing {self.current_strategy.value}"


@dataclass(frozen=True)
class Trajectory:
    states: tuple[State, ...]
    activations: tuple[Activation, ...]
    a_counts: tuple[int, ...]


@dataclass(frozen=True)
class SweepResult:
    """Final state of a sweep and the A-total right after each type's block."""

    final_state: State
    types: tuple[int, ...]
    stage_a_counts: tuple[int, ...]

    def a_after(self, i: int) -> int:
        return self.stage_a_counts[self.types.index(i)]


def class_size(spec: PopulationSpec, x: State, who: Activation) -> int:
    """How many agents ``who`` could refer to at ``x``."""
    if who.role is Role.ANTI:
        if not 1 <= who.type_index <= spec.b:
            return 0
        k, cap = x.anti[who.type_index - 1], spec.n_anti(who.type_index)
    elif who.role is Role.COOR:
        if not 1 <= who.type_index <= spec.bc:
            return 0
        k, cap = x.coor[who.type_index - 1], spec.n_coor(who.type_index)
    else:
        return 0
    return k if who.current_strategy is Strategy.A else cap - k


def is_valid(spec: PopulationSpec, x: State, who: Activation) -> bool:
    return class_size(spec, x, who) > 0


def valid_activations(spec: PopulationSpec, x: State) -> list[Activation]:
    """All activations available at ``x`` in a fixed order (anti types, then coor types; A before B)."""
    out = []
    for role, count in ((Role.ANTI, spec.b), (Role.COOR, spec.bc)):
        for t in range(1, count + 1):
            for s in (Strategy.A, Strategy.B):
                a = Activation(role, t, s)
                if is_valid(spec, x, a):
                    out.append(a)
    return out


def agent_tends_to_A(spec: PopulationSpec, x: State, who: Activation) -> bool:
    """Best response of the activated agent, written in terms of the total ``A(x)``.

    The agent's own strategy shifts the count of *other* A-players by one,
    which is why the A-playing and B-playing cases differ by one.
    """
    if not is_valid(spec, x, who):
        raise InvalidActivation(f"no {who} at {x}")
    a = total_a(spec, x)
    playing_a = who.current_strategy is Strategy.A
    if who.role is Role.ANTI:
        tau = spec.tau(who.type_index)
        return a <= tau + 1 if playing_a else a <= tau
    tau = spec.tau_c(who.type_index)
    return a >= tau + 1 if playing_a else a >= tau


def _shift(x: State, role: Role, t: int, delta: int) -> State:
    if role is Role.ANTI:
        anti = list(x.anti)
        anti[t - 1] += delta
        return State(tuple(anti), x.coor)
    coor = list(x.coor)
    coor[t - 1] += delta
    return State(x.anti, tuple(coor))


def step(spec: PopulationSpec, x: State, who: Activation) -> State:
    tends_a = agent_tends_to_A(spec, x, who)
    if who.current_strategy is Strategy.A and not tends_a:
        return _shift(x, who.role, who.type_index, -1)
    if who.current_strategy is Strategy.B and tends_a:
        return _shift(x, who.role, who.type_index, +1)
    return x


def replay(spec: PopulationSpec, x0: State, seq: Iterable[Activation]) -> Trajectory:
    states = [x0]
    acts = []
    x = x0
    for k, who in enumerate(seq):
        if not is_valid(spec, x, who):
            raise InvalidActivation(f"no {who} at {x}", index=k)
        x = step(spec, x, who)
        states.append(x)
        acts.append(who)
    return Trajectory(tuple(states), tuple(acts), tuple(total_a(spec, s) for s in states))


def random_trajectory(spec: PopulationSpec, x0: State, steps: int, rng: np.random.Generator) -> Trajectory:
    """Uniform draw over the activations valid at each visited state."""
    states = [x0]
    acts = []
    x = x0
    for _ in range(steps):
        options = valid_activations(spec, x)
        who = options[int(rng.integers(len(options)))]
        x = step(spec, x, who)
        states.append(x)
        acts.append(who)
    return Trajectory(tuple(states), tuple(acts), tuple(total_a(spec, s) for s in states))


def _sweep_type(spec: PopulationSpec, x: State, role: Role, t: int) -> State:
    # every agent of the type is activated once: the A-players first, then the B-players
    k = x.anti[t - 1] if role is Role.ANTI else x.coor[t - 1]
    cap = spec.n_anti(t) if role is Role.ANTI else spec.n_coor(t)
    for strategy, times in ((Strategy.A, k), (Strategy.B, cap - k)):
        for _ in range(times):
            x = step(spec, x, Activation(role, t, strategy))
    return x


def _sweep(spec: PopulationSpec, y: State, role: Role, order: Sequence[int]) -> SweepResult:
    x = y
    counts = []
    for t in order:
        x = _sweep_type(spec, x, role, t)
        counts.append(total_a(spec, x))
    return SweepResult(x, tuple(order), tuple(counts))


def sweep_coor_rl(spec: PopulationSpec, y: State) -> SweepResult:
    """Coordinators in ascending temper order: types 1, 2, ..., b'."""
    return _sweep(spec, y, Role.COOR, range(1, spec.bc + 1))


def sweep_coor_lr(spec: PopulationSpec, y: State) -> SweepResult:
    """Coordinators in descending temper order: types b', ..., 1."""
    return _sweep(spec, y, Role.COOR, range(spec.bc, 0, -1))


def sweep_anti_rl(spec: PopulationSpec, y: State) -> SweepResult:
    """Anticoordinators in ascending temper order: types b, ..., 1."""
    return _sweep(spec, y, Role.ANTI, range(spec.b, 0, -1))


def sweep_anti_lr_from(spec: PopulationSpec, y: State, i: int = 1) -> SweepResult:
    """Anticoordinators of types i, i+1, ..., b in that order."""
    if not 1 <= i <= spec.b:
        raise SpecError(f"start type {i} outside 1..{spec.b}")
    return _sweep(spec, y, Role.ANTI, range(i, spec.b + 1))


def sweep_anti_lr(spec: PopulationSpec, y: State) -> SweepResult:
    return sweep_anti_lr_from(spec, y, 1)


# CSV surfaces -------------------------------------------------------------


def trajectory_header(spec: PopulationSpec) -> list[str]:
    return (
        ["t"]
        + [f"x_{i}" for i in range(1, spec.b + 1)]
        + [f"xp_{j}" for j in range(spec.bc, 0, -1)]
        + ["A"]
    )


def trajectory_csv(spec: PopulationSpec, traj: Trajectory) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(trajectory_header(spec))
    for t, (s, a) in enumerate(zip(traj.states, traj.a_counts)):
        w.writerow([t, *s.canonical(), a])
    return buf.getvalue()


def activation_log_csv(spec: PopulationSpec, traj: Trajectory) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "role", "type", "from", "to"])
    for t, who in enumerate(traj.activations):
        before, after = traj.states[t], traj.states[t + 1]
        moved = total_a(spec, after) - total_a(spec, before)
        to = {1: Strategy.A, -1: Strategy.B, 0: who.current_strategy}[moved]
        w.writerow([t, who.role.value, who.type_index, who.current_strategy.value, to.value])
    return buf.getvalue()


_ROLE_ALIASES = {
    "anticoordinator": Role.ANTI,
    "anti": Role.ANTI,
    "a": Role.ANTI,
    "coordinator": Role.COOR,
    "coor": Role.COOR,
    "c": Role.COOR,
}


def parse_activation_log(text: str) -> list[tuple[Activation, Strategy | None]]:
    """Rows of ``t, role, type, from[, to]``; ``to`` is optional and returned for checking."""
    rows = list(csv.DictReader(io.StringIO(text)))
    out = []
    for k, row in enumerate(rows):
        try:
            role = _ROLE_ALIASES[row["role"].strip().lower()]
            act = Activation(role, int(row["type"]), Strategy(row["from"].strip().upper()))
        except (KeyError, ValueError, AttributeError) as exc:
            raise InvalidActivation(f"malformed log row {row!r}", index=k) from exc
        to = row.get("to")
        out.append((act, Strategy(to.strip().upper()) if to and to.strip() else None))
    return out
