"""Population model: agent classes, population specs, states and benchmarks.

Tempers are kept as :class:`fractions.Fraction` throughout. Every decision in
the dynamics compares an integer head-count against a temper, so the exact
integer thresholds ``floor(tau)`` / ``ceil(tau)`` are derived once from the
rational value and never via floating point.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence


class SpecError(ValueError):
    """Raised when a population spec is malformed or unsupported for an operation."""


class Role(str, enum.Enum):
    ANTI = "anticoordinator"
    COOR = "coordinator"
    CONSTANT = "constant"


class Strategy(str, enum.Enum):
    A = "A"
    B = "B"


def to_fraction(value) -> Fraction:
    """Parse ints, ``"p/q"`` strings and Fractions. Floats are refused."""
    if isinstance(value, bool):
        raise SpecError(f"not a rational: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise SpecError(f"not a rational: {value!r}") from exc
    raise SpecError(f"not a rational (floats are not accepted): {value!r}")


@dataclass(frozen=True)
class PayoffMatrix:
    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction

    @classmethod
    def of(cls, a, b, c, d) -> "PayoffMatrix":
        return cls(*(to_fraction(v) for v in (a, b, c, d)))


@dataclass(frozen=True)
class ClassDescriptor:
    """Role and temper derived from a payoff matrix (no head-count attached).

    ``strategy`` is only set for ``Role.CONSTANT`` descriptors.
    """

    role: Role
    temper: Fraction | None
    strategy: Strategy | None = None


@dataclass(frozen=True)
class AgentClass:
    role: Role
    temper: Fraction
    count: int


def derive_class(m: PayoffMatrix, n: int) -> ClassDescriptor:
    """Classify an agent with payoff matrix ``m`` in a population of ``n``.

    The best response is ``A`` iff ``sigma * A_j >= gamma * (n - 1)`` where
    ``A_j`` counts the *other* A-players, ``sigma = a - c + d - b`` and
    ``gamma = d - b``. The temper is therefore ``gamma * (n - 1) / sigma``.

    Degenerate agents whose choice never depends on ``A_j`` (``sigma == 0`` or a
    temper outside ``[0, n - 1]``) are mapped to an exact equivalent: a
    constant-A agent becomes a coordinator of temper 0, a constant-B agent
    gets ``Role.CONSTANT`` since no in-range class reproduces it.
    """
    if n < 2:
        raise SpecError("population size must be at least 2")
    sigma = m.a - m.c + m.d - m.b
    gamma = m.d - m.b
    constant_a = ClassDescriptor(Role.COOR, Fraction(0))
    constant_b = ClassDescriptor(Role.CONSTANT, None, Strategy.B)
    if sigma == 0:
        return constant_a if gamma <= 0 else constant_b
    temper = gamma * (n - 1) / sigma
    if sigma > 0:
        if temper < 0:
            return constant_a
        if temper > n - 1:
            return constant_b
        return ClassDescriptor(Role.COOR, temper)
    if temper < 0:
        return constant_b
    if temper > n - 1:
        return constant_a
    return ClassDescriptor(Role.ANTI, temper)


@dataclass(frozen=True)
class PopulationSpec:
    """Anticoordinating types ``1..b`` and coordinating types ``1..b'``.

    ``anti[i - 1]`` is anticoordinating type ``i`` (tempers descending) and
    ``coor[j - 1]`` coordinating type ``j`` (tempers ascending).
    ``constant_b`` counts agents that always play B; they only enter ``n``.
    """

    anti: tuple[AgentClass, ...]
    coor: tuple[AgentClass, ...]
    constant_b: int = 0
    n: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "anti", tuple(self.anti))
        object.__setattr__(self, "coor", tuple(self.coor))
        total = sum(c.count for c in self.anti) + sum(c.count for c in self.coor)
        object.__setattr__(self, "n", total + self.constant_b)

    @classmethod
    def from_lists(cls, anti_tempers, anti_counts, coor_tempers, coor_counts, constant_b=0):
        """Build from parallel lists; coordinator lists are indexed by type 1..b'."""
        if len(anti_tempers) != len(anti_counts) or len(coor_tempers) != len(coor_counts):
            raise SpecError("temper and count lists differ in length")
        anti = tuple(AgentClass(Role.ANTI, to_fraction(t), int(c)) for t, c in zip(anti_tempers, anti_counts))
        coor = tuple(AgentClass(Role.COOR, to_fraction(t), int(c)) for t, c in zip(coor_tempers, coor_counts))
        return cls(anti, coor, constant_b)

    @property
    def b(self) -> int:
        return len(self.anti)

    @property
    def bc(self) -> int:
        return len(self.coor)

    # 1-based accessors with the sentinel conventions for out-of-range indices.
    def tau(self, i: int) -> Fraction:
        if i == 0:
            return Fraction(self.n)
        if i == self.b + 1:
            return Fraction(-2)
        return self.anti[i - 1].temper

    def tau_c(self, j: int) -> Fraction:
        if j == 0:
            return Fraction(-2)
        if j == self.bc + 1:
            return Fraction(self.n + 2)
        return self.coor[j - 1].temper

    def n_anti(self, i: int) -> int:
        return self.anti[i - 1].count

    def n_coor(self, j: int) -> int:
        return self.coor[j - 1].count

    def anti_prefix(self, i: int) -> int:
        """Number of anticoordinators of types 1..i."""
        return sum(c.count for c in self.anti[:i])

    def coor_prefix(self, j: int) -> int:
        """Number of coordinators of types 1..j."""
        return sum(c.count for c in self.coor[:j])

    def radices(self) -> tuple[int, ...]:
        """Per-coordinate ranges ``n_k + 1`` in canonical order."""
        return tuple(c.count + 1 for c in self.anti) + tuple(c.count + 1 for c in reversed(self.coor))

    def state_space_size(self) -> int:
        return math.prod(self.radices())

    def to_json(self) -> dict:
        def enc(cls_):
            t = cls_.temper
            return {"temper": str(t) if t.denominator != 1 else int(t), "count": cls_.count}

        out = {"anticoordinators": [enc(c) for c in self.anti], "coordinators": [enc(c) for c in self.coor]}
        if self.constant_b:
            out["constant_b"] = self.constant_b
        return out


@dataclass(frozen=True)
class State:
    """A-player counts per type: ``anti[i - 1] = x_i``, ``coor[j - 1] = x'_j``."""

    anti: tuple[int, ...]
    coor: tuple[int, ...]

    @classmethod
    def from_canonical(cls, values: Sequence[int], b: int) -> "State":
        """Inverse of :meth:`canonical`: ``(x_1..x_b, x'_b'..x'_1)``."""
        values = tuple(int(v) for v in values)
        return cls(values[:b], tuple(reversed(values[b:])))

    def canonical(self) -> tuple[int, ...]:
        return self.anti + tuple(reversed(self.coor))

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.anti)) + "|" + ",".join(map(str, reversed(self.coor))) + ")"


def parse_state(text: str, spec: PopulationSpec) -> State:
    """Parse ``"x1,..,xb|x'b',..,x'1"``; a plain comma list is accepted too."""
    text = text.strip().strip("()")
    if "|" in text:
        left, right = text.split("|", 1)
        anti = [int(v) for v in left.split(",") if v.strip()]
        coor_desc = [int(v) for v in right.split(",") if v.strip()]
        values = anti + coor_desc
    else:
        values = [int(v) for v in text.split(",") if v.strip()]
    if len(values) != spec.b + spec.bc:
        raise SpecError(f"state has {len(values)} entries, expected {spec.b + spec.bc}")
    x = State.from_canonical(values, spec.b)
    check_state(spec, x)
    return x


def check_state(spec: PopulationSpec, x: State) -> None:
    if len(x.anti) != spec.b or len(x.coor) != spec.bc:
        raise SpecError("state shape does not match the population")
    for i, v in enumerate(x.anti, 1):
        if not 0 <= v <= spec.n_anti(i):
            raise SpecError(f"x_{i}={v} outside [0, {spec.n_anti(i)}]")
    for j, v in enumerate(x.coor, 1):
        if not 0 <= v <= spec.n_coor(j):
            raise SpecError(f"x'_{j}={v} outside [0, {spec.n_coor(j)}]")


def zero_state(spec: PopulationSpec) -> State:
    return State((0,) * spec.b, (0,) * spec.bc)


def full_state(spec: PopulationSpec) -> State:
    return State(tuple(c.count for c in spec.anti), tuple(c.count for c in spec.coor))


def total_a(spec: PopulationSpec, x: State) -> int:
    return sum(x.anti) + sum(x.coor)


@dataclass(frozen=True)
class BenchmarkQuad:
    """``(p, q, q', p')``: types ``1..p`` / ``1..p'`` are A-fixed, ``q..b`` / ``q'..b'`` B-fixed."""

    p: int
    q: int
    q_c: int
    p_c: int

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.p, self.q, self.q_c, self.p_c)

    def __str__(self) -> str:
        return "I_{%d,%d,%d,%d}" % self.as_tuple()


def in_omega(spec: PopulationSpec, bm: BenchmarkQuad) -> bool:
    return (
        0 <= bm.p <= spec.b
        and bm.p + 1 <= bm.q <= spec.b + 1
        and 0 <= bm.p_c <= spec.bc
        and bm.p_c + 1 <= bm.q_c <= spec.bc + 1
    )


def check_omega(spec: PopulationSpec, bm: BenchmarkQuad) -> None:
    if not in_omega(spec, bm):
        raise SpecError(f"{bm} is not a valid benchmark quadruple for b={spec.b}, b'={spec.bc}")


def in_box(spec: PopulationSpec, bm: BenchmarkQuad, x: State) -> bool:
    """Membership in the box of states whose fixed types are saturated / empty."""
    return (
        all(x.anti[i - 1] == spec.n_anti(i) for i in range(1, bm.p + 1))
        and all(x.anti[i - 1] == 0 for i in range(bm.q, spec.b + 1))
        and all(x.coor[j - 1] == spec.n_coor(j) for j in range(1, bm.p_c + 1))
        and all(x.coor[j - 1] == 0 for j in range(bm.q_c, spec.bc + 1))
    )


def tight_benchmarks(spec: PopulationSpec, x: State) -> BenchmarkQuad:
    """The smallest box containing ``x``: longest full prefixes, shortest zero suffixes."""

    def full_prefix(values, caps):
        k = 0
        while k < len(values) and values[k] == caps[k]:
            k += 1
        return k

    def zero_suffix_start(values):
        k = len(values)
        while k > 0 and values[k - 1] == 0:
            k -= 1
        return k + 1

    anti_caps = [c.count for c in spec.anti]
    coor_caps = [c.count for c in spec.coor]
    return BenchmarkQuad(
        full_prefix(x.anti, anti_caps),
        zero_suffix_start(x.anti),
        zero_suffix_start(x.coor),
        full_prefix(x.coor, coor_caps),
    )


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...]
    stability_assumption: bool
    has_constant_agents: bool

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "violations": list(self.violations),
            "stability_assumption": self.stability_assumption,
            "has_constant_agents": self.has_constant_agents,
        }


def validate_spec(spec: PopulationSpec) -> ValidationReport:
    """Check every structural invariant; never raises.

    ``stability_assumption`` reports whether the anticoordinator tempers have
    pairwise distinct floors, which the stability analysis requires.
    """
    problems: list[str] = []
    if spec.b < 1:
        problems.append("at least one anticoordinating type is required")
    if spec.bc < 1:
        problems.append("at least one coordinating type is required")
    if spec.n < 2:
        problems.append("population size must be at least 2")
    for cls_ in spec.anti + spec.coor:
        if not isinstance(cls_.count, int) or cls_.count < 1:
            problems.append(f"{cls_.role.value} with temper {cls_.temper} has count {cls_.count} < 1")
        if not 0 <= cls_.temper <= spec.n - 1:
            problems.append(f"{cls_.role.value} temper {cls_.temper} outside [0, n-1] = [0, {spec.n - 1}]")
    for a, b in zip(spec.anti, spec.anti[1:]):
        if not a.temper > b.temper:
            problems.append("anticoordinator tempers not strictly descending")
            break
    for a, b in zip(spec.coor, spec.coor[1:]):
        if not a.temper < b.temper:
            problems.append("coordinator tempers not strictly ascending by type")
            break
    if spec.constant_b < 0:
        problems.append("constant_b must be non-negative")
    floors = [math.floor(c.temper) for c in spec.anti]
    assumption = all(f_next < f for f, f_next in zip(floors, floors[1:]))
    return ValidationReport(tuple(problems), assumption, spec.constant_b > 0)


def require_valid(spec: PopulationSpec, *, analytic: bool = False) -> None:
    report = validate_spec(spec)
    if not report.ok:
        raise SpecError("; ".join(report.violations))
    if analytic and report.has_constant_agents:
        raise SpecError(
            "constant-strategy agents are present; the invariant-set and stability "
            "analyses only cover coordinators and anticoordinators"
        )


def _merge(classes: Iterable[AgentClass]) -> list[AgentClass]:
    merged: dict[Fraction, AgentClass] = {}
    for c in classes:
        if c.temper in merged:
            prev = merged[c.temper]
            merged[c.temper] = AgentClass(c.role, c.temper, prev.count + c.count)
        else:
            merged[c.temper] = c
    return list(merged.values())


def spec_from_json(data: dict) -> PopulationSpec:
    """Build a spec from the population file layout.

    Groups may give ``temper`` directly or ``payoffs: [a, b, c, d]``; payoff
    groups are classified with :func:`derive_class` and filed under their
    derived role. Same-role same-temper groups are merged. When any payoff
    group is present, each role list is sorted into type order.
    """
    if not isinstance(data, dict) or "anticoordinators" not in data or "coordinators" not in data:
        raise SpecError('population file needs "anticoordinators" and "coordinators" lists')
    groups = []
    for key, role in (("anticoordinators", Role.ANTI), ("coordinators", Role.COOR)):
        if not isinstance(data[key], list):
            raise SpecError(f'"{key}" must be a list')
        for g in data[key]:
            if not isinstance(g, dict) or "count" not in g:
                raise SpecError(f"group without count in {key}: {g!r}")
            count = g["count"]
            if isinstance(count, bool) or not isinstance(count, int):
                raise SpecError(f"count must be an integer: {count!r}")
            groups.append((role, g, count))
    constant_b = int(data.get("constant_b", 0))
    n = sum(c for _, _, c in groups) + constant_b
    anti: list[AgentClass] = []
    coor: list[AgentClass] = []
    derived = False
    for role, g, count in groups:
        if "payoffs" in g:
            derived = True
            if len(g["payoffs"]) != 4:
                raise SpecError("payoffs must list [a, b, c, d]")
            desc = derive_class(PayoffMatrix.of(*g["payoffs"]), n)
            if desc.role is Role.CONSTANT:
                constant_b += count
                continue
            role, temper = desc.role, desc.temper
        elif "temper" in g:
            temper = to_fraction(g["temper"])
        else:
            raise SpecError(f"group needs a temper or payoffs: {g!r}")
        (anti if role is Role.ANTI else coor).append(AgentClass(role, temper, count))
    anti, coor = _merge(anti), _merge(coor)
    if derived:
        anti.sort(key=lambda c: -c.temper)
        coor.sort(key=lambda c: c.temper)
    return PopulationSpec(tuple(anti), tuple(coor), constant_b)


def load_spec(path: str | Path) -> PopulationSpec:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON ({exc})") from exc
    return spec_from_json(data)


def example1() -> PopulationSpec:
    """42 agents: anticoordinator tempers (18, 9, 8, 7), coordinator tempers (5, 10, 14, 19, 25)."""
    return PopulationSpec.from_lists([18, 9, 8, 7], [4, 3, 1, 3], [5, 10, 14, 19, 25], [3, 2, 10, 1, 15])
