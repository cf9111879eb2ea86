"""Frozen Example-1 trajectories and sets used by several test modules.

States are canonical 9-tuples ``(x_1..x_4, x'_5..x'_1)``.
"""

from mixpop.dynamics import Activation
from mixpop.population import Role, State, Strategy

# first oscillating set: x(1)..x(17), the active type after each state, and A
TABLE1_STATES = [
    (4, 1, 1, 0, 0, 0, 0, 0, 3),
    (4, 2, 1, 0, 0, 0, 0, 0, 3),
    (4, 2, 1, 0, 0, 0, 0, 1, 3),
    (4, 1, 1, 0, 0, 0, 0, 1, 3),
    (4, 1, 1, 0, 0, 0, 0, 0, 3),
    (4, 2, 1, 0, 0, 0, 0, 0, 3),
    (4, 2, 1, 0, 0, 0, 0, 1, 3),
    (4, 2, 1, 0, 0, 0, 0, 2, 3),
    (4, 1, 1, 0, 0, 0, 0, 2, 3),
    (4, 0, 1, 0, 0, 0, 0, 2, 3),
    (4, 0, 0, 0, 0, 0, 0, 2, 3),
    (4, 0, 0, 0, 0, 0, 0, 1, 3),
    (4, 0, 0, 0, 0, 0, 0, 0, 3),
    (4, 0, 0, 1, 0, 0, 0, 0, 3),
    (4, 1, 0, 1, 0, 0, 0, 0, 3),
    (4, 1, 0, 0, 0, 0, 0, 0, 3),
    (4, 1, 1, 0, 0, 0, 0, 0, 3),
]
TABLE1_TYPES = "a2 c2 a2 c2 a2 c2 c2 a2 a2 a3 c2 c2 a4 a2 a4 a3".split()
TABLE1_A = [9, 10, 11, 10, 9, 10, 11, 12, 11, 10, 9, 8, 7, 8, 9, 8, 9]

# second oscillating set: x(0)..x(4)
TABLE2_STATES = [
    (4, 0, 0, 0, 0, 0, 10, 2, 3),
    (4, 0, 0, 0, 0, 1, 10, 2, 3),
    (3, 0, 0, 0, 0, 1, 10, 2, 3),
    (3, 0, 0, 0, 0, 0, 10, 2, 3),
    (4, 0, 0, 0, 0, 0, 10, 2, 3),
]
TABLE2_TYPES = "c4 a1 c4 a1".split()
TABLE2_A = [19, 20, 19, 18, 19]

X_STAR = (0, 0, 0, 0, 15, 1, 10, 2, 3)


def state(t: tuple) -> State:
    return State.from_canonical(t, 4)


def activations(types: list[str], states: list[tuple]) -> list[Activation]:
    """Activation classes for a listed path.

    The tables name only the active type, so the current strategy is read off
    the A-count: it drops when an A-player switches and rises when a B-player does.
    """
    out = []
    for code, before, after in zip(types, states, states[1:]):
        role = Role.ANTI if code[0] == "a" else Role.COOR
        current = Strategy.A if sum(after) < sum(before) else Strategy.B
        out.append(Activation(role, int(code[1:]), current))
    return out
