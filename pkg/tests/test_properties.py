"""Seeded checks on small random populations."""

import numpy as np
import pytest

from mixpop import dynamics as dyn
from mixpop import invariant as inv
from mixpop import oracle as orc
from mixpop import stability as st
from mixpop.population import State, total_a, validate_spec
from mixpop.testing import random_spec


def _spec(seed, **kw):
    rng = np.random.Generator(np.random.Philox(seed))
    spec = random_spec(rng, max_types=3, max_count=3, **kw)
    if not validate_spec(spec).ok:
        pytest.skip("drawn population violates an ordering requirement")
    return spec, rng


def _sets(spec):
    return [cs for cs in inv.characterize(spec) if cs.members]


@pytest.mark.parametrize("seed", range(30))
def test_characterized_sets_are_closed(seed):
    spec, _ = _spec(1000 + seed)
    for cs in _sets(spec):
        res = orc.is_invariant(spec, cs.members)
        assert res.closed, (str(cs.benchmarks), res.successor)


@pytest.mark.parametrize("seed", range(20))
def test_each_set_holds_a_terminal_class(seed):
    spec, rng = _spec(2000 + seed)
    for cs in _sets(spec):
        start = cs.members[int(rng.integers(len(cs.members)))]
        reach = {x.canonical() for x in orc.reach_closure(spec, start)}
        assert reach <= {m.canonical() for m in cs.members}


def test_candidate_need_not_be_minimal():
    spec, _ = _spec(2002)
    big, small = _sets(spec)
    assert len(big.members) == 9 and small.members == [orc.reach_closure(spec, small.members[0])[0]]
    assert set(small.members) < set(big.members)
    report = orc.minimal_invariant_sets(spec, orc.build_graph(spec), [big, small])
    assert [(len(m.states), m.relation) for m in report.sets] == [(1, "contained")]


@pytest.mark.parametrize("seed", range(20))
def test_walks_respect_a_bounds(seed):
    spec, rng = _spec(3000 + seed)
    for cs in _sets(spec):
        lo, hi = inv.a_bounds(spec, cs.benchmarks)
        traj = dyn.random_trajectory(spec, cs.members[0], 200, rng)
        assert lo <= min(traj.a_counts) and max(traj.a_counts) <= hi
        assert traj.a_counts[-1] == total_a(spec, traj.states[-1])


@pytest.mark.parametrize("seed", range(40))
def test_stability_methods_agree(seed):
    spec, _ = _spec(4000 + seed, distinct_floors=True)
    for cs in _sets(spec):
        brute = st.verify_one_step(spec, cs.members).stable
        assert st.check_proposition(spec, cs.benchmarks, cs.members).stable == brute
        if st.theorem_guards_hold(spec, cs.benchmarks):
            assert st.check_theorem(spec, cs.benchmarks, cs.members).stable == brute


@pytest.mark.parametrize("seed", range(20))
def test_membership_matches_box_scan(seed):
    spec, _ = _spec(5000 + seed)
    for cs in _sets(spec):
        found = {m.canonical() for m in cs.members}
        for x in orc.reach_closure(spec, cs.members[0]):
            assert inv.membership(spec, cs.benchmarks, x)
            assert x.canonical() in found
