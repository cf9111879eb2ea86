import json

import numpy as np
import pytest
from scipy.sparse.csgraph import connected_components

from conftest import S
from example_data import TABLE1_STATES, TABLE2_STATES, X_STAR
from mixpop import invariant as inv
from mixpop import oracle as orc
from mixpop import synchronous as sy
from mixpop.population import PopulationSpec, State
from mixpop.testing import random_spec


@pytest.fixture(scope="module")
def graph(spec):
    return orc.build_graph(spec)


@pytest.fixture(scope="module")
def report(spec, graph):
    return orc.minimal_invariant_sets(spec, graph, inv.characterize(spec))


class TestEncoding:
    def test_size_and_order(self, spec):
        space = orc.StateSpace(spec)
        assert space.size == 675_840
        assert space.strides[-1] == 1
        rng = np.random.Generator(np.random.Philox(5))
        codes = np.sort(rng.integers(space.size, size=300))
        states = [space.decode(int(c)) for c in codes]
        assert [space.encode(x) for x in states] == codes.tolist()
        keys = [x.canonical() for x in states]
        assert keys == sorted(keys)

    def test_decode_all(self, spec):
        space = orc.StateSpace(spec)
        rows = space.decode_all(np.array([0, space.size - 1]))
        assert rows[0].tolist() == [0] * 9
        assert rows[1].tolist() == list(S(4, 3, 1, 3, 15, 1, 10, 2, 3).canonical())
        assert space.coordinate(True, 1) == 0
        assert space.coordinate(False, 1) == 8


def test_smallest_model_by_hand():
    spec = PopulationSpec.from_lists([1], [1], [0], [1])
    g = orc.build_graph(spec)
    succ = {v: g.successors(v).tolist() for v in range(g.n_nodes)}
    # nodes (x | x'): 0=(0|0) 1=(0|1) 2=(1|0) 3=(1|1)
    assert succ == {0: [1, 2], 1: [1, 3], 2: [2, 3], 3: [3]}
    assert [c.tolist() for c in orc.terminal_classes(g)] == [[3]]


class TestGraph:
    def test_counts(self, graph):
        assert graph.n_nodes == 675_840
        assert graph.adjacency.nnz == 5_111_551

    def test_unit_moves(self, graph):
        coo = graph.adjacency.tocoo()
        space = graph.space
        d = np.abs(space.decode_all(coo.row.astype(np.int64)) - space.decode_all(coo.col.astype(np.int64))).sum(axis=1)
        assert d.max() == 1

    def test_every_node_has_a_successor(self, graph):
        assert np.diff(graph.adjacency.indptr).min() >= 1

    def test_cap(self, spec):
        with pytest.raises(inv.CapExceeded):
            orc.build_graph(spec, cap=1000)

    def test_dump(self, graph, tmp_path):
        npz, side = graph.dump(tmp_path / "g")
        data = np.load(npz)
        assert np.array_equal(data["indptr"], graph.adjacency.indptr)
        meta = json.loads(side.read_text())
        assert meta["nodes"] == 675_840 and meta["edges"] == 5_111_551
        assert meta["coordinate_order"][4] == "xp_5"


class TestTerminalClasses:
    def test_three_sets(self, spec, report):
        sizes = sorted(len(m.states) for m in report.sets)
        assert sizes == [1, 4, 36]
        assert all(m.relation == "equal" for m in report.sets)
        assert {m.matched_candidate for m in report.sets} == {"I_{1,5,3,1}", "I_{0,2,5,3}", "I_{0,1,6,5}"}

    def test_kinds(self, report):
        eq = [m for m in report.sets if m.kind == "equilibrium"]
        assert [s.canonical() for s in eq[0].states] == [X_STAR]

    def test_singletons_are_rest_points(self, spec, report):
        singles = {m.states[0].canonical() for m in report.sets if len(m.states) == 1}
        fixed = [c[0] for c in sy.find_cycles_beta(spec, "all").cycles if len(c) == 1]
        rest = {x for x in fixed if sy.is_rest_point(spec, State.from_canonical(x, 4))}
        assert singles == rest
        # beta has two more fixed points, where half of a coordinator type swaps with the other half
        assert len(fixed) == 3

    def test_classes_are_minimal(self, spec, report):
        for m in report.sets:
            for x in m.states[:5]:
                assert orc.reach_closure(spec, x) == sorted(m.states, key=State.canonical)

    def test_json(self, report):
        out = report.to_json()
        assert out["nodes"] == 675_840 and len(out["sets"]) == 3


@pytest.mark.parametrize("seed", range(25))
def test_tarjan_matches_scipy(seed):
    rng = np.random.Generator(np.random.Philox(500 + seed))
    spec = random_spec(rng, max_types=3, max_count=3)
    g = orc.build_graph(spec)
    mine = orc.tarjan_scc(g.n_nodes, lambda v: g.successors(v).tolist())
    _, theirs = connected_components(g.adjacency, directed=True, connection="strong")
    pairs = set(zip(mine, theirs.tolist()))
    assert len(pairs) == len(set(mine)) == len(set(theirs.tolist()))


class TestClosure:
    def test_second_set(self, spec):
        states = [S(*t) for t in TABLE2_STATES[:4]]
        assert orc.is_invariant(spec, states).closed
        assert orc.reach_closure(spec, states[0]) == sorted(states, key=State.canonical)

    def test_punctured(self, spec):
        states = [S(*t) for t in TABLE2_STATES[1:4]]
        res = orc.is_invariant(spec, states)
        assert not res.closed
        assert res.successor.canonical() == TABLE2_STATES[0]

    def test_equilibrium(self, spec):
        assert orc.reach_closure(spec, S(*X_STAR)) == [S(*X_STAR)]

    def test_first_set(self, spec):
        members = {m.canonical() for m in inv.enumerate_set(spec, inv.benchmarks(spec, 1, 1).benchmarks)}
        reach = orc.reach_closure(spec, S(*TABLE1_STATES[0]))
        assert {x.canonical() for x in reach} <= members

    def test_cap(self, spec):
        with pytest.raises(inv.CapExceeded):
            orc.reach_closure(spec, S(0, 0, 0, 0, 0, 0, 0, 0, 0), cap=10)
