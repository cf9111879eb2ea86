import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import S
from mixpop import example1
from mixpop.population import (
    BenchmarkQuad,
    PayoffMatrix,
    PopulationSpec,
    Role,
    SpecError,
    State,
    Strategy,
    check_state,
    derive_class,
    full_state,
    in_box,
    in_omega,
    load_spec,
    parse_state,
    spec_from_json,
    tight_benchmarks,
    total_a,
    validate_spec,
    zero_state,
)


def best_response_is_a(m: PayoffMatrix, n: int, k: int) -> bool:
    """Direct payoff comparison against ``k`` other A-players; ties go to A."""
    u_a = m.a * k + m.b * (n - 1 - k)
    u_b = m.c * k + m.d * (n - 1 - k)
    return u_a >= u_b


def decides_a(desc, k: int) -> bool:
    if desc.role is Role.CONSTANT:
        return desc.strategy is Strategy.A
    if desc.role is Role.COOR:
        return k >= desc.temper
    return k <= desc.temper


class TestDeriveClass:
    def test_coordinator(self):
        d = derive_class(PayoffMatrix.of(2, 0, 0, 1), 3)
        assert d.role is Role.COOR
        assert d.temper == Fraction(2, 3)

    def test_anticoordinator(self):
        d = derive_class(PayoffMatrix.of(0, 1, 1, 0), 3)
        assert d.role is Role.ANTI
        assert d.temper == 1

    def test_all_equal_payoffs_always_play_a(self):
        d = derive_class(PayoffMatrix.of(1, 1, 1, 1), 3)
        assert (d.role, d.temper) == (Role.COOR, 0)

    def test_constant_b(self):
        d = derive_class(PayoffMatrix.of(0, 1, 1, 2), 4)
        assert d.role is Role.CONSTANT and d.strategy is Strategy.B

    def test_rejects_tiny_population(self):
        with pytest.raises(SpecError):
            derive_class(PayoffMatrix.of(1, 0, 0, 1), 1)

    @given(
        st.lists(st.integers(-6, 6), min_size=4, max_size=4),
        st.integers(2, 12),
    )
    def test_matches_direct_payoff_comparison(self, payoffs, n):
        m = PayoffMatrix.of(*payoffs)
        desc = derive_class(m, n)
        for k in range(n):
            assert decides_a(desc, k) == best_response_is_a(m, n, k)


class TestValidate:
    def test_example_ok(self, spec):
        rep = validate_spec(spec)
        assert rep.ok and rep.stability_assumption and not rep.has_constant_agents

    def test_unsorted_anti(self):
        rep = validate_spec(PopulationSpec.from_lists(["9", "9.5"], [1, 1], [1], [20]))
        assert not rep.ok
        assert any("strictly descending" in v for v in rep.violations)

    def test_shared_floor(self):
        rep = validate_spec(PopulationSpec.from_lists(["9.5", "9.2"], [1, 1], [1], [20]))
        assert rep.ok and not rep.stability_assumption

    def test_temper_out_of_range(self):
        rep = validate_spec(PopulationSpec.from_lists([5], [1], [1], [2]))
        assert not rep.ok

    def test_missing_role(self):
        rep = validate_spec(PopulationSpec.from_lists([], [], [1], [3]))
        assert not rep.ok


class TestStates:
    def test_total_a(self, spec):
        assert total_a(spec, S(4, 1, 1, 0, 0, 0, 0, 0, 3)) == 9
        assert total_a(spec, zero_state(spec)) == 0
        assert total_a(spec, S(0, 0, 0, 0, 15, 1, 10, 2, 3)) == 31

    def test_canonical_roundtrip(self, spec):
        x = S(4, 1, 1, 0, 0, 1, 10, 2, 3)
        assert x.coor == (3, 2, 10, 1, 0)
        assert State.from_canonical(x.canonical(), 4) == x
        assert str(x) == "(4,1,1,0|0,1,10,2,3)"
        assert parse_state(str(x), spec) == x
        assert parse_state("4,1,1,0,0,1,10,2,3", spec) == x

    def test_out_of_range(self, spec):
        with pytest.raises(SpecError):
            check_state(spec, S(5, 0, 0, 0, 0, 0, 0, 0, 0))
        with pytest.raises(SpecError):
            parse_state("1,2,3", spec)

    def test_state_space_size(self, spec):
        assert spec.state_space_size() == 5 * 4 * 2 * 4 * 16 * 2 * 11 * 3 * 4 == 675_840


class TestBenchmarks:
    def test_tight(self, spec):
        assert tight_benchmarks(spec, S(4, 1, 1, 1, 0, 0, 0, 2, 3)).as_tuple() == (1, 5, 3, 2)
        assert tight_benchmarks(spec, S(0, 0, 0, 0, 15, 1, 10, 2, 3)).as_tuple() == (0, 1, 6, 5)
        assert tight_benchmarks(spec, full_state(spec)).as_tuple() == (4, 5, 6, 5)
        assert tight_benchmarks(spec, zero_state(spec)).as_tuple() == (0, 1, 1, 0)

    def test_omega(self, spec):
        assert in_omega(spec, BenchmarkQuad(1, 5, 3, 1))
        assert not in_omega(spec, BenchmarkQuad(2, 2, 3, 1))
        assert not in_omega(spec, BenchmarkQuad(0, 1, 7, 5))

    @given(st.data())
    def test_tight_is_smallest_box(self, data):
        spec = example1()
        x = State(
            tuple(data.draw(st.integers(0, c.count)) for c in spec.anti),
            tuple(data.draw(st.integers(0, c.count)) for c in spec.coor),
        )
        t = tight_benchmarks(spec, x)
        assert in_box(spec, t, x)
        p = data.draw(st.integers(0, spec.b))
        q = data.draw(st.integers(p + 1, spec.b + 1))
        pc = data.draw(st.integers(0, spec.bc))
        qc = data.draw(st.integers(pc + 1, spec.bc + 1))
        bm = BenchmarkQuad(p, q, qc, pc)
        if in_box(spec, bm, x):
            assert p <= t.p and q >= t.q and qc >= t.q_c and pc <= t.p_c


class TestLoading:
    def test_json_roundtrip(self, spec, tmp_path):
        path = tmp_path / "pop.json"
        path.write_text(json.dumps(spec.to_json()))
        assert load_spec(path) == spec

    def test_payoff_groups_sorted_and_merged(self):
        data = {
            "anticoordinators": [{"payoffs": [0, 1, 1, 0], "count": 1}],
            "coordinators": [
                {"payoffs": [1, 0, 0, 2], "count": 1},
                {"payoffs": [2, 0, 0, 1], "count": 1},
                {"payoffs": [2, 0, 0, 1], "count": 1},
            ],
        }
        spec = spec_from_json(data)
        assert [c.temper for c in spec.coor] == [Fraction(1), Fraction(2)]
        assert [c.count for c in spec.coor] == [2, 1]
        assert spec.tau(1) == Fraction(3, 2)

    def test_constant_b_counts_toward_n(self):
        data = {
            "anticoordinators": [{"temper": 1, "count": 1}],
            "coordinators": [{"temper": 1, "count": 1}, {"payoffs": [0, 1, 1, 2], "count": 2}],
        }
        spec = spec_from_json(data)
        assert spec.n == 4 and spec.constant_b == 2
        assert validate_spec(spec).has_constant_agents

    def test_bad_files(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(SpecError):
            load_spec(path)
        with pytest.raises(SpecError):
            spec_from_json({"anticoordinators": []})
        with pytest.raises(SpecError):
            spec_from_json({"anticoordinators": [{"temper": 1}], "coordinators": []})

    def test_sentinels(self, spec):
        assert spec.tau(0) == spec.n
        assert spec.tau(spec.b + 1) == -2
        assert spec.tau_c(0) == -2
        assert spec.tau_c(spec.bc + 1) == spec.n + 2
