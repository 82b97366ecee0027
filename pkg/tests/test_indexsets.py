"""Eventually periodic sets: canonical algebra, exact rho, parser."""
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_eventually_periodic
from defectlab import (
    EventuallyPeriodicSet,
    parse_set,
    prefix_agreement,
    rho,
    set_algebra,
    sigma_m,
    truncate,
)
from defectlab.indexsets import SetSyntaxError, rho_partial

Q = Fraction

SCAN = 80  # covers every period * lcm and all exceptions used in these tests


def members(s, bound=SCAN):
    return {k for k in range(1, bound + 1) if s.contains(k)}


eps = st.builds(
    lambda period, residues, added, removed: EventuallyPeriodicSet.make(
        period, [r % period for r in residues], added,
        [k for k in removed if k not in added],
    ),
    st.integers(min_value=1, max_value=6),
    st.lists(st.integers(min_value=0, max_value=5), max_size=4),
    st.lists(st.integers(min_value=1, max_value=20), max_size=3),
    st.lists(st.integers(min_value=1, max_value=20), max_size=3),
)


class TestCanonicalForm:
    def test_minimal_period(self):
        s = EventuallyPeriodicSet.make(4, [0, 1, 2, 3])
        assert s.period == 1 and s.residues == frozenset({0})

    def test_exceptions_normalized(self):
        # adding an element the pattern already contains is a no-op
        s = EventuallyPeriodicSet.make(2, [0], added=[4])
        assert s == EventuallyPeriodicSet.residue_class(2, [0])

    def test_double_complement_is_identity(self):
        a = parse_set("res(2;0)+1-2")
        assert a.complement().complement() == a

    @given(eps, eps)
    @settings(max_examples=100, deadline=None)
    def test_semantic_equality_is_structural(self, a, b):
        if members(a) == members(b):
            assert a == b

    def test_describe_round_trip(self):
        for text in ["all", "none", "fin(1,5)", "res(3;0,2)", "res(2;1)+2-3"]:
            s = parse_set(text)
            assert parse_set(s.describe()) == s


class TestAlgebra:
    @given(eps, eps)
    @settings(max_examples=100, deadline=None)
    def test_operations_match_membership_scan(self, a, b):
        assert members(a.union(b)) == members(a) | members(b)
        assert members(a.intersection(b)) == members(a) & members(b)
        assert members(a.complement()) == set(range(1, SCAN + 1)) - members(a)
        assert members(a.symmetric_difference(b)) == members(a) ^ members(b)
        assert members(a.difference(b)) == members(a) - members(b)

    def test_set_algebra_dispatch(self):
        a, b = parse_set("res(2;0)"), parse_set("res(2;1)")
        assert set_algebra("union", a, b) == parse_set("all")
        assert set_algebra("intersection", a, b) == parse_set("none")
        assert set_algebra("complement", a) == b
        with pytest.raises(ValueError):
            set_algebra("union", a)
        with pytest.raises(ValueError):
            set_algebra("xor", a, b)

    def test_sigma_m(self):
        s = sigma_m(parse_set("fin(2)"), 4)
        assert members(s, 10) == {2, 5, 6, 7, 8, 9, 10}
        with pytest.raises(ValueError):
            sigma_m(parse_set("none"), -1)

    def test_truncate(self):
        assert truncate(parse_set("res(3;1)"), 10) == [1, 4, 7, 10]

    def test_min_element(self):
        assert parse_set("none").min_element() is None
        assert parse_set("all-1-2").min_element() == 3
        assert parse_set("fin(9,4)").min_element() == 4


class TestRho:
    def test_worked_examples(self):
        evens = parse_set("res(2;0)")
        odds = parse_set("res(2;1)")
        assert rho(evens, odds) == Q(1)
        assert rho(parse_set("all"), parse_set("all-1")) == Q(1, 2)
        assert rho(parse_set("none"), parse_set("none")) == 0

    def test_closed_form_matches_partial_sum(self):
        rng = random.Random(41)
        for _ in range(200):
            a = random_eventually_periodic(rng)
            b = random_eventually_periodic(rng)
            exact = rho(a, b)
            partial = rho_partial(a, b, 40)
            assert 0 <= exact - partial <= Q(1, 2 ** 39)

    @given(eps, eps, eps)
    @settings(max_examples=80, deadline=None)
    def test_metric_axioms(self, a, b, c):
        assert rho(a, b) >= 0
        assert (rho(a, b) == 0) == (a == b)
        assert rho(a, b) == rho(b, a)
        assert rho(a, c) <= rho(a, b) + rho(b, c)

    def test_rho_bounded_by_one(self):
        assert rho(parse_set("all"), parse_set("none")) == Q(1)


class TestPrefixAgreement:
    def test_worked_example(self):
        assert prefix_agreement(parse_set("all"), parse_set("all-5")) == 4

    def test_equal_sets_agree_forever(self):
        assert prefix_agreement(parse_set("res(2;0)"), parse_set("res(2;0)")) == math.inf

    @given(eps, eps)
    @settings(max_examples=60, deadline=None)
    def test_agreement_consistent_with_membership(self, a, b):
        m = prefix_agreement(a, b)
        if m == math.inf:
            assert a == b
        else:
            assert all(a.contains(k) == b.contains(k) for k in range(1, m + 1))
            assert a.contains(m + 1) != b.contains(m + 1)

    def test_rho_prefix_bound(self):
        # disagreement no earlier than m+1 forces rho <= 2^-m
        a, b = parse_set("res(3;1)"), parse_set("res(3;1)-7")
        m = prefix_agreement(a, b)
        assert rho(a, b) <= Q(1, 2 ** m)


class TestParser:
    def test_atoms(self):
        assert parse_set("all") == EventuallyPeriodicSet.all()
        assert parse_set("none") == EventuallyPeriodicSet.empty()
        assert parse_set("fin()") == EventuallyPeriodicSet.empty()
        assert parse_set("fin(2,4)") == EventuallyPeriodicSet.finite([2, 4])
        assert parse_set("res(3;1,2)") == EventuallyPeriodicSet.residue_class(3, [1, 2])

    def test_precedence_and_grouping(self):
        s = parse_set("res(2;0) | res(2;1) & fin(3)")
        assert members(s, 10) == {2, 3, 4, 6, 8, 10}
        t = parse_set("(res(2;0) | res(2;1)) & fin(3)")
        assert members(t, 10) == {3}

    def test_complement_and_exceptions(self):
        # '~' binds to the whole factor including its exception suffix
        s = parse_set("~res(2;0)+2-1")
        assert members(s, 8) == {1, 3, 5, 7}
        t = parse_set("(~res(2;0))+2-1")
        assert members(t, 8) == {2, 3, 5, 7}

    def test_errors(self):
        for bad in ["", "res(0;1)", "fin(0)", "res(3)", "all all", "fin(1,)",
                    "res(3;1", "@", "+3"]:
            with pytest.raises(SetSyntaxError):
                parse_set(bad)
