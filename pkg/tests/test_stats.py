import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import fleiss_fraction, pearson_plain
from tsteval.corpus import RatingsTable
from tsteval.stats import (
    NATURAL,
    UNNATURAL,
    average_raters,
    bin_absolute,
    fleiss_kappa,
    pearson,
)

FOUR_BY_THREE = [
    ["a", "a", "b"],
    ["b", "b", "b"],
    ["a", "c", "c"],
    ["c", "a", "b"],
]


def test_unanimity():
    res = fleiss_kappa([["x", "x", "x"], ["y", "y", "y"], ["x", "x", "x"]])
    assert res.kappa == 1.0 and not res.degenerate


def test_single_category_flagged():
    res = fleiss_kappa([["x", "x"], ["x", "x"]])
    assert res.kappa == 1.0 and res.degenerate


def test_chance_level():
    res = fleiss_kappa([["A", "A"], ["B", "B"], ["A", "B"], ["B", "A"]])
    assert res.kappa == pytest.approx(0.0, abs=1e-9)
    assert res.mean_agreement == pytest.approx(res.chance_agreement, abs=1e-15)


def test_four_by_three_matches_exact_formula():
    assert fleiss_kappa(FOUR_BY_THREE).kappa == pytest.approx(float(fleiss_fraction(FOUR_BY_THREE)), abs=1e-12)


def test_proportions():
    res = fleiss_kappa(FOUR_BY_THREE)
    assert res.proportions == pytest.approx({"a": 4 / 12, "b": 5 / 12, "c": 3 / 12})


def test_kappa_needs_two_raters():
    with pytest.raises(ValueError):
        fleiss_kappa([["a"], ["b"]])
    with pytest.raises(ValueError):
        fleiss_kappa([["a", "b"]])


def test_kappa_from_ratings_table():
    table = RatingsTable(("i1", "i2"), np.array([[1, 1], [3, 3]]), "ordinal")
    assert fleiss_kappa(table).kappa == 1.0


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_kappa_invariances(data):
    n_items, n_raters = data.draw(st.integers(2, 6)), data.draw(st.integers(2, 5))
    rows = data.draw(
        st.lists(st.lists(st.sampled_from("pqr"), min_size=n_raters, max_size=n_raters), min_size=n_items, max_size=n_items)
    )
    base = fleiss_kappa(rows).kappa
    assert base <= 1.0 + 1e-12
    relabel = {"p": "q", "q": "r", "r": "p"}
    assert fleiss_kappa([[relabel[v] for v in r] for r in rows]).kappa == pytest.approx(base, abs=1e-12)
    assert fleiss_kappa(rows[::-1]).kappa == pytest.approx(base, abs=1e-12)
    assert fleiss_kappa([r[::-1] for r in rows]).kappa == pytest.approx(base, abs=1e-12)
    if len({v for r in rows for v in r}) > 1:
        assert float(fleiss_fraction(rows)) == pytest.approx(base, abs=1e-12)


def test_bin_absolute():
    assert list(bin_absolute([1, 2, 3], 2)) == [UNNATURAL, NATURAL, NATURAL]
    assert list(bin_absolute([2], 3)) == [UNNATURAL]
    assert set(bin_absolute([1, 2, 3, 4, 5], 1)) == {NATURAL}


@given(st.lists(st.integers(1, 5), min_size=1), st.integers(1, 5))
def test_bin_monotone_in_tau(scores, tau):
    lo, hi = bin_absolute(scores, tau), bin_absolute(scores, tau + 1)
    assert not any(a == UNNATURAL and b == NATURAL for a, b in zip(lo, hi))


TEN_A = [2.0, 4.5, 1.0, 3.3, 5.0, 2.2, 4.1, 3.9, 1.7, 2.8]
TEN_B = [1.5, 3.9, 1.1, 2.0, 4.7, 3.1, 3.6, 4.4, 1.0, 2.5]


def test_pearson_identity_and_negation():
    a = np.array(TEN_A)
    assert pearson(a, a).r == 1.0
    assert pearson(a, -a).r == -1.0
    assert pearson(a, -a, absolute=True).r == 1.0


def test_pearson_ten_points():
    assert pearson(TEN_A, TEN_B).r == pytest.approx(pearson_plain(TEN_A, TEN_B), abs=1e-12)


def test_bootstrap_deterministic():
    a = pearson(TEN_A, TEN_B, seed=5)
    b = pearson(TEN_A, TEN_B, seed=5)
    c = pearson(TEN_A, TEN_B, seed=6)
    assert a.halfwidth == b.halfwidth > 0
    assert c.halfwidth != a.halfwidth


def test_bootstrap_halfwidth_kept_under_absolute():
    assert pearson(TEN_A, TEN_B, absolute=True).halfwidth == pearson(TEN_A, TEN_B).halfwidth


def test_p_value():
    strong = pearson(TEN_A, TEN_B)
    assert strong.significant()
    weak = pearson([1, 2, 3, 4, 5, 6], [2, 1, 2, 1, 2, 1])
    assert not weak.significant()


@pytest.mark.parametrize("a, b, msg", [([1, 1, 1], [1, 2, 3], "constant"), ([1, 2, 3], [1, 2], "mismatch"), ([1, 2], [2, 1], "at least 3")])
def test_pearson_errors(a, b, msg):
    with pytest.raises(ValueError, match=msg):
        pearson(a, b)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.1, 10), st.floats(-10, 10), st.floats(0.1, 10), st.floats(-10, 10))
def test_pearson_affine_invariance(s1, o1, s2, o2):
    a, b = np.array(TEN_A), np.array(TEN_B)
    r = pearson(a, b, bootstrap_n=0).r
    assert pearson(s1 * a + o1, s2 * b + o2, bootstrap_n=0).r == pytest.approx(r, abs=1e-9)
    assert pearson(-s1 * a, b, bootstrap_n=0).r == pytest.approx(-r, abs=1e-9)


def test_average_raters():
    table = RatingsTable(("a", "b"), np.array([[5, 5, 5], [1, 2, 3]]), "ordinal")
    np.testing.assert_array_equal(average_raters(table), [5.0, 2.0])
    swapped = RatingsTable(("a", "b"), table.values[:, ::-1], "ordinal")
    np.testing.assert_array_equal(average_raters(swapped), [5.0, 2.0])
