import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from oracles import lp_transport, vertex_transport
from tsteval.transport import emd, emd_binary, solve_transport, unit_ground_distance


def simplex_vectors(n):
    return hnp.arrays(np.float64, n, elements=st.floats(0.0, 1.0)).filter(
        lambda v: v.sum() > 1e-3
    ).map(lambda v: v / v.sum())


def test_swap_costs_one():
    assert emd([1, 0], [0, 1], [[0, 1], [1, 0]]) == 1.0


def test_identity_is_zero():
    p = [0.2, 0.3, 0.5]
    assert emd(p, p, unit_ground_distance(3)) == 0.0


def test_shifted_half():
    p, q = np.array([0.5, 0.5, 0.0]), np.array([0.0, 0.5, 0.5])
    d = unit_ground_distance(3)
    assert emd(p, q, d) == pytest.approx(0.5, abs=1e-12)
    assert vertex_transport(p, q, d) == pytest.approx(0.5, abs=1e-12)


def test_flow_is_feasible():
    rng = np.random.default_rng(3)
    p, q = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(5))
    d = rng.random((4, 5))
    cost, flow = solve_transport(p, q, d)
    np.testing.assert_allclose(flow.sum(axis=1), p, atol=1e-12)
    np.testing.assert_allclose(flow.sum(axis=0), q, atol=1e-12)
    assert np.all(flow >= -1e-15)
    assert cost == pytest.approx(float(np.sum(flow * d)), abs=1e-12)


def test_matches_vertex_enumeration_on_small_instances():
    rng = np.random.default_rng(11)
    for _ in range(30):
        n, m = rng.integers(1, 4, size=2)
        p, q = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(m))
        d = rng.random((n, m))
        assert emd(p, q, d) == pytest.approx(vertex_transport(p, q, d), abs=1e-9)


def test_degenerate_integer_masses():
    # many ties in both marginals and costs exercise zero-flow basic cells
    p = np.array([0.25, 0.25, 0.25, 0.25])
    q = np.array([0.5, 0.25, 0.25, 0.0])
    d = np.array([[0, 1, 1, 1], [1, 0, 1, 1], [1, 1, 0, 1], [1, 1, 1, 0]], float)
    assert emd(p, q, d) == pytest.approx(lp_transport(p, q, d), abs=1e-12)


@pytest.mark.parametrize(
    "p, q, d, msg",
    [
        ([0.5, 0.5], [1.0], [[0, 1]], "shape"),
        ([0.5, 0.6], [1.0], [[0], [1]], "not normalized"),
        ([1.5, -0.5], [1.0], [[0], [1]], "negative"),
        ([1.0], [1.0], [[-1.0]], "non-negative"),
        ([1.0], [1.0], [[np.inf]], "finite"),
    ],
)
def test_rejects_bad_input(p, q, d, msg):
    with pytest.raises(ValueError, match=msg):
        emd(p, q, d)


def test_binary_examples():
    assert emd_binary(0.9, 0.2) == pytest.approx(0.7, abs=1e-15)
    assert emd([0.1, 0.9], [0.8, 0.2], unit_ground_distance(2)) == pytest.approx(0.7, abs=1e-12)
    assert emd_binary(0.4, 0.4) == 0.0
    assert emd_binary(0.0, 1.0) == 1.0


@pytest.mark.parametrize("p1, q1", [(-0.1, 0.5), (0.5, 1.1), (float("nan"), 0.5)])
def test_binary_range(p1, q1):
    with pytest.raises(ValueError):
        emd_binary(p1, q1)


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_symmetry_under_transpose(data):
    n, m = data.draw(st.integers(1, 5)), data.draw(st.integers(1, 5))
    p, q = data.draw(simplex_vectors(n)), data.draw(simplex_vectors(m))
    d = data.draw(hnp.arrays(np.float64, (n, m), elements=st.floats(0, 10)))
    a, b = emd(p, q, d), emd(q, p, d.T)
    assert a >= 0
    assert a == pytest.approx(b, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_triangle_inequality(data):
    n = data.draw(st.integers(1, 5))
    pts = data.draw(hnp.arrays(np.float64, (n, 2), elements=st.floats(-5, 5)))
    d = np.linalg.norm(pts[:, None] - pts[None, :], axis=-1)
    p, q, r = (data.draw(simplex_vectors(n)) for _ in range(3))
    assert emd(p, r, d) <= emd(p, q, d) + emd(q, r, d) + 1e-9


@settings(max_examples=100, deadline=None)
@given(st.data(), st.floats(0, 100))
def test_scale_equivariance(data, c):
    n, m = data.draw(st.integers(1, 4)), data.draw(st.integers(1, 4))
    p, q = data.draw(simplex_vectors(n)), data.draw(simplex_vectors(m))
    d = data.draw(hnp.arrays(np.float64, (n, m), elements=st.floats(0, 10)))
    assert emd(p, q, c * d) == pytest.approx(c * emd(p, q, d), rel=1e-9, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_self_distance_zero(data):
    n = data.draw(st.integers(1, 6))
    p = data.draw(simplex_vectors(n))
    assert emd(p, p, unit_ground_distance(n)) == pytest.approx(0.0, abs=1e-12)
