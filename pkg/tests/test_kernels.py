"""Both kernel backends must agree bit for bit."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fogcolony import kernels

from conftest import random_connected

cython = pytest.mark.skipif("cython" not in kernels.BACKENDS, reason="extension not built")
PY = kernels.BACKENDS["python"]


def _case(seed, n):
    rng = np.random.default_rng(seed)
    infra = random_connected(n, rng, extra=0.5)
    k = int(rng.integers(1, n + 1))
    members = np.sort(rng.choice(n, size=k, replace=False))
    return infra, members, rng


def test_backend_is_reported():
    assert kernels.BACKEND in kernels.BACKENDS


@cython
@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 25))
def test_restricted_dist_equal(seed, n):
    infra, members, _ = _case(seed, n)
    cy = kernels.BACKENDS["cython"]
    a = PY.restricted_dist(infra.latency_matrix, members)
    b = cy.restricted_dist(infra.latency_matrix, members)
    assert np.array_equal(a, b)


@cython
@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 25))
def test_betweenness_equal(seed, n):
    infra, members, _ = _case(seed, n)
    cy = kernels.BACKENDS["cython"]
    a = PY.betweenness(infra.latency_matrix, members)
    b = cy.betweenness(infra.latency_matrix, members)
    assert np.array_equal(a, b)


@cython
@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 120), st.integers(1, 3))
def test_ranks_equal(seed, n, m):
    rng = np.random.default_rng(seed)
    obj = rng.integers(0, 6, size=(n, m)).astype(float)  # many ties
    cy = kernels.BACKENDS["cython"]
    assert np.array_equal(PY.nondominated_ranks(obj), cy.nondominated_ranks(obj))


@cython
@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 20))
def test_first_fit_equal(seed, n):
    infra, members, rng = _case(seed, n)
    cy = kernels.BACKENDS["cython"]
    dist = np.ascontiguousarray(PY.restricted_dist(infra.latency_matrix, members))
    k = len(members)
    q = int(rng.integers(1, 12))
    req = rng.integers(1, 3, size=q).astype(float)
    ptr, idx = [0], []
    for _ in range(q):
        idx.extend(rng.choice(k, size=int(rng.integers(1, k + 1)), replace=False).tolist())
        ptr.append(len(idx))
    parent_item = np.array([int(rng.integers(-1, i)) if i else -1 for i in range(q)], dtype=np.int64)
    parent_dev = np.where(rng.random(q) < 0.3, rng.integers(0, k, size=q), -1).astype(np.int64)
    caps = rng.integers(0, 5, size=k).astype(float)
    rem_a, rem_b = caps.copy(), caps.copy()
    args = (req, np.array(ptr), np.array(idx), parent_item, parent_dev)
    pa, ca = PY.first_fit(dist, rem_a, *args)
    pb, cb = cy.first_fit(dist, rem_b, *args)
    assert np.array_equal(pa, pb)
    assert np.array_equal(ca, cb)
    assert np.array_equal(rem_a, rem_b)
    assert (rem_a >= 0).all()


def test_first_fit_order_and_checks():
    # line 0 -2- 1 -2- 2, requested from both ends: sums tie, the middle wins on max
    lat = np.array([[0, 2, np.inf], [2, 0, 2], [np.inf, 2, 0]], dtype=float)
    dist = PY.restricted_dist(lat, [0, 1, 2])
    for be in kernels.BACKENDS.values():
        rem = np.array([4.0, 4.0, 4.0])
        placed, checks = be.first_fit(
            np.ascontiguousarray(dist), rem, np.array([1.0]), np.array([0, 2]), np.array([0, 2]),
            np.array([-1]), np.array([-1]),
        )
        assert placed.tolist() == [1] and checks.tolist() == [1]
        rem = np.array([4.0, 0.0, 4.0])
        placed, checks = be.first_fit(
            np.ascontiguousarray(dist), rem, np.array([1.0]), np.array([0, 2]), np.array([0, 2]),
            np.array([-1]), np.array([-1]),
        )
        assert placed.tolist() == [0] and checks.tolist() == [2]


def test_forced_fallback(monkeypatch):
    import importlib

    monkeypatch.setenv("FOGCOLONY_PURE", "1")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "python"
        assert mod.first_fit is PY.first_fit
    finally:
        monkeypatch.delenv("FOGCOLONY_PURE")
        importlib.reload(kernels)
