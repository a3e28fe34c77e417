import itertools
import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fogcolony.infra import (
    FogDevice,
    Infrastructure,
    NetworkLink,
    ParameterError,
    betweenness,
    generate_topology,
    shortest_lat,
)

from conftest import make_infra, random_connected
from oracles import brute_betweenness, path_latency


def test_generate_default_sizes():
    infra = generate_topology(100, 2, (2, 6), (1, 4), 0.25, seed=3)
    assert infra.n == 100
    assert len(infra.gateways) == 25
    lats = [ln.latency for ln in infra.links]
    assert min(lats) >= 2 and max(lats) <= 6
    assert set(infra.capacities.tolist()) <= {1.0, 2.0, 3.0, 4.0}
    assert infra.is_connected()
    assert infra.cloud_latency == 100.0


def test_generate_rejects_seedless_graph():
    with pytest.raises(ParameterError):
        generate_topology(1, 1)


def test_generate_tree_when_m_is_one():
    infra = generate_topology(9, 1, seed=7)
    assert len(infra.links) == 8
    assert nx.is_tree(infra.graph())


def test_generate_is_seeded():
    a = generate_topology(40, seed=11)
    b = generate_topology(40, seed=11)
    c = generate_topology(40, seed=12)
    assert a.to_dict() == b.to_dict()
    assert a.to_dict() != c.to_dict()


def test_line_graph_sum():
    infra = make_infra(3, [(0, 1, 2.0), (1, 2, 3.0)])
    assert shortest_lat(infra, 0, 2) == 5.0
    assert shortest_lat(infra, 1, 1) == 0.0


def test_restricted_route_and_unreachable():
    # square 0-1-2-3-0: going round the long side when 3 is excluded
    infra = make_infra(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 5.0), (3, 0, 5.0)])
    assert shortest_lat(infra, 0, 3) == 5.0
    assert shortest_lat(infra, 0, 3, restrict_to={0, 1, 2, 3}) == 5.0
    assert shortest_lat(infra, 0, 2, restrict_to={0, 2, 3}) == 10.0
    assert math.isinf(shortest_lat(infra, 0, 2, restrict_to={0, 2}))


def test_shortest_matches_path_enumeration(rng):
    for _ in range(10):
        infra = random_connected(int(rng.integers(3, 9)), rng)
        for a, b in itertools.combinations(range(infra.n), 2):
            assert shortest_lat(infra, a, b) == pytest.approx(path_latency(infra, a, b), abs=1e-12)


def test_restricted_matches_path_enumeration(rng):
    for _ in range(10):
        infra = random_connected(8, rng)
        allowed = sorted(rng.choice(8, size=5, replace=False).tolist())
        for a, b in itertools.combinations(allowed, 2):
            want = path_latency(infra, a, b, set(allowed))
            assert shortest_lat(infra, a, b, allowed) == pytest.approx(want, abs=1e-12)


def test_star_center_has_top_betweenness():
    infra = make_infra(4, [(0, 1, 1.0), (0, 2, 2.0), (0, 3, 3.0)])
    sc = betweenness(infra, [0, 1, 2, 3])
    assert sc[0] > max(sc[1], sc[2], sc[3])


def test_singleton_betweenness():
    infra = make_infra(2, [(0, 1, 1.0)])
    assert betweenness(infra, [1]) == {1: 0.0}


def test_betweenness_matches_path_counting(rng):
    for _ in range(10):
        infra = random_connected(9, rng, extra=0.5)
        want = brute_betweenness(infra, range(9))
        got = betweenness(infra, range(9))
        for v in range(9):
            assert got[v] == pytest.approx(want[v], abs=1e-9)


def test_betweenness_with_equal_length_paths():
    # two equal routes 0-1-3 and 0-2-3 split the dependency
    infra = make_infra(4, [(0, 1, 1.0), (1, 3, 1.0), (0, 2, 1.0), (2, 3, 1.0)])
    sc = betweenness(infra, range(4))
    assert sc[1] == pytest.approx(0.5) and sc[2] == pytest.approx(0.5)


def test_betweenness_matches_networkx(rng):
    for _ in range(5):
        infra = random_connected(12, rng, extra=0.6)
        g = infra.graph()
        want = nx.betweenness_centrality(g, weight="weight", normalized=False)
        got = betweenness(infra, range(12))
        for v in range(12):
            assert got[v] == pytest.approx(want[v], abs=1e-9)


def test_betweenness_disconnected_members():
    infra = make_infra(3, [(0, 1, 1.0), (1, 2, 1.0)])
    with pytest.raises(ParameterError):
        betweenness(infra, [0, 2])


def test_invalid_entities():
    with pytest.raises(ParameterError):
        FogDevice(0, 0.0)
    with pytest.raises(ParameterError):
        NetworkLink(0, 0, 1.0)
    with pytest.raises(ParameterError):
        NetworkLink(0, 1, -1.0)
    with pytest.raises(ParameterError):
        Infrastructure([FogDevice(0, 1.0)], [NetworkLink(0, 1, 1.0)])


def test_roundtrip(tmp_path):
    infra = generate_topology(20, seed=4)
    infra.save(tmp_path / "i.json")
    back = Infrastructure.load(tmp_path / "i.json")
    assert back.to_dict() == infra.to_dict()
    assert np.array_equal(back.all_pairs(), infra.all_pairs())


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 10), st.integers(0, 2**31 - 1))
def test_apsp_is_a_metric(n, seed):
    infra = random_connected(n, np.random.default_rng(seed))
    d = infra.all_pairs()
    assert np.allclose(d, d.T)
    assert np.all(np.diag(d) == 0)
    # triangle inequality
    assert np.all(d[:, None, :] <= d[:, :, None] + d[None, :, :] + 1e-9)
