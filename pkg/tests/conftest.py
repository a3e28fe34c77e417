from __future__ import annotations

import numpy as np
import pytest

from fogcolony.dendro import CandidateColony, build_dendrogram
from fogcolony.fitness import RoutingContext
from fogcolony.infra import FogDevice, Infrastructure, NetworkLink
from fogcolony.layout import Layout
from fogcolony.workload import Application, Service, User, Workload

# Nine-device worked example. Merge order under average linkage:
# C9={3,4} C10={1,6} C11={2,8} C12=C9+5 C13=C10+0 C14=C11+7 C15=C13+C12 C16=root
NINE_LINKS = [(7, 8, 2.2), (2, 8, 1.2), (0, 2, 4.0), (0, 1, 2.1), (1, 6, 1.1), (3, 6, 3.0), (3, 4, 1.0), (3, 5, 2.0)]
NINE_CAPS = [2, 3, 1, 4, 2, 1, 3, 2, 2]
NINE_GATEWAYS = {0, 4, 7, 8}


def make_infra(n, links, caps=None, gateways=(), cloud=100.0):
    caps = caps or [4] * n
    devices = [FogDevice(i, float(caps[i]), i in set(gateways)) for i in range(n)]
    return Infrastructure(devices, [NetworkLink(a, b, lat) for a, b, lat in links], cloud)


def make_app(app_id, reqs, requests, first_sid):
    services = tuple(Service(first_sid + k, app_id, float(r)) for k, r in enumerate(reqs))
    reqs_ = tuple((first_sid + a, first_sid + b) for a, b in requests)
    return Application(app_id, services, reqs_, first_sid)


CHAIN = make_app(0, [1, 1, 1], [(0, 1), (1, 2)], 0)


def split_chain():
    """Gateway 0 and relay 1 with S3 on 4 in one colony; S2 on 3 behind relay 2 in the other."""
    infra = make_infra(5, [(0, 1, 1.93), (1, 2, 2.5), (2, 3, 1.95), (1, 4, 1.8)], gateways=[0])
    left = CandidateColony(100, (0, 1, 4), coordinator=1)
    right = CandidateColony(101, (2, 3), coordinator=2)
    ctx = RoutingContext(infra, Layout((left, right)), [{0: [0], 2: [4]}, {1: [3]}])
    return infra, ctx


def single_chain():
    """The same chain on a three-device line forming one colony."""
    infra = make_infra(3, [(0, 1, 2.7), (1, 2, 3.8)], gateways=[0])
    colony = CandidateColony(100, (0, 1, 2), coordinator=1)
    return infra, RoutingContext(infra, Layout((colony,)), [{0: [0], 1: [1], 2: [2]}])


@pytest.fixture
def nine_infra():
    return make_infra(9, NINE_LINKS, NINE_CAPS, NINE_GATEWAYS)


@pytest.fixture
def nine_dendro(nine_infra):
    return build_dendrogram(nine_infra)


def tiny_workload():
    """Three fixed applications on the nine-device example."""
    apps = (
        make_app(0, [1, 1, 2], [(0, 1), (1, 2)], 0),
        make_app(1, [2, 1], [(0, 1)], 3),
        make_app(2, [1, 1, 1], [(0, 1), (0, 2)], 5),
    )
    users = (
        User(0, 0, 0, 0.1),
        User(1, 1, 4, 0.1),
        User(2, 0, 4, 0.1),
        User(3, 2, 7, 0.1),
        User(4, 1, 8, 0.1),
        User(5, 2, 0, 0.1),
    )
    return Workload(apps, users)


def contended_workload():
    """The same users and request graphs with requirements that exceed small colonies."""
    apps = (
        make_app(0, [3, 1, 2], [(0, 1), (1, 2)], 0),
        make_app(1, [2, 2], [(0, 1)], 3),
        make_app(2, [2, 1, 3], [(0, 1), (0, 2)], 5),
    )
    return Workload(apps, tiny_workload().users)


@pytest.fixture
def nine_workload():
    return tiny_workload()


def random_connected(n, rng, extra=0.3, lat=(1.0, 5.0), gateway_frac=0.4):
    """Random spanning tree plus extra edges; real-valued latencies."""
    links = {}
    for v in range(1, n):
        u = int(rng.integers(v))
        links[(u, v)] = float(rng.uniform(*lat))
    for _ in range(int(extra * n)):
        a, b = sorted(rng.choice(n, size=2, replace=False).tolist()) if n > 1 else (0, 0)
        if a != b and (a, b) not in links:
            links[(a, b)] = float(rng.uniform(*lat))
    caps = rng.integers(1, 5, size=n).tolist()
    gws = [i for i in range(n) if rng.random() < gateway_frac] or [0]
    return make_infra(n, [(a, b, x) for (a, b), x in sorted(links.items())], caps, gws)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance reporting --------------------------------------------------

_ACCEPTANCE: list[str] = []


@pytest.fixture
def acceptance():
    def record(criterion: int, ok: bool, detail: str = "") -> None:
        line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}" + (f"  {detail}" if detail else "")
        _ACCEPTANCE.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
