"""Fog infrastructure graph: devices, links, topology generation and latency queries."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import networkx as nx
import numpy as np

from . import kernels


class ParameterError(ValueError):
    """Invalid generator or model parameters."""


@dataclass(frozen=True)
class FogDevice:
    id: int
    resource_capacity: float
    is_gateway: bool = False

    def __post_init__(self):
        if not self.resource_capacity > 0:
            raise ParameterError(f"device {self.id}: capacity must be > 0")


@dataclass(frozen=True)
class NetworkLink:
    a: int
    b: int
    latency: float

    def __post_init__(self):
        if self.a == self.b:
            raise ParameterError(f"self-loop on device {self.a}")
        if not self.latency > 0:
            raise ParameterError(f"link {self.a}-{self.b}: latency must be > 0")


@dataclass
class Infrastructure:
    """Undirected latency-weighted device graph plus a cloud anchor.

    The cloud is a virtual node reachable from every device at
    ``cloud_latency``; it is not part of the device graph.
    """

    devices: list[FogDevice]
    links: list[NetworkLink]
    cloud_latency: float = 100.0
    _lat: np.ndarray | None = field(default=None, repr=False, compare=False)
    _apsp: np.ndarray | None = field(default=None, repr=False, compare=False)
    _restricted: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        ids = [d.id for d in self.devices]
        if ids != list(range(len(ids))):
            raise ParameterError("device ids must be dense and ordered 0..n-1")
        if not self.cloud_latency > 0:
            raise ParameterError("cloud_latency must be > 0")
        seen = set()
        for ln in self.links:
            key = (min(ln.a, ln.b), max(ln.a, ln.b))
            if key in seen:
                raise ParameterError(f"duplicate link {key}")
            if not (0 <= ln.a < self.n and 0 <= ln.b < self.n):
                raise ParameterError(f"link {key} references unknown device")
            seen.add(key)

    @property
    def n(self) -> int:
        return len(self.devices)

    @property
    def capacities(self) -> np.ndarray:
        return np.array([d.resource_capacity for d in self.devices], dtype=np.float64)

    @property
    def gateways(self) -> list[int]:
        return [d.id for d in self.devices if d.is_gateway]

    @property
    def latency_matrix(self) -> np.ndarray:
        """Dense link matrix: latency on links, ``inf`` elsewhere, 0 on the diagonal."""
        if self._lat is None:
            lat = np.full((self.n, self.n), np.inf)
            np.fill_diagonal(lat, 0.0)
            for ln in self.links:
                lat[ln.a, ln.b] = lat[ln.b, ln.a] = ln.latency
            lat.setflags(write=False)
            self._lat = lat
        return self._lat

    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_weighted_edges_from((ln.a, ln.b, ln.latency) for ln in self.links)
        return g

    def neighbors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for ln in self.links:
            adj[ln.a].append(ln.b)
            adj[ln.b].append(ln.a)
        return [sorted(a) for a in adj]

    def is_connected(self, members=None) -> bool:
        members = list(range(self.n)) if members is None else sorted(members)
        if not members:
            return False
        allowed = set(members)
        adj = self.neighbors()
        stack, seen = [members[0]], {members[0]}
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v in allowed and v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == len(allowed)

    # -- latency queries -------------------------------------------------

    def all_pairs(self) -> np.ndarray:
        """Unrestricted shortest-path latency matrix (cached)."""
        if self._apsp is None:
            d = kernels.restricted_dist(self.latency_matrix, np.arange(self.n))
            d.setflags(write=False)
            self._apsp = d
        return self._apsp

    def restricted(self, members) -> np.ndarray:
        """Shortest latencies among ``members`` using only member intermediates.

        ``members`` must be sorted; rows/columns follow that order. Cached.
        """
        key = tuple(int(m) for m in members)
        d = self._restricted.get(key)
        if d is None:
            if len(key) == self.n:
                d = self.all_pairs()
            else:
                d = kernels.restricted_dist(self.latency_matrix, np.array(key, dtype=np.int64))
                d.setflags(write=False)
            self._restricted[key] = d
        return d

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "cloud_latency": self.cloud_latency,
            "devices": [
                {"id": d.id, "capacity": d.resource_capacity, "gateway": d.is_gateway}
                for d in self.devices
            ],
            "links": [[ln.a, ln.b, ln.latency] for ln in self.links],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Infrastructure":
        devices = [FogDevice(d["id"], d["capacity"], bool(d["gateway"])) for d in data["devices"]]
        links = [NetworkLink(int(a), int(b), float(lat)) for a, b, lat in data["links"]]
        return cls(devices, links, float(data["cloud_latency"]))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    @classmethod
    def load(cls, path) -> "Infrastructure":
        return cls.from_dict(json.loads(Path(path).read_text()))


def shortest_lat(infra: Infrastructure, a: int, b: int, restrict_to=None) -> float:
    """Shortest-path latency from ``a`` to ``b``.

    With ``restrict_to``, every node of the path must be in that set.
    Returns ``math.inf`` when no such path exists.
    """
    if a == b:
        return 0.0
    if restrict_to is None:
        return float(infra.all_pairs()[a, b])
    members = sorted(set(int(m) for m in restrict_to))
    pos = {m: i for i, m in enumerate(members)}
    if a not in pos or b not in pos:
        raise ParameterError("endpoints must belong to restrict_to")
    d = infra.restricted(members)
    out = float(d[pos[a], pos[b]])
    return out if math.isfinite(out) else math.inf


def betweenness(infra: Infrastructure, members) -> dict[int, float]:
    """Latency-weighted betweenness of each member on the induced subgraph."""
    members = sorted(set(int(m) for m in members))
    if not infra.is_connected(members):
        raise ParameterError("member set does not induce a connected subgraph")
    scores = kernels.betweenness(infra.latency_matrix, np.array(members, dtype=np.int64))
    return {m: float(s) for m, s in zip(members, scores)}


def _sub_seed(seq: np.random.SeedSequence) -> int:
    return int(seq.generate_state(1, dtype=np.uint32)[0])


def generate_topology(
    n: int,
    attach_m: int = 2,
    latency_range=(2.0, 6.0),
    capacity_range=(1, 4),
    gateway_fraction: float = 0.25,
    seed=0,
    cloud_latency: float = 100.0,
) -> Infrastructure:
    """Barabasi-Albert infrastructure with uniform latencies and capacities.

    Capacities are integers drawn uniformly from the inclusive range;
    exactly ``round(gateway_fraction * n)`` devices, chosen uniformly, are gateways.
    """
    if attach_m < 1 or n <= attach_m:
        raise ParameterError(f"need n > attach_m >= 1 (got n={n}, m={attach_m})")
    lo, hi = latency_range
    if not 0 < lo <= hi:
        raise ParameterError(f"bad latency range {latency_range}")
    clo, chi = capacity_range
    if not 0 < clo <= chi:
        raise ParameterError(f"bad capacity range {capacity_range}")
    if not 0.0 <= gateway_fraction <= 1.0:
        raise ParameterError(f"gateway_fraction {gateway_fraction} outside [0, 1]")

    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    s_graph, s_lat, s_cap, s_gw = ss.spawn(4)
    g = nx.barabasi_albert_graph(n, attach_m, seed=_sub_seed(s_graph))
    edges = sorted((min(u, v), max(u, v)) for u, v in g.edges())
    lats = np.random.default_rng(s_lat).uniform(lo, hi, size=len(edges))
    caps = np.random.default_rng(s_cap).integers(int(clo), int(chi), endpoint=True, size=n)
    n_gw = int(math.floor(gateway_fraction * n + 0.5))
    gws = set(np.random.default_rng(s_gw).choice(n, size=n_gw, replace=False).tolist())
    devices = [FogDevice(i, float(caps[i]), i in gws) for i in range(n)]
    links = [NetworkLink(u, v, float(x)) for (u, v), x in zip(edges, lats)]
    return Infrastructure(devices, links, float(cloud_latency))
