"""Objectives of a colony layout: mean response time and mean placement time.

Traffic between devices of one colony follows the shortest path inside the
colony. Traffic leaving a colony goes source -> own coordinator -> target
colony coordinator -> target device, or source -> own coordinator -> cloud,
whichever is cheaper. The cloud hosts an instance of every service.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .dendro import Dendrogram
from .infra import Infrastructure
from .layout import Layout, to_layout
from .placement import LayoutPlacement, capacity_violations, place_layout
from .workload import Application, User, Workload, app_request_pairs

#: Pseudo device id standing for the cloud.
CLOUD = -1

COST_MODEL = "cost"
WALL_CLOCK = "wall"


class ObjectiveVector(NamedTuple):
    response_time: float
    placement_time: float


class Route(NamedTuple):
    time: float
    device: int  # device holding the reached instance, or CLOUD
    kind: str  # "local", "colony" or "cloud"


@dataclass
class RoutingContext:
    """Read-only routing view of a placed layout."""

    infra: Infrastructure
    layout: Layout
    hosts: list[dict[int, list[int]]]  # per colony: service -> hosting devices
    colony_of: np.ndarray = field(init=False)
    _inter: dict = field(init=False, default_factory=dict)

    def __post_init__(self):
        self.colony_of = np.full(self.infra.n, -1, dtype=np.int64)
        for i, col in enumerate(self.layout.colonies):
            self.colony_of[list(col.devices)] = i
        if (self.colony_of < 0).any():
            raise ValueError("layout does not cover every device")
        self._local = [{d: k for k, d in enumerate(c.devices)} for c in self.layout.colonies]
        self._dist = [self.infra.restricted(c.devices) for c in self.layout.colonies]
        self._coord = [self._local[i][c.coordinator] for i, c in enumerate(self.layout.colonies)]
        # per service: colonies hosting it, with nearest instance to their coordinator
        self._offers: dict[int, list[tuple[int, float, int]]] = {}
        for j, h in enumerate(self.hosts):
            for s, devs in h.items():
                d, dev = self._nearest(j, self._coord[j], devs)
                self._offers.setdefault(s, []).append((j, d, dev))

    @classmethod
    def from_placement(cls, infra, layout, placement: LayoutPlacement) -> "RoutingContext":
        by_id = {cp.colony.id: cp for cp in placement.colonies}
        hosts = [{s: [d] for s, d in by_id[c.id].hosts.items()} for c in layout.colonies]
        return cls(infra, layout, hosts)

    def _nearest(self, colony: int, src_local: int, devs) -> tuple[float, int]:
        dist = self._dist[colony]
        loc = self._local[colony]
        return min((float(dist[src_local, loc[d]]), d) for d in devs)

    def coordinator(self, colony: int) -> int:
        return self.layout.colonies[colony].coordinator

    def inter_colony(self, colony: int, service: int) -> tuple[float, int, int]:
        """Cheapest coordinator-to-instance leg from ``colony`` to another colony.

        Returns ``(latency from own coordinator, device, colony)``; ``inf`` when no
        other colony hosts the service.
        """
        key = (colony, service)
        hit = self._inter.get(key)
        if hit is None:
            apsp = self.infra.all_pairs()
            src = self.coordinator(colony)
            hit = (math.inf, CLOUD, -1)
            for j, d, dev in self._offers.get(service, ()):
                if j == colony:
                    continue
                v = float(apsp[src, self.coordinator(j)]) + d
                if v < hit[0]:
                    hit = (v, dev, j)
            self._inter[key] = hit
        return hit


def network_time_pair(ctx: RoutingContext, source_device: int, target_service: int) -> Route:
    """Latency from a device (or the cloud) to the nearest reachable instance of a service."""
    if source_device == CLOUD:
        return Route(0.0, CLOUD, "cloud")
    i = int(ctx.colony_of[source_device])
    src = ctx._local[i][source_device]
    own = ctx.hosts[i].get(target_service)
    if own:
        d, dev = ctx._nearest(i, src, own)
        return Route(d, dev, "local")
    up = float(ctx._dist[i][src, ctx._coord[i]])
    leg, dev, _ = ctx.inter_colony(i, target_service)
    cloud = up + ctx.infra.cloud_latency
    if up + leg <= cloud:
        return Route(up + leg, dev, "colony")
    return Route(cloud, CLOUD, "cloud")


def route_app(ctx: RoutingContext, user: User, app: Application) -> list[Route]:
    """Routes of one full request chain: gateway -> root, then every request pair."""
    if user.app_id != app.id:
        raise ValueError(f"user {user.id} does not request app {app.id}")
    first = network_time_pair(ctx, user.gateway_device, app.root_service)
    at = {app.root_service: first.device}
    routes = [first]
    for sp, sq in app_request_pairs(app):
        r = network_time_pair(ctx, at[sp], sq)
        at[sq] = r.device
        routes.append(r)
    return routes


def network_time_app(ctx: RoutingContext, user: User, app: Application) -> float:
    return math.fsum(r.time for r in route_app(ctx, user, app))


def response_time(ctx: RoutingContext, workload: Workload) -> float:
    """Mean over users of the routed request-chain latency."""
    if not workload.users:
        raise ValueError("response time is undefined without users")
    apps = workload.app_of
    times = [network_time_app(ctx, u, apps[u.app_id]) for u in workload.users]
    return math.fsum(times) / len(times)


def placement_time(costs, mode: str = COST_MODEL) -> float:
    """Mean per-colony placement cost.

    ``costs`` are :class:`PlacementCost` records or plain numbers. In cost
    mode a colony costs its fit checks; in wall-clock mode its measured
    execution time in milliseconds.
    """
    costs = list(costs)
    if not costs:
        raise ValueError("no colonies")
    vals = []
    for c in costs:
        if isinstance(c, (int, float)):
            vals.append(float(c))
        elif mode == COST_MODEL:
            vals.append(float(c.fit_checks))
        elif mode == WALL_CLOCK:
            vals.append(c.seconds * 1000.0)
        else:
            raise ValueError(f"unknown fitness mode {mode!r}")
    return math.fsum(vals) / len(vals)


@dataclass
class Evaluation:
    objectives: ObjectiveVector
    colony_costs: tuple[float, ...]
    placement: LayoutPlacement | None = None


class Evaluator:
    """Places and scores chromosomes for one scenario.

    In cost mode results are deterministic and memoized per chromosome.
    With ``audit=True`` every placement is checked against device
    capacities and violations are counted in ``violations``.
    """

    def __init__(
        self,
        infra: Infrastructure,
        workload: Workload,
        dendro: Dendrogram,
        mode: str = COST_MODEL,
        audit: bool = False,
        keep_placements: bool = False,
    ):
        if mode not in (COST_MODEL, WALL_CLOCK):
            raise ValueError(f"unknown fitness mode {mode!r}")
        self.infra = infra
        self.workload = workload
        self.dendro = dendro
        self.mode = mode
        self.audit = audit
        self.keep_placements = keep_placements
        self.violations = 0
        self.placements_checked = 0
        self.calls = 0
        self._cache: dict[bytes, Evaluation] = {}
        infra.all_pairs()

    def evaluate_layout(self, layout: Layout) -> Evaluation:
        self.calls += 1
        placement = place_layout(layout, self.infra, self.workload, self.dendro)
        if self.audit:
            self.placements_checked += 1
            self.violations += len(capacity_violations(placement, self.infra, self.workload))
        ctx = RoutingContext.from_placement(self.infra, layout, placement)
        rt = response_time(ctx, self.workload)
        costs = [cp.cost for cp in placement.colonies]
        pt = placement_time(costs, self.mode)
        per_colony = tuple(placement_time([c], self.mode) for c in costs)
        return Evaluation(
            ObjectiveVector(rt, pt), per_colony, placement if self.keep_placements else None
        )

    def evaluate(self, chrom: np.ndarray) -> Evaluation:
        key = np.packbits(chrom).tobytes()
        if self.mode == COST_MODEL:
            hit = self._cache.get(key)
            if hit is not None:
                return hit
        ev = self.evaluate_layout(to_layout(chrom, self.dendro))
        if self.mode == COST_MODEL:
            self._cache[key] = ev
        return ev
