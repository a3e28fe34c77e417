"""First-fit decreasing service placement inside colonies, with overflow shifting.

Each colony places the services its own users request (most popular first)
on the device closest on average to where each service is requested.
Services that fit nowhere are shifted to the colony with the nearest
coordinator that has not tried them yet; when every colony has tried a
service it is left to the cloud, which hosts every service.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .dendro import CandidateColony, Dendrogram
from .infra import Infrastructure
from .layout import Layout
from .workload import Workload


@dataclass
class PlacementCost:
    fit_checks: int = 0
    services_processed: int = 0
    seconds: float = 0.0


@dataclass
class ColonyWorkQueue:
    requested: list[int] = field(default_factory=list)
    shifted: list[int] = field(default_factory=list)

    def ordered(self, workload: Workload) -> list[int]:
        pop = workload.popularity
        key = lambda s: (-pop[s], s)  # noqa: E731
        return sorted(self.requested, key=key) + sorted(self.shifted, key=key)


@dataclass
class ColonyPlacement:
    """Placement matrix of one colony, kept sparse: service -> device."""

    colony: CandidateColony
    hosts: dict[int, int] = field(default_factory=dict)
    cost: PlacementCost = field(default_factory=PlacementCost)
    failed: set[int] = field(default_factory=set)


@dataclass
class LayoutPlacement:
    colonies: list[ColonyPlacement]
    cloud_services: set[int]
    shifts: int = 0

    def triples(self) -> list[tuple[int, int, int]]:
        """``(colony id, service id, device id)`` for every fog instance."""
        return [
            (cp.colony.id, s, dev)
            for cp in self.colonies
            for s, dev in sorted(cp.hosts.items())
        ]

    def device_load(self, workload: Workload, n_devices: int) -> np.ndarray:
        load = np.zeros(n_devices)
        services = workload.services
        for cp in self.colonies:
            for s, dev in cp.hosts.items():
                load[dev] += services[s].resource_req
        return load


def capacity_violations(placement: LayoutPlacement, infra: Infrastructure, workload: Workload):
    """Devices whose placed requirements exceed their capacity."""
    load = placement.device_load(workload, infra.n)
    return np.flatnonzero(load > infra.capacities).tolist()


def _requesting_gateways(colony: CandidateColony, workload: Workload) -> dict[int, list[int]]:
    at = workload.apps_at
    out: dict[int, list[int]] = {}
    for dev in colony.devices:  # ascending, so gateway lists come out sorted
        for a in at.get(dev, ()):
            out.setdefault(a, []).append(dev)
    return out


def own_requests(colony: CandidateColony, workload: Workload) -> list[int]:
    """Services of every application requested by users attached in the colony."""
    apps = _requesting_gateways(colony, workload)
    return [s.id for a in sorted(apps) for s in workload.app_of[a].services]


def place_colony(
    cp: ColonyPlacement,
    queue: ColonyWorkQueue,
    infra: Infrastructure,
    workload: Workload,
    remaining: np.ndarray,
) -> list[int]:
    """Greedy first-fit of ``queue`` into one colony; returns the shifted-out services.

    ``remaining`` holds the residual capacity of every device and is updated.
    Services the colony already hosts or already failed are skipped. Cost is
    accumulated on ``cp.cost``: one fit check per (service, device) test.
    """
    colony = cp.colony
    order = [s for s in queue.ordered(workload) if s not in cp.hosts and s not in cp.failed]
    order = list(dict.fromkeys(order))
    if not order:
        return []
    t0 = time.perf_counter()
    members = np.asarray(colony.devices, dtype=np.int64)
    local = {int(dev): i for i, dev in enumerate(colony.devices)}
    dist = np.ascontiguousarray(infra.restricted(colony.devices))
    gws = _requesting_gateways(colony, workload)
    shifted = set(queue.shifted) - set(queue.requested)
    coord = local[colony.coordinator]
    services = workload.services
    parent_of = workload.service_parent
    pos = {s: i for i, s in enumerate(order)}

    q = len(order)
    req = np.empty(q)
    parent_item = np.full(q, -1, dtype=np.int64)
    parent_dev = np.full(q, -1, dtype=np.int64)
    ptr = [0]
    idx: list[int] = []
    for i, s in enumerate(order):
        svc = services[s]
        req[i] = svc.resource_req
        p = parent_of.get(s)
        if p is not None:
            if p in pos and pos[p] < i:
                parent_item[i] = pos[p]
            elif p in cp.hosts:
                parent_dev[i] = local[cp.hosts[p]]
        if s in shifted:
            idx.append(coord)
        else:
            idx.extend(local[g] for g in gws.get(svc.app_id, [colony.coordinator]))
        ptr.append(len(idx))

    sub_remaining = np.ascontiguousarray(remaining[members])
    placed, checks = kernels.first_fit(
        dist,
        sub_remaining,
        req,
        np.asarray(ptr, dtype=np.int64),
        np.asarray(idx, dtype=np.int64),
        parent_item,
        parent_dev,
    )
    remaining[members] = sub_remaining
    out = []
    for s, d in zip(order, placed):
        if d >= 0:
            cp.hosts[s] = int(members[d])
        else:
            cp.failed.add(s)
            out.append(s)
    cp.cost.fit_checks += int(checks.sum())
    cp.cost.services_processed += q
    cp.cost.seconds += time.perf_counter() - t0
    return out


def place_layout(
    layout: Layout, infra: Infrastructure, workload: Workload, dendro: Dendrogram | None = None
) -> LayoutPlacement:
    """Place all requested services for a layout, shifting overflow between colonies."""
    colonies = sorted(layout.colonies, key=lambda c: c.id)
    cps = [ColonyPlacement(c) for c in colonies]
    remaining = infra.capacities.copy()
    apsp = infra.all_pairs()
    coords = np.array([c.coordinator for c in colonies], dtype=np.int64)
    coord_dist = apsp[np.ix_(coords, coords)]
    # per colony: other colonies by coordinator distance, ties by position
    neighbour_order = [
        [int(j) for j in np.lexsort((np.arange(len(cps)), coord_dist[i])) if j != i]
        for i in range(len(cps))
    ]
    pending: list[tuple[int, int, frozenset]] = []  # (service, colony idx, tried)
    for i, cp in enumerate(cps):
        queue = ColonyWorkQueue(requested=own_requests(cp.colony, workload))
        for s in place_colony(cp, queue, infra, workload, remaining):
            pending.append((s, i, frozenset([i])))

    cloud: set[int] = set()
    shifts = 0
    while pending:
        incoming: dict[int, dict[int, list[frozenset]]] = {}
        for s, i, tried in pending:
            while True:
                dest = next((j for j in neighbour_order[i] if j not in tried), None)
                if dest is None:
                    cloud.add(s)
                    break
                shifts += 1
                if s in cps[dest].hosts:
                    break
                tried = tried | {dest}
                if s in cps[dest].failed:
                    i = dest
                    continue
                incoming.setdefault(dest, {}).setdefault(s, []).append(tried)
                break
        pending = []
        for dest in sorted(incoming):
            chains = incoming[dest]
            queue = ColonyWorkQueue(shifted=sorted(chains))
            failed = set(place_colony(cps[dest], queue, infra, workload, remaining))
            for s in sorted(chains):
                if s in failed:
                    pending.extend((s, dest, t) for t in chains[s])
        pending = list(dict.fromkeys(pending))
    return LayoutPlacement(cps, cloud, shifts)
