"""Multi-service applications, the users requesting them, and workload generation."""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .infra import Infrastructure, ParameterError


@dataclass(frozen=True)
class Service:
    id: int
    app_id: int
    resource_req: float

    def __post_init__(self):
        if not self.resource_req > 0:
            raise ParameterError(f"service {self.id}: resource_req must be > 0")


@dataclass(frozen=True)
class Application:
    """Services plus directed request pairs forming a tree rooted at ``root_service``."""

    id: int
    services: tuple[Service, ...]
    requests: tuple[tuple[int, int], ...]
    root_service: int

    def __post_init__(self):
        ids = {s.id for s in self.services}
        if self.root_service not in ids:
            raise ParameterError(f"app {self.id}: root service not among its services")
        targets = [t for _, t in self.requests]
        if self.root_service in targets:
            raise ParameterError(f"app {self.id}: root service has an incoming request")
        for a, b in self.requests:
            if a not in ids or b not in ids:
                raise ParameterError(f"app {self.id}: request ({a}, {b}) leaves the app")
        # connected and acyclic: reachable from the root through requests
        seen = {self.root_service}
        children = self.children
        stack = [self.root_service]
        while stack:
            for c in children.get(stack.pop(), ()):
                if c in seen:
                    raise ParameterError(f"app {self.id}: request graph is not a tree")
                seen.add(c)
                stack.append(c)
        if seen != ids:
            raise ParameterError(f"app {self.id}: request graph is not connected")

    @property
    def children(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for a, b in self.requests:
            out.setdefault(a, []).append(b)
        return {k: sorted(v) for k, v in out.items()}

    @property
    def parent(self) -> dict[int, int]:
        return {b: a for a, b in self.requests}


@dataclass(frozen=True)
class User:
    id: int
    app_id: int
    gateway_device: int
    request_rate: float = 0.0


@dataclass(frozen=True)
class Workload:
    apps: tuple[Application, ...]
    users: tuple[User, ...]

    def validate(self, infra: Infrastructure | None = None) -> None:
        app_ids = {a.id for a in self.apps}
        gateways = set(infra.gateways) if infra is not None else None
        for u in self.users:
            if u.app_id not in app_ids:
                raise ParameterError(f"user {u.id} requests unknown app {u.app_id}")
            if gateways is not None and u.gateway_device not in gateways:
                raise ParameterError(f"user {u.id} is attached to non-gateway {u.gateway_device}")

    @cached_property
    def services(self) -> dict[int, Service]:
        return {s.id: s for a in self.apps for s in a.services}

    @cached_property
    def app_of(self) -> dict[int, Application]:
        return {a.id: a for a in self.apps}

    @cached_property
    def service_parent(self) -> dict[int, int]:
        out = {}
        for a in self.apps:
            out.update(a.parent)
        return out

    @cached_property
    def popularity(self) -> dict[int, int]:
        """Requesting-user count of each service's application."""
        per_app = Counter(u.app_id for u in self.users)
        return {s.id: per_app.get(s.app_id, 0) for a in self.apps for s in a.services}

    @cached_property
    def apps_at(self) -> dict[int, tuple[int, ...]]:
        """Applications requested by users attached at each gateway device."""
        out: dict[int, set[int]] = {}
        for u in self.users:
            out.setdefault(u.gateway_device, set()).add(u.app_id)
        return {g: tuple(sorted(a)) for g, a in out.items()}

    def to_dict(self) -> dict:
        return {
            "apps": [
                {
                    "id": a.id,
                    "root": a.root_service,
                    "services": [[s.id, s.resource_req] for s in a.services],
                    "requests": [list(r) for r in a.requests],
                }
                for a in self.apps
            ],
            "users": [[u.id, u.app_id, u.gateway_device, u.request_rate] for u in self.users],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Workload":
        apps = []
        for a in data["apps"]:
            services = tuple(Service(int(sid), a["id"], float(rr)) for sid, rr in a["services"])
            requests = tuple((int(x), int(y)) for x, y in a["requests"])
            apps.append(Application(a["id"], services, requests, int(a["root"])))
        users = tuple(User(int(i), int(ap), int(g), float(r)) for i, ap, g, r in data["users"])
        return cls(tuple(apps), users)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def app_request_pairs(app: Application) -> list[tuple[int, int]]:
    """Request pairs in breadth-first order from the root, children by id."""
    children = app.children
    out = []
    queue = [app.root_service]
    while queue:
        nxt = []
        for s in queue:
            for c in children.get(s, ()):
                out.append((s, c))
                nxt.append(c)
        queue = nxt
    return out


def generate_workload(
    infra: Infrastructure,
    n_apps: int,
    services_per_app=(2, 5),
    req_range=(1, 2),
    popularity_max: float = 0.75,
    rate_range=(5.0, 10.0),
    seed=0,
) -> Workload:
    """Random-tree applications and per-(gateway, app) Bernoulli users.

    ``rate_range`` is the user inter-request time in ms; the stored
    ``request_rate`` is its reciprocal. Resource requirements are integers.
    """
    gateways = infra.gateways
    if not gateways:
        raise ParameterError("infrastructure has no gateway devices")
    if n_apps < 0:
        raise ParameterError("n_apps must be >= 0")
    smin, smax = services_per_app
    rmin, rmax = req_range
    tmin, tmax = rate_range
    if not 1 <= smin <= smax:
        raise ParameterError(f"bad services_per_app {services_per_app}")
    if not 0 < rmin <= rmax:
        raise ParameterError(f"bad req_range {req_range}")
    if not 0 < tmin <= tmax:
        raise ParameterError(f"bad rate_range {rate_range}")
    if not 0.0 <= popularity_max <= 1.0:
        raise ParameterError(f"popularity_max {popularity_max} outside [0, 1]")

    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    s_apps, s_users = ss.spawn(2)
    rng = np.random.default_rng(s_apps)
    apps = []
    next_sid = 0
    for a in range(n_apps):
        count = int(rng.integers(smin, smax, endpoint=True))
        reqs = rng.integers(int(rmin), int(rmax), endpoint=True, size=count)
        ids = list(range(next_sid, next_sid + count))
        next_sid += count
        services = tuple(Service(sid, a, float(r)) for sid, r in zip(ids, reqs))
        requests = tuple((ids[int(rng.integers(0, k))], ids[k]) for k in range(1, count))
        apps.append(Application(a, services, requests, ids[0]))

    urng = np.random.default_rng(s_users)
    users = []
    for g in gateways:
        for a in range(n_apps):
            p = urng.uniform(0.0, popularity_max)
            hit = urng.random() < p
            gap = urng.uniform(tmin, tmax)
            if hit:
                users.append(User(len(users), a, g, 1.0 / gap))
    return Workload(tuple(apps), tuple(users))
