"""Dendrogram of candidate fog colonies.

Leaves ``0..n-1`` are the single devices (leaf ``i`` holds device ``i``);
merge ``k`` creates node ``n + k``; the root is ``2n - 2``.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .infra import Infrastructure, ParameterError


@dataclass
class CandidateColony:
    id: int
    devices: tuple[int, ...]
    children: tuple[int, int] | None = None
    parent: int | None = None
    coordinator: int = -1
    height: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.children is None


@dataclass
class Dendrogram:
    nodes: list[CandidateColony]
    root: int
    n_devices: int
    _desc: np.ndarray | None = field(default=None, repr=False)
    _members: np.ndarray | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.nodes)

    def __getitem__(self, i: int) -> CandidateColony:
        return self.nodes[i]

    @property
    def descendant_mask(self) -> np.ndarray:
        """``mask[x, y]`` is true when ``y`` is in the subtree rooted at ``x``."""
        if self._desc is None:
            m = len(self.nodes)
            mask = np.zeros((m, m), dtype=bool)
            # children always have smaller ids than their parent
            for node in self.nodes:
                mask[node.id, node.id] = True
                if node.children:
                    a, b = node.children
                    mask[node.id] |= mask[a] | mask[b]
            self._desc = mask
        return self._desc

    @property
    def member_mask(self) -> np.ndarray:
        """``mask[x, f]`` is true when device ``f`` belongs to node ``x``."""
        if self._members is None:
            mask = np.zeros((len(self.nodes), self.n_devices), dtype=bool)
            for node in self.nodes:
                mask[node.id, list(node.devices)] = True
            self._members = mask
        return self._members

    def ancestors(self, node: int) -> list[int]:
        out = []
        p = self.nodes[node].parent
        while p is not None:
            out.append(p)
            p = self.nodes[p].parent
        return out

    def to_tree(self, node: int | None = None) -> dict:
        """Nested export for inspection."""
        c = self.nodes[self.root if node is None else node]
        out = {
            "id": c.id,
            "devices": list(c.devices),
            "coordinator": c.coordinator,
            "height": c.height,
        }
        if c.children:
            out["children"] = [self.to_tree(c.children[0]), self.to_tree(c.children[1])]
        return out


def descendants(dendro: Dendrogram, node: int) -> set[int]:
    """All node ids in the subtree rooted at ``node``, itself included."""
    out = set()
    stack = [node]
    while stack:
        x = stack.pop()
        out.add(x)
        ch = dendro.nodes[x].children
        if ch:
            stack.extend(ch)
    return out


def build_dendrogram(infra: Infrastructure, coordinators: bool = True, linkage: str = "path") -> Dendrogram:
    """Adjacency-constrained average-linkage agglomerative clustering.

    Only clusters joined by at least one physical link may merge, so every
    candidate colony is connected. ``linkage="path"`` scores a pair by the
    mean shortest-path latency over all cross-cluster device pairs;
    ``linkage="link"`` by the mean latency of the links joining them (prone
    to chaining on scale-free graphs). Lowest score merges first, ties to the
    smallest ``(id, id)`` pair.
    """
    n = infra.n
    if n == 0:
        raise ParameterError("empty infrastructure")
    if linkage not in ("path", "link"):
        raise ParameterError(f"unknown linkage {linkage!r}")
    if not infra.is_connected():
        raise ParameterError("infrastructure graph is disconnected")
    nodes = [CandidateColony(i, (i,), coordinator=i) for i in range(n)]
    adj: dict[int, set[int]] = {i: set() for i in range(n)}
    for ln in infra.links:
        adj[ln.a].add(ln.b)
        adj[ln.b].add(ln.a)
    if linkage == "path":
        score = np.full((2 * n - 1, 2 * n - 1), np.inf)
        score[:n, :n] = infra.all_pairs()
        stats = None
    else:
        score = None
        # link statistics between live clusters: pair -> [latency sum, link count]
        stats = {(min(ln.a, ln.b), max(ln.a, ln.b)): [ln.latency, 1] for ln in infra.links}
    heap = []
    for a in range(n):
        for b in adj[a]:
            if a < b:
                v = score[a, b] if stats is None else stats[(a, b)][0]
                heap.append((float(v), a, b))
    heapq.heapify(heap)
    alive = set(range(n))
    size = [1] * n
    while len(alive) > 1:
        _, a, b = heapq.heappop(heap)
        if a not in alive or b not in alive:
            continue
        c = len(nodes)
        devs = tuple(sorted(nodes[a].devices + nodes[b].devices))
        nodes.append(CandidateColony(c, devs, children=(a, b), height=c - n + 1))
        nodes[a].parent = c
        nodes[b].parent = c
        size.append(size[a] + size[b])
        alive -= {a, b}
        if score is not None:
            rest = sorted(alive)
            score[c, rest] = (size[a] * score[a, rest] + size[b] * score[b, rest]) / size[c]
            score[rest, c] = score[c, rest]
        adj[c] = set()
        for x in sorted((adj.pop(a) | adj.pop(b)) - {a, b}):
            adj[x] -= {a, b}
            adj[x].add(c)
            adj[c].add(x)
            if stats is None:
                v = float(score[x, c])
            else:
                tot = [0.0, 0]
                for old in (a, b):
                    st = stats.pop((min(old, x), max(old, x)), None)
                    if st is not None:
                        tot[0] += st[0]
                        tot[1] += st[1]
                stats[(x, c)] = tot
                v = tot[0] / tot[1]
            heapq.heappush(heap, (v, x, c))
        alive.add(c)
    d = Dendrogram(nodes, len(nodes) - 1, n)
    if coordinators:
        assign_coordinators(d, infra)
    return d


def assign_coordinators(dendro: Dendrogram, infra: Infrastructure) -> Dendrogram:
    """Coordinator of each candidate = highest-betweenness member, ties to lowest id."""
    lat = infra.latency_matrix
    for node in dendro.nodes:
        if len(node.devices) < 3:
            node.coordinator = node.devices[0]
            continue
        scores = kernels.betweenness(lat, np.array(node.devices, dtype=np.int64))
        node.coordinator = node.devices[int(np.argmax(scores))]
    return dendro
