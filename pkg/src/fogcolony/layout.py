"""Colony-layout chromosomes: validity, repair, crossover and mutation.

A chromosome is a boolean vector over dendrogram node ids. It encodes a
valid layout when the device sets of the selected nodes partition the
devices.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dendro import CandidateColony, Dendrogram


@dataclass(frozen=True)
class Validity:
    valid: bool
    duplicated: tuple[int, ...]
    missing: tuple[int, ...]

    def __bool__(self) -> bool:
        return self.valid


@dataclass(frozen=True)
class Layout:
    colonies: tuple[CandidateColony, ...]

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(c.id for c in self.colonies)

    def __len__(self) -> int:
        return len(self.colonies)


def chromosome(dendro: Dendrogram, selected) -> np.ndarray:
    c = np.zeros(len(dendro), dtype=bool)
    c[list(selected)] = True
    return c


def selected(c: np.ndarray) -> list[int]:
    return np.flatnonzero(c).tolist()


def to_bits(c: np.ndarray) -> str:
    return "".join("1" if b else "0" for b in c)


def from_bits(s: str) -> np.ndarray:
    return np.array([ch == "1" for ch in s.strip()], dtype=bool)


def _check_len(c: np.ndarray, d: Dendrogram) -> None:
    if len(c) != len(d):
        raise ValueError(f"chromosome length {len(c)} != {len(d)} dendrogram nodes")


def is_valid(c: np.ndarray, d: Dendrogram) -> Validity:
    """Check that the selected colonies partition the devices."""
    _check_len(c, d)
    cover = d.member_mask[np.asarray(c, dtype=bool)].sum(axis=0)
    dup = tuple(np.flatnonzero(cover > 1).tolist())
    miss = tuple(np.flatnonzero(cover == 0).tolist())
    return Validity(not dup and not miss, dup, miss)


def to_layout(c: np.ndarray, d: Dendrogram) -> Layout:
    v = is_valid(c, d)
    if not v:
        raise ValueError(f"invalid layout: duplicated={v.duplicated} missing={v.missing}")
    return Layout(tuple(d.nodes[i] for i in selected(c)))


def repair_agglomerative(c: np.ndarray, d: Dendrogram) -> np.ndarray:
    """Resolve conflicts toward fewer, larger colonies.

    Selected nodes inside another selected node are dropped. Each uncovered
    device is then grouped with its neighbouring colonies: the largest
    uncovered subtree holding it is merged with its sibling by selecting
    their parent (or the subtree itself when it is the root).
    """
    _check_len(c, d)
    desc = d.descendant_mask
    members = d.member_mask
    out = np.asarray(c, dtype=bool).copy()
    sel = np.flatnonzero(out)
    if sel.size:
        # drop contents: nodes with a selected strict ancestor
        inside = desc[sel].sum(axis=0) - out.astype(int) > 0
        out &= ~inside
    covered = members[out].any(axis=0)
    for f in range(d.n_devices):
        if covered[f]:
            continue
        node = f
        parent = d.nodes[node].parent
        while parent is not None and not (members[parent] & covered).any():
            node = parent
            parent = d.nodes[node].parent
        target = node if parent is None else parent
        out &= ~desc[target]
        out[target] = True
        covered |= members[target]
    return out


def repair_divisive(c: np.ndarray, d: Dendrogram) -> np.ndarray:
    """Resolve conflicts toward more, smaller colonies.

    Selected nodes containing other selected nodes are dropped; the part of
    each dropped container not held by its contents is covered by its
    largest subtrees disjoint from them. Devices still uncovered get their
    single-device colony.
    """
    _check_len(c, d)
    desc = d.descendant_mask
    members = d.member_mask
    sel = np.asarray(c, dtype=bool)
    out = sel.copy()
    idx = np.flatnonzero(sel)
    if idx.size:
        # containers: selected nodes with a selected strict descendant
        sub = desc[np.ix_(idx, idx)].sum(axis=1) > 1
        containers = idx[sub]
        contents = sel & ~chromosome(d, containers)
        held = members[contents].any(axis=0)
        for x in containers:
            out[x] = False
            stack = [int(x)]
            while stack:
                y = stack.pop()
                if contents[y]:
                    continue
                if not (members[y] & held).any():
                    out[y] = True
                    continue
                stack.extend(d.nodes[y].children)
    covered = members[out].any(axis=0)
    for f in np.flatnonzero(~covered):
        out[f] = True
    return out


def crossover_subtree(a: np.ndarray, b: np.ndarray, d: Dendrogram, rng, node: int | None = None):
    """Swap the bits of a uniformly chosen subtree between two chromosomes."""
    if len(a) != len(b):
        raise ValueError("parents differ in length")
    if node is None:
        node = int(rng.integers(len(d)))
    mask = d.descendant_mask[node]
    ca, cb = a.copy(), b.copy()
    ca[mask], cb[mask] = b[mask], a[mask]
    return ca, cb


def mutate_join(c: np.ndarray, d: Dendrogram, rng, node: int | None = None) -> np.ndarray:
    """Replace a selected colony by its parent; unchanged if only the root qualifies."""
    out = c.copy()
    if node is None:
        cand = [i for i in selected(c) if d.nodes[i].parent is not None]
        if not cand:
            return out
        node = cand[int(rng.integers(len(cand)))]
    parent = d.nodes[node].parent
    if parent is None:
        return out
    out[node] = False
    out[parent] = True
    return out


def mutate_split(c: np.ndarray, d: Dendrogram, rng, node: int | None = None) -> np.ndarray:
    """Replace a selected non-leaf colony by its two children."""
    out = c.copy()
    if node is None:
        cand = [i for i in selected(c) if not d.nodes[i].is_leaf]
        if not cand:
            return out
        node = cand[int(rng.integers(len(cand)))]
    ch = d.nodes[node].children
    if ch is None:
        return out
    out[node] = False
    out[list(ch)] = True
    return out


def random_layout(d: Dendrogram, split_prob: float, rng) -> np.ndarray:
    """Top-down random cut: split with ``split_prob`` at each internal node."""
    if not 0.0 <= split_prob <= 1.0:
        raise ValueError("split_prob outside [0, 1]")
    out = np.zeros(len(d), dtype=bool)
    stack = [d.root]
    while stack:
        x = stack.pop()
        ch = d.nodes[x].children
        if ch is not None and rng.random() < split_prob:
            stack.extend((ch[1], ch[0]))
        else:
            out[x] = True
    return out


def cut_by_size(d: Dendrogram, target_size: int) -> np.ndarray:
    """Top-down cut keeping the first nodes with at most ``target_size`` devices."""
    if target_size < 1:
        raise ValueError("target_size must be >= 1")
    out = np.zeros(len(d), dtype=bool)
    stack = [d.root]
    while stack:
        x = stack.pop()
        node = d.nodes[x]
        if node.is_leaf or len(node.devices) <= target_size:
            out[x] = True
        else:
            stack.extend(node.children)
    return out
