"""Pareto-front quality metrics and solution selection."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def dominates(x, y) -> bool:
    """Minimization dominance: no worse everywhere, strictly better somewhere."""
    return all(a <= b for a, b in zip(x, y)) and any(a < b for a, b in zip(x, y))


def coverage(a, b) -> float:
    """Fraction of the points of ``b`` dominated by at least one point of ``a``."""
    b = [tuple(p) for p in b]
    if not b:
        raise ValueError("coverage is undefined for an empty second set")
    a = [tuple(p) for p in a]
    hit = sum(1 for y in b if any(dominates(x, y) for x in a))
    return hit / len(b)


def s_metric(front, reference) -> float:
    """Area (2-D hypervolume) dominated by ``front`` and bounded by ``reference``."""
    pts = np.asarray(front, dtype=np.float64).reshape(-1, 2)
    ref = np.asarray(reference, dtype=np.float64)
    if (pts > ref).any():
        raise ValueError("every point must weakly dominate the reference point")
    if pts.size == 0:
        return 0.0
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    area = 0.0
    best_y = ref[1]
    for x, y in pts[order]:
        if y < best_y:
            area += (ref[0] - x) * (best_y - y)
            best_y = y
    return float(area)


def normalized_s_metric(front, baseline) -> float:
    """S metric on objectives divided by a baseline's (the one-colony layout).

    The reference point is ``(1, 1)`` widened, per objective, to the largest
    normalized coordinate of the front so every point is admissible.
    """
    pts = np.asarray(front, dtype=np.float64).reshape(-1, 2)
    scale = np.asarray(baseline, dtype=np.float64)
    scale = np.where(scale > 0, scale, 1.0)
    norm = pts / scale
    ref = np.maximum(1.0, norm.max(axis=0)) if norm.size else np.ones(2)
    return s_metric(norm, ref)


def first_dominating_generation(traces, baselines):
    """First generation whose front dominates every baseline point, or None."""
    if not traces:
        raise ValueError("no traces")
    base = [tuple(b) for b in baselines]
    for tr in traces:
        front = [tuple(p) for p in tr.objectives[tr.front]]
        if all(coverage(front, [b]) == 1.0 for b in base):
            return tr.generation
    return None


def select_small_ed(front):
    """Front point nearest the origin after min-max normalization over the front.

    Returns ``(index, point)``; ties go to the lower response time.
    """
    pts = np.asarray(front, dtype=np.float64).reshape(-1, 2)
    if pts.size == 0:
        raise ValueError("empty front")
    lo = pts.min(axis=0)
    span = pts.max(axis=0) - lo
    norm = np.where(span > 0, (pts - lo) / np.where(span > 0, span, 1.0), 0.0)
    dist = np.hypot(norm[:, 0], norm[:, 1])
    best = min(range(len(pts)), key=lambda i: (dist[i], pts[i, 0], pts[i, 1], i))
    return best, tuple(float(v) for v in pts[best])


@dataclass
class FrontSummary:
    points: list[tuple[float, float]]
    s_metric: float
    coverage_vs: dict[str, float] = field(default_factory=dict)
    coverage_of: dict[str, float] = field(default_factory=dict)


def summarize(front, baselines: dict[str, tuple[float, float]], normalize_by: str = "one-colony"):
    """S metric of the front plus coverage against each labelled baseline point.

    ``coverage_vs[label]`` is C(front, baseline); ``coverage_of[label]`` is
    C(baseline, front).
    """
    pts = [tuple(float(v) for v in p) for p in front]
    s = normalized_s_metric(pts, baselines[normalize_by]) if pts else 0.0
    vs = {k: coverage(pts, [b]) for k, b in baselines.items()}
    of = {k: coverage([b], pts) for k, b in baselines.items()} if pts else {}
    return FrontSummary(pts, float(s), vs, of)
