"""Pure-Python/numpy implementations of the numerical kernels.

These mirror ``_ckernels.pyx`` operation for operation (same relaxation
order, same tie rules, same float accumulation order) so that both backends
return bit-identical results.
"""
import numpy as np

#: Two path lengths closer than this are treated as equal in betweenness.
PATH_EPS = 1e-9


def restricted_dist(lat, members):
    """All-pairs shortest latencies inside the subgraph induced by ``members``.

    ``lat`` is the dense ``n x n`` link-latency matrix (``inf`` where no link,
    ``0`` on the diagonal). Returns a ``k x k`` matrix indexed by position in
    ``members``; unreachable pairs are ``inf``.
    """
    members = np.asarray(members, dtype=np.int64)
    k = members.size
    w = np.ascontiguousarray(lat[np.ix_(members, members)], dtype=np.float64)
    np.fill_diagonal(w, np.inf)
    dist = np.full((k, k), np.inf)
    dist[np.arange(k), np.arange(k)] = 0.0
    done = np.zeros((k, k), dtype=bool)
    rows = np.arange(k)
    # one Dijkstra per source, advanced in lockstep
    for _ in range(k):
        masked = np.where(done, np.inf, dist)
        u = np.argmin(masked, axis=1)
        du = masked[rows, u]
        live = np.isfinite(du)
        if not live.any():
            break
        done[rows[live], u[live]] = True
        cand = du[:, None] + w[u]
        better = (cand < dist) & ~done & live[:, None]
        dist = np.where(better, cand, dist)
    return dist


def betweenness(lat, members):
    """Latency-weighted betweenness (Brandes) on the induced subgraph.

    Unnormalized, undirected convention (each unordered pair counted once).
    """
    members = np.asarray(members, dtype=np.int64)
    k = members.size
    bc = np.zeros(k)
    if k < 3:
        return bc
    w = np.ascontiguousarray(lat[np.ix_(members, members)], dtype=np.float64)
    np.fill_diagonal(w, np.inf)
    linked = np.isfinite(w)
    for s in range(k):
        dist = np.full(k, np.inf)
        sigma = np.zeros(k)
        pred = np.zeros((k, k), dtype=bool)
        done = np.zeros(k, dtype=bool)
        dist[s] = 0.0
        sigma[s] = 1.0
        order = []
        for _ in range(k):
            masked = np.where(done, np.inf, dist)
            u = int(np.argmin(masked))
            if not np.isfinite(masked[u]):
                break
            done[u] = True
            order.append(u)
            for v in np.flatnonzero(linked[u] & ~done):
                alt = dist[u] + w[u, v]
                if alt < dist[v] - PATH_EPS:
                    dist[v] = alt
                    sigma[v] = sigma[u]
                    pred[v, :] = False
                    pred[v, u] = True
                elif abs(alt - dist[v]) <= PATH_EPS:
                    sigma[v] += sigma[u]
                    pred[v, u] = True
        delta = np.zeros(k)
        for w_ in reversed(order):
            ps = pred[w_]
            delta[ps] += sigma[ps] / sigma[w_] * (1.0 + delta[w_])
            if w_ != s:
                bc[w_] += delta[w_]
    return bc / 2.0


def nondominated_ranks(obj):
    """Front index (1-based) of every row of an ``N x M`` minimization array."""
    obj = np.asarray(obj, dtype=np.float64)
    n = obj.shape[0]
    ranks = np.zeros(n, dtype=np.int64)
    if n == 0:
        return ranks
    le = (obj[:, None, :] <= obj[None, :, :]).all(axis=2)
    lt = (obj[:, None, :] < obj[None, :, :]).any(axis=2)
    dom = le & lt  # dom[i, j]: i dominates j
    count = dom.sum(axis=0)
    current = np.flatnonzero(count == 0)
    rank = 1
    while current.size:
        ranks[current] = rank
        count = count - dom[current].sum(axis=0)
        count[current] = -1
        current = np.flatnonzero(count == 0)
        rank += 1
    return ranks


def first_fit(dist, remaining, req, fb_ptr, fb_idx, parent_item, parent_dev):
    """First-fit placement of a queue of services inside one colony.

    For item ``i`` the requesting devices are the device chosen for its
    parent item (if placed in this call), else ``parent_dev[i]`` (if >= 0),
    else ``fb_idx[fb_ptr[i]:fb_ptr[i+1]]``. Devices are tried in ascending
    order of summed distance to the requesting devices, then of the largest
    single distance, then by index.
    ``remaining`` is updated in place. Returns ``(placed, fit_checks)`` where
    ``placed[i]`` is the local device index or -1.
    """
    q = len(req)
    k = dist.shape[0]
    placed = np.full(q, -1, dtype=np.int64)
    checks = np.zeros(q, dtype=np.int64)
    for i in range(q):
        p = parent_item[i]
        if p >= 0 and placed[p] >= 0:
            src = [placed[p]]
        elif parent_dev[i] >= 0:
            src = [parent_dev[i]]
        else:
            src = list(fb_idx[fb_ptr[i]:fb_ptr[i + 1]])
        score = np.zeros(k)
        worst = np.zeros(k)
        for r in src:
            score = score + dist[r]
            worst = np.maximum(worst, dist[r])
        order = np.lexsort((np.arange(k), worst, score))
        for pos, d in enumerate(order):
            if remaining[d] >= req[i]:
                remaining[d] -= req[i]
                placed[i] = d
                checks[i] = pos + 1
                break
        else:
            checks[i] = k
    return placed, checks
