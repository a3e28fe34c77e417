# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numerical kernels; see ``_pykernels`` for the reference semantics."""
import numpy as np

from libc.math cimport INFINITY, fabs

cdef double PATH_EPS = 1e-9


def restricted_dist(const double[:, :] lat, members):
    cdef long[:] mem = np.ascontiguousarray(members, dtype=np.int64)
    cdef Py_ssize_t k = mem.shape[0]
    cdef Py_ssize_t s, it, v, u
    cdef double best, cand, wuv
    out = np.full((k, k), np.inf)
    cdef double[:, :] dist = out
    w_arr = np.ascontiguousarray(np.asarray(lat)[np.ix_(np.asarray(mem), np.asarray(mem))])
    cdef double[:, :] w = w_arr
    done_arr = np.zeros(k, dtype=np.uint8)
    cdef unsigned char[:] done = done_arr
    with nogil:
        for s in range(k):
            for v in range(k):
                done[v] = 0
            dist[s, s] = 0.0
            for it in range(k):
                u = -1
                best = INFINITY
                for v in range(k):
                    if not done[v] and dist[s, v] < best:
                        best = dist[s, v]
                        u = v
                if u < 0:
                    break
                done[u] = 1
                for v in range(k):
                    if done[v] or v == u:
                        continue
                    wuv = w[u, v]
                    if wuv == INFINITY:
                        continue
                    cand = best + wuv
                    if cand < dist[s, v]:
                        dist[s, v] = cand
    return out


def betweenness(const double[:, :] lat, members):
    cdef long[:] mem = np.ascontiguousarray(members, dtype=np.int64)
    cdef Py_ssize_t k = mem.shape[0]
    bc_arr = np.zeros(k)
    if k < 3:
        return bc_arr
    cdef double[:] bc = bc_arr
    w_arr = np.ascontiguousarray(np.asarray(lat)[np.ix_(np.asarray(mem), np.asarray(mem))])
    cdef double[:, :] w = w_arr
    cdef double[:] dist = np.empty(k)
    cdef double[:] sigma = np.empty(k)
    cdef double[:] delta = np.empty(k)
    cdef unsigned char[:] done = np.empty(k, dtype=np.uint8)
    cdef unsigned char[:, :] pred = np.empty((k, k), dtype=np.uint8)
    cdef long[:] order = np.empty(k, dtype=np.int64)
    cdef Py_ssize_t s, it, u, v, x, n_order, j
    cdef double best, alt, wuv
    with nogil:
        for s in range(k):
            for v in range(k):
                dist[v] = INFINITY
                sigma[v] = 0.0
                delta[v] = 0.0
                done[v] = 0
                for x in range(k):
                    pred[v, x] = 0
            dist[s] = 0.0
            sigma[s] = 1.0
            n_order = 0
            for it in range(k):
                u = -1
                best = INFINITY
                for v in range(k):
                    if not done[v] and dist[v] < best:
                        best = dist[v]
                        u = v
                if u < 0:
                    break
                done[u] = 1
                order[n_order] = u
                n_order += 1
                for v in range(k):
                    if done[v] or v == u:
                        continue
                    wuv = w[u, v]
                    if wuv == INFINITY:
                        continue
                    alt = dist[u] + wuv
                    if alt < dist[v] - PATH_EPS:
                        dist[v] = alt
                        sigma[v] = sigma[u]
                        for x in range(k):
                            pred[v, x] = 0
                        pred[v, u] = 1
                    elif fabs(alt - dist[v]) <= PATH_EPS:
                        sigma[v] += sigma[u]
                        pred[v, u] = 1
            for j in range(n_order - 1, -1, -1):
                v = order[j]
                for x in range(k):
                    if pred[v, x]:
                        delta[x] += sigma[x] / sigma[v] * (1.0 + delta[v])
                if v != s:
                    bc[v] += delta[v]
        for v in range(k):
            bc[v] = bc[v] / 2.0
    return bc_arr


def nondominated_ranks(obj):
    cdef double[:, :] f = np.ascontiguousarray(obj, dtype=np.float64)
    cdef Py_ssize_t n = f.shape[0]
    cdef Py_ssize_t m = f.shape[1]
    ranks_arr = np.zeros(n, dtype=np.int64)
    if n == 0:
        return ranks_arr
    cdef long[:] ranks = ranks_arr
    cdef long[:] count = np.zeros(n, dtype=np.int64)
    cdef unsigned char[:, :] dom = np.zeros((n, n), dtype=np.uint8)
    cdef long[:] current = np.empty(n, dtype=np.int64)
    cdef long[:] nxt = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t i, j, c, n_cur, n_next
    cdef bint all_le, any_lt
    cdef long rank = 1
    with nogil:
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                all_le = True
                any_lt = False
                for c in range(m):
                    if f[i, c] > f[j, c]:
                        all_le = False
                        break
                    if f[i, c] < f[j, c]:
                        any_lt = True
                if all_le and any_lt:
                    dom[i, j] = 1
                    count[j] += 1
        n_cur = 0
        for i in range(n):
            if count[i] == 0:
                current[n_cur] = i
                n_cur += 1
        while n_cur > 0:
            n_next = 0
            for c in range(n_cur):
                ranks[current[c]] = rank
            for c in range(n_cur):
                i = current[c]
                for j in range(n):
                    if dom[i, j]:
                        count[j] -= 1
                        if count[j] == 0:
                            nxt[n_next] = j
                            n_next += 1
            for c in range(n_next):
                current[c] = nxt[c]
            n_cur = n_next
            rank += 1
    return ranks_arr


def first_fit(const double[:, :] dist, double[:] remaining, req, fb_ptr, fb_idx,
              parent_item, parent_dev):
    cdef double[:] rq = np.ascontiguousarray(req, dtype=np.float64)
    cdef long[:] ptr = np.ascontiguousarray(fb_ptr, dtype=np.int64)
    cdef long[:] idx = np.ascontiguousarray(fb_idx, dtype=np.int64)
    cdef long[:] pitem = np.ascontiguousarray(parent_item, dtype=np.int64)
    cdef long[:] pdev = np.ascontiguousarray(parent_dev, dtype=np.int64)
    cdef Py_ssize_t q = rq.shape[0]
    cdef Py_ssize_t k = dist.shape[0]
    placed_arr = np.full(q, -1, dtype=np.int64)
    checks_arr = np.zeros(q, dtype=np.int64)
    cdef long[:] placed = placed_arr
    cdef long[:] checks = checks_arr
    cdef double[:] score = np.empty(k)
    cdef double[:] worst = np.empty(k)
    cdef Py_ssize_t i, d, r, best_d, below
    cdef long p, one_src
    cdef double best_s, best_w
    with nogil:
        for i in range(q):
            for d in range(k):
                score[d] = 0.0
                worst[d] = 0.0
            p = pitem[i]
            one_src = -1
            if p >= 0 and placed[p] >= 0:
                one_src = placed[p]
            elif pdev[i] >= 0:
                one_src = pdev[i]
            if one_src >= 0:
                for d in range(k):
                    score[d] = score[d] + dist[one_src, d]
                    worst[d] = dist[one_src, d]
            else:
                for r in range(ptr[i], ptr[i + 1]):
                    for d in range(k):
                        score[d] = score[d] + dist[idx[r], d]
                        if dist[idx[r], d] > worst[d]:
                            worst[d] = dist[idx[r], d]
            # first fit in (score, worst, index) order == fitting device with least key
            best_d = -1
            best_s = INFINITY
            best_w = INFINITY
            for d in range(k):
                if remaining[d] >= rq[i]:
                    if best_d < 0 or score[d] < best_s or (score[d] == best_s and worst[d] < best_w):
                        best_d = d
                        best_s = score[d]
                        best_w = worst[d]
            if best_d < 0:
                checks[i] = k
                continue
            below = 0
            for d in range(k):
                if score[d] < best_s or (score[d] == best_s and (worst[d] < best_w
                        or (worst[d] == best_w and d < best_d))):
                    below += 1
            remaining[best_d] -= rq[i]
            placed[i] = best_d
            checks[i] = below + 1
    return placed_arr, checks_arr
