"""Numba kernels for the hot loops: pruning, greedy search, fast build.

These operate on raw arrays (float64 points, int32 padded adjacency + degree
vector) and are shared by the public wrappers in ``construct``, ``search``
and ``verify``. Comparisons are always on (distance, index) pairs so exact
distance ties break toward the smaller vertex id; that keeps every caller
deterministic. No fastmath: results must be bit-reproducible.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# Metric codes match Metric.code: 1 = L1, 2 = L2.


@njit(cache=True, nogil=True, inline="always")
def _dist(points, i, q, mcode):
    acc = 0.0
    if mcode == 1:
        for d in range(q.shape[0]):
            acc += abs(points[i, d] - q[d])
        return acc
    for d in range(q.shape[0]):
        t = points[i, d] - q[d]
        acc += t * t
    return np.sqrt(acc)


@njit(cache=True, nogil=True, inline="always")
def _lt(d1, i1, d2, i2):
    # (distance, index) lexicographic order.
    if d1 < d2:
        return True
    if d1 > d2:
        return False
    return i1 < i2


# -- binary heaps on parallel (distance, index) arrays -----------------------


@njit(cache=True, nogil=True)
def _minheap_push(hd, hi, size, d, i):
    pos = size
    hd[pos] = d
    hi[pos] = i
    while pos > 0:
        parent = (pos - 1) >> 1
        if _lt(hd[pos], hi[pos], hd[parent], hi[parent]):
            hd[pos], hd[parent] = hd[parent], hd[pos]
            hi[pos], hi[parent] = hi[parent], hi[pos]
            pos = parent
        else:
            break
    return size + 1


@njit(cache=True, nogil=True)
def _minheap_pop(hd, hi, size):
    d0 = hd[0]
    i0 = hi[0]
    size -= 1
    hd[0] = hd[size]
    hi[0] = hi[size]
    pos = 0
    while True:
        left = 2 * pos + 1
        if left >= size:
            break
        best = left
        right = left + 1
        if right < size and _lt(hd[right], hi[right], hd[left], hi[left]):
            best = right
        if _lt(hd[best], hi[best], hd[pos], hi[pos]):
            hd[pos], hd[best] = hd[best], hd[pos]
            hi[pos], hi[best] = hi[best], hi[pos]
            pos = best
        else:
            break
    return d0, i0, size


@njit(cache=True, nogil=True)
def _maxheap_push(hd, hi, size, d, i):
    pos = size
    hd[pos] = d
    hi[pos] = i
    while pos > 0:
        parent = (pos - 1) >> 1
        if _lt(hd[parent], hi[parent], hd[pos], hi[pos]):
            hd[pos], hd[parent] = hd[parent], hd[pos]
            hi[pos], hi[parent] = hi[parent], hi[pos]
            pos = parent
        else:
            break
    return size + 1


@njit(cache=True, nogil=True)
def _maxheap_replace_root(hd, hi, size, d, i):
    hd[0] = d
    hi[0] = i
    pos = 0
    while True:
        left = 2 * pos + 1
        if left >= size:
            break
        best = left
        right = left + 1
        if right < size and _lt(hd[left], hi[left], hd[right], hi[right]):
            best = right
        if _lt(hd[pos], hi[pos], hd[best], hi[best]):
            hd[pos], hd[best] = hd[best], hd[pos]
            hi[pos], hi[best] = hi[best], hi[pos]
            pos = best
        else:
            break


# -- bounded best-first search ------------------------------------------------


@njit(cache=True, nogil=True)
def greedy_kernel(points, mcode, adj, deg, s, q, L):
    """Best-first search with the seen-set truncated to the L closest vertices.

    The frontier set A of the textbook formulation is represented by a bounded
    max-heap of the L closest discovered vertices; a vertex evicted by
    truncation can never re-enter A because the truncation threshold is
    non-increasing, so popping candidates in (distance, index) order until the
    first one outside the heap reproduces the literal semantics exactly.

    Returns (scan_order, scan_dists, n_scanned, distance_evals); the first two
    are full-capacity buffers, valid up to n_scanned.
    """
    n = points.shape[0]
    cap = min(L, n)
    visited = np.zeros(n, dtype=np.uint8)
    rd = np.empty(cap + 1, dtype=np.float64)  # frontier: bounded max-heap
    ri = np.empty(cap + 1, dtype=np.int32)
    rsize = 0
    cd = np.empty(n, dtype=np.float64)  # unscanned candidates: min-heap
    ci = np.empty(n, dtype=np.int32)
    csize = 0
    scan_order = np.empty(n, dtype=np.int32)
    scan_dists = np.empty(n, dtype=np.float64)
    nscan = 0
    evals = 0

    d0 = _dist(points, s, q, mcode)
    evals += 1
    visited[s] = 1
    rsize = _maxheap_push(rd, ri, rsize, d0, s)
    csize = _minheap_push(cd, ci, csize, d0, s)

    while csize > 0:
        dv, v, csize = _minheap_pop(cd, ci, csize)
        if rsize == L and _lt(rd[0], ri[0], dv, v):
            break  # closest unscanned vertex fell outside the retained set
        scan_order[nscan] = v
        scan_dists[nscan] = dv
        nscan += 1
        for e in range(deg[v]):
            t = adj[v, e]
            if visited[t]:
                continue
            visited[t] = 1
            dt = _dist(points, t, q, mcode)
            evals += 1
            if rsize < L:
                rsize = _maxheap_push(rd, ri, rsize, dt, t)
                csize = _minheap_push(cd, ci, csize, dt, t)
            elif _lt(dt, t, rd[0], ri[0]):
                _maxheap_replace_root(rd, ri, rsize, dt, t)
                csize = _minheap_push(cd, ci, csize, dt, t)
    return scan_order, scan_dists, nscan, evals


# -- candidate pruning ---------------------------------------------------------


@njit(cache=True, nogil=True)
def prune_kernel(points, mcode, i, cand, alpha, r):
    """Greedy candidate filtering for vertex i.

    ``cand`` must hold unique candidate ids sorted ascending, without i.
    ``r`` <= 0 means no degree limit. Repeatedly selects the closest live
    candidate, then drops every live candidate w with
    D(selected, w) * alpha <= D(i, w); equality prunes.

    Returns (kept ids in selection order, distance_evals).
    """
    m = cand.shape[0]
    limit = r if r > 0 else m
    result = np.empty(min(m, limit), dtype=np.int32)
    if m == 0:
        return result[:0], 0
    dists = np.empty(m, dtype=np.float64)
    for j in range(m):
        dists[j] = _dist(points, cand[j], points[i], mcode)
    evals = m
    # Stable sort on distance; cand ascending makes ties favor smaller ids.
    order = np.argsort(dists, kind="mergesort")
    alive = np.ones(m, dtype=np.uint8)
    count = 0
    for oi in range(m):
        j = order[oi]
        if not alive[j]:
            continue
        v = cand[j]
        result[count] = v
        count += 1
        alive[j] = 0
        if count >= limit:
            break
        for oj in range(oi + 1, m):
            w = order[oj]
            if not alive[w]:
                continue
            dvw = _dist(points, v, points[cand[w]], mcode)
            evals += 1
            if dvw * alpha <= dists[w]:
                alive[w] = 0
    return result[:count], evals


@njit(cache=True, nogil=True)
def slow_prune_vertex(points, mcode, i, alpha, r):
    """Prune vertex i against the entire dataset (all other vertices)."""
    n = points.shape[0]
    cand = np.empty(n - 1, dtype=np.int32)
    k = 0
    for j in range(n):
        if j != i:
            cand[k] = j
            k += 1
    return prune_kernel(points, mcode, i, cand, alpha, r)


# -- incremental (fast) build ---------------------------------------------------


@njit(cache=True, nogil=True)
def _merged_candidates(scan_order, nscan, adj, deg, v):
    """Visited list 'union' current out-list of v, minus v, sorted unique."""
    dv = deg[v]
    tmp = np.empty(nscan + dv, dtype=np.int32)
    for j in range(nscan):
        tmp[j] = scan_order[j]
    for j in range(dv):
        tmp[nscan + j] = adj[v, j]
    tmp.sort()
    out = np.empty(tmp.shape[0], dtype=np.int32)
    k = 0
    prev = -1
    for j in range(tmp.shape[0]):
        t = tmp[j]
        if t == v or t == prev:
            continue
        out[k] = t
        k += 1
        prev = t
    return out[:k]


@njit(cache=True, nogil=True)
def build_fast_pass(points, mcode, adj, deg, r, l_build, alpha, s, perm):
    """One insertion pass over ``perm``; mutates adj/deg in place.

    For each vertex v in order: search for v's own point from s, prune v
    against the visited list, then add the back-edge (j, v) for every new
    neighbor j, re-pruning j when it overflows the degree limit.
    """
    evals = 0
    sortbuf = np.empty(r + 1, dtype=np.int32)
    for t in range(perm.shape[0]):
        v = perm[t]
        scan_order, _, nscan, e1 = greedy_kernel(points, mcode, adj, deg, s, points[v], l_build)
        evals += e1
        cand = _merged_candidates(scan_order, nscan, adj, deg, v)
        new_out, e2 = prune_kernel(points, mcode, v, cand, alpha, r)
        evals += e2
        deg[v] = new_out.shape[0]
        for j in range(new_out.shape[0]):
            adj[v, j] = new_out[j]
        for jj in range(new_out.shape[0]):
            j = new_out[jj]
            present = False
            for e in range(deg[j]):
                if adj[j, e] == v:
                    present = True
                    break
            if present:
                continue
            adj[j, deg[j]] = v
            deg[j] += 1
            if deg[j] > r:
                nj = deg[j]
                for e in range(nj):
                    sortbuf[e] = adj[j, e]
                sub = sortbuf[:nj]
                sub.sort()
                pruned, e3 = prune_kernel(points, mcode, j, sub, alpha, r)
                evals += e3
                deg[j] = pruned.shape[0]
                for e in range(pruned.shape[0]):
                    adj[j, e] = pruned[e]
    return evals


# -- exhaustive structural check -------------------------------------------------


@njit(cache=True, nogil=True)
def reachability_kernel(points, mcode, adj, deg, alpha, tol, wit_cap):
    """For every ordered pair (p, q), p != q: require an edge (p, q) or an
    out-neighbor p' of p with D(p', q) * alpha <= D(p, q) + tol.

    Returns (witness array, violation count); witnesses capped at wit_cap.
    """
    n = points.shape[0]
    wit = np.empty((wit_cap, 2), dtype=np.int32)
    nviol = 0
    is_nbr = np.zeros(n, dtype=np.uint8)
    for p in range(n):
        dp = deg[p]
        for e in range(dp):
            is_nbr[adj[p, e]] = 1
        for v in range(n):
            if v == p or is_nbr[v]:
                continue
            dpv = _dist(points, p, points[v], mcode)
            ok = False
            for e in range(dp):
                if _dist(points, adj[p, e], points[v], mcode) * alpha <= dpv + tol:
                    ok = True
                    break
            if not ok:
                if nviol < wit_cap:
                    wit[nviol, 0] = p
                    wit[nviol, 1] = v
                nviol += 1
        for e in range(dp):
            is_nbr[adj[p, e]] = 0
    return wit, nviol
