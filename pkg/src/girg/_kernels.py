"""Compiled inner loops (numba).

Everything here works on plain arrays; the typed public API lives in the
other modules.  Vertex ids are 0-based.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

MODE_GIRG = 0
MODE_GIRG_THRESHOLD = 1
MODE_HRG = 2
MODE_HRG_THRESHOLD = 3

STATUS_OK = 0
STATUS_BOUND_VIOLATED = 1


@njit(cache=True)
def counting_sort(codes, nbins):
    """Stable bucket sort of ``codes`` in ``[0, nbins)``.

    Returns ``(order, prefix)`` with ``prefix[c]`` the number of codes below
    ``c``; cost ``O(len(codes) + nbins)``.
    """
    prefix = np.zeros(nbins + 1, dtype=np.int64)
    for c in codes:
        prefix[c + 1] += 1
    for c in range(nbins):
        prefix[c + 1] += prefix[c]
    fill = prefix[:-1].copy()
    order = np.empty(codes.size, dtype=np.int64)
    for k in range(codes.size):
        c = codes[k]
        order[fill[c]] = k
        fill[c] += 1
    return order, prefix


@njit(cache=True)
def spread_table(level, d):
    """``table[k]``: bits of ``k`` moved to positions ``b*d`` (Morton spread)."""
    side = 1 << level
    table = np.zeros(side, dtype=np.int64)
    for k in range(side):
        s = 0
        for b in range(level):
            s |= ((k >> b) & 1) << (b * d)
        table[k] = s
    return table


@njit(cache=True)
def morton_from_points(pos, level):
    n, d = pos.shape
    side = 1 << level
    table = spread_table(level, d)
    out = np.empty(n, dtype=np.int64)
    for v in range(n):
        code = 0
        for t in range(d):
            k = int(math.floor(pos[v, t] * side))
            if k >= side:
                k = side - 1
            code |= table[k] << (d - 1 - t)
        out[v] = code
    return out


@njit(cache=True)
def geometric_variate(p):
    """``ceil(log(R) / log(1 - p))`` with ``R`` uniform in (0, 1), as float."""
    if p >= 1.0:
        return 1.0
    while True:
        r = 1.0 - np.random.random()
        if r < 1.0:
            break
    g = math.ceil(math.log(r) / math.log1p(-p))
    if g < 1.0:
        g = 1.0
    return g


@njit(cache=True)
def seed_rng(seed):
    np.random.seed(seed)


@njit(cache=True)
def geometric_batch(p, size):
    out = np.empty(size, dtype=np.float64)
    for k in range(size):
        out[k] = geometric_variate(p)
    return out


@njit(cache=True)
def pair_probability(u, v, mode, pos, w, W, alpha, p_scale, tau, radii, angles, R, T):
    if mode == MODE_GIRG or mode == MODE_GIRG_THRESHOLD:
        d = pos.shape[1]
        r = 0.0
        for t in range(d):
            g = abs(pos[u, t] - pos[v, t])
            if 1.0 - g < g:
                g = 1.0 - g
            if g > r:
                r = g
        if mode == MODE_GIRG_THRESHOLD:
            if r < tau * (w[u] * w[v] / W) ** (1.0 / d):
                return min(p_scale, 1.0)
            return 0.0
        if r == 0.0:
            return 1.0
        rd = r
        for _ in range(d - 1):
            rd *= r
        q = w[u] * w[v] / (W * rd)
        if alpha == 2.0:
            p = p_scale * q * q
        else:
            p = p_scale * math.exp(alpha * math.log(q))
        return min(p, 1.0)
    ru = radii[u]
    rv = radii[v]
    cosh_d = math.cosh(ru - rv) + (1.0 - math.cos(angles[u] - angles[v])) * (math.sinh(ru) * math.sinh(rv))
    if cosh_d < 1.0:
        cosh_d = 1.0
    dist = math.acosh(cosh_d)
    if mode == MODE_HRG_THRESHOLD:
        return 1.0 if dist <= R else 0.0
    return 1.0 / (1.0 + math.exp((dist - R) / (2.0 * T)))


@njit(cache=True)
def pair_probabilities(us, vs, mode, pos, w, W, alpha, p_scale, tau, radii, angles, R, T):
    out = np.empty(us.size, dtype=np.float64)
    for k in range(us.size):
        out[k] = pair_probability(us[k], vs[k], mode, pos, w, W, alpha, p_scale, tau, radii, angles, R, T)
    return out


@njit(cache=True)
def _push(buf, count, u, v):
    if count == buf.shape[0]:
        grown = np.empty((2 * buf.shape[0] + 16, 2), dtype=np.int64)
        grown[:count] = buf[:count]
        buf = grown
    if u < v:
        buf[count, 0] = u
        buf[count, 1] = v
    else:
        buf[count, 0] = v
        buf[count, 1] = u
    return buf


@njit(cache=True)
def _cell_range(prefix, pstart, base_level, level, d, code):
    shift = (base_level - level) * d
    lo = prefix[pstart + (code << shift)]
    hi = prefix[pstart + ((code + 1) << shift)]
    return lo, hi


@njit(cache=True)
def _axis_values(center, side, out):
    """Distinct values of ``center + {-1, 0, 1}`` modulo ``side``; returns count."""
    m = 0
    for delta in (-1, 0, 1):
        val = (center + delta) % side
        dup = False
        for q in range(m):
            if out[q] == val:
                dup = True
        if not dup:
            out[m] = val
            m += 1
    return m


@njit(cache=True, nogil=True)
def sample_tasks(tasks, task_seeds, task_levels, mode, spos, sw, W, alpha, p_scale, c_upper, tau,
                 srad, sang, R, T, order, layer_start, layer_level, prefix, prefix_start,
                 layer_upper, record_trials):
    """Edges of every layer pair in ``tasks``.

    Vertex data arrive permuted into index order: ``spos[k]``, ``sw[k]``
    (and ``srad``/``sang``) describe vertex ``order[k]``.  The slice
    ``layer_start[i]:layer_start[i+1]`` holds layer i sorted by Morton code at
    ``layer_level[i]``, with cumulative cell counts in
    ``prefix[prefix_start[i]:...]``.  Within a layer, pairs are kept only
    when the first slot precedes the second, so each unordered pair gets a
    single coin.

    Returns ``(edges, n_edges, trials, n_trials, status, info)`` with
    original vertex ids.
    """
    d = spos.shape[1]
    threshold = mode == MODE_GIRG_THRESHOLD or mode == MODE_HRG_THRESHOLD
    edges = np.empty((1024, 2), dtype=np.int64)
    n_edges = 0
    trials = np.empty((1024 if record_trials else 0, 2), dtype=np.int64)
    n_trials = 0
    info = np.zeros(4, dtype=np.float64)

    a = np.zeros(d, dtype=np.int64)
    bvals = np.zeros((d, 6), dtype=np.int64)
    bcount = np.zeros(d, dtype=np.int64)
    bidx = np.zeros(d, dtype=np.int64)
    nvals = np.zeros((d, 3), dtype=np.int64)
    ncount = np.zeros(d, dtype=np.int64)
    tmp = np.zeros(3, dtype=np.int64)

    for task in range(tasks.shape[0]):
        li = tasks[task, 0]
        lj = tasks[task, 1]
        np.random.seed(task_seeds[task])
        level = task_levels[task]
        same = li == lj
        oi = layer_start[li]
        oj = layer_start[lj]
        pi = prefix_start[li]
        pj = prefix_start[lj]
        bli = layer_level[li]
        blj = layer_level[lj]
        wprod = layer_upper[li] * layer_upper[lj] / W

        # ---- type I: equal or touching cells of the base level
        side = 1 << level
        table = spread_table(level, d)
        ncells = 1 << (level * d)
        for t in range(d):
            a[t] = 0
        for _ in range(ncells):
            code_a = 0
            for t in range(d):
                code_a |= table[a[t]] << (d - 1 - t)
            lo_a, hi_a = _cell_range(prefix, pi, bli, level, d, code_a)
            if hi_a > lo_a:
                for t in range(d):
                    ncount[t] = _axis_values(a[t], side, tmp)
                    for q in range(ncount[t]):
                        nvals[t, q] = tmp[q]
                    bidx[t] = 0
                while True:
                    code_b = 0
                    for t in range(d):
                        code_b |= table[nvals[t, bidx[t]]] << (d - 1 - t)
                    lo_b, hi_b = _cell_range(prefix, pj, blj, level, d, code_b)
                    for x in range(oi + lo_a, oi + hi_a):
                        y0 = oj + lo_b
                        if same and y0 <= x:
                            y0 = x + 1
                        for y in range(y0, oj + hi_b):
                            if record_trials:
                                trials = _push(trials, n_trials, order[x], order[y])
                                n_trials += 1
                            p = pair_probability(x, y, mode, spos, sw, W, alpha, p_scale, tau,
                                                 srad, sang, R, T)
                            if p >= 1.0 or np.random.random() < p:
                                edges = _push(edges, n_edges, order[x], order[y])
                                n_edges += 1
                    t = d - 1
                    while t >= 0:
                        bidx[t] += 1
                        if bidx[t] < ncount[t]:
                            break
                        bidx[t] = 0
                        t -= 1
                    if t < 0:
                        break
            t = d - 1
            while t >= 0:
                a[t] += 1
                if a[t] < side:
                    break
                a[t] = 0
                t -= 1

        if threshold:
            continue

        # ---- type II: separated cells whose parents touch, at every level
        for lev in range(2, level + 1):
            side = 1 << lev
            pside = side >> 1
            table = spread_table(lev, d)
            ncells = 1 << (lev * d)
            cell_len = 1.0 / side
            for t in range(d):
                a[t] = 0
            for _ in range(ncells):
                code_a = 0
                for t in range(d):
                    code_a |= table[a[t]] << (d - 1 - t)
                lo_a, hi_a = _cell_range(prefix, pi, bli, lev, d, code_a)
                if hi_a > lo_a:
                    for t in range(d):
                        m = _axis_values(a[t] >> 1, pside, tmp)
                        bcount[t] = 2 * m
                        for q in range(m):
                            bvals[t, 2 * q] = 2 * tmp[q]
                            bvals[t, 2 * q + 1] = 2 * tmp[q] + 1
                        bidx[t] = 0
                    while True:
                        gap = 0
                        code_b = 0
                        for t in range(d):
                            bt = bvals[t, bidx[t]]
                            code_b |= table[bt] << (d - 1 - t)
                            delta = abs(a[t] - bt) % side
                            if side - delta < delta:
                                delta = side - delta
                            if delta - 1 > gap:
                                gap = delta - 1
                        if gap > 0:
                            lo_b, hi_b = _cell_range(prefix, pj, blj, lev, d, code_b)
                            if hi_b > lo_b:
                                nb = hi_b - lo_b
                                total = float(hi_a - lo_a) * float(nb)
                                dist = gap * cell_len
                                pbar = c_upper * math.exp(alpha * (math.log(wprod) - d * math.log(dist)))
                                if pbar > 1.0:
                                    pbar = 1.0
                                r = geometric_variate(pbar)
                                while r <= total:
                                    idx = int(r) - 1
                                    x = oi + lo_a + idx // nb
                                    y = oj + lo_b + idx % nb
                                    if not (same and x >= y):
                                        if record_trials:
                                            trials = _push(trials, n_trials, order[x], order[y])
                                            n_trials += 1
                                        p = pair_probability(x, y, mode, spos, sw, W, alpha, p_scale,
                                                             tau, srad, sang, R, T)
                                        if p > pbar * (1.0 + 1e-12):
                                            info[0] = order[x]
                                            info[1] = order[y]
                                            info[2] = p
                                            info[3] = pbar
                                            return edges, n_edges, trials, n_trials, STATUS_BOUND_VIOLATED, info
                                        if np.random.random() * pbar < p:
                                            edges = _push(edges, n_edges, order[x], order[y])
                                            n_edges += 1
                                    r += geometric_variate(pbar)
                        t = d - 1
                        while t >= 0:
                            bidx[t] += 1
                            if bidx[t] < bcount[t]:
                                break
                            bidx[t] = 0
                            t -= 1
                        if t < 0:
                            break
                t = d - 1
                while t >= 0:
                    a[t] += 1
                    if a[t] < side:
                        break
                    a[t] = 0
                    t -= 1

    return edges, n_edges, trials, n_trials, STATUS_OK, info


@njit(cache=True)
def csr_from_edges(n, edges):
    """Symmetric CSR (offsets, sorted neighbours) of an edge array."""
    m = edges.shape[0]
    offsets = np.zeros(n + 1, dtype=np.int64)
    for k in range(m):
        offsets[edges[k, 0] + 1] += 1
        offsets[edges[k, 1] + 1] += 1
    for v in range(n):
        offsets[v + 1] += offsets[v]
    fill = offsets[:-1].copy()
    nbr = np.empty(2 * m, dtype=np.int64)
    for k in range(m):
        u = edges[k, 0]
        v = edges[k, 1]
        nbr[fill[u]] = v
        fill[u] += 1
        nbr[fill[v]] = u
        fill[v] += 1
    for v in range(n):
        nbr[offsets[v]:offsets[v + 1]].sort()
    return offsets, nbr
