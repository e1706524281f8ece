"""Compiled random-walk kernels.

All kernels share one sampling contract: walk i of a batch uses the
splitmix64 stream seeded by walk_seed(seed, stream_id, i) and consumes one
uniform per step; a step at vertex v draws u, forms x = u * deg(v) and picks
the alias-table cell floor(x).  Batch results therefore do not depend on how
samples are split across chunks or threads.

Weighted neighbor sampling uses per-vertex alias tables laid out in the
graph's CSR slots.  Walk loops run under numba when available; a pure-Python
mirror (same RNG, same decisions) backs every kernel for tiny cases and for
environments without a working compiler.
"""

from __future__ import annotations

import numpy as np

from .rng import SplitMix, walk_seed

try:  # pragma: no cover - exercised implicitly
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
except Exception:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*a, **k):
        def deco(f):
            return f
        if a and callable(a[0]):
            return a[0]
        return deco

    prange = range


def set_workers(workers: int):
    if HAVE_NUMBA and workers and workers > 0:
        numba.set_num_threads(max(1, int(workers)))


# ------------------------------------------------------------ alias tables


def build_alias(indptr: np.ndarray, wts: np.ndarray):
    """Per-vertex alias tables in CSR layout.

    Cell k of vertex v holds probability aprob[k] of choosing nbr[k] and
    otherwise redirects to nbr-index aalt[k] (an absolute CSR slot).
    """
    m = len(wts)
    aprob = np.ones(m, dtype=np.float64)
    aalt = np.arange(m, dtype=np.int64)
    n = len(indptr) - 1
    for v in range(n):
        lo, hi = int(indptr[v]), int(indptr[v + 1])
        k = hi - lo
        if k == 0:
            continue
        w = wts[lo:hi].astype(np.float64)
        tot = w.sum()
        if tot <= 0:
            continue
        p = w * (k / tot)
        small = [i for i in range(k) if p[i] < 1.0]
        large = [i for i in range(k) if p[i] >= 1.0]
        prob = np.ones(k)
        alt = np.arange(k)
        while small and large:
            s = small.pop()
            l = large.pop()
            prob[s] = p[s]
            alt[s] = l
            p[l] = p[l] - (1.0 - p[s])
            (small if p[l] < 1.0 else large).append(l)
        for i in small + large:
            prob[i] = 1.0
            alt[i] = i
        aprob[lo:hi] = prob
        aalt[lo:hi] = alt + lo
    return aprob, aalt


class WalkTables:
    """Immutable per-graph sampling tables shared by all kernels."""

    def __init__(self, graph):
        self.indptr = graph.indptr
        self.nbr = graph.nbr.astype(np.int64)
        self.aprob, self.aalt = build_alias(graph.indptr, graph.wts)


def get_tables(graph) -> WalkTables:
    tab = getattr(graph, "_alias", None)
    if tab is None:
        tab = WalkTables(graph)
        graph._alias = tab
    return tab


# ------------------------------------------------------------ kernels

_U64 = np.uint64
_G = _U64(0x9E3779B97F4A7C15)
_M1 = _U64(0xBF58476D1CE4E5B9)
_M2 = _U64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0


@njit(inline="always", cache=True)
def _mix64(z):
    z = (z ^ (z >> _U64(30))) * _M1
    z = (z ^ (z >> _U64(27))) * _M2
    return z ^ (z >> _U64(31))


@njit(inline="always", cache=True)
def _wseed(seed, stream, i):
    s = _mix64(_U64(seed) + _G)
    s = _mix64(s ^ (_U64(stream) + _G))
    return _mix64(s ^ (_U64(i) + _G))


@njit(inline="always", cache=True)
def _step(state, v, indptr, nbr, aprob, aalt):
    state = state + _G
    u = (_mix64(state) >> _U64(11)) * _INV53
    lo = indptr[v]
    deg = indptr[v + 1] - lo
    x = u * deg
    j = np.int64(x)
    if j >= deg:
        j = deg - 1
    slot = lo + j
    if x - j < aprob[slot]:
        return state, nbr[slot]
    return state, nbr[aalt[slot]]


@njit(cache=True)
def _walk_record(indptr, nbr, aprob, aalt, stop, start, min_time, state0,
                 budget):
    """Single walk recording the full trajectory; returns (path, flag) with
    flag 0 ok / 1 budget exceeded."""
    cap = 1024
    out = np.empty(cap, dtype=np.int64)
    out[0] = start
    top = 0
    v = start
    if min_time == 0 and stop[v]:
        return out[:1], 0
    state = _U64(state0)
    steps = 0
    while True:
        steps += 1
        if steps > budget:
            return out[:1], 1
        state, w = _step(state, v, indptr, nbr, aprob, aalt)
        top += 1
        if top >= cap:
            cap *= 2
            grown = np.empty(cap, dtype=np.int64)
            grown[:top] = out[:top]
            out = grown
        out[top] = w
        if stop[w]:
            return out[:top + 1], 0
        v = w


@njit(parallel=True, cache=True)
def _batch_endpoint_counts(indptr, nbr, aprob, aalt, stop, in_a, start,
                           min_time, seed, stream, nsamples, budget, nchunks):
    """Counts of walks ending in the flagged set; returns (hits, timeouts)."""
    hits = np.zeros(nchunks, dtype=np.int64)
    bad = np.zeros(nchunks, dtype=np.int64)
    for c in prange(nchunks):
        lo_i = nsamples * c // nchunks
        hi_i = nsamples * (c + 1) // nchunks
        for i in range(lo_i, hi_i):
            state = _wseed(seed, stream, i)
            v = start
            if min_time == 0 and stop[v]:
                if in_a[v]:
                    hits[c] += 1
                continue
            steps = 0
            while True:
                steps += 1
                if steps > budget:
                    bad[c] += 1
                    break
                state, w = _step(state, v, indptr, nbr, aprob, aalt)
                if stop[w]:
                    if in_a[w]:
                        hits[c] += 1
                    break
                v = w
    return hits.sum(), bad.sum()


@njit(parallel=True, cache=True)
def _batch_endpoint_hist(indptr, nbr, aprob, aalt, stop, start, min_time,
                         seed, stream, nsamples, budget, nchunks, nvert):
    """Histogram of walk endpoints over vertices; returns (hist, timeouts)."""
    hist = np.zeros((nchunks, nvert), dtype=np.int64)
    bad = np.zeros(nchunks, dtype=np.int64)
    for c in prange(nchunks):
        lo_i = nsamples * c // nchunks
        hi_i = nsamples * (c + 1) // nchunks
        for i in range(lo_i, hi_i):
            state = _wseed(seed, stream, i)
            v = start
            if min_time == 0 and stop[v]:
                hist[c, v] += 1
                continue
            steps = 0
            ok = True
            while True:
                steps += 1
                if steps > budget:
                    bad[c] += 1
                    ok = False
                    break
                state, w = _step(state, v, indptr, nbr, aprob, aalt)
                if stop[w]:
                    break
                v = w
            if ok:
                hist[c, w] += 1
    return hist.sum(axis=0), bad.sum()


@njit(parallel=True, cache=True)
def _batch_lerw_contained(indptr, nbr, aprob, aalt, stop, ok_interior,
                          ok_terminal, start, seed, stream, nsamples, budget,
                          nchunks, nvert):
    """Loop-erase walks on the fly and count those whose erased path stays in
    the flagged set (terminal vertex checked against its own flag)."""
    contained = np.zeros(nchunks, dtype=np.int64)
    bad = np.zeros(nchunks, dtype=np.int64)
    for c in prange(nchunks):
        stack = np.empty(nvert + 1, dtype=np.int32)
        pos = np.empty(nvert, dtype=np.int32)
        stamp = np.zeros(nvert, dtype=np.int64)
        lo_i = nsamples * c // nchunks
        hi_i = nsamples * (c + 1) // nchunks
        for i in range(lo_i, hi_i):
            state = _wseed(seed, stream, i)
            epoch = np.int64(i + 1)
            v = start
            top = 0
            stack[0] = v
            pos[v] = 0
            stamp[v] = epoch
            steps = 0
            ok = True
            term = -1
            while True:
                steps += 1
                if steps > budget:
                    bad[c] += 1
                    ok = False
                    break
                state, w = _step(state, v, indptr, nbr, aprob, aalt)
                if stop[w]:
                    term = w
                    break
                if stamp[w] == epoch:
                    p = pos[w]
                    for q in range(p + 1, top + 1):
                        stamp[stack[q]] = 0
                    top = p
                else:
                    top += 1
                    stack[top] = w
                    pos[w] = top
                    stamp[w] = epoch
                v = w
            if ok and stamp[term] == epoch:
                top = pos[term] - 1  # walk closed at its start vertex
            if ok and term >= 0 and not ok_terminal[term]:
                ok = False
            if ok:
                for q in range(top + 1):
                    if not ok_interior[stack[q]]:
                        ok = False
                        break
            if ok:
                contained[c] += 1
    return contained.sum(), bad.sum()


@njit(cache=True)
def _batch_lerw_paths(indptr, nbr, aprob, aalt, stop, start, target, seed,
                      stream, nsamples, budget, nvert, out, offs):
    """Loop-erased walks from start to the stop set, keeping only those that
    end at `target` (pass target = -1 to keep everything).  Erased paths are
    written back-to-back into `out`; returns (kept, used, timeouts).  The
    walk index loop is sequential so sample i always lands at the same
    offset regardless of how many were requested."""
    stack = np.empty(nvert + 1, dtype=np.int64)
    pos = np.empty(nvert, dtype=np.int64)
    stamp = np.zeros(nvert, dtype=np.int64)
    kept = 0
    used = 0
    bad = 0
    for i in range(nsamples):
        state = _wseed(seed, stream, i)
        epoch = np.int64(i + 1)
        v = start
        top = 0
        stack[0] = v
        pos[v] = 0
        stamp[v] = epoch
        steps = 0
        ok = True
        term = -1
        while True:
            steps += 1
            if steps > budget:
                bad += 1
                ok = False
                break
            state, w = _step(state, v, indptr, nbr, aprob, aalt)
            if stop[w]:
                term = w
                break
            if stamp[w] == epoch:
                p = pos[w]
                for q in range(p + 1, top + 1):
                    stamp[stack[q]] = 0
                top = p
            else:
                top += 1
                stack[top] = w
                pos[w] = top
                stamp[w] = epoch
            v = w
        if not ok or (target >= 0 and term != target):
            continue
        # the terminal vertex can close a loop only when it is the start
        # vertex itself (stop vertices never enter the stack otherwise)
        if stamp[term] == epoch:
            top = pos[term]
            extra = 0
        else:
            extra = 1
        if used + top + 1 + extra > len(out):
            return kept, -1, bad  # caller grows the buffer and retries
        for q in range(top + 1):
            out[used + q] = stack[q]
        if extra:
            out[used + top + 1] = term
        used += top + 1 + extra
        offs[kept + 1] = used
        kept += 1
    return kept, used, bad


# ------------------------------------------------- pure-python mirrors


def py_walk_record(indptr, nbr, aprob, aalt, stop, start, min_time, state0,
                   budget):
    rng = SplitMix(int(state0))
    v = int(start)
    out = [v]
    if min_time == 0 and stop[v]:
        return np.asarray(out, dtype=np.int64), 0
    steps = 0
    while True:
        steps += 1
        if steps > budget:
            return np.asarray(out[:1], dtype=np.int64), 1
        u = rng.next_uniform()
        lo = indptr[v]
        deg = indptr[v + 1] - lo
        x = u * deg
        j = min(int(x), deg - 1)
        slot = lo + j
        w = int(nbr[slot]) if x - j < aprob[slot] else int(nbr[aalt[slot]])
        out.append(w)
        if stop[w]:
            return np.asarray(out, dtype=np.int64), 0
        v = w


def walk_record(tables: WalkTables, stop, start, min_time, state0, budget):
    if HAVE_NUMBA:
        return _walk_record(tables.indptr, tables.nbr, tables.aprob,
                            tables.aalt, stop, start, min_time,
                            np.uint64(state0), budget)
    return py_walk_record(tables.indptr, tables.nbr, tables.aprob,
                          tables.aalt, stop, start, min_time, state0, budget)


def batch_endpoint_counts(tables, stop, in_a, start, min_time, seed, stream,
                          nsamples, budget, nchunks=256):
    if HAVE_NUMBA:
        return _batch_endpoint_counts(tables.indptr, tables.nbr, tables.aprob,
                                      tables.aalt, stop, in_a, start, min_time,
                                      seed, stream, nsamples, budget, nchunks)
    hits = bad = 0
    for i in range(nsamples):
        path, flag = py_walk_record(tables.indptr, tables.nbr, tables.aprob,
                                    tables.aalt, stop, start, min_time,
                                    walk_seed(seed, stream, i), budget)
        if flag:
            bad += 1
        elif in_a[path[-1]]:
            hits += 1
    return hits, bad


def batch_endpoint_hist(tables, stop, start, min_time, seed, stream, nsamples,
                        budget, nvert, nchunks=256):
    if HAVE_NUMBA:
        return _batch_endpoint_hist(tables.indptr, tables.nbr, tables.aprob,
                                    tables.aalt, stop, start, min_time, seed,
                                    stream, nsamples, budget, nchunks, nvert)
    hist = np.zeros(nvert, dtype=np.int64)
    bad = 0
    for i in range(nsamples):
        path, flag = py_walk_record(tables.indptr, tables.nbr, tables.aprob,
                                    tables.aalt, stop, start, min_time,
                                    walk_seed(seed, stream, i), budget)
        if flag:
            bad += 1
        else:
            hist[path[-1]] += 1
    return hist, bad


def batch_lerw_contained(tables, stop, ok_interior, ok_terminal, start, seed,
                         stream, nsamples, budget, nvert, nchunks=256):
    if HAVE_NUMBA:
        return _batch_lerw_contained(tables.indptr, tables.nbr, tables.aprob,
                                     tables.aalt, stop, ok_interior,
                                     ok_terminal, start, seed, stream,
                                     nsamples, budget, nchunks, nvert)
    from .graph import erase_loops_indexed
    contained = bad = 0
    for i in range(nsamples):
        path, flag = py_walk_record(tables.indptr, tables.nbr, tables.aprob,
                                    tables.aalt, stop, start, 1,
                                    walk_seed(seed, stream, i), budget)
        if flag:
            bad += 1
            continue
        le = erase_loops_indexed(path)
        if ok_terminal[le[-1]] and all(ok_interior[v] for v in le[:-1]):
            contained += 1
    return contained, bad


def batch_lerw_paths(tables, stop, start, target, seed, stream, nsamples,
                     budget, nvert, mean_len_guess=64):
    """Returns (paths flat array, offsets, timeouts)."""
    cap = max(4096, nsamples * mean_len_guess)
    while True:
        out = np.empty(cap, dtype=np.int64)
        offs = np.zeros(nsamples + 1, dtype=np.int64)
        if HAVE_NUMBA:
            kept, used, bad = _batch_lerw_paths(
                tables.indptr, tables.nbr, tables.aprob, tables.aalt, stop,
                start, target, seed, stream, nsamples, budget, nvert, out, offs)
        else:
            kept, used, bad = _py_batch_lerw_paths(
                tables, stop, start, target, seed, stream, nsamples, budget,
                out, offs)
        if used >= 0:
            return out[:used], offs[:kept + 1], bad
        cap *= 4


def _py_batch_lerw_paths(tables, stop, start, target, seed, stream, nsamples,
                         budget, out, offs):
    from .graph import erase_loops_indexed
    kept = used = bad = 0
    for i in range(nsamples):
        path, flag = py_walk_record(tables.indptr, tables.nbr, tables.aprob,
                                    tables.aalt, stop, start, 1,
                                    walk_seed(seed, stream, i), budget)
        if flag:
            bad += 1
            continue
        if target >= 0 and path[-1] != target:
            continue
        le = erase_loops_indexed(path)
        if used + len(le) > len(out):
            return kept, -1, bad
        out[used:used + len(le)] = le
        used += len(le)
        offs[kept + 1] = used
        kept += 1
    return kept, used, bad
