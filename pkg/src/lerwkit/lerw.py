"""Loop-erased-walk samplers: Wilson's uniform spanning tree algorithm,
conditioned walks via the h-transform, and quasi-loop detection."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _engine
from .errors import InvalidInputError, StepBudgetError
from .graph import (EmbeddedWeightedGraph, LatticePath, SimplePath,
                    erase_loops_indexed)
from .rng import RngStream, SplitMix, walk_seed
from .solver import DirichletProblem, solve_dirichlet
from .walk import DEFAULT_STEP_BUDGET, MCEstimate


# --------------------------------------------------------------- Wilson


@dataclass
class SpanningTree:
    graph: EmbeddedWeightedGraph
    parent: dict  # vertex -> parent vertex (root maps to -1)

    def edge_set(self) -> frozenset:
        return frozenset((min(v, p), max(v, p))
                         for v, p in self.parent.items() if p >= 0)

    def __len__(self):
        return len(self.parent)


def wilson_ust(graph: EmbeddedWeightedGraph, vertex_order=None,
               rng: RngStream = RngStream(0), sample_index: int = 0,
               step_budget: int = DEFAULT_STEP_BUDGET) -> SpanningTree:
    """Uniform spanning tree by Wilson's algorithm: root the tree at the
    first vertex of the order, then repeatedly add the loop-erasure of a
    random walk from the next uncovered vertex, stopped on the partial
    tree.  The resulting distribution does not depend on the order."""
    n = graph.n
    if vertex_order is None:
        vertex_order = range(n)
    order = [int(v) for v in vertex_order]
    if sorted(order) != list(range(n)):
        raise InvalidInputError("vertex_order must enumerate every vertex")
    tables = _engine.get_tables(graph)
    in_tree = np.zeros(n, dtype=bool)
    parent = {order[0]: -1}
    in_tree[order[0]] = True
    sm = SplitMix(walk_seed(rng.seed, rng.stream_id, sample_index))
    steps = 0
    for w0 in order[1:]:
        if in_tree[w0]:
            continue
        path = [w0]
        pos = {w0: 0}
        v = w0
        while not in_tree[v]:
            steps += 1
            if steps > step_budget:
                raise StepBudgetError(
                    "Wilson stalled; is the graph connected?")
            u = sm.next_uniform()
            lo = tables.indptr[v]
            deg = tables.indptr[v + 1] - lo
            if deg == 0:
                raise StepBudgetError("walk reached an isolated vertex")
            x = u * deg
            j = min(int(x), deg - 1)
            slot = lo + j
            w = int(tables.nbr[slot]) if x - j < tables.aprob[slot] \
                else int(tables.nbr[tables.aalt[slot]])
            if w in pos:
                cut = pos[w]
                for dead in path[cut + 1:]:
                    del pos[dead]
                del path[cut + 1:]
            else:
                pos[w] = len(path)
                path.append(w)
            v = w
        for a, b in zip(path[:-1], path[1:]):
            parent[a] = b
            in_tree[a] = True
    return SpanningTree(graph, parent)


def lerw_via_wilson(graph, start: int, stop_set, rng: RngStream,
                    sample_index: int = 0) -> SimplePath:
    """First branch of Wilson's algorithm: the loop-erased walk from start
    to the stop set (wired together as the initial partial tree)."""
    tables = _engine.get_tables(graph)
    stop = np.zeros(graph.n, dtype=np.uint8)
    stop[np.fromiter((int(s) for s in stop_set), dtype=np.int64)] = 1
    state = walk_seed(rng.seed, rng.stream_id, sample_index)
    path, flag = _engine.walk_record(tables, stop, int(start), 1, state,
                                     DEFAULT_STEP_BUDGET)
    if flag:
        raise StepBudgetError("walk exceeded budget")
    return SimplePath(graph, erase_loops_indexed(path), _trusted=True)


# ------------------------------------------------------- h-transform


def h_transform_graph(graph: EmbeddedWeightedGraph, B, b0: int,
                      b1: int) -> EmbeddedWeightedGraph:
    """Reweight the graph by the harmonic function h with h(b0) = h(b1) = 1
    and h = 0 on the rest of B: W'(v, w) = h(v) h(w) W(v, w).

    A walk on the result from b0 stopped on {b0, b1} has the law of the
    original walk stopped on B conditioned to exit through {b0, b1};
    vertices with h = 0 become unreachable."""
    B = sorted(set(int(b) for b in B))
    if int(b0) not in B or int(b1) not in B:
        raise InvalidInputError("b0 and b1 must belong to B")
    interior = np.asarray([v for v in range(graph.n) if v not in set(B)],
                          dtype=np.int64)
    vals = {b: 0.0 for b in B}
    vals[int(b0)] = 1.0
    vals[int(b1)] = 1.0
    h = solve_dirichlet(DirichletProblem(graph, interior,
                                         np.asarray(B, dtype=np.int64), vals))
    edges = []
    for v in range(graph.n):
        nb, ws = graph.neighbors(v)
        for w, wt in zip(nb, ws):
            if v < w and h[v] > 0 and h[w] > 0:
                edges.append((v, int(w), h[v] * h[int(w)] * wt))
    return EmbeddedWeightedGraph(graph.px, graph.py, graph.scale_log2,
                                 graph.unit_den, edges)


def sample_conditioned_lerw(graph, B, b0: int, b1: int, rng: RngStream,
                            sample_index: int = 0,
                            transformed: EmbeddedWeightedGraph | None = None,
                            max_retries: int = 10000) -> SimplePath:
    """Loop erasure of a walk from b0 stopped on B and conditioned to exit
    at b1, realized as a walk on the h-transformed graph stopped on
    {b0, b1}.  The h-transform removes every other exit, so only returns
    to b0 itself are rejected."""
    if transformed is None:
        transformed = h_transform_graph(graph, B, b0, b1)
    tables = _engine.get_tables(transformed)
    stop = np.zeros(graph.n, dtype=np.uint8)
    stop[int(b0)] = 1
    stop[int(b1)] = 1
    for attempt in range(max_retries):
        state = walk_seed(rng.seed, rng.stream_id,
                          sample_index * max_retries + attempt)
        path, flag = _engine.walk_record(tables, stop, int(b0), 1, state,
                                         DEFAULT_STEP_BUDGET)
        if flag:
            raise StepBudgetError("conditioned walk exceeded budget")
        if int(path[-1]) == int(b1):
            return SimplePath(transformed, erase_loops_indexed(path),
                              _trusted=True)
    raise InvalidInputError("conditioned event looks unreachable")


def conditioned_lerw_batch(graph, B, b0: int, b1: int, samples: int,
                           rng: RngStream,
                           transformed: EmbeddedWeightedGraph | None = None):
    """Loop-erased conditioned walks in bulk; returns a list of vertex
    tuples (b0 ... b1).  Walks that return to b0 are dropped, so fewer than
    `samples` paths come back."""
    if transformed is None:
        transformed = h_transform_graph(graph, B, b0, b1)
    tables = _engine.get_tables(transformed)
    stop = np.zeros(graph.n, dtype=np.uint8)
    stop[int(b0)] = 1
    stop[int(b1)] = 1
    flat, offs, bad = _engine.batch_lerw_paths(
        tables, stop, int(b0), int(b1), rng.seed, rng.stream_id, samples,
        DEFAULT_STEP_BUDGET, graph.n)
    if bad:
        raise StepBudgetError(f"{bad} conditioned walks exceeded budget")
    return _split_paths(flat, offs)


def rejection_conditioned_lerw_batch(graph, B, b0: int, b1: int,
                                     samples: int, rng: RngStream):
    """Ground-truth sampler for the conditioned loop-erased walk: run plain
    walks from b0 stopped on B and keep only those exiting at b1."""
    B = sorted(set(int(b) for b in B))
    tables = _engine.get_tables(graph)
    stop = np.zeros(graph.n, dtype=np.uint8)
    stop[np.asarray(B, dtype=np.int64)] = 1
    flat, offs, bad = _engine.batch_lerw_paths(
        tables, stop, int(b0), int(b1), rng.seed, rng.stream_id, samples,
        DEFAULT_STEP_BUDGET, graph.n)
    if bad:
        raise StepBudgetError(f"{bad} walks exceeded budget")
    return _split_paths(flat, offs)


def _split_paths(flat, offs):
    return [tuple(int(v) for v in flat[offs[k]:offs[k + 1]])
            for k in range(len(offs) - 1)]


def total_variation(paths_a, paths_b) -> float:
    """TV distance between two empirical path distributions (paths are
    hashable tuples; orientation is the caller's concern)."""
    from collections import Counter
    ca = Counter(paths_a)
    cb = Counter(paths_b)
    na = sum(ca.values())
    nb = sum(cb.values())
    keys = set(ca) | set(cb)
    return 0.5 * sum(abs(ca[k] / na - cb[k] / nb) for k in keys)


# ------------------------------------------------------- quasi loops


@dataclass(frozen=True)
class QuasiLoopReport:
    center: tuple  # lattice point (x, y) in graph units
    r: float
    eps: float
    witness: tuple  # (index_v, index_w) into the path


def _path_coords(path) -> np.ndarray:
    if isinstance(path, LatticePath):
        g = path.graph
        return np.stack([g.px[path.vertices] / g.den,
                         g.py[path.vertices] / g.den], axis=1)
    return np.asarray(path, dtype=np.float64)


def segment_diameter_exceeds(coords: np.ndarray, i: int, j: int,
                             r: float) -> bool:
    """Whether the vertex set coords[i..j] has Euclidean diameter > r.
    Cheap bounding-box bounds decide almost always; the exact pair scan
    runs only in the ambiguous band."""
    seg = coords[i:j + 1]
    dx = seg[:, 0].max() - seg[:, 0].min()
    dy = seg[:, 1].max() - seg[:, 1].min()
    if max(dx, dy) > r:
        return True
    if dx * dx + dy * dy <= r * r:
        return False
    for k in range(len(seg)):
        d2 = ((seg[k + 1:] - seg[k]) ** 2).sum(axis=1)
        if len(d2) and d2.max() > r * r:
            return True
    return False


def detect_quasi_loops(path, r: float, eps: float, centers) -> list[QuasiLoopReport]:
    """For each center z, report whether two path points within eps of z
    bound a sub-path of diameter > r.

    Sub-path diameter is monotone in the index interval, so the extreme
    eps-close indices witness a quasi loop whenever any pair does.
    """
    if not (r > eps > 0):
        raise InvalidInputError("need r > eps > 0")
    coords = _path_coords(path)
    out = []
    for c in centers:
        cx, cy = float(c[0]), float(c[1])
        d2 = (coords[:, 0] - cx) ** 2 + (coords[:, 1] - cy) ** 2
        close = np.nonzero(d2 <= eps * eps)[0]
        if len(close) < 2:
            continue
        i, j = int(close[0]), int(close[-1])
        if segment_diameter_exceeds(coords, i, j, r):
            out.append(QuasiLoopReport((cx, cy), r, eps, (i, j)))
    return out


def contains_loop_around(graph, B, a: int) -> bool:
    """Whether the vertex set B disconnects `a` from the outside of B's
    bounding box (4-adjacent flood fill on the complement); this is the
    separation a random walk cannot cross."""
    bset = set((int(graph.px[b]), int(graph.py[b])) for b in B)
    ax, ay = int(graph.px[a]), int(graph.py[a])
    if (ax, ay) in bset:
        return True
    xs = [p[0] for p in bset]
    ys = [p[1] for p in bset]
    x0, x1, y0, y1 = min(xs) - 1, max(xs) + 1, min(ys) - 1, max(ys) + 1
    seen = {(ax, ay)}
    stack = [(ax, ay)]
    while stack:
        x, y = stack.pop()
        if x <= x0 or x >= x1 or y <= y0 or y >= y1:
            return False
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            p = (x + dx, y + dy)
            if p not in bset and p not in seen:
                seen.add(p)
                stack.append(p)
    return True


def quasi_loop_census(graph, a: int, B, r: float, eps: float, samples: int,
                      rng: RngStream, centers=None,
                      step_budget: int = DEFAULT_STEP_BUDGET) -> MCEstimate:
    """Monte Carlo mean of #{z : LE(walk from a to B) has an (r, eps, z)
    quasi loop}, z ranging over integer lattice centers (default: every
    graph vertex position; positions must be integers in graph units)."""
    B = sorted(set(int(b) for b in B))
    if not contains_loop_around(graph, B, int(a)):
        raise InvalidInputError("B does not contain a loop around a")
    tables = _engine.get_tables(graph)
    stop = np.zeros(graph.n, dtype=np.uint8)
    stop[np.asarray(B, dtype=np.int64)] = 1
    flat, offs, bad = _engine.batch_lerw_paths(
        tables, stop, int(a), -1, rng.seed, rng.stream_id, samples,
        step_budget, graph.n)
    if bad:
        raise StepBudgetError(f"{bad} walks exceeded budget")
    if centers is None:
        centers = np.stack([graph.px / graph.den, graph.py / graph.den],
                           axis=1)
    else:
        centers = np.asarray(centers, dtype=np.float64)
    counts = np.empty(len(offs) - 1)
    for k in range(len(offs) - 1):
        verts = flat[offs[k]:offs[k + 1]]
        coords = np.stack([graph.px[verts] / graph.den,
                           graph.py[verts] / graph.den], axis=1)
        counts[k] = _census_one(coords, r, eps, centers)
    mean = float(counts.mean())
    se = float(counts.std(ddof=1) / math.sqrt(len(counts))) if len(counts) > 1 else 0.0
    return MCEstimate(mean, len(counts), se, rng.seed)


def _census_one(coords, r, eps, centers) -> int:
    # bucket path points by rounded position; a center is eps-close only to
    # points in nearby buckets
    first = {}
    last = {}
    for idx in range(len(coords)):
        x, y = coords[idx]
        for bx in range(int(math.floor(x - eps)), int(math.ceil(x + eps)) + 1):
            for by in range(int(math.floor(y - eps)), int(math.ceil(y + eps)) + 1):
                if (x - bx) ** 2 + (y - by) ** 2 <= eps * eps:
                    if (bx, by) not in first:
                        first[(bx, by)] = idx
                    last[(bx, by)] = idx
    total = 0
    cset = set((float(c[0]), float(c[1])) for c in centers)
    for key, i in first.items():
        j = last[key]
        if j > i and (float(key[0]), float(key[1])) in cset:
            if segment_diameter_exceeds(coords, i, j, r):
                total += 1
    return total
