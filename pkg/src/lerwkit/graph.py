"""Embedded weighted graphs on exact dyadic coordinates, lattice paths,
loop erasure, graph boundaries and the weighted Laplacian.

A graph stores vertex positions as integer numerators over a single global
denominator ``2**scale_log2 * unit_den`` (the dyadic scale times the shared
rational unit 1/unit_den), so every geometric predicate can be decided in
integer arithmetic.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Iterable

import numpy as np

from .errors import InvalidInputError
from .geometry import (INSIDE, MIXED, OUTSIDE, FinitePointSet, PlanePoint,
                       Polygon, Rectangle, Region, Difference, _SegPoint)

_CANON_WEIGHTS = {1.0: "1", 0.5: "0.5", 0.25: "0.25"}


class EmbeddedWeightedGraph:
    """Undirected weighted graph with vertices embedded in the plane.

    Positions are (px + i*py) / den with den = 2**scale_log2 * unit_den.
    Weights are symmetric and nonnegative; self-loops are rejected.
    Instances are immutable after construction and safe to share between
    threads.
    """

    def __init__(self, px, py, scale_log2: int, unit_den: int,
                 edges: Iterable[tuple[int, int, float]]):
        self.px = np.asarray(px, dtype=np.int64)
        self.py = np.asarray(py, dtype=np.int64)
        if self.px.shape != self.py.shape:
            raise InvalidInputError("coordinate arrays must match")
        self.n = len(self.px)
        self.scale_log2 = int(scale_log2)
        self.unit_den = int(unit_den)
        self.den = (1 << self.scale_log2) * self.unit_den

        if isinstance(edges, tuple) and len(edges) == 3 \
                and isinstance(edges[0], np.ndarray):
            e_i, e_j, e_w = edges
        else:
            lst = [(int(i), int(j), float(w)) for i, j, w in edges]
            e_i = np.asarray([e[0] for e in lst], dtype=np.int64)
            e_j = np.asarray([e[1] for e in lst], dtype=np.int64)
            e_w = np.asarray([e[2] for e in lst], dtype=np.float64)
        if len(e_w) and e_w.min() < 0:
            raise InvalidInputError("negative edge weight")
        if np.any(e_i == e_j):
            raise InvalidInputError("self-loop")
        keep = e_w != 0
        e_i, e_j, e_w = e_i[keep], e_j[keep], e_w[keep]
        # both directions, rows sorted by (vertex, neighbor): deterministic
        # adjacency and sampling order
        tails = np.concatenate([e_i, e_j])
        heads = np.concatenate([e_j, e_i])
        w2 = np.concatenate([e_w, e_w])
        order = np.lexsort((heads, tails))
        self.indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(tails, minlength=self.n), out=self.indptr[1:])
        self.nbr = heads[order].astype(np.int32)
        self.wts = w2[order]
        self.total_weight = np.bincount(tails, weights=w2, minlength=self.n)
        self._alias = None
        self._pos_index = None

    # ---------- vertex geometry ----------
    def point(self, i: int) -> PlanePoint:
        """Vertex position in units of 1/unit_den (the graph's shared unit)."""
        return PlanePoint(int(self.px[i]), int(self.py[i]), self.scale_log2)

    def position(self, i: int) -> tuple[Fraction, Fraction]:
        """Absolute plane position (unit applied)."""
        return (Fraction(int(self.px[i]), self.den),
                Fraction(int(self.py[i]), self.den))

    def positions_complex(self) -> np.ndarray:
        return (self.px + 1j * self.py) / self.den

    def index_of(self, px: int, py: int) -> int:
        """Vertex index by exact numerator pair; -1 if absent."""
        if self._pos_index is None:
            self._pos_index = {(int(a), int(b)): k
                               for k, (a, b) in enumerate(zip(self.px, self.py))}
        return self._pos_index.get((px, py), -1)

    # ---------- adjacency ----------
    def neighbors(self, v: int):
        lo, hi = self.indptr[v], self.indptr[v + 1]
        return self.nbr[lo:hi], self.wts[lo:hi]

    def degree_weight(self, v: int) -> float:
        return float(self.total_weight[v])

    def weight(self, v: int, w: int) -> float:
        nb, ws = self.neighbors(v)
        k = np.searchsorted(nb, w)
        if k < len(nb) and nb[k] == w:
            return float(ws[k])
        return 0.0

    def has_edge(self, v: int, w: int) -> bool:
        return self.weight(v, w) != 0.0

    # ---------- serialization ----------
    def to_json(self) -> str:
        edges = []
        for v in range(self.n):
            lo, hi = self.indptr[v], self.indptr[v + 1]
            for k in range(lo, hi):
                w = int(self.nbr[k])
                if v < w:
                    wt = float(self.wts[k])
                    edges.append([v, w, _CANON_WEIGHTS.get(wt, repr(wt))])
        doc = {
            "unit_den": self.unit_den,
            "scale_log2": self.scale_log2,
            "vertices": [[int(a), int(b)] for a, b in zip(self.px, self.py)],
            "edges": edges,
        }
        return json.dumps(doc)

    @staticmethod
    def from_json(text: str) -> "EmbeddedWeightedGraph":
        doc = json.loads(text)
        px = [v[0] for v in doc["vertices"]]
        py = [v[1] for v in doc["vertices"]]
        edges = [(i, j, float(Fraction(w))) for i, j, w in doc["edges"]]
        return EmbeddedWeightedGraph(px, py, doc["scale_log2"],
                                     doc["unit_den"], edges)


def rect_lattice(ix0: int, iy0: int, ix1: int, iy1: int,
                 unit_den: int = 1) -> EmbeddedWeightedGraph:
    """Grid graph on {ix0..ix1} x {iy0..iy1} integer sites at spacing
    1/unit_den, all edge weights 1."""
    w = ix1 - ix0 + 1
    h = iy1 - iy0 + 1
    ii, jj = np.meshgrid(np.arange(ix0, ix1 + 1), np.arange(iy0, iy1 + 1),
                         indexing="ij")
    px = ii.ravel()
    py = jj.ravel()
    edges = []
    idx = np.arange(w * h).reshape(w, h)
    for a, b in ((idx[:-1, :], idx[1:, :]), (idx[:, :-1], idx[:, 1:])):
        edges.append(np.stack([a.ravel(), b.ravel()], axis=1))
    e = np.concatenate(edges)
    return EmbeddedWeightedGraph(px, py, 0, unit_den,
                                 (e[:, 0].astype(np.int64),
                                  e[:, 1].astype(np.int64),
                                  np.ones(len(e))))


def lattice_index(graph: EmbeddedWeightedGraph, ix: int, iy: int) -> int:
    """Index of the site with numerators (ix, iy); -1 if absent."""
    return graph.index_of(ix, iy)


# ---------------------------------------------------------------- paths


class LatticePath:
    """Ordered vertex sequence with W(v_i, v_{i+1}) != 0 for every step.
    Validity is checked eagerly at construction."""

    def __init__(self, graph: EmbeddedWeightedGraph, vertices,
                 _trusted: bool = False):
        self.graph = graph
        self.vertices = np.asarray(vertices, dtype=np.int64)
        if len(self.vertices) == 0:
            raise InvalidInputError("empty path")
        if not _trusted and not _edges_valid(graph, self.vertices):
            raise InvalidInputError("path contains a non-edge step")

    def __len__(self):
        return len(self.vertices)

    def points(self):
        return [self.graph.position(int(v)) for v in self.vertices]

    def endpoints(self):
        return int(self.vertices[0]), int(self.vertices[-1])


class SimplePath(LatticePath):
    """A lattice path with pairwise distinct vertices.  A path and its
    reversal compare equal: the canonical orientation puts the
    lexicographically smaller endpoint (by exact coordinates) first."""

    def __init__(self, graph, vertices, _trusted=False):
        super().__init__(graph, vertices, _trusted)
        if not _trusted and len(set(self.vertices.tolist())) != len(self.vertices):
            raise InvalidInputError("path is not simple")

    def canonical_vertices(self) -> tuple:
        v = self.vertices
        a, b = int(v[0]), int(v[-1])
        ka = (int(self.graph.px[a]), int(self.graph.py[a]))
        kb = (int(self.graph.px[b]), int(self.graph.py[b]))
        if kb < ka:
            v = v[::-1]
        return tuple(int(x) for x in v)

    def __eq__(self, other):
        return (isinstance(other, SimplePath) and self.graph is other.graph
                and self.canonical_vertices() == other.canonical_vertices())

    def __hash__(self):
        return hash(self.canonical_vertices())


def _edges_valid(graph, verts) -> bool:
    for a, b in zip(verts[:-1], verts[1:]):
        if not graph.has_edge(int(a), int(b)):
            return False
    return True


def loop_erase(path: LatticePath) -> SimplePath:
    """Chronological loop erasure.

    Scans the path once, keeping a stack of the currently erased path; when
    the walk revisits a vertex already on the stack, everything above that
    vertex is discarded.  This realizes the recursion
    LE(g)_{i+1} = g_{j_i + 1} with j_i the *last* index where g visits
    LE(g)_i, and always returns a simple path from the first to the last
    vertex of the input.
    """
    verts = path.vertices
    out = erase_loops_indexed(verts)
    return SimplePath(path.graph, out, _trusted=True)


def erase_loops_indexed(verts) -> np.ndarray:
    pos: dict[int, int] = {}
    stack: list[int] = []
    for v in verts:
        v = int(v)
        if v in pos:
            cut = pos[v]
            for u in stack[cut + 1:]:
                del pos[u]
            del stack[cut + 1:]
        else:
            pos[v] = len(stack)
            stack.append(v)
    return np.asarray(stack, dtype=np.int64)


# ------------------------------------------------------- boundary, nearest


def _segment_statuses(graph: EmbeddedWeightedGraph, region: Region):
    """Status of every directed CSR edge's open segment.  Uses vectorized
    prefilters where the region supports them and exact scalar fallbacks
    everywhere else."""
    m = len(graph.nbr)
    tails = np.repeat(np.arange(graph.n, dtype=np.int64),
                      np.diff(graph.indptr))
    heads = graph.nbr.astype(np.int64)
    vx, vy = graph.px[tails], graph.py[tails]
    wx, wy = graph.px[heads], graph.py[heads]
    den = graph.den
    status = np.full(m, 9, dtype=np.int8)  # 9 = undecided

    if isinstance(region, Difference) and isinstance(region.b, FinitePointSet):
        inner = _segment_statuses_region(region.a, vx, vy, wx, wy, den)
        status = inner.copy()
        # subtracting a finite point set: INSIDE edges that meet a removed
        # point become MIXED, everything else keeps the host's status
        pts = region.b.pts
        if pts:
            hit = np.zeros(m, dtype=bool)
            for (ax, ay) in pts:
                axn = ax * den
                ayn = ay * den
                if axn.denominator != 1 or ayn.denominator != 1:
                    continue  # off-lattice point never meets a lattice edge
                axn, ayn = int(axn), int(ayn)
                cross = (wx - vx) * (ayn - vy) - (wy - vy) * (axn - vx)
                dot = (axn - vx) * (wx - vx) + (ayn - vy) * (wy - vy)
                ll = (wx - vx) ** 2 + (wy - vy) ** 2
                hit |= (cross == 0) & (dot > 0) & (dot < ll)
            status[(status == INSIDE) & hit] = MIXED
        return status

    return _segment_statuses_region(region, vx, vy, wx, wy, den)


def _segment_statuses_region(region, vx, vy, wx, wy, den):
    m = len(vx)
    status = np.full(m, 9, dtype=np.int8)
    if isinstance(region, Rectangle):
        # convex: both endpoints strictly inside  =>  INSIDE
        inside_v = region.contains_lattice(vx, vy, den)
        inside_w = region.contains_lattice(wx, wy, den)
        status[inside_v & inside_w] = INSIDE
        # both endpoints (weakly) on one outer side  =>  OUTSIDE
        for lo_num, lo_den, arr1, arr2, hi in (
                (region.x0.numerator, region.x0.denominator, vx, wx, False),
                (region.y0.numerator, region.y0.denominator, vy, wy, False),
                (region.x1.numerator, region.x1.denominator, vx, wx, True),
                (region.y1.numerator, region.y1.denominator, vy, wy, True)):
            if hi:
                side = (arr1 * lo_den >= lo_num * den) & (arr2 * lo_den >= lo_num * den)
            else:
                side = (arr1 * lo_den <= lo_num * den) & (arr2 * lo_den <= lo_num * den)
            status[(status == 9) & side] = OUTSIDE
    elif isinstance(region, Polygon):
        inside_v = region.contains_lattice(vx, vy, den)
        inside_w = region.contains_lattice(wx, wy, den)
        touch = np.zeros(m, dtype=bool)
        L = 1
        for x, y in region.v:
            L = np.lcm(L, x.denominator)
            L = np.lcm(L, y.denominator)
        X1, Y1, X2, Y2 = vx * L, vy * L, wx * L, wy * L
        for (a, b), (c, d) in zip(region.v, list(region.v[1:]) + [region.v[0]]):
            ax, ay = int(a * L * den), int(b * L * den)
            bx, by = int(c * L * den), int(d * L * den)
            d1 = (bx - ax) * (Y1 - ay) - (by - ay) * (X1 - ax)
            d2 = (bx - ax) * (Y2 - ay) - (by - ay) * (X2 - ax)
            d3 = (X2 - X1) * (ay - Y1) - (Y2 - Y1) * (ax - X1)
            d4 = (X2 - X1) * (by - Y1) - (Y2 - Y1) * (bx - X1)
            bb = (np.minimum(X1, X2) <= max(ax, bx)) & (np.maximum(X1, X2) >= min(ax, bx)) \
                & (np.minimum(Y1, Y2) <= max(ay, by)) & (np.maximum(Y1, Y2) >= min(ay, by))
            touch |= bb & (d1 * d2 <= 0) & (d3 * d4 <= 0)
        status[~touch & inside_v & inside_w] = INSIDE
        status[~touch & ~inside_v & ~inside_w] = OUTSIDE
    # exact fallback for whatever is left
    undecided = np.nonzero(status == 9)[0]
    for k in undecided:
        p = _SegPoint(Fraction(int(vx[k]), den), Fraction(int(vy[k]), den))
        q = _SegPoint(Fraction(int(wx[k]), den), Fraction(int(wy[k]), den))
        status[k] = region.segment_status(p, q)
    return status


class BoundarySplit:
    """Result of graph_boundary: the boundary vertex set and the interior."""

    def __init__(self, boundary, interior, inside):
        self.boundary = boundary
        self.interior = interior
        self.inside = inside

    def boundary_set(self):
        return set(int(v) for v in self.boundary)

    def interior_set(self):
        return set(int(v) for v in self.interior)


def graph_boundary(graph: EmbeddedWeightedGraph, region: Region) -> BoundarySplit:
    """Boundary of an open region relative to the graph.

    A vertex v inside the region is boundary when some incident open edge
    segment leaves the region; a vertex w outside is boundary when some
    incident open segment enters it.  The interior is (G cap region) minus
    the boundary.
    """
    inside = region.contains_lattice(graph.px, graph.py, graph.den)
    status = _segment_statuses(graph, region)
    tails = np.repeat(np.arange(graph.n, dtype=np.int64), np.diff(graph.indptr))
    first = np.zeros(graph.n, dtype=bool)
    second = np.zeros(graph.n, dtype=bool)
    np.logical_or.at(first, tails, status != INSIDE)
    np.logical_or.at(second, tails, status != OUTSIDE)
    first &= inside
    second &= ~inside
    boundary = np.nonzero(first | second)[0]
    interior = np.nonzero(inside & ~(first | second))[0]
    return BoundarySplit(boundary, interior, inside)


def nearest_vertex(graph: EmbeddedWeightedGraph, point) -> int:
    """Vertex minimizing Euclidean distance to the point; ties broken by
    minimal real part, then maximal imaginary part (the top-left rule)."""
    if graph.n == 0:
        raise InvalidInputError("empty graph")
    if isinstance(point, PlanePoint):
        X, Y = point.x, point.y
    else:
        X, Y = Fraction(point[0]), Fraction(point[1])
    fx = float(X)
    fy = float(Y)
    d2f = (graph.px / graph.den - fx) ** 2 + (graph.py / graph.den - fy) ** 2
    cut = d2f.min() + 1e-9 * (1.0 + d2f.min())
    cand = np.nonzero(d2f <= cut)[0]
    best = None
    best_key = None
    for v in cand:
        x = Fraction(int(graph.px[v]), graph.den)
        y = Fraction(int(graph.py[v]), graph.den)
        d2 = (x - X) ** 2 + (y - Y) ** 2
        key = (d2, x, -y)
        if best_key is None or key < best_key:
            best_key = key
            best = int(v)
    return best


def graph_laplacian(graph: EmbeddedWeightedGraph, f, v: int) -> float:
    """(Delta f)(v) = sum_w W(v,w) (f(w) - f(v)) with the graph's weights."""
    fv = _eval_f(f, v)
    nb, ws = graph.neighbors(v)
    total = 0.0
    for w, wt in zip(nb, ws):
        total += wt * (_eval_f(f, int(w)) - fv)
    return total


def _eval_f(f, v):
    try:
        if callable(f):
            return f(v)
        return f[v]
    except (KeyError, IndexError) as e:
        raise InvalidInputError(f"function undefined at vertex {v}") from e
