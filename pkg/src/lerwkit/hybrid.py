"""Two-scale hybrid graphs.

For a set D of Gaussian-integer cells and an integer N, the hybrid graph
couples the coarse grid (1/N)Z^2 (on cells outside D) to the fine grid
(1/2N)Z^2 (on cells inside D):

  V0 = { z in (1/N)Z^2  : floor(z) not in D }
  V1 = { z in (1/2N)Z^2 : floor(z) in D, d(z, V0) >= 1/N }

with intra-grid edges of weight 1 (spacing 2^-n/N), and cross edges of
weight 1/2 at distance 1/N and weight 1/4 at distance sqrt(5/4)/N.  The
seams Gbar are the vertices with a neighbor in the other grid; the seam
intersections Gbarbar are the seam vertices whose weighted neighbor vectors
fail to cancel: sum_w W(v,w)(v - w) != 0 (decided in integer arithmetic).

Everything here works in "half units": integer coordinates h with the
actual point h/(2N).  The cell of a point is floor(h / 2N) componentwise
(python floor division), so points on the lower/left cell edges belong to
the cell.  Seam classification always uses the idealized infinite graph
(window clipping must not invent seams at the window rim).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidInputError, TableRangeError
from .geometry import Rectangle
from .graph import EmbeddedWeightedGraph
from .potential import PotentialTable, shared_table

LOG2_OVER_2PI = math.log(2.0) / (2.0 * math.pi)

# directed neighbor offsets in half units; squared lengths 1, 4 and 5
_OFFSETS = [(1, 0), (-1, 0), (0, 1), (0, -1),
            (2, 0), (-2, 0), (0, 2), (0, -2),
            (2, 1), (2, -1), (-2, 1), (-2, -1),
            (1, 2), (1, -2), (-1, 2), (-1, -2)]


class CellSet:
    """Set of Gaussian-integer cells; scalar and vectorized membership."""

    def contains(self, cx: int, cy: int) -> bool:
        raise NotImplementedError

    def mask(self, cx, cy) -> np.ndarray:
        cx = np.asarray(cx)
        out = np.empty(cx.shape, dtype=bool)
        it = np.nditer([cx, np.asarray(cy)], flags=["multi_index"])
        for a, b in it:
            out[it.multi_index] = self.contains(int(a), int(b))
        return out


class FiniteCells(CellSet):
    def __init__(self, cells):
        pts = set()
        for c in cells:
            if isinstance(c, complex):
                pts.add((int(c.real), int(c.imag)))
            else:
                pts.add((int(c[0]), int(c[1])))
        self.cells = frozenset(pts)

    def __len__(self):
        return len(self.cells)

    def contains(self, cx, cy):
        return (cx, cy) in self.cells

    def mask(self, cx, cy):
        cx = np.asarray(cx, dtype=np.int64)
        cy = np.asarray(cy, dtype=np.int64)
        if not self.cells:
            return np.zeros(cx.shape, dtype=bool)
        key = cx * (2 ** 32) + cy
        keys = np.array([a * (2 ** 32) + b for a, b in self.cells])
        return np.isin(key, keys)


class LambdaCells(CellSet):
    """Cells given by a vectorized predicate on integer arrays."""

    def __init__(self, fn, name: str = "cells"):
        self.fn = fn
        self.name = name

    def contains(self, cx, cy):
        return bool(self.fn(np.asarray(cx), np.asarray(cy)))

    def mask(self, cx, cy):
        return self.fn(np.asarray(cx, dtype=np.int64),
                       np.asarray(cy, dtype=np.int64))


EMPTY_CELLS = LambdaCells(lambda x, y: np.zeros(np.shape(x), dtype=bool), "empty")
ALL_CELLS = LambdaCells(lambda x, y: np.ones(np.shape(x), dtype=bool), "all")


class HybridField:
    """Ideal coarse/fine membership masks on a rectangle of half-unit
    coordinates, with enough padding that neighbor and seam classification
    inside the rectangle matches the infinite graph."""

    PAD = 4

    def __init__(self, cells: CellSet, hx0: int, hx1: int, hy0: int, hy1: int,
                 N: int = 1):
        p = self.PAD
        self.N = N
        self.hx0, self.hx1, self.hy0, self.hy1 = hx0, hx1, hy0, hy1
        gx = np.arange(hx0 - p, hx1 + p + 1)
        gy = np.arange(hy0 - p, hy1 + p + 1)
        HX, HY = np.meshgrid(gx, gy, indexing="ij")
        # cell of the point h/(2N) is floor(h / 2N), componentwise
        in_d = cells.mask(np.floor_divide(HX, 2 * N), np.floor_divide(HY, 2 * N))
        even = (HX % 2 == 0) & (HY % 2 == 0)
        coarse = even & ~in_d
        # fine: in a D-cell and no ideal coarse vertex strictly within 2
        # half units; candidates depend on the parity of the coordinates
        fine = in_d.copy()
        ex = HX % 2 == 0
        ey = HY % 2 == 0
        c = coarse
        blocked = np.zeros_like(fine)
        # odd x, even y: coarse at (x-1, y) or (x+1, y); sh(+1,0) reads (x+1,y)
        blocked |= (~ex & ey) & (self._sh(c, 1, 0) | self._sh(c, -1, 0))
        blocked |= (ex & ~ey) & (self._sh(c, 0, 1) | self._sh(c, 0, -1))
        blocked |= (~ex & ~ey) & (self._sh(c, 1, 1) | self._sh(c, 1, -1)
                                  | self._sh(c, -1, 1) | self._sh(c, -1, -1))
        fine &= ~blocked
        self.coarse = coarse
        self.fine = fine
        self.vertex = coarse | fine
        self._weights_cache = None

    @staticmethod
    def _sh(m, dx, dy):
        """m shifted so that out[i,j] = m[i+dx, j+dy] (False off-grid)."""
        out = np.zeros_like(m)
        W, H = m.shape
        sx0, sx1 = max(dx, 0), W + min(dx, 0)
        tx0, tx1 = max(-dx, 0), W + min(-dx, 0)
        sy0, sy1 = max(dy, 0), H + min(dy, 0)
        ty0, ty1 = max(-dy, 0), H + min(-dy, 0)
        out[tx0:tx1, ty0:ty1] = m[sx0:sx1, sy0:sy1]
        return out

    def offset_weights(self):
        """For each offset, the (grid-shaped) weight of the edge from each
        vertex to vertex+offset in the ideal graph (0 when absent)."""
        if self._weights_cache is not None:
            return self._weights_cache
        out = []
        for dx, dy in _OFFSETS:
            d2 = dx * dx + dy * dy
            nb_c = self._sh(self.coarse, dx, dy)
            nb_f = self._sh(self.fine, dx, dy)
            w = np.zeros(self.coarse.shape)
            if d2 == 1:
                w[self.fine & nb_f] = 1.0
            elif d2 == 4:
                w[self.coarse & nb_c] = 1.0
                w[self.coarse & nb_f] = 0.5
                w[self.fine & nb_c] = 0.5
            elif d2 == 5:
                w[self.coarse & nb_f] = 0.25
                w[self.fine & nb_c] = 0.25
            out.append(w)
        self._weights_cache = out
        return out

    def seam_masks(self):
        """(Gbar, Gbarbar) masks over the grid, idealized classification."""
        ws = self.offset_weights()
        gbar = np.zeros_like(self.vertex)
        sx = np.zeros(self.vertex.shape, dtype=np.int64)
        sy = np.zeros(self.vertex.shape, dtype=np.int64)
        for (dx, dy), w in zip(_OFFSETS, ws):
            d2 = dx * dx + dy * dy
            if d2 in (4, 5):
                cross = w == 0.5
                cross |= w == 0.25
                gbar |= cross
            iw = np.round(4 * w).astype(np.int64)
            # sum of 4*W(v,w)*(v-w): offset contributes -(dx,dy) per edge
            sx -= iw * dx
            sy -= iw * dy
        gbarbar = self.vertex & ((sx != 0) | (sy != 0))
        return gbar & self.vertex, gbarbar

    def window_slice(self):
        p = self.PAD
        W = self.hx1 - self.hx0 + 1
        H = self.hy1 - self.hy0 + 1
        return slice(p, p + W), slice(p, p + H)

    def coords(self):
        gx = np.arange(self.hx0 - self.PAD, self.hx1 + self.PAD + 1)
        gy = np.arange(self.hy0 - self.PAD, self.hy1 + self.PAD + 1)
        return np.meshgrid(gx, gy, indexing="ij")


@dataclass
class HybridGraph:
    """Materialized window of G(D, N): the embedded graph plus seam data.

    Vertex positions are half-unit numerators over 2N; `fine[i]` flags the
    (1/2N)-grid vertices.  `seams` and `seam_intersections` are index arrays
    classified against the idealized infinite graph.
    """

    graph: EmbeddedWeightedGraph
    cells: CellSet
    N: int
    window: Rectangle
    fine: np.ndarray
    seams: np.ndarray
    seam_intersections: np.ndarray

    def vertex_position(self, i: int):
        return self.graph.position(i)


def _as_cells(D) -> CellSet:
    if isinstance(D, CellSet):
        return D
    return FiniteCells(D)


def build_hybrid(D, N: int, window: Rectangle) -> HybridGraph:
    """Materialize G(D, N) inside a closed rectangular window whose sides
    lie on multiples of 1/N.  Vertex order is lexicographic in (x, y)."""
    if N < 1:
        raise InvalidInputError("N must be at least 1")
    cells = _as_cells(D)
    bounds = []
    for val in (window.x0, window.y0, window.x1, window.y1):
        if (Fraction(val) * N).denominator != 1:
            raise InvalidInputError("window sides must be multiples of 1/N")
        bounds.append(int(Fraction(val) * 2 * N))
    hx0, hy0, hx1, hy1 = bounds
    if hx0 > hx1 or hy0 > hy1:
        raise InvalidInputError("empty window")
    field = HybridField(cells, hx0, hx1, hy0, hy1, N)
    sl = field.window_slice()
    HX, HY = field.coords()
    inwin = np.zeros(field.vertex.shape, dtype=bool)
    inwin[sl] = True
    vmask = field.vertex & inwin
    vx = HX[vmask]
    vy = HY[vmask]
    order = np.lexsort((vy, vx))
    vx, vy = vx[order], vy[order]
    index = -np.ones(field.vertex.shape, dtype=np.int64)
    flat = np.nonzero(vmask)
    index[flat[0][order], flat[1][order]] = np.arange(len(vx))
    edges = []
    ws = field.offset_weights()
    for (dx, dy), w in zip(_OFFSETS, ws):
        if dx < 0 or (dx == 0 and dy < 0):
            continue  # undirected: keep one orientation
        has = vmask & field._sh(vmask, dx, dy) & (w > 0)
        src = index[has]
        dst = _shift_index(index, dx, dy)[has]
        wsel = w[has]
        for a, b, wt in zip(src, dst, wsel):
            edges.append((int(a), int(b), float(wt)))
    g = EmbeddedWeightedGraph(vx, vy, 1, N, edges)
    gbar, gbarbar = field.seam_masks()
    seam_idx = index[gbar & vmask]
    sint_idx = index[gbarbar & vmask]
    fine_flags = np.zeros(len(vx), dtype=bool)
    fine_flags[index[field.fine & vmask]] = True
    return HybridGraph(g, cells, N, window, fine_flags,
                       np.sort(seam_idx), np.sort(sint_idx))


def _shift_index(index, dx, dy):
    out = -np.ones_like(index)
    W, H = index.shape
    sx0, sx1 = max(dx, 0), W + min(dx, 0)
    tx0, tx1 = max(-dx, 0), W + min(-dx, 0)
    sy0, sy1 = max(dy, 0), H + min(dy, 0)
    ty0, ty1 = max(-dy, 0), H + min(-dy, 0)
    out[tx0:tx1, ty0:ty1] = index[sx0:sx1, sy0:sy1]
    return out


def classify_seams(hybrid: HybridGraph) -> tuple[np.ndarray, np.ndarray]:
    """(Gbar, Gbarbar) as vertex index arrays (idealized classification,
    recomputed from the cell set)."""
    return hybrid.seams, hybrid.seam_intersections


def annihilation_order(hybrid: HybridGraph, v: int) -> int:
    """Largest k in {1, 2, 4} such that the graph Laplacian annihilates
    Re z^j and Im z^j for all j < k at v, by exact evaluation over the
    idealized neighbors.  The vertex must be at least 2/N interior to the
    window."""
    g = hybrid.graph
    hx, hy = int(g.px[v]), int(g.py[v])
    margin = 4  # 2/N in half units
    b = [Fraction(val) * 2 * hybrid.N for val in
         (hybrid.window.x0, hybrid.window.y0, hybrid.window.x1, hybrid.window.y1)]
    if not (b[0] + margin <= hx <= b[2] - margin
            and b[1] + margin <= hy <= b[3] - margin):
        raise InvalidInputError("vertex too close to the window edge")
    nbrs = _ideal_neighbors(hybrid.cells, hx, hy, hybrid.N)
    # sum of 4*W * ((z + d)^j - z^j) must vanish; translation invariance of
    # the annihilation property lets us take z = 0
    for j, k in ((1, 2), (2, 4), (3, 4)):
        sx = sy = 0
        for dx, dy, w4 in nbrs:
            zx, zy = _int_complex_pow(dx, dy, j)
            sx += w4 * zx
            sy += w4 * zy
        if sx != 0 or sy != 0:
            return 1 if j == 1 else 2
    return 4


def _int_complex_pow(x: int, y: int, j: int):
    rx, ry = 1, 0
    for _ in range(j):
        rx, ry = rx * x - ry * y, rx * y + ry * x
    return rx, ry


def _is_coarse(cells, hx, hy, N: int = 1):
    return hx % 2 == 0 and hy % 2 == 0 \
        and not cells.contains(hx // (2 * N), hy // (2 * N))


def _is_fine(cells, hx, hy, N: int = 1):
    if not cells.contains(hx // (2 * N), hy // (2 * N)):
        return False
    xs = (hx,) if hx % 2 == 0 else (hx - 1, hx + 1)
    ys = (hy,) if hy % 2 == 0 else (hy - 1, hy + 1)
    for ex in xs:
        for ey in ys:
            if (hx - ex) ** 2 + (hy - ey) ** 2 < 4 and _is_coarse(cells, ex, ey, N):
                return False
    return True


def _ideal_neighbors(cells, hx, hy, N: int = 1):
    """[(dx, dy, 4*weight)] of the infinite-graph neighbors of (hx, hy)."""
    me_c = _is_coarse(cells, hx, hy, N)
    me_f = _is_fine(cells, hx, hy, N)
    if not (me_c or me_f):
        raise InvalidInputError("not a hybrid vertex")
    out = []
    for dx, dy in _OFFSETS:
        nx, ny = hx + dx, hy + dy
        d2 = dx * dx + dy * dy
        nb_c = _is_coarse(cells, nx, ny, N)
        nb_f = _is_fine(cells, nx, ny, N)
        if d2 == 1 and me_f and nb_f:
            out.append((dx, dy, 4))
        elif d2 == 4:
            if me_c and nb_c:
                out.append((dx, dy, 4))
            elif (me_c and nb_f) or (me_f and nb_c):
                out.append((dx, dy, 2))
        elif d2 == 5 and ((me_c and nb_f) or (me_f and nb_c)):
            out.append((dx, dy, 1))
    return out


# ------------------------------------------------------------------
# b_v functions and the seam-defect (beta) table
# ------------------------------------------------------------------


def b_v_eval(D, N: int, v, w, table: PotentialTable | None = None) -> float:
    """The two-branch comparison function

        b_v(w) = A(N v, N w)  - log(N)/2pi   if floor(w) not in D
                 A(2N v, 2N w) - log(2N)/2pi  if floor(w) in D

    in the shifted normalization of the potential table.  v and w are
    points of (1/2N)Z^2, given as coordinate pairs (Fractions)."""
    if table is None:
        table = shared_table()
    cells = _as_cells(D)
    hvx, hvy = _half_units(v, N)
    hwx, hwy = _half_units(w, N)
    logN = math.log(N) / (2 * math.pi)
    if cells.contains(hwx // (2 * N), hwy // (2 * N)):
        return table.value(hvx - hwx, hvy - hwy, "paper") - logN - LOG2_OVER_2PI
    return table.value_half(hvx - hwx, hvy - hwy, "paper") - logN


def _half_units(p, N):
    hx = Fraction(p[0]) * 2 * N
    hy = Fraction(p[1]) * 2 * N
    if hx.denominator != 1 or hy.denominator != 1:
        raise InvalidInputError("point not on the (1/2N) grid")
    return int(hx), int(hy)


class SeamData:
    """Seam vertices of an idealized hybrid field within a disk window,
    with their ideal neighbors, packed for vectorized defect sums."""

    def __init__(self, cells: CellSet, window_radius: int):
        R = window_radius
        h = 2 * R + 2  # half-unit extent with margin
        field = HybridField(cells, -h, h, -h, h)
        self.field = field
        HX, HY = field.coords()
        gbar, gbarbar = field.seam_masks()
        disk = (HX * HX + HY * HY) <= (2 * R) ** 2
        sel = gbar & disk
        self.wx = HX[sel].astype(np.int64)
        self.wy = HY[sel].astype(np.int64)
        self.w_fine = field.fine[sel]
        K = len(self.wx)
        noff = len(_OFFSETS)
        self.nb_w = np.zeros((K, noff))
        self.nb_x = np.zeros((K, noff), dtype=np.int64)
        self.nb_y = np.zeros((K, noff), dtype=np.int64)
        self.nb_fine = np.zeros((K, noff), dtype=bool)
        ws = field.offset_weights()
        for k, (dx, dy) in enumerate(_OFFSETS):
            self.nb_w[:, k] = ws[k][sel]
            self.nb_x[:, k] = self.wx + dx
            self.nb_y[:, k] = self.wy + dy
            self.nb_fine[:, k] = HybridField._sh(field.fine, dx, dy)[sel]
        self.gbar_count = int((gbar & disk).sum())
        self.gbarbar_count = int((gbarbar & disk).sum())

    def defect_sum(self, table: PotentialTable, hvx: int, hvy: int) -> float:
        """beta_v = sum over seam w of |Delta_G b_v(w) - delta_v(w)| at N=1.
        Off the seam the defect vanishes identically (exact lattice
        harmonicity of the potential), so the seam sum is the whole sum."""
        b_w = self._b(table, hvx - self.wx, hvy - self.wy, self.w_fine)
        b_nb = self._b(table, hvx - self.nb_x, hvy - self.nb_y, self.nb_fine)
        delta = (self.nb_w * (b_nb - b_w[:, None])).sum(axis=1)
        at_v = (self.wx == hvx) & (self.wy == hvy)
        delta[at_v] -= 1.0
        return float(np.abs(delta).sum())

    @staticmethod
    def _b(table, dx, dy, fine_mask):
        """b_v at displacement d = (hv - hw) in half units, N=1:
        fine branch a(2(v-w)) - log2/2pi, coarse branch the half-integer
        extension at v-w.  Additive normalization cancels in the defect."""
        dx = np.asarray(dx)
        dy = np.asarray(dy)
        out = np.empty(dx.shape, dtype=np.float64)
        f = np.asarray(fine_mask)
        if f.any():
            out[f] = table.values(dx[f], dy[f]) - LOG2_OVER_2PI
        if (~f).any():
            out[~f] = table.values_half(dx[~f], dy[~f])
        return out

    def off_seam_defect(self, table: PotentialTable, hvx: int, hvy: int,
                        sample_radius: int = 8) -> float:
        """max |Delta_G b_v(w) - delta_v(w)| over non-seam vertices w with
        |w| <= sample_radius; should be at rounding level (< 1e-8)."""
        field = self.field
        HX, HY = field.coords()
        gbar, _ = field.seam_masks()
        sel = field.vertex & ~gbar & (HX * HX + HY * HY <= (2 * sample_radius) ** 2)
        wx = HX[sel].astype(np.int64)
        wy = HY[sel].astype(np.int64)
        wf = field.fine[sel]
        ws = field.offset_weights()
        b_w = self._b(table, hvx - wx, hvy - wy, wf)
        delta = np.zeros(len(wx))
        for k, (dx, dy) in enumerate(_OFFSETS):
            wgt = ws[k][sel]
            nf = HybridField._sh(field.fine, dx, dy)[sel]
            b_n = self._b(table, hvx - (wx + dx), hvy - (wy + dy), nf)
            delta += wgt * (b_n - b_w)
        delta[(wx == hvx) & (wy == hvy)] -= 1.0
        return float(np.abs(delta).max()) if len(delta) else 0.0


@dataclass
class BetaRow:
    label: str
    max_beta: float
    argmax: tuple  # (Fraction, Fraction) point
    total_bound_ok: bool
    seam_count: int
    truncation_allowance: float


# The five tabulated configurations.  The table's labels index the pair
# {D, complement}: the defining set actually used places the fine grid on
# the complement of the labeled set, which is the labeling under which the
# tabulated maxima are graph vertices.
BETA_CONFIGS = {
    "empty": EMPTY_CELLS,
    "all": ALL_CELLS,
    "quarter-plane": LambdaCells(lambda x, y: ~((x >= 0) & (y >= 0)),
                                 "complement of (Z+)^2"),
    "half-plane": LambdaCells(lambda x, y: y <= -1, "lower half plane"),
    "opposite-quarter-planes": LambdaCells(
        lambda x, y: ((x >= 0) & (y <= -1)) | ((x <= -1) & (y >= 0)),
        "second and fourth quadrants"),
    "three-quarter-planes": LambdaCells(lambda x, y: (x <= -1) & (y <= -1),
                                        "(Z-)^2"),
}

BETA_EXPECTED = {
    "empty": 0.0,
    "all": 0.0,
    "quarter-plane": 0.39,
    "half-plane": 0.19,
    "opposite-quarter-planes": 0.34,
    "three-quarter-planes": 0.31,
}


@dataclass
class EasyRectangle:
    """A rectangle [x0,x1] x [y0,y1] with sides on the coarse grid, graded
    by its strength: the largest s with

        s <= aspect <= 1/s,
        d(corners, seams inside)            >= s * diam,
        d(boundary, seam intersections in)  >= s * diam.

    The rectangle is easy when strength * diam > 1/N; the distance
    constraints then force any seam to cross the boundary perpendicularly.
    """

    hybrid: HybridGraph
    x0: Fraction
    y0: Fraction
    x1: Fraction
    y1: Fraction

    def __post_init__(self):
        for v in (self.x0, self.y0, self.x1, self.y1):
            if (Fraction(v) * self.hybrid.N).denominator != 1:
                raise InvalidInputError("sides must lie on the coarse grid")
        self.x0, self.y0 = Fraction(self.x0), Fraction(self.y0)
        self.x1, self.y1 = Fraction(self.x1), Fraction(self.y1)
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise InvalidInputError("empty rectangle")

    @property
    def corners(self):
        return [(self.x0, self.y0), (self.x1, self.y0),
                (self.x1, self.y1), (self.x0, self.y1)]

    def diam(self) -> float:
        return math.hypot(float(self.x1 - self.x0), float(self.y1 - self.y0))

    def _inside(self, idx_array):
        g = self.hybrid.graph
        den = g.den
        keep = []
        for v in idx_array:
            x = Fraction(int(g.px[v]), den)
            y = Fraction(int(g.py[v]), den)
            if self.x0 < x < self.x1 and self.y0 < y < self.y1:
                keep.append((float(x), float(y)))
        return keep

    def strength(self) -> float:
        w = float(self.x1 - self.x0)
        h = float(self.y1 - self.y0)
        aspect = w / h
        s = min(aspect, 1.0 / aspect)
        diam = self.diam()
        seam_pts = self._inside(self.hybrid.seams)
        if seam_pts:
            d = min(min(math.hypot(px - float(cx), py - float(cy))
                        for cx, cy in self.corners) for px, py in seam_pts)
            s = min(s, d / diam)
        sint_pts = self._inside(self.hybrid.seam_intersections)
        if sint_pts:
            d = min(self._dist_to_boundary(px, py) for px, py in sint_pts)
            s = min(s, d / diam)
        return s

    def _dist_to_boundary(self, px, py):
        return min(px - float(self.x0), float(self.x1) - px,
                   py - float(self.y0), float(self.y1) - py)

    def is_easy(self) -> bool:
        return self.strength() * self.diam() > 1.0 / self.hybrid.N


def check_planarity(hybrid: HybridGraph) -> bool:
    """No two edges of the materialized graph cross (proper crossings or
    interior touches; shared endpoints allowed).  Exact integer arithmetic
    on half-unit coordinates."""
    g = hybrid.graph
    segs = []
    for v in range(g.n):
        nb, ws = g.neighbors(v)
        for w in nb:
            if v < int(w):
                segs.append((int(g.px[v]), int(g.py[v]),
                             int(g.px[int(w)]), int(g.py[int(w)])))
    S = np.asarray(segs, dtype=np.int64)
    m = len(S)
    # all edges are short (length^2 <= 5), so bucket by position
    from collections import defaultdict
    buckets = defaultdict(list)
    for k in range(m):
        bx = int(S[k, 0]) // 4
        by = int(S[k, 1]) // 4
        buckets[(bx, by)].append(k)
    def crosses(a, b):
        ax, ay, bx, by = S[a]
        cx, cy, dx, dy = S[b]
        ends_a = {(ax, ay), (bx, by)}
        ends_b = {(cx, cy), (dx, dy)}
        if ends_a & ends_b:
            # sharing an endpoint is fine unless they overlap collinearly
            if (bx - ax) * (dy - cy) - (by - ay) * (dx - cx) == 0:
                for p in ends_b - ends_a:
                    if _on_open_segment(p, S[a]):
                        return True
                for p in ends_a - ends_b:
                    if _on_open_segment(p, S[b]):
                        return True
            return False
        d1 = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
        d2 = (bx - ax) * (dy - ay) - (by - ay) * (dx - ax)
        d3 = (dx - cx) * (ay - cy) - (dy - cy) * (ax - cx)
        d4 = (dx - cx) * (by - cy) - (dy - cy) * (bx - cx)
        if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) \
                and d1 != 0 and d2 != 0 and d3 != 0 and d4 != 0:
            return True
        # endpoint of one strictly interior to the other
        for p in ends_b:
            if _on_open_segment(p, S[a]):
                return True
        for p in ends_a:
            if _on_open_segment(p, S[b]):
                return True
        return False
    for key, lst in buckets.items():
        cand = []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                cand.extend(buckets.get((key[0] + dx, key[1] + dy), []))
        for a in lst:
            for b in cand:
                if b > a and crosses(a, b):
                    return False
    return True


def _on_open_segment(p, seg):
    px, py = p
    ax, ay, bx, by = seg
    cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    if cross != 0:
        return False
    dot = (px - ax) * (bx - ax) + (py - ay) * (by - ay)
    ll = (bx - ax) ** 2 + (by - ay) ** 2
    return 0 < dot < ll


def beta_table(window_radius: int = 200, search_radius: float = 5,
               table: PotentialTable | None = None,
               configs: dict | None = None) -> list[BetaRow]:
    """Maximal seam defect beta_v = sum_w |Delta_G b_v(w) - delta_v(w)| over
    vertices v with |v| <= search_radius, for each tabulated configuration,
    with the w-sum over the disk |w| <= window_radius (N = 1)."""
    if table is None:
        table = shared_table()
    need = 2 * (window_radius + int(math.ceil(search_radius))) + 4
    if table.radius < need:
        raise TableRangeError(
            f"potential table radius {table.radius} < required {need}")
    if configs is None:
        configs = BETA_CONFIGS
    allowance = 1.0 / (window_radius - search_radius)
    rows = []
    for label, cells in configs.items():
        data = SeamData(cells, window_radius)
        best = 0.0
        best_v = (Fraction(0), Fraction(0))
        sr2 = int(math.floor((2 * search_radius) ** 2))
        h = int(math.floor(2 * search_radius))
        for hvx in range(-h, h + 1):
            for hvy in range(-h, h + 1):
                if hvx * hvx + hvy * hvy > sr2:
                    continue
                if not (_is_coarse(cells, hvx, hvy) or _is_fine(cells, hvx, hvy)):
                    continue
                b = data.defect_sum(table, hvx, hvy)
                if b > best:
                    best = b
                    best_v = (Fraction(hvx, 2), Fraction(hvy, 2))
        rows.append(BetaRow(label, best, best_v,
                            best <= 0.4 + allowance + 1e-9,
                            data.gbar_count, allowance))
    return rows
