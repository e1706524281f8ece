"""Exact planar geometry: dyadic points and a small algebra of regions.

All geometric predicates used to classify graph boundaries are decided in
exact rational arithmetic.  Points carry dyadic coordinates (integer
numerators over a power of two); regions are open sets built from
axis-aligned rectangles, disks with rational center and radius squared,
simple polygons with rational vertices, finite point sets, and finite
unions/differences of these.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import PrecisionError

# segment classification relative to an open region
INSIDE = 1    # open segment entirely in the region
OUTSIDE = -1  # open segment entirely in the complement
MIXED = 0


@dataclass(frozen=True)
class PlanePoint:
    """A point (numerator_x + i*numerator_y) / 2**scale_log2, in units of the
    owning graph's rational unit.  Equality is exact equality of the reduced
    coordinates; no floating point enters any comparison."""

    numerator_x: int
    numerator_y: int
    scale_log2: int = 0

    def __post_init__(self):
        if self.scale_log2 < 0:
            raise ValueError("scale_log2 must be nonnegative")
        nx, ny, s = self.numerator_x, self.numerator_y, self.scale_log2
        while s > 0 and nx % 2 == 0 and ny % 2 == 0:
            nx //= 2
            ny //= 2
            s -= 1
        object.__setattr__(self, "numerator_x", nx)
        object.__setattr__(self, "numerator_y", ny)
        object.__setattr__(self, "scale_log2", s)

    @property
    def x(self) -> Fraction:
        return Fraction(self.numerator_x, 1 << self.scale_log2)

    @property
    def y(self) -> Fraction:
        return Fraction(self.numerator_y, 1 << self.scale_log2)

    @staticmethod
    def from_fractions(x: Fraction, y: Fraction) -> "PlanePoint":
        x, y = Fraction(x), Fraction(y)
        den = x.denominator
        d2 = y.denominator
        # both denominators must be powers of two
        for d in (den, d2):
            if d & (d - 1):
                raise ValueError("coordinates must be dyadic rationals")
        s = max(den.bit_length(), d2.bit_length()) - 1
        return PlanePoint(int(x * (1 << s)), int(y * (1 << s)), s)

    def as_complex(self) -> complex:
        sc = 2.0 ** -self.scale_log2
        return complex(self.numerator_x * sc, self.numerator_y * sc)

    def dist2(self, other: "PlanePoint") -> Fraction:
        dx = self.x - other.x
        dy = self.y - other.y
        return dx * dx + dy * dy

    def __repr__(self):
        return f"PlanePoint({self.x}, {self.y})"


def _frac_pt(p):
    if hasattr(p, "x"):
        return Fraction(p.x), Fraction(p.y)
    return Fraction(p[0]), Fraction(p[1])


class Region:
    """Open subset of the plane with exact membership and exact
    open-segment classification."""

    def contains(self, p) -> bool:
        raise NotImplementedError

    def segment_status(self, p, q) -> int:
        """Classify the open segment ]p,q[ as INSIDE / OUTSIDE / MIXED."""
        raise NotImplementedError

    # ---- composition sugar ----
    def __or__(self, other):
        return Union(self, other)

    def __sub__(self, other):
        return Difference(self, other)

    # cut parameters t in (0,1) where ]p,q[ can change sides; must be exact
    # rationals.  Regions with irrational cuts override segment_status instead.
    def _cuts(self, px, py, qx, qy):
        raise PrecisionError(
            f"{type(self).__name__} does not support exact segment cuts")

    def _status_from_cuts(self, p, q):
        # The cut parameters contain every t where the segment can meet a
        # primitive boundary, so membership is constant between consecutive
        # cuts.  Probing interval midpoints and the cut points themselves
        # decides the segment exactly.
        px, py = _frac_pt(p)
        qx, qy = _frac_pt(q)
        ts = sorted(set(t for t in self._cuts(px, py, qx, qy) if 0 < t < 1))
        grid = [Fraction(0)] + ts + [Fraction(1)]
        probe_ts = [(a + b) / 2 for a, b in zip(grid[:-1], grid[1:])] + ts
        probes = [self.contains(_SegPoint(px + t * (qx - px),
                                          py + t * (qy - py)))
                  for t in probe_ts]
        if all(probes):
            return INSIDE
        if not any(probes):
            return OUTSIDE
        return MIXED

    # vectorized helpers for lattice sweeps; exact integer arithmetic.
    # nx, ny are integer numerator arrays; points are (nx + i ny) / den.
    def contains_lattice(self, nx, ny, den):
        out = np.empty(len(nx), dtype=bool)
        for k in range(len(nx)):
            out[k] = self.contains(_SegPoint(Fraction(int(nx[k]), den),
                                             Fraction(int(ny[k]), den)))
        return out


class _SegPoint:
    """Internal adapter: a point with Fraction coords for contains() calls."""

    __slots__ = ("x", "y")

    def __init__(self, x, y):
        self.x = x
        self.y = y


def _pt_xy(p):
    return _frac_pt(p)


class Rectangle(Region):
    """Open axis-aligned rectangle (x0, x1) x (y0, y1)."""

    def __init__(self, x0, y0, x1, y1):
        self.x0, self.y0 = Fraction(x0), Fraction(y0)
        self.x1, self.y1 = Fraction(x1), Fraction(y1)
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError("empty rectangle")

    def contains(self, p):
        x, y = _pt_xy(p)
        return self.x0 < x < self.x1 and self.y0 < y < self.y1

    def contains_closure(self, p):
        x, y = _pt_xy(p)
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1

    def _cuts(self, px, py, qx, qy):
        ts = []
        dx, dy = qx - px, qy - py
        for lo, hi, p0, d in ((self.x0, self.x1, px, dx), (self.y0, self.y1, py, dy)):
            if d != 0:
                ts.append((lo - p0) / d)
                ts.append((hi - p0) / d)
        return ts

    def segment_status(self, p, q):
        return self._status_from_cuts(p, q)

    def contains_lattice(self, nx, ny, den):
        nx = np.asarray(nx, dtype=np.int64)
        ny = np.asarray(ny, dtype=np.int64)
        # nx/den > a/b  <=>  nx*b > a*den, all in int64
        return ((nx * self.x0.denominator > self.x0.numerator * den)
                & (nx * self.x1.denominator < self.x1.numerator * den)
                & (ny * self.y0.denominator > self.y0.numerator * den)
                & (ny * self.y1.denominator < self.y1.numerator * den))

    def __repr__(self):
        return f"Rectangle({self.x0}, {self.y0}, {self.x1}, {self.y1})"


class Disk(Region):
    """Open disk with rational center and rational radius squared."""

    def __init__(self, cx, cy, r2):
        self.cx, self.cy = Fraction(cx), Fraction(cy)
        self.r2 = Fraction(r2)
        if self.r2 <= 0:
            raise ValueError("radius squared must be positive")

    def contains(self, p):
        x, y = _pt_xy(p)
        return (x - self.cx) ** 2 + (y - self.cy) ** 2 < self.r2

    def segment_status(self, p, q):
        # q(t) = |p + t(q-p) - c|^2 - r^2 is a convex rational quadratic.
        px, py = _pt_xy(p)
        qx, qy = _pt_xy(q)
        ax, ay = px - self.cx, py - self.cy
        dx, dy = qx - px, qy - py
        a = dx * dx + dy * dy
        b = 2 * (ax * dx + ay * dy)
        c = ax * ax + ay * ay - self.r2
        q0, q1 = c, a + b + c
        if q0 <= 0 and q1 <= 0:
            # convex, so the interior of the segment is strictly inside
            # unless the quadratic is identically on the circle (impossible).
            return INSIDE
        tstar_ok = a != 0 and 0 < -b < 2 * a
        qmin = c - Fraction(b * b, 4 * a) if tstar_ok else min(q0, q1)
        if qmin >= 0 and q0 >= 0 and q1 >= 0:
            return OUTSIDE
        return MIXED

    def contains_lattice(self, nx, ny, den):
        nx = np.asarray(nx, dtype=np.int64)
        ny = np.asarray(ny, dtype=np.int64)
        # (nx/den - cx)^2 + (ny/den - cy)^2 < r2, cleared of denominators
        D = self.cx.denominator * self.cy.denominator * self.r2.denominator
        # work in integers scaled by (den * dcx * dcy)
        # simply fall back to object arithmetic when numbers could overflow
        fx = nx.astype(object)
        fy = ny.astype(object)
        dxn = fx * self.cx.denominator - self.cx.numerator * den
        dyn = fy * self.cy.denominator - self.cy.numerator * den
        lhs = (dxn * dxn) * (self.cy.denominator ** 2) * self.r2.denominator \
            + (dyn * dyn) * (self.cx.denominator ** 2) * self.r2.denominator
        rhs = self.r2.numerator * (den ** 2) * (self.cx.denominator ** 2) \
            * (self.cy.denominator ** 2)
        return np.array([l < rhs for l in lhs], dtype=bool)


class Polygon(Region):
    """Open simple polygon with rational vertices (CCW or CW)."""

    def __init__(self, vertices):
        self.v = [(Fraction(x), Fraction(y)) for x, y in vertices]
        if len(self.v) < 3:
            raise ValueError("polygon needs at least 3 vertices")

    def edges(self):
        n = len(self.v)
        for i in range(n):
            yield self.v[i], self.v[(i + 1) % n]

    def _on_boundary(self, x, y):
        for (ax, ay), (bx, by) in self.edges():
            if (bx - ax) * (y - ay) - (by - ay) * (x - ax) == 0:
                if min(ax, bx) <= x <= max(ax, bx) and min(ay, by) <= y <= max(ay, by):
                    return True
        return False

    def contains(self, p):
        x, y = _pt_xy(p)
        if self._on_boundary(x, y):
            return False
        # exact crossing count with a horizontal ray to +infinity
        cross = 0
        for (ax, ay), (bx, by) in self.edges():
            if (ay > y) != (by > y):
                # x-coordinate of the edge at height y
                t = Fraction(y - ay, by - ay)
                xi = ax + t * (bx - ax)
                if xi > x:
                    cross ^= 1
        return bool(cross)

    def _cuts(self, px, py, qx, qy):
        ts = []
        dx, dy = qx - px, qy - py
        for (ax, ay), (bx, by) in self.edges():
            ex, ey = bx - ax, by - ay
            den = dx * ey - dy * ex
            if den != 0:
                t = ((ax - px) * ey - (ay - py) * ex) / den
                u = ((ax - px) * dy - (ay - py) * dx) / den
                if 0 <= u <= 1:
                    ts.append(t)
            else:
                # parallel; collinear overlap contributes the edge endpoints
                if (ax - px) * dy - (ay - py) * dx == 0:
                    for cx, cy in ((ax, ay), (bx, by)):
                        if dx != 0:
                            ts.append((cx - px) / dx)
                        elif dy != 0:
                            ts.append((cy - py) / dy)
        return ts

    def segment_status(self, p, q):
        return self._status_from_cuts(p, q)

    def contains_lattice(self, nx, ny, den):
        import math as _math
        nx = np.asarray(nx, dtype=np.int64)
        ny = np.asarray(ny, dtype=np.int64)
        # scale polygon coords to the common integer grid den * L
        L = 1
        for x, y in self.v:
            L = _math.lcm(L, x.denominator, y.denominator)
        bound = max(int(np.abs(nx).max(initial=1)), int(np.abs(ny).max(initial=1)),
                    max(abs(int(x * L * den)) for x, y in self.v),
                    max(abs(int(y * L * den)) for x, y in self.v)) * L
        if bound * bound > 2 ** 62:
            raise PrecisionError("polygon lattice predicate would overflow; "
                                 "reduce the coordinate scale")
        X = nx * L
        Y = ny * L
        V = [(int(x * L * den), int(y * L * den)) for x, y in self.v]
        inside = np.zeros(len(nx), dtype=bool)
        onb = np.zeros(len(nx), dtype=bool)
        n = len(V)
        for i in range(n):
            ax, ay = V[i]
            bx, by = V[(i + 1) % n]
            cross = (bx - ax) * (Y - ay) - (by - ay) * (X - ax)
            between = ((np.minimum(ax, bx) <= X) & (X <= np.maximum(ax, bx))
                       & (np.minimum(ay, by) <= Y) & (Y <= np.maximum(ay, by)))
            onb |= (cross == 0) & between
            if ay != by:
                straddle = (ay > Y) != (by > Y)
                # xi > X  <=>  ax + (Y-ay)(bx-ax)/(by-ay) > X, cleared of sign
                num = (ax - X) * (by - ay) + (Y - ay) * (bx - ax)
                gt = num > 0 if by > ay else num < 0
                inside ^= straddle & gt
        return inside & ~onb


class FinitePointSet(Region):
    """A finite closed set of rational points (used as a subtrahend)."""

    def __init__(self, points):
        self.pts = [(Fraction(x), Fraction(y)) for x, y in points]
        self._set = set(self.pts)

    def contains(self, p):
        x, y = _pt_xy(p)
        return (x, y) in self._set

    def points_on_open_segment(self, p, q):
        px, py = _pt_xy(p)
        qx, qy = _pt_xy(q)
        dx, dy = qx - px, qy - py
        out = []
        for x, y in self.pts:
            if (x - px) * dy - (y - py) * dx == 0:
                t = ((x - px) * dx + (y - py) * dy) / (dx * dx + dy * dy)
                if 0 < t < 1:
                    out.append((x, y))
        return out

    def segment_status(self, p, q):
        # a finite set has empty interior
        return MIXED if self.points_on_open_segment(p, q) else OUTSIDE

    def contains_lattice(self, nx, ny, den):
        nx = np.asarray(nx, dtype=np.int64)
        ny = np.asarray(ny, dtype=np.int64)
        keys = []
        for x, y in self.pts:
            xs, ys = x * den, y * den
            if xs.denominator == 1 and ys.denominator == 1:
                keys.append((int(xs) << 32) + int(ys))
        if not keys:
            return np.zeros(len(nx), dtype=bool)
        return np.isin((nx << 32) + ny, np.asarray(keys, dtype=np.int64))


class Union(Region):
    def __init__(self, *parts):
        self.parts = parts

    def contains(self, p):
        return any(r.contains(p) for r in self.parts)

    def _cuts(self, px, py, qx, qy):
        ts = []
        for r in self.parts:
            ts.extend(r._cuts(px, py, qx, qy))
        return ts

    def segment_status(self, p, q):
        return self._status_from_cuts(p, q)

    def contains_lattice(self, nx, ny, den):
        out = np.zeros(len(np.asarray(nx)), dtype=bool)
        for r in self.parts:
            out |= r.contains_lattice(nx, ny, den)
        return out


class Difference(Region):
    """A minus B.  When B is a FinitePointSet this is the punctured-domain
    construction and stays exactly decidable."""

    def __init__(self, a: Region, b: Region):
        self.a, self.b = a, b

    def contains(self, p):
        return self.a.contains(p) and not self.b.contains(p)

    def segment_status(self, p, q):
        if isinstance(self.b, FinitePointSet):
            sa = self.a.segment_status(p, q)
            if sa == OUTSIDE:
                return OUTSIDE
            punct = self.b.points_on_open_segment(p, q)
            if sa == INSIDE:
                return MIXED if punct else INSIDE
            return MIXED
        return self._status_from_cuts(p, q)

    def _cuts(self, px, py, qx, qy):
        return self.a._cuts(px, py, qx, qy) + self.b._cuts(px, py, qx, qy)

    def contains_lattice(self, nx, ny, den):
        return self.a.contains_lattice(nx, ny, den) \
            & ~self.b.contains_lattice(nx, ny, den)


def open_square(half_width) -> Rectangle:
    h = Fraction(half_width)
    return Rectangle(-h, -h, h, h)
