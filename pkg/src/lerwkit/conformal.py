"""Numerical Riemann map of an axis-aligned square onto the unit disk.

By symmetry the disk-to-square Schwarz-Christoffel map for a square
centered at the origin has prevertices at the four points e^{i pi/4} i^k,
which collapses the usual parameter problem: the product in the SC
derivative reduces to

    g'(w) = C (1 + w^4)^(-1/2),      g(0) = 0, C > 0,

and g maps the unit disk onto the square [-1,1]^2 when
C = 1 / int_0^1 (1+t^4)^(-1/2) dt.  The square-to-disk direction is Newton
inversion of g seeded by the linearized map; the boundary correspondence
along an edge reduces to the monotone real integral

    y(theta) = C int_0^theta (2 cos 2s)^(-1/2) ds

on the right edge (other edges by fourfold rotation), whence the boundary
derivative modulus |phi'(b)| = sqrt(2 cos 2 theta) / C, vanishing linearly
in the distance to the corner set.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import ellipkinc

from .errors import InvalidInputError, SingularPointError

_QUAD_EPS = 1e-12


def _sc_side_integral() -> float:
    val, _ = quad(lambda t: (1.0 + t ** 4) ** -0.5, 0.0, 1.0,
                  epsabs=_QUAD_EPS, epsrel=_QUAD_EPS)
    return val


class SquareDiskMap:
    """Conformal map phi of an open axis-aligned square onto the unit disk
    with phi(center) = 0 and phi'(center) > 0."""

    def __init__(self, center: complex = 0j, side: float = 2.0):
        if side <= 0:
            raise InvalidInputError("side must be positive")
        self.center = complex(center)
        self.side = float(side)
        self.scale = 2.0 / self.side  # square -> [-1,1]^2
        self.C = 1.0 / _sc_side_integral()

    # ---------------- disk -> square ----------------
    def disk_to_square(self, w: complex) -> complex:
        """g(w) for |w| <= 1 (radial-path SC integral), in [-1,1]^2 units."""
        if w == 0:
            return 0j
        re = quad(lambda t: ((1.0 + (t * w) ** 4) ** -0.5).real, 0.0, 1.0,
                  epsabs=_QUAD_EPS, epsrel=_QUAD_EPS, limit=200)[0]
        im = quad(lambda t: ((1.0 + (t * w) ** 4) ** -0.5).imag, 0.0, 1.0,
                  epsabs=_QUAD_EPS, epsrel=_QUAD_EPS, limit=200)[0]
        return self.C * w * complex(re, im)

    def _gprime(self, w: complex) -> complex:
        return self.C * (1.0 + w ** 4) ** -0.5

    # ---------------- square -> disk ----------------
    def map_point(self, z: complex) -> complex:
        """phi(z) for z strictly inside the square."""
        zeta = (complex(z) - self.center) * self.scale
        if max(abs(zeta.real), abs(zeta.imag)) >= 1.0:
            raise InvalidInputError("point not strictly inside the square")
        w = zeta / self.C
        r = abs(w)
        if r >= 1.0:
            w *= 0.99 / r
        for _ in range(80):
            f = self.disk_to_square(w) - zeta
            if abs(f) < 1e-13:
                break
            step = f / self._gprime(w)
            wn = w - step
            r = abs(wn)
            if r >= 1.0:
                wn /= r * r  # reflect back into the disk
                if abs(wn) >= 1.0:
                    wn = w * 0.5
            w = wn
        return w

    def derivative_at_center(self) -> float:
        """phi'(center) = scale / g'(0) = scale / C > 0."""
        return self.scale / self.C

    # ---------------- boundary ----------------
    def _edge_of(self, b: complex):
        """(edge k, signed coordinate along it): edge 0 is the right edge,
        counting counterclockwise; the along-coordinate is in [-1,1]."""
        zeta = (complex(b) - self.center) * self.scale
        x, y = zeta.real, zeta.imag
        tol = 1e-12
        if abs(abs(x) - 1.0) < tol and abs(y) <= 1.0 + tol:
            k = 0 if x > 0 else 2
            s = y if x > 0 else -y
        elif abs(abs(y) - 1.0) < tol and abs(x) <= 1.0 + tol:
            k = 1 if y > 0 else 3
            s = -x if y > 0 else x
        else:
            raise InvalidInputError("point not on the square's boundary")
        if abs(abs(s) - 1.0) < tol:
            raise SingularPointError("corner point")
        return k, s

    def _edge_integral(self, th: float) -> float:
        """int_0^theta (2 cos 2s)^(-1/2) ds; the substitution
        sin(psi) = sqrt(2) sin(theta) turns it into an incomplete elliptic
        integral of the first kind, (1/2) F(psi | m=1/2)."""
        s = math.sqrt(2.0) * math.sin(th)
        s = max(-1.0, min(1.0, s))
        return 0.5 * float(ellipkinc(math.asin(s), 0.5))

    def _edge_arc(self, s: float) -> float:
        """theta with g(e^{i theta}) = (1, s): root of the monotone edge
        integral."""
        target = float(s)

        def f(th):
            return self.C * self._edge_integral(th) - target
        lim = math.pi / 4 - 1e-13
        return brentq(f, -lim, lim, xtol=1e-15)

    def boundary_point_to_circle(self, b: complex) -> complex:
        """phi extended to the boundary: the prime-end image on |w| = 1."""
        k, s = self._edge_of(b)
        th = self._edge_arc(s)
        return cmath.exp(1j * (th + k * math.pi / 2.0))

    def boundary_derivative_modulus(self, b: complex) -> float:
        """|phi'(b)| for b on an edge (not a corner); vanishes like the
        distance to the corner set."""
        k, s = self._edge_of(b)
        th = self._edge_arc(s)
        return math.sqrt(2.0 * math.cos(2.0 * th)) / self.C * self.scale


@dataclass
class RecenteredMap:
    """Moebius recentering phi_u = (phi - mu)/(1 - conj(mu) phi) with
    mu = phi(u), so that phi_u(u) = 0."""

    base: SquareDiskMap
    u: complex

    def __post_init__(self):
        self.mu = self.base.map_point(self.u)

    def map_point(self, z: complex) -> complex:
        return self._moebius(self.base.map_point(z))

    def _moebius(self, w: complex) -> complex:
        return (w - self.mu) / (1.0 - w * self.mu.conjugate())

    def boundary_derivative_modulus(self, b: complex) -> float:
        w = self.base.boundary_point_to_circle(b)
        jac = (1.0 - abs(self.mu) ** 2) / abs(1.0 - w * self.mu.conjugate()) ** 2
        return self.base.boundary_derivative_modulus(b) * jac

    def log_abs_at(self, z: complex) -> float:
        return math.log(abs(self.map_point(z)))


def structure_constant(on_fine_grid: bool, on_seam: bool) -> float:
    """Local boundary weight kappa_b converting |phi'_u(b)|/(2 pi N) into a
    lattice hitting probability: 1/2 on the fine grid, 9/8 at coarse seam
    vertices, 1 elsewhere on the coarse grid."""
    if on_fine_grid:
        return 0.5
    return 9.0 / 8.0 if on_seam else 1.0


@dataclass
class HitFormulaReport:
    n: int
    u: complex
    max_rel_err_derivative: float
    max_rel_err_full_sum: float
    predicted_total_mass: float
    checked_boundary_points: int
    corner_exclusion: float


def verify_hit_formula(N: int, u: complex = 0j, corner_exclusion: float = 0.25,
                       report_rows: bool = False):
    """Compare, on the plain grid (1/N)Z^2 inside S = [-1,1]^2 (kappa = 1),
    the exact harmonic measure q(u, b, boundary) against

      (a) kappa |phi_u'(b)| / (2 pi N), and
      (b) -(1/2pi) sum_s W(b,s) log |phi_u(s)| over interior neighbors s,

    for boundary points b with d(b, K) >= corner_exclusion.  Also sums
    prediction (a) over the whole boundary (mass check against 1)."""
    from .graph import rect_lattice, graph_boundary
    from .geometry import Rectangle
    from .solver import harmonic_measure

    if N < 4:
        raise InvalidInputError("N too small")
    g = rect_lattice(-N, -N, N, N, unit_den=N)
    bs = graph_boundary(g, Rectangle(-1, -1, 1, 1))
    bset = bs.boundary
    start = nearest = g.index_of(int(round(u.real * N)), int(round(u.imag * N)))
    if start < 0:
        raise InvalidInputError("u must be a lattice point of the grid")
    hm = harmonic_measure(g, start, bset.tolist())
    m = SquareDiskMap(0j, 2.0)
    phi_u = RecenteredMap(m, u)
    rows = []
    errs_a, errs_b = [], []
    total_mass = 0.0
    for b in bset:
        bx, by = int(g.px[b]), int(g.py[b])
        bz = complex(bx / N, by / N)
        if max(abs(bx), abs(by)) != N or (abs(bx) == N and abs(by) == N):
            continue
        pred_a = phi_u.boundary_derivative_modulus(bz) / (2.0 * math.pi * N)
        total_mass += pred_a
        d_corner = min(abs(bz - complex(sx, sy))
                       for sx in (-1, 1) for sy in (-1, 1))
        if d_corner < corner_exclusion:
            continue
        # unique interior neighbor of a non-corner boundary vertex
        if abs(bx) == N:
            s = g.index_of(bx - (1 if bx > 0 else -1), by)
        else:
            s = g.index_of(bx, by - (1 if by > 0 else -1))
        sz = complex(g.px[s] / N, g.py[s] / N)
        pred_b = -phi_u.log_abs_at(sz) / (2.0 * math.pi)
        p = hm[int(b)]
        errs_a.append(abs(pred_a - p) / p)
        errs_b.append(abs(pred_b - p) / p)
        if report_rows:
            rows.append((bz, p, pred_a, pred_b))
    rep = HitFormulaReport(N, u, max(errs_a), max(errs_b), total_mass,
                           len(errs_a), corner_exclusion)
    return (rep, rows) if report_rows else rep
