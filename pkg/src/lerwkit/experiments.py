"""Experiment drivers: scaling-limit convergence, the punctured-domain
non-convergence example, the hybrid interpolation sweep, and the rho
continuity diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _engine
from .errors import InvalidInputError, StepBudgetError
from .geometry import (Difference, FinitePointSet, Polygon, Rectangle,
                       Region, open_square)
from .graph import graph_boundary, nearest_vertex, rect_lattice
from .hybrid import FiniteCells, build_hybrid
from .rng import RngStream
from .solver import harmonic_measure
from .walk import DEFAULT_STEP_BUDGET, MCEstimate

# Containment convention for "LE(R) subset E": the stopped walk's terminal
# vertex lies on the domain's graph boundary, which an open E can never
# contain; we require every non-terminal vertex of the erased path to lie
# in E and the terminal vertex to lie in the closure of E.


@dataclass
class ConvergenceRow:
    n: int
    estimate: MCEstimate
    degenerate: bool  # mesh comparable to d(a, boundary)


def _region_closure_flags(region, graph):
    """(open-containment flags, closure flags) for Rectangle targets."""
    if isinstance(region, Rectangle):
        open_f = region.contains_lattice(graph.px, graph.py, graph.den)
        cl = ((graph.px * region.x0.denominator >= region.x0.numerator * graph.den)
              & (graph.px * region.x1.denominator <= region.x1.numerator * graph.den)
              & (graph.py * region.y0.denominator >= region.y0.numerator * graph.den)
              & (graph.py * region.y1.denominator <= region.y1.numerator * graph.den))
        return open_f, cl
    open_f = region.contains_lattice(graph.px, graph.py, graph.den)
    # generic closure: open containment or (for composite targets) the
    # boundary-adjacent vertices; adequate for the dyadic targets used here
    return open_f, open_f.copy()


def lerw_containment_probability(domain: Region, target: Region, a,
                                 n: int, samples: int, rng: RngStream,
                                 workers: int = 0,
                                 step_budget: int = DEFAULT_STEP_BUDGET):
    """P(LE(R_n) subset target) for the walk R_n on 2^-n Z^2 started at the
    vertex nearest a and stopped on the domain's graph boundary."""
    den = 2 ** n
    bbox = _dyadic_bbox(domain, den)
    g = rect_lattice(bbox[0], bbox[1], bbox[2], bbox[3], unit_den=den)
    bs = graph_boundary(g, domain)
    if len(bs.interior) == 0:
        raise InvalidInputError("domain has no interior at this mesh")
    start = nearest_vertex(g, a)
    stop = np.zeros(g.n, dtype=np.uint8)
    stop[bs.boundary] = 1
    ok_in, ok_cl = _region_closure_flags(target, g)
    tables = _engine.get_tables(g)
    _engine.set_workers(workers)
    contained, bad = _engine.batch_lerw_contained(
        tables, stop, ok_in.astype(np.uint8), ok_cl.astype(np.uint8),
        start, rng.seed, rng.stream_id, samples, step_budget, g.n)
    if bad:
        raise StepBudgetError(f"{bad} walks exceeded the step budget at n={n}")
    return MCEstimate.bernoulli(int(contained), samples, rng.seed), g, start


def _dyadic_bbox(region: Region, den: int):
    if isinstance(region, Rectangle):
        lo_x = math.floor(region.x0 * den) - 1
        hi_x = math.ceil(region.x1 * den) + 1
        lo_y = math.floor(region.y0 * den) - 1
        hi_y = math.ceil(region.y1 * den) + 1
        return lo_x, lo_y, hi_x, hi_y
    if isinstance(region, Difference):
        return _dyadic_bbox(region.a, den)
    if isinstance(region, Polygon):
        xs = [x for x, _ in region.v]
        ys = [y for _, y in region.v]
        return (math.floor(min(xs) * den) - 1, math.floor(min(ys) * den) - 1,
                math.ceil(max(xs) * den) + 1, math.ceil(max(ys) * den) + 1)
    raise InvalidInputError("cannot bound this region")


def convergence_experiment(domain: Region, target: Region, a, n_range,
                           samples: int, rng: RngStream, workers: int = 0,
                           step_budget: int = DEFAULT_STEP_BUDGET
                           ) -> list[ConvergenceRow]:
    """Containment probabilities across mesh levels n (mesh 2^-n)."""
    try:
        d_bnd = _dist_point_segments(float(Fraction(a[0])), float(Fraction(a[1])),
                                     _region_boundary_segments(domain))
    except InvalidInputError:
        d_bnd = math.inf
    rows = []
    for k, n in enumerate(n_range):
        est, g, start = lerw_containment_probability(
            domain, target, a, n, samples, rng.child(rng.stream_id + k),
            workers, step_budget)
        # mesh comparable to the start's distance from the boundary
        degenerate = 2.0 ** -n >= d_bnd / 2.0
        rows.append(ConvergenceRow(n, est, degenerate))
    return rows


# ---------------------------------------------------------------- puncture


def cantor_like_set(depth: int = 3, precision_bits: int = 40):
    """Closed middle-thirds-style subset of ]-1/3, 1/3[ whose endpoints are
    dyadics with `precision_bits` fractional bits shifted so that no
    endpoint lies on a coarser dyadic grid line.  A stand-in, at finite
    resolution, for a positive-measure closed set avoiding the rationals:
    it avoids every dyadic grid up to 2^-(precision_bits-1) mesh.
    Returns a list of closed intervals (Fractions)."""
    one = 1 << precision_bits
    # offset ~ sqrt(2)/2^12, rounded to an odd numerator
    off = int(math.sqrt(2.0) * one) >> 12
    off |= 1
    # shrink the base interval so the offset keeps it inside ]-1/3, 1/3[
    reach = one // 3 - (one >> 8)
    lo = Fraction(-2 * reach + off, 2 * one)
    hi = Fraction(2 * reach + off, 2 * one)
    intervals = [(lo, hi)]
    for _ in range(depth):
        nxt = []
        for a, b in intervals:
            # remove the middle 1/16 so the total measure stays >= 1/2
            keep = (b - a) * Fraction(15, 32)
            nxt.append((a, a + keep))
            nxt.append((b - keep, b))
        intervals = nxt
    # nudge every endpoint onto the odd dyadic comb at full precision
    out = []
    for a, b in intervals:
        an = Fraction(int(a * 2 * one) | 1, 2 * one)
        bn = Fraction(int(b * 2 * one) | 1, 2 * one)
        if an < bn:
            out.append((an, bn))
    return out


def _dist_to_intervals(x: Fraction, intervals) -> Fraction:
    best = None
    for a, b in intervals:
        if x < a:
            d = a - x
        elif x > b:
            d = x - b
        else:
            d = Fraction(0)
        best = d if best is None else min(best, d)
    return best


@dataclass
class PunctureStage:
    k: int
    n_k: int
    r_k: Fraction
    points: list  # obstacle points (Fraction pairs)


def puncture_construction(n_schedule=(6, 10), cantor_depth: int = 3):
    """The punctured-square domain: a square with four point-comb obstacles
    per stage k, living on odd multiples of 2^-n_k near radius r_k ~ 1/3,
    within distance 1/k of the Cantor-like horizontal section."""
    intervals = cantor_like_set(cantor_depth)
    stages = []
    for k, nk in enumerate(n_schedule, start=1):
        den = 2 ** nk
        m = den // 3
        if m % 2 == 0:
            m += 1
        rk = Fraction(m, den)
        assert abs(rk - Fraction(1, 3)) <= Fraction(2, den)
        comb = []
        for j in range(-den + 1, den, 2):  # odd multiples of 2^-nk in (-1,1)
            x = Fraction(j, den)
            if _dist_to_intervals(x, intervals) < Fraction(1, k):
                comb.append(x)
        pts = []
        for x in comb:
            for s in (rk, -rk):
                pts.append((x, s))
                pts.append((s, x))
        stages.append(PunctureStage(k, nk, rk, pts))
    return stages


def puncture_domain(stages) -> Difference:
    pts = [p for st in stages for p in st.points]
    return Difference(open_square(1), FinitePointSet(pts))


def puncture_exact_row(n: int, stages) -> float:
    """Exact q(0, outer square boundary, domain boundary, 2^-n Z^2) for the
    punctured square: the probability that the walk from 0 exits through
    the outer square rather than getting absorbed by an active obstacle."""
    den = 2 ** n
    dom = puncture_domain(stages)
    g = rect_lattice(-den, -den, den, den, unit_den=den)
    bs = graph_boundary(g, dom)
    start = g.index_of(0, 0)
    hm = harmonic_measure(g, start, bs.boundary.tolist())
    q = 0.0
    for b, p in hm.items():
        if max(abs(int(g.px[b])), abs(int(g.py[b]))) == den:
            q += p
    return q


def puncture_mc_row(n: int, stages, samples: int, rng: RngStream,
                    step_budget: int = DEFAULT_STEP_BUDGET) -> float:
    """Monte Carlo version of puncture_exact_row for meshes too fine to
    factor (obstacle exit times grow with the active comb count, hence the
    explicit step budget)."""
    den = 2 ** n
    dom = puncture_domain(stages)
    g = rect_lattice(-den, -den, den, den, unit_den=den)
    bs = graph_boundary(g, dom)
    stop = np.zeros(g.n, dtype=np.uint8)
    stop[bs.boundary] = 1
    ring = np.zeros(g.n, dtype=np.uint8)
    on_square = np.maximum(np.abs(g.px), np.abs(g.py)) == den
    ring[bs.boundary[on_square[bs.boundary]]] = 1
    tables = _engine.get_tables(g)
    hits, bad = _engine.batch_endpoint_counts(
        tables, stop, ring, g.index_of(0, 0), 1, rng.seed, rng.stream_id,
        samples, step_budget)
    if bad:
        raise StepBudgetError(f"{bad} walks exceeded the budget at n={n}")
    return hits / samples


def puncture_demo(n_values=(4, 5, 6, 7, 8), n_schedule=(6, 10),
                  samples: int | None = None, rng: RngStream | None = None,
                  exact_limit: int = 8):
    """Hitting probabilities of the outer square across scales; the value
    collapses when a comb activates (n = n_k) and recovers only slowly
    afterwards, so the sequence cannot converge when the schedule keeps
    injecting fresh scales.  Rows with n <= exact_limit come from exact
    solves; finer rows fall back to Monte Carlo (requires samples + rng)."""
    stages = puncture_construction(n_schedule)
    rows = []
    for n in n_values:
        if n <= exact_limit:
            rows.append((n, puncture_exact_row(n, stages)))
        else:
            if samples is None or rng is None:
                raise InvalidInputError(
                    f"n={n} needs Monte Carlo: pass samples and rng")
            rows.append((n, puncture_mc_row(n, stages, samples,
                                            rng.child(rng.stream_id + n))))
    return rows


# ---------------------------------------------------------------- rho


@dataclass
class RhoDiagnostics:
    r: float
    delta: Fraction
    rho1: float
    rho2: float
    rho3: float


def rho_diagnostics(domain: Region, target: Region, a, r: float,
                    delta) -> RhoDiagnostics:
    """Exact boundary-quality functionals at mesh `delta` (a dyadic):

      X1: small components of the lattice complement of the domain interior
          (diameter < r),
      X2: domain-boundary vertices within r of the target's boundary,
      X3 = X1 union X2;  rho_i = exit mass on X_i."""
    delta = Fraction(delta)
    if delta <= 0 or Fraction(1, delta).denominator != 1:
        raise InvalidInputError("delta must be 1/integer (dyadic mesh)")
    den = int(1 / delta)
    bbox = _dyadic_bbox(domain, den)
    pad = max(2, int(math.ceil(r * den)) + 2)
    g = rect_lattice(bbox[0] - pad, bbox[1] - pad, bbox[2] + pad,
                     bbox[3] + pad, unit_den=den)
    bs = graph_boundary(g, domain)
    start = nearest_vertex(g, a)
    hm = harmonic_measure(g, start, bs.boundary.tolist())

    # X1: graph-connected components of the complement of the interior
    interior_mask = np.zeros(g.n, dtype=bool)
    interior_mask[bs.interior] = True
    comp = -np.ones(g.n, dtype=np.int64)
    comp_pts: dict[int, list] = {}
    cid = 0
    for v in range(g.n):
        if interior_mask[v] or comp[v] >= 0:
            continue
        stack = [v]
        comp[v] = cid
        pts = []
        while stack:
            u = stack.pop()
            pts.append(u)
            nb, _ = g.neighbors(u)
            for w in nb:
                w = int(w)
                if not interior_mask[w] and comp[w] < 0:
                    comp[w] = cid
                    stack.append(w)
        comp_pts[cid] = pts
        cid += 1
    # components touching the artificial frame are unbounded surrogates
    frame = ((g.px == bbox[0] - pad) | (g.px == bbox[2] + pad)
             | (g.py == bbox[1] - pad) | (g.py == bbox[3] + pad))
    x1 = np.zeros(g.n, dtype=bool)
    for cid2, pts in comp_pts.items():
        pts = np.asarray(pts)
        if frame[pts].any():
            continue
        dx = (g.px[pts].max() - g.px[pts].min()) / den
        dy = (g.py[pts].max() - g.py[pts].min()) / den
        if math.hypot(float(dx), float(dy)) < r:
            x1[pts] = True

    # X2: boundary vertices within r of the target's boundary
    x2 = np.zeros(g.n, dtype=bool)
    tb = _region_boundary_segments(target)
    for b in bs.boundary:
        px = float(g.px[b]) / den
        py = float(g.py[b]) / den
        if _dist_point_segments(px, py, tb) < r:
            x2[int(b)] = True

    rho1 = sum(p for b, p in hm.items() if x1[b])
    rho2 = sum(p for b, p in hm.items() if x2[b])
    rho3 = sum(p for b, p in hm.items() if x1[b] or x2[b])
    return RhoDiagnostics(r, delta, rho1, rho2, rho3)


def _region_boundary_segments(region: Region):
    if isinstance(region, Rectangle):
        x0, y0, x1, y1 = map(float, (region.x0, region.y0, region.x1, region.y1))
        return [((x0, y0), (x1, y0)), ((x1, y0), (x1, y1)),
                ((x1, y1), (x0, y1)), ((x0, y1), (x0, y0))]
    if isinstance(region, Polygon):
        v = [(float(x), float(y)) for x, y in region.v]
        return list(zip(v, v[1:] + v[:1]))
    raise InvalidInputError("target must be a rectangle or polygon")


def _dist_point_segments(px, py, segments) -> float:
    best = math.inf
    for (ax, ay), (bx, by) in segments:
        vx, vy = bx - ax, by - ay
        t = ((px - ax) * vx + (py - ay) * vy) / (vx * vx + vy * vy)
        t = max(0.0, min(1.0, t))
        best = min(best, math.hypot(px - ax - t * vx, py - ay - t * vy))
    return best


# ------------------------------------------------------------ interpolation


@dataclass
class SweepRow:
    k: int
    mean_p: float
    std_err: float
    trials: int


def interpolation_sweep(domain: Region, target: Region, a, M: int, N: int,
                        k_values, trials_per_k: int, samples: int,
                        rng: RngStream, workers: int = 0,
                        step_budget: int = DEFAULT_STEP_BUDGET):
    """Containment probability on hybrid graphs G(D_k, N) inside M*domain,
    averaged over random k-subsets D_k of the eligible cell set Y.

    Heuristic at desk scale: the admissibility threshold that the rigorous
    interpolation argument needs (N larger than a power of M) is not
    enforced here; the endpoints k = 0 and k = #Y reduce to plain grids.
    """
    Md = Fraction(M)
    dom = _scale_region(domain, Md)
    tgt = _scale_region(target, Md)
    cells = _eligible_cells(dom)
    rows = []
    rnd = np.random.default_rng(rng.seed ^ 0x5EED)
    for k in k_values:
        k = int(k)
        if not 0 <= k <= len(cells):
            raise InvalidInputError(f"k={k} outside 0..{len(cells)}")
        trials = trials_per_k if 0 < k < len(cells) else 1
        vals = []
        for t in range(trials):
            pick = rnd.choice(len(cells), size=k, replace=False)
            D = FiniteCells([cells[i] for i in pick])
            p = _hybrid_containment(D, N, dom, tgt,
                                    (Fraction(a[0]) * Md, Fraction(a[1]) * Md),
                                    samples, rng.child(1000 + k * 131 + t),
                                    workers, step_budget)
            vals.append(p)
        vals = np.asarray(vals)
        se = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 \
            else math.sqrt(max(vals[0] * (1 - vals[0]), 1e-12) / samples)
        rows.append(SweepRow(k, float(vals.mean()), se, trials))
    return rows, len(cells)


def _scale_region(region: Region, M: Fraction) -> Region:
    if isinstance(region, Rectangle):
        return Rectangle(region.x0 * M, region.y0 * M,
                         region.x1 * M, region.y1 * M)
    if isinstance(region, Polygon):
        return Polygon([(x * M, y * M) for x, y in region.v])
    raise InvalidInputError("sweep domains must be rectangles or polygons")


def _eligible_cells(dom: Region, margin: int = 1):
    """Cells whose margin-expanded square stays inside the domain, so cell
    alterations never touch the stopping set.  The rigorous interpolation
    argument keeps a margin of 3; at demo scale (M ~ 4) that empties the
    set, so the default is 1."""
    bbox = _dyadic_bbox(dom, 1)
    cells = []
    for cx in range(bbox[0], bbox[2] + 1):
        for cy in range(bbox[1], bbox[3] + 1):
            ok = True
            for dx in range(-margin, margin + 2):
                for dy in range(-margin, margin + 2):
                    if not dom.contains((Fraction(cx + dx),
                                         Fraction(cy + dy))):
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                cells.append((cx, cy))
    return cells


def _hybrid_containment(D, N, dom, tgt, a, samples, rng, workers,
                        step_budget):
    win = _window_for(dom, N)
    hg = build_hybrid(D, N, win)
    g = hg.graph
    bs = graph_boundary(g, dom)
    start = nearest_vertex(g, a)
    stop = np.zeros(g.n, dtype=np.uint8)
    stop[bs.boundary] = 1
    ok_in, ok_cl = _region_closure_flags(tgt, g)
    tables = _engine.get_tables(g)
    _engine.set_workers(workers)
    contained, bad = _engine.batch_lerw_contained(
        tables, stop, ok_in.astype(np.uint8), ok_cl.astype(np.uint8), start,
        rng.seed, rng.stream_id, samples, step_budget, g.n)
    if bad:
        raise StepBudgetError(f"{bad} hybrid walks exceeded budget")
    return contained / samples


def _window_for(dom: Region, N: int) -> Rectangle:
    bbox = _dyadic_bbox(dom, 1)
    return Rectangle(bbox[0] - 1, bbox[1] - 1, bbox[2] + 1, bbox[3] + 1)
