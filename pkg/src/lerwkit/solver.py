"""Exact linear-algebra oracles: discrete Dirichlet problems, harmonic
measure, lattice Green functions, and spanning-tree counts."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import InvalidInputError, SingularSystemError
from .graph import EmbeddedWeightedGraph

DIRECT_SOLVE_LIMIT = 150_000
CG_TOL = 1e-12


@dataclass
class DirichletProblem:
    graph: EmbeddedWeightedGraph
    interior: np.ndarray
    boundary: np.ndarray
    boundary_values: dict = field(default_factory=dict)

    def __post_init__(self):
        self.interior = np.asarray(self.interior, dtype=np.int64)
        self.boundary = np.asarray(self.boundary, dtype=np.int64)
        if set(self.interior.tolist()) & set(self.boundary.tolist()):
            raise InvalidInputError("interior and boundary overlap")


def _csr_weights(graph) -> sp.csr_matrix:
    tails = np.repeat(np.arange(graph.n, dtype=np.int64),
                      np.diff(graph.indptr))
    return sp.csr_matrix((graph.wts, (tails, graph.nbr.astype(np.int64))),
                         shape=(graph.n, graph.n))


def _solve_sym(A: sp.spmatrix, b: np.ndarray) -> np.ndarray:
    A = A.tocsc()
    if A.shape[0] <= DIRECT_SOLVE_LIMIT:
        return spla.splu(A).solve(b)
    M = sp.diags(1.0 / A.diagonal())
    x, info = spla.cg(A, b, rtol=CG_TOL, maxiter=20000, M=M)
    if info != 0:
        raise SingularSystemError(f"conjugate gradient failed (info={info})")
    return x


def solve_dirichlet(problem: DirichletProblem) -> np.ndarray:
    """Solve Delta_G f = 0 on the interior with the given boundary values.
    Returns f over all graph vertices (NaN off interior+boundary)."""
    g = problem.graph
    W = _csr_weights(g)
    interior = problem.interior
    boundary = problem.boundary
    f = np.full(g.n, np.nan)
    fb = np.zeros(g.n)
    for b in boundary:
        try:
            fb[int(b)] = float(problem.boundary_values[int(b)])
        except KeyError as e:
            raise InvalidInputError(f"missing boundary value at {b}") from e
    f[boundary] = fb[boundary]
    if len(interior) == 0:
        return f
    deg = np.asarray(W.sum(axis=1)).ravel()
    Wii = W[interior][:, interior]
    A = sp.diags(deg[interior]) - Wii
    # interior vertices with no path to the boundary make A singular
    rhs = np.asarray(W[interior][:, boundary] @ fb[boundary]).ravel()
    comp_ok = _interior_touches_boundary(W, interior, boundary)
    if not comp_ok:
        raise SingularSystemError(
            "an interior component has no boundary contact")
    x = _solve_sym(A, rhs)
    f[interior] = x
    return f


def _interior_touches_boundary(W, interior, boundary) -> bool:
    inter = set(int(v) for v in interior)
    bset = set(int(v) for v in boundary)
    seen = set()
    Wc = W.tocsr()
    for s in inter:
        if s in seen:
            continue
        comp = [s]
        seen.add(s)
        touches = False
        stack = [s]
        while stack:
            v = stack.pop()
            for w in Wc.indices[Wc.indptr[v]:Wc.indptr[v + 1]]:
                w = int(w)
                if w in bset:
                    touches = True
                elif w in inter and w not in seen:
                    seen.add(w)
                    stack.append(w)
                    comp.append(w)
        if not touches:
            return False
    return True


def harmonic_measure(graph: EmbeddedWeightedGraph, v: int, B,
                     min_time: int = 1) -> dict[int, float]:
    """Exact exit distribution over B of a walk from v stopped on B.

    With min_time = 1 the first step is forced before any absorption check,
    so v may itself belong to B.  Returns {b: probability}; entries within
    -1e-12 of zero are clamped to 0.
    """
    B_list = sorted(set(int(b) for b in B))
    bset = set(B_list)
    if int(v) not in bset:
        start_mass = {int(v): 1.0}
    else:
        nb, ws = graph.neighbors(int(v))
        tot = ws.sum()
        if tot <= 0:
            raise InvalidInputError("start vertex has zero total weight")
        start_mass = {int(w): wt / tot for w, wt in zip(nb, ws)}
    interior = np.asarray([u for u in range(graph.n) if u not in bset],
                          dtype=np.int64)
    W = _csr_weights(graph)
    deg = np.asarray(W.sum(axis=1)).ravel()
    live = interior[deg[interior] > 0]
    col = {int(u): k for k, u in enumerate(live)}
    k = len(live)
    if k:
        # reversibility turns the absorbed-chain system into the symmetric
        # form (D - W) z = mu, with hm_b = sum_x W(b, x) z_x
        mu = np.zeros(k)
        for u, m in start_mass.items():
            if u in col:
                mu[col[u]] += m
        A = sp.diags(deg[live]) - W[live][:, live]
        z = _solve_sym(A.tocsc(), mu)
        hm = np.asarray(W[B_list][:, live] @ z).ravel()
    else:
        hm = np.zeros(len(B_list))
    out = {}
    for b, p in zip(B_list, hm):
        if p < -1e-12:
            raise SingularSystemError(f"negative harmonic measure at {b}")
        out[b] = max(float(p), 0.0)
    for u, m in start_mass.items():
        if u in bset:
            out[u] = out.get(u, 0.0) + m
    total = sum(out.values())
    if abs(total - 1.0) > 1e-8:
        raise SingularSystemError(
            f"harmonic measure mass {total} (boundary unreachable?)")
    return out


@dataclass
class GreenFunction:
    graph: EmbeddedWeightedGraph
    pole: int
    interior: np.ndarray
    values: np.ndarray  # over all vertices, 0 on and beyond the boundary

    def __getitem__(self, v) -> float:
        return float(self.values[int(v)])


def green_function(graph: EmbeddedWeightedGraph, interior, boundary=None,
                   v: int = None) -> GreenFunction:
    """l_v with Delta_G l_v = delta_v on the interior, l_v = 0 on the
    boundary; l_v <= 0 everywhere by the maximum principle.

    Accepts either explicit (interior, boundary, v) index sets or a Region
    in place of `interior` (green_function(graph, region, v)), in which
    case the graph boundary of the region supplies the sets."""
    from .geometry import Region
    if isinstance(interior, Region):
        from .graph import graph_boundary
        if v is None:
            v = boundary
        bs = graph_boundary(graph, interior)
        interior, boundary = bs.interior, bs.boundary
    if v is None:
        raise InvalidInputError("missing pole vertex")
    interior = np.asarray(sorted(set(int(u) for u in interior)), dtype=np.int64)
    bset = set(int(b) for b in boundary)
    if int(v) not in set(interior.tolist()):
        raise InvalidInputError("pole must be an interior vertex")
    if set(interior.tolist()) & bset:
        raise InvalidInputError("interior and boundary overlap")
    W = _csr_weights(graph)
    deg = np.asarray(W.sum(axis=1)).ravel()
    A = sp.diags(deg[interior]) - W[interior][:, interior]
    e = np.zeros(len(interior))
    col = {int(u): k for k, u in enumerate(interior)}
    e[col[int(v)]] = 1.0
    # Delta l = delta  <=>  (W - D) l = e on the interior rows
    x = _solve_sym(A.tocsc(), -e)
    vals = np.zeros(graph.n)
    vals[interior] = x
    if vals.max() > 1e-10:
        raise SingularSystemError("Green function violates the maximum principle")
    return GreenFunction(graph, int(v), interior, vals)


def hitting_from_green(graph: EmbeddedWeightedGraph, gf: GreenFunction,
                       b: int) -> float:
    """q(pole, b, boundary, G) = -sum_s W(b,s) l_pole(s)."""
    nb, ws = graph.neighbors(int(b))
    return float(-(ws * gf.values[nb]).sum())


def spanning_tree_count(graph: EmbeddedWeightedGraph) -> int:
    """Number of spanning trees of the unweighted support, by the
    matrix-tree theorem with an exact integer determinant."""
    wts = graph.wts
    if len(wts):
        w0 = wts[0]
        if not np.all(wts == w0):
            raise InvalidInputError(
                "spanning_tree_count needs all weights equal")
    n = graph.n
    if n <= 1:
        return 1
    # connectivity check: disconnected graphs have zero spanning trees
    seen = np.zeros(n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        u = stack.pop()
        nb, _ = graph.neighbors(u)
        for w in nb:
            if not seen[w]:
                seen[w] = True
                stack.append(int(w))
    if not seen.all():
        return 0
    # reduced integer Laplacian
    L = [[0] * (n - 1) for _ in range(n - 1)]
    for u in range(1, n):
        nb, _ = graph.neighbors(u)
        L[u - 1][u - 1] = len(nb)
        for w in nb:
            if w >= 1:
                L[u - 1][int(w) - 1] -= 1
    return _bareiss_det(L)


def _bareiss_det(M) -> int:
    """Fraction-free Gaussian elimination; exact for integer matrices."""
    A = [row[:] for row in M]
    n = len(A)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for r in range(k + 1, n):
                if A[r][k] != 0:
                    A[k], A[r] = A[r], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]
