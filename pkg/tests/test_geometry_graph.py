import random
from fractions import Fraction

import numpy as np
import pytest

from lerwkit.errors import InvalidInputError
from lerwkit.geometry import (Difference, Disk, FinitePointSet, PlanePoint,
                              Polygon, Rectangle, open_square)
from lerwkit.graph import (EmbeddedWeightedGraph, LatticePath, SimplePath,
                           graph_boundary, graph_laplacian, loop_erase,
                           nearest_vertex, rect_lattice)

from oracles import chronological_loop_deletion, random_lattice_walk


def grid(n=6):
    return rect_lattice(-n, -n, n, n)


# ------------------------------------------------------------ PlanePoint


def test_plane_point_reduction_and_equality():
    assert PlanePoint(2, 4, 1) == PlanePoint(1, 2, 0)
    assert PlanePoint(1, 2, 1) != PlanePoint(1, 2, 0)
    p = PlanePoint.from_fractions(Fraction(3, 8), Fraction(-1, 2))
    assert p.x == Fraction(3, 8) and p.y == Fraction(-1, 2)
    with pytest.raises(ValueError):
        PlanePoint.from_fractions(Fraction(1, 3), Fraction(0))


# ------------------------------------------------------------ loop_erase


def idx_path(g, coords):
    return [g.index_of(x, y) for x, y in coords]


def test_loop_erase_single_vertex():
    g = grid()
    p = LatticePath(g, idx_path(g, [(0, 0)]))
    assert list(loop_erase(p).vertices) == [g.index_of(0, 0)]


def test_loop_erase_forced_recursion_case():
    # (0, 1, 1+i, 1, 2): the last visit to 1 is index 3, so 1+i is erased
    g = grid()
    p = LatticePath(g, idx_path(g, [(0, 0), (1, 0), (1, 1), (1, 0), (2, 0)]))
    got = [(int(g.px[v]), int(g.py[v])) for v in loop_erase(p).vertices]
    assert got == [(0, 0), (1, 0), (2, 0)]


def test_loop_erase_empty_path_rejected():
    g = grid()
    with pytest.raises(InvalidInputError):
        LatticePath(g, [])


def test_loop_erase_rejects_non_edges():
    g = grid()
    with pytest.raises(InvalidInputError):
        LatticePath(g, idx_path(g, [(0, 0), (2, 0)]))


def test_loop_erase_matches_chronological_oracle_bulk():
    rng = random.Random(20240817)
    for trial in range(2000):
        w = rng.randrange(4, 16)
        h = rng.randrange(4, 16)
        walk = random_lattice_walk(rng, w, h, rng.randrange(3, 120))
        got = chronological_loop_deletion(walk)
        g = rect_lattice(0, 0, w - 1, h - 1)
        p = LatticePath(g, idx_path(g, walk))
        le = [(int(g.px[v]), int(g.py[v])) for v in loop_erase(p).vertices]
        assert le == got


def test_loop_erase_long_walk_oracle():
    rng = random.Random(7)
    walk = random_lattice_walk(rng, 20, 20, 1000)
    g = rect_lattice(0, 0, 19, 19)
    le = loop_erase(LatticePath(g, idx_path(g, walk)))
    got = [(int(g.px[v]), int(g.py[v])) for v in le.vertices]
    assert got == chronological_loop_deletion(walk)
    assert got[0] == walk[0] and got[-1] == walk[-1]


def test_loop_erase_idempotent_and_identity_on_simple():
    rng = random.Random(3)
    g = rect_lattice(0, 0, 9, 9)
    for _ in range(200):
        walk = random_lattice_walk(rng, 10, 10, 60)
        le = loop_erase(LatticePath(g, idx_path(g, walk)))
        again = loop_erase(LatticePath(g, le.vertices))
        assert list(again.vertices) == list(le.vertices)


def test_simple_path_reversal_equality():
    g = grid()
    a = SimplePath(g, idx_path(g, [(0, 0), (1, 0), (1, 1)]))
    b = SimplePath(g, idx_path(g, [(1, 1), (1, 0), (0, 0)]))
    assert a == b and hash(a) == hash(b)


# ------------------------------------------------------------ boundary


def test_boundary_unit_disk():
    g = grid()
    bs = graph_boundary(g, Disk(0, 0, 1))
    assert sorted((int(g.px[v]), int(g.py[v])) for v in bs.boundary) == \
        [(-1, 0), (0, -1), (0, 1), (1, 0)]
    assert [(int(g.px[v]), int(g.py[v])) for v in bs.interior] == [(0, 0)]


def test_boundary_empty_region():
    g = grid()
    bs = graph_boundary(g, Disk(Fraction(1, 2), Fraction(1, 2), Fraction(1, 8)))
    assert len(bs.boundary) == 0 and len(bs.interior) == 0


def test_boundary_small_square_follows_displayed_definition():
    # For (-0.5, 1.5)^2 every inside vertex has an incident open edge
    # leaving the region, so the inner points are boundary too and the
    # interior is empty.
    g = grid()
    bs = graph_boundary(g, Rectangle(Fraction(-1, 2), Fraction(-1, 2),
                                     Fraction(3, 2), Fraction(3, 2)))
    inner = {(0, 0), (1, 0), (0, 1), (1, 1)}
    ring = {(-1, 0), (-1, 1), (0, -1), (1, -1), (2, 0), (2, 1), (0, 2), (1, 2)}
    got = set((int(g.px[v]), int(g.py[v])) for v in bs.boundary)
    assert got == inner | ring
    assert len(bs.interior) == 0


def test_boundary_open_square_ring():
    # open square (-2,2)^2: boundary is the lattice ring minus corners
    g = grid()
    bs = graph_boundary(g, open_square(2))
    got = set((int(g.px[v]), int(g.py[v])) for v in bs.boundary)
    expect = set()
    for k in range(-1, 2):
        expect |= {(2, k), (-2, k), (k, 2), (k, -2)}
    assert got == expect
    assert set((int(g.px[v]), int(g.py[v])) for v in bs.interior) == \
        {(x, y) for x in range(-1, 2) for y in range(-1, 2)}


def test_boundary_partition_invariant_random_regions():
    g = grid(8)
    rng = random.Random(5)
    regions = []
    for _ in range(6):
        x0 = Fraction(rng.randrange(-10, 2), 2)
        y0 = Fraction(rng.randrange(-10, 2), 2)
        regions.append(Rectangle(x0, y0, x0 + rng.randrange(1, 9),
                                 y0 + rng.randrange(1, 9)))
    regions.append(Disk(Fraction(1, 2), 0, Fraction(17, 4)))
    regions.append(Polygon([(-3, -3), (4, -2), (1, 4)]))
    den = g.den
    for reg in regions:
        bs = graph_boundary(g, reg)
        inside = reg.contains_lattice(g.px, g.py, den)
        b = bs.boundary_set()
        i = bs.interior_set()
        assert not (b & i)
        in_set = set(int(v) for v in np.nonzero(inside)[0])
        assert i | (b & in_set) == in_set


def test_boundary_punctured_square():
    g = rect_lattice(-4, -4, 4, 4, unit_den=4)
    dom = Difference(open_square(1), FinitePointSet([(Fraction(1, 4), 0)]))
    bs = graph_boundary(g, dom)
    pts = set((int(g.px[v]), int(g.py[v])) for v in bs.boundary)
    assert (1, 0) in pts  # the puncture absorbs
    assert (0, 0) not in pts


# ------------------------------------------------------------ nearest


def test_nearest_vertex_tie_break_top_left():
    g = grid()
    v = nearest_vertex(g, (Fraction(1, 2), Fraction(1, 2)))
    assert (int(g.px[v]), int(g.py[v])) == (0, 1)
    v = nearest_vertex(g, (Fraction(1, 5), Fraction(1, 10)))
    assert (int(g.px[v]), int(g.py[v])) == (0, 0)
    v = nearest_vertex(g, (2, -3))
    assert (int(g.px[v]), int(g.py[v])) == (2, -3)


# ------------------------------------------------------------ laplacian


def test_laplacian_constant_and_coordinates():
    g = grid()
    v = g.index_of(1, -2)
    assert graph_laplacian(g, lambda _: 3.0, v) == 0.0
    assert graph_laplacian(g, lambda u: float(g.px[u]), v) == 0.0
    f2 = lambda u: float(g.px[u]) ** 2 + float(g.py[u]) ** 2
    assert graph_laplacian(g, f2, v) == pytest.approx(4.0, abs=1e-12)


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_laplacian_annihilates_low_powers(k):
    g = grid()
    for (x, y) in [(0, 0), (2, 1), (-3, 4), (1, -5)]:
        v = g.index_of(x, y)
        zre = lambda u: ((complex(int(g.px[u]), int(g.py[u]))) ** k).real
        zim = lambda u: ((complex(int(g.px[u]), int(g.py[u]))) ** k).imag
        assert graph_laplacian(g, zre, v) == pytest.approx(0.0, abs=1e-9)
        assert graph_laplacian(g, zim, v) == pytest.approx(0.0, abs=1e-9)


def test_laplacian_missing_value_raises():
    g = grid()
    with pytest.raises(InvalidInputError):
        graph_laplacian(g, {g.index_of(0, 0): 1.0}, g.index_of(0, 0))


# ------------------------------------------------------------ serialization


def test_json_round_trip_weights_exact():
    g = EmbeddedWeightedGraph([0, 1, 0], [0, 0, 1], 0, 2,
                              [(0, 1, 0.5), (0, 2, 0.25), (1, 2, 1.0)])
    text = g.to_json()
    assert '"0.5"' in text and '"0.25"' in text and '"1"' in text
    h = EmbeddedWeightedGraph.from_json(text)
    assert h.n == g.n and h.unit_den == g.unit_den
    assert np.array_equal(h.px, g.px)
    for v in range(g.n):
        nb1, w1 = g.neighbors(v)
        nb2, w2 = h.neighbors(v)
        assert np.array_equal(nb1, nb2) and np.array_equal(w1, w2)


def test_weight_symmetry_enforced():
    with pytest.raises(InvalidInputError):
        EmbeddedWeightedGraph([0, 1], [0, 0], 0, 1, [(0, 0, 1.0)])
    with pytest.raises(InvalidInputError):
        EmbeddedWeightedGraph([0, 1], [0, 0], 0, 1, [(0, 1, -2.0)])
