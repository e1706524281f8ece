import numpy as np
import pytest

import lerwkit._engine as eng
from lerwkit.errors import PrecisionError, StepBudgetError
from lerwkit.geometry import Disk, Rectangle, Union, open_square
from lerwkit.graph import graph_boundary, rect_lattice
from lerwkit.rng import MASK64, RngStream, SplitMix, walk_seed
from lerwkit.walk import StopRule, run_walk


def test_walk_seed_is_pure_and_spread():
    a = walk_seed(1, 2, 3)
    assert a == walk_seed(1, 2, 3)
    assert a != walk_seed(1, 2, 4)
    assert a != walk_seed(1, 3, 3)
    assert 0 <= a <= MASK64


def test_splitmix_uniforms_in_range():
    sm = SplitMix(12345)
    us = [sm.next_uniform() for _ in range(1000)]
    assert all(0.0 <= u < 1.0 for u in us)
    assert 0.4 < sum(us) / len(us) < 0.6


def test_alias_tables_reproduce_weights():
    g = rect_lattice(0, 0, 3, 3)
    aprob, aalt = eng.build_alias(g.indptr, g.wts)
    assert np.all(aprob >= 0) and np.all(aprob <= 1)
    # weighted vertex: empirical frequencies from the alias cells
    from lerwkit.graph import EmbeddedWeightedGraph
    wg = EmbeddedWeightedGraph([0, 1, 2, 1], [0, 0, 0, 1], 0, 1,
                               [(1, 0, 1.0), (1, 2, 2.0), (1, 3, 3.0)])
    tab = eng.get_tables(wg)
    sm = SplitMix(7)
    counts = np.zeros(wg.n)
    n = 60000
    lo = tab.indptr[1]
    deg = tab.indptr[2] - lo
    for _ in range(n):
        u = sm.next_uniform()
        x = u * deg
        j = min(int(x), deg - 1)
        slot = lo + j
        w = tab.nbr[slot] if x - j < tab.aprob[slot] else tab.nbr[tab.aalt[slot]]
        counts[w] += 1
    freq = counts / n
    expect = {0: 1 / 6, 2: 2 / 6, 3: 3 / 6}
    for v, p in expect.items():
        assert abs(freq[v] - p) < 0.01


@pytest.mark.skipif(not eng.HAVE_NUMBA, reason="compiled engine unavailable")
def test_python_mirror_matches_compiled_walks():
    g = rect_lattice(-4, -4, 4, 4)
    bs = graph_boundary(g, open_square(4))
    stop = np.zeros(g.n, dtype=np.uint8)
    stop[bs.boundary] = 1
    tab = eng.get_tables(g)
    for i in range(20):
        s0 = walk_seed(5, 1, i)
        a, fa = eng._walk_record(tab.indptr, tab.nbr, tab.aprob, tab.aalt,
                                 stop, g.index_of(0, 0), 1, np.uint64(s0),
                                 10 ** 7)
        b, fb = eng.py_walk_record(tab.indptr, tab.nbr, tab.aprob, tab.aalt,
                                   stop, g.index_of(0, 0), 1, s0, 10 ** 7)
        assert fa == fb == 0
        assert np.array_equal(a, b)


@pytest.mark.skipif(not eng.HAVE_NUMBA, reason="compiled engine unavailable")
def test_chunking_does_not_change_counts():
    g = rect_lattice(-4, -4, 4, 4)
    bs = graph_boundary(g, open_square(4))
    stop = np.zeros(g.n, dtype=np.uint8)
    stop[bs.boundary] = 1
    in_a = np.zeros(g.n, dtype=np.uint8)
    in_a[bs.boundary[:8]] = 1
    tab = eng.get_tables(g)
    res = [eng.batch_endpoint_counts(tab, stop, in_a, g.index_of(0, 0), 1,
                                     3, 1, 5000, 10 ** 7, nchunks=c)
           for c in (1, 7, 64)]
    assert res[0] == res[1] == res[2]


def test_run_walk_budget_error():
    g = rect_lattice(-30, -30, 30, 30)
    bs = graph_boundary(g, open_square(30))
    rule = StopRule(frozenset(int(v) for v in bs.boundary))
    with pytest.raises(StepBudgetError):
        run_walk(g, g.index_of(0, 0), rule, RngStream(1), step_budget=5)


def test_disk_composites_raise_precision_error():
    g = rect_lattice(-3, -3, 3, 3)
    region = Union(Disk(0, 0, 2), Rectangle(0, 0, 2, 2))
    with pytest.raises(PrecisionError):
        graph_boundary(g, region)
