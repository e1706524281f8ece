"""Random-walk simulation and Monte Carlo estimation of hitting
probabilities q(v, A, B, G)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _engine
from .errors import InvalidInputError, NoTransitionError, StepBudgetError
from .graph import EmbeddedWeightedGraph, LatticePath
from .rng import RngStream, walk_seed

DEFAULT_STEP_BUDGET = 10 ** 9


@dataclass(frozen=True)
class StopRule:
    """Stopping set plus the hit convention: with min_time = 1 (the default)
    a hit only counts from the first step on, so starting inside the stop
    set does not yield a degenerate walk."""

    stop_set: frozenset
    min_time: int = 1

    def __post_init__(self):
        if self.min_time not in (0, 1):
            raise InvalidInputError("min_time must be 0 or 1")
        if not self.stop_set:
            raise InvalidInputError("empty stop set")


@dataclass(frozen=True)
class MCEstimate:
    value: float
    samples: int
    std_error: float
    seed: int

    @staticmethod
    def bernoulli(hits: int, samples: int, seed: int) -> "MCEstimate":
        p = hits / samples
        return MCEstimate(p, samples, math.sqrt(p * (1 - p) / samples), seed)


def step_distribution(graph: EmbeddedWeightedGraph, v: int) -> np.ndarray:
    """Transition probabilities W(v,w)/sum_u W(v,u) over the neighbors of v,
    in the graph's (sorted) adjacency order."""
    nb, ws = graph.neighbors(v)
    tot = ws.sum()
    if tot <= 0:
        raise NoTransitionError(f"vertex {v} has zero total weight")
    return ws / tot


def _stop_mask(graph, rule: StopRule) -> np.ndarray:
    mask = np.zeros(graph.n, dtype=np.uint8)
    idx = np.fromiter((int(v) for v in rule.stop_set), dtype=np.int64)
    mask[idx] = 1
    return mask


def reachable_set(graph: EmbeddedWeightedGraph, start: int) -> np.ndarray:
    """Vertices reachable from start through positive-weight edges (BFS)."""
    seen = np.zeros(graph.n, dtype=bool)
    seen[start] = True
    frontier = [start]
    while frontier:
        nxt = []
        for v in frontier:
            nb, ws = graph.neighbors(v)
            for w, wt in zip(nb, ws):
                if wt > 0 and not seen[w]:
                    seen[w] = True
                    nxt.append(int(w))
        frontier = nxt
    return seen


def check_reachable(graph, start: int, targets) -> None:
    seen = reachable_set(graph, start)
    if not any(seen[int(t)] for t in targets):
        raise InvalidInputError("stop set not reachable from start")


def run_walk(graph: EmbeddedWeightedGraph, start: int, rule: StopRule,
             rng: RngStream, walk_index: int = 0,
             step_budget: int = DEFAULT_STEP_BUDGET) -> LatticePath:
    """Simulate one random walk until it hits the stop set.

    The trajectory is a function of (rng.seed, rng.stream_id, walk_index)
    only.  Raises StepBudgetError when the budget is exceeded; the partial
    path is discarded.
    """
    if graph.degree_weight(start) <= 0 and not (
            rule.min_time == 0 and start in rule.stop_set):
        raise NoTransitionError(f"vertex {start} has zero total weight")
    check_reachable(graph, start, rule.stop_set)
    tables = _engine.get_tables(graph)
    state0 = walk_seed(rng.seed, rng.stream_id, walk_index)
    path, flag = _engine.walk_record(tables, _stop_mask(graph, rule), start,
                                     rule.min_time, state0, step_budget)
    if flag:
        raise StepBudgetError(f"walk exceeded {step_budget} steps")
    return LatticePath(graph, path, _trusted=True)


def estimate_hit(graph: EmbeddedWeightedGraph, v: int, A, B, samples: int,
                 rng: RngStream, min_time: int = 1, workers: int = 0,
                 step_budget: int = DEFAULT_STEP_BUDGET) -> MCEstimate:
    """Unbiased Bernoulli estimate of q(v, A, B, G), the probability that a
    walk from v first hits B inside A."""
    A = set(int(a) for a in A)
    B = set(int(b) for b in B)
    if not A <= B:
        raise InvalidInputError("A must be a subset of B")
    check_reachable(graph, v, B)
    rule = StopRule(frozenset(B), min_time)
    tables = _engine.get_tables(graph)
    stop = _stop_mask(graph, rule)
    in_a = np.zeros(graph.n, dtype=np.uint8)
    in_a[np.fromiter(A, dtype=np.int64)] = 1
    _engine.set_workers(workers)
    hits, timeouts = _engine.batch_endpoint_counts(
        tables, stop, in_a, v, min_time, rng.seed, rng.stream_id, samples,
        step_budget)
    if timeouts:
        raise StepBudgetError(f"{timeouts} of {samples} walks exceeded the "
                              f"step budget {step_budget}")
    return MCEstimate.bernoulli(int(hits), samples, rng.seed)


def exit_histogram(graph, v: int, B, samples: int, rng: RngStream,
                   min_time: int = 1, workers: int = 0,
                   step_budget: int = DEFAULT_STEP_BUDGET):
    """Histogram over vertices of where walks from v first hit B."""
    B = set(int(b) for b in B)
    check_reachable(graph, v, B)
    rule = StopRule(frozenset(B), min_time)
    tables = _engine.get_tables(graph)
    _engine.set_workers(workers)
    hist, timeouts = _engine.batch_endpoint_hist(
        tables, _stop_mask(graph, rule), v, min_time, rng.seed,
        rng.stream_id, samples, step_budget, graph.n)
    if timeouts:
        raise StepBudgetError(f"{timeouts} walks exceeded the step budget")
    return hist


def merge_estimates(parts: list[MCEstimate]) -> MCEstimate:
    """Merge disjoint-stream Bernoulli estimates by summing hit counts."""
    samples = sum(p.samples for p in parts)
    hits = round(sum(p.value * p.samples for p in parts))
    return MCEstimate.bernoulli(int(hits), samples, parts[0].seed)
