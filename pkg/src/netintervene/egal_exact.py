"""Greedy and exhaustive maximisation of the egalitarian objective.

With a non-negative influence matrix, agent ``i`` improves on outcome ``a``
exactly when some selected agent with ``wbar[i, j] > 0`` mispredicts on
``a``. The objective is thus a weighted coverage function over the faulty
(outcome, agent) pairs, so the plain greedy achieves a (1 - 1/e) ratio.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Callable, List, Tuple

import numpy as np

from .errors import CombinatorialBlowup, ValidationError
from .instance import Instance, InterventionPlan

TIE_TOL = 1e-12
BRUTE_FORCE_LIMIT = 1_000_000


@dataclass
class GreedyTrace:
    """Ordered greedy picks as (agent, marginal gain, cumulative gain)."""

    selections: List[Tuple[int, float, float]] = field(default_factory=list)
    step_seconds: List[float] = field(default_factory=list)

    @property
    def chosen(self) -> list:
        return [s[0] for s in self.selections]

    def rows(self):
        for step, (u, marginal, cumulative) in enumerate(self.selections, start=1):
            yield step, u, marginal, cumulative


def argmax_lowest(gains: np.ndarray, excluded) -> int:
    """Index of the largest gain, preferring the smallest index among near-ties."""
    g = np.array(gains, dtype=float)
    if len(excluded):
        g[list(excluded)] = -np.inf
    best = np.max(g)
    return int(np.flatnonzero(g >= best - TIE_TOL)[0])


def run_greedy(n: int, k: int, all_gains: Callable[[list], np.ndarray]) -> Tuple[list, GreedyTrace]:
    """Generic greedy loop; ``all_gains(S)`` returns the marginal gain of every agent."""
    if not 1 <= k <= n:
        raise ValidationError(f"k = {k} outside [1, {n}]")
    S: list = []
    trace = GreedyTrace()
    total = 0.0
    for _ in range(k):
        t0 = time.perf_counter()
        gains = all_gains(S)
        u = argmax_lowest(gains, S)
        marginal = float(gains[u])
        total += marginal
        S.append(u)
        trace.selections.append((u, marginal, total))
        trace.step_seconds.append(time.perf_counter() - t0)
    return S, trace


def influence_mask(wbar) -> np.ndarray:
    return np.asarray(wbar) != 0


def _uncovered_faults(instance: Instance, S, mask) -> np.ndarray:
    """(m, n) table of faulty pairs that no agent in S repairs."""
    faulty = instance.correctness_table < 0
    if not len(S):
        return faulty
    cols = list(S)
    reach = instance.wrong[:, cols].astype(float) @ mask[:, cols].T.astype(float)
    return faulty & (reach == 0)


def coverage_gain(instance: Instance, S, mask=None) -> float:
    """Egalitarian gain of S (any phi > 0) from the coverage characterisation."""
    mask = influence_mask(instance.wbar) if mask is None else mask
    faulty = instance.correctness_table < 0
    covered = faulty & ~_uncovered_faults(instance, S, mask)
    return float(instance.weights @ covered.sum(axis=1))


def all_delta_gains_exact(instance: Instance, S, mask=None) -> np.ndarray:
    """Marginal egalitarian gain of adding each agent to S."""
    mask = influence_mask(instance.wbar) if mask is None else mask
    open_faults = _uncovered_faults(instance, S, mask).astype(float)
    hits = open_faults @ mask.astype(float)
    return instance.weights @ (hits * instance.wrong)


def delta_gain_exact(instance: Instance, S, u: int) -> float:
    """G(S + u) - G(S) as a single pass over (outcome, agent) pairs."""
    S = list(S)
    if u in S:
        raise ValidationError(f"agent {u} is already selected")
    if not 0 <= u < instance.n:
        raise ValidationError(f"agent {u} out of range")
    mask = influence_mask(instance.wbar)
    z = instance.correctness_table
    wrong = instance.wrong
    rows = np.flatnonzero(mask[:, u])
    total = 0.0
    for a in range(instance.m):
        if not wrong[a, u]:
            continue
        for i in rows:
            if z[a, i] >= 0:
                continue
            if any(mask[i, j] and wrong[a, j] for j in S):
                continue
            total += instance.weights[a]
    return total


def greedy_egal_exact(instance: Instance, k: int, phi: float = 1.0) -> Tuple[InterventionPlan, GreedyTrace]:
    mask = influence_mask(instance.wbar)
    S, trace = run_greedy(instance.n, k, lambda cur: all_delta_gains_exact(instance, cur, mask))
    return InterventionPlan(tuple(S), phi), trace


def brute_force_opt_egal(instance: Instance, k: int, phi: float = 1.0, limit: int = BRUTE_FORCE_LIMIT):
    """Best size-k set by enumeration; ties go to the lexicographically first set."""
    n = instance.n
    if not 0 <= k <= n:
        raise ValidationError(f"k = {k} outside [0, {n}]")
    count = math.comb(n, k)
    if count > limit:
        raise CombinatorialBlowup(f"C({n}, {k}) = {count} subsets exceeds the limit {limit}")
    mask = influence_mask(instance.wbar)
    best_set, best = (), -np.inf
    for T in itertools.combinations(range(n), k):
        g = coverage_gain(instance, T, mask)
        if g > best + TIE_TOL:
            best_set, best = T, g
    return InterventionPlan(best_set, phi), float(max(best, 0.0))
