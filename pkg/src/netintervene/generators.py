"""Synthetic graphs, instances and the adversarial two-variant fixture."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .dynamics import DynamicsKind, DynamicsSpec, check_influence_matrix, fj_finite_steps
from .egal_group import GroupStructure
from .errors import ValidationError
from .instance import Instance


class GraphModel(str, Enum):
    ER = "ER"
    PA = "PA"
    WS = "WS"
    RANDOM_W = "RandomW"


@dataclass
class GraphSpec:
    model: GraphModel
    n: int = 128
    seed: int = 0
    p: float = 0.005
    m: int = 5
    k_ring: int = 5
    p_rewire: float = 0.25
    sparsity: float = 0.95
    normalize: bool = True

    def __post_init__(self):
        self.model = GraphModel(self.model)
        if self.n < 1:
            raise ValidationError("n must be positive")
        if not 0.0 <= self.p <= 1.0:
            raise ValidationError("edge probability must lie in [0, 1]")
        if not 0.0 <= self.p_rewire <= 1.0:
            raise ValidationError("rewiring probability must lie in [0, 1]")
        if not 0.0 <= self.sparsity < 1.0:
            raise ValidationError("sparsity must lie in [0, 1)")
        if self.model is GraphModel.PA and not 1 <= self.m <= self.n:
            raise ValidationError(f"PA needs 1 <= m <= n, got m = {self.m}")
        if self.model is GraphModel.WS and not 0 <= self.k_ring < self.n:
            raise ValidationError(f"WS needs 0 <= k_ring < n, got {self.k_ring}")


@dataclass
class InstanceSpec:
    omega_size: int = 3
    p_low: float = 0.3
    p_high: float = 0.9
    label_prior: float = 1.0
    class_balanced: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.omega_size < 1:
            raise ValidationError("omega_size must be positive")
        if not 0.0 <= self.p_low <= self.p_high <= 1.0:
            raise ValidationError("need 0 <= p_low <= p_high <= 1")
        if not 0.0 <= self.label_prior <= 1.0:
            raise ValidationError("label_prior must lie in [0, 1]")


def _erdos_renyi(n, p, rng):
    upper = np.triu(rng.random((n, n)) < p, k=1)
    return (upper | upper.T).astype(float)


def _preferential_attachment(n, m, rng):
    adj = np.zeros((n, n))
    adj[:m, :m] = 1.0
    np.fill_diagonal(adj, 0.0)
    degree = adj.sum(axis=1)
    for v in range(m, n):
        existing = degree[:v]
        total = existing.sum()
        probs = existing / total if total > 0 else np.full(v, 1.0 / v)
        targets = rng.choice(v, size=m, replace=False, p=probs)
        adj[v, targets] = adj[targets, v] = 1.0
        degree[targets] += 1
        degree[v] += m
    return adj


def _watts_strogatz(n, k_ring, p_rewire, rng):
    adj = np.zeros((n, n), dtype=bool)
    half = k_ring // 2
    for offset in range(1, half + 1):
        for u in range(n):
            v = (u + offset) % n
            adj[u, v] = adj[v, u] = True
    for offset in range(1, half + 1):
        for u in range(n):
            v = (u + offset) % n
            if not adj[u, v] or rng.random() >= p_rewire:
                continue
            free = np.flatnonzero(~adj[u])
            free = free[free != u]
            if free.size == 0:
                continue
            w = int(rng.choice(free))
            adj[u, v] = adj[v, u] = False
            adj[u, w] = adj[w, u] = True
    return adj.astype(float)


def _random_w(n, sparsity, normalize, rng):
    values = rng.random((n, n))
    keep = rng.random((n, n)) >= sparsity
    empty = ~keep.any(axis=1)
    keep[empty, rng.integers(0, n, size=int(empty.sum()))] = True
    w = np.where(keep, values, 0.0)
    if normalize:
        w = w / w.sum(axis=1, keepdims=True)
    return w


def gen_graph(spec: GraphSpec) -> np.ndarray:
    """Adjacency weights for ER/PA/WS, or a ready influence matrix for RandomW."""
    rng = np.random.default_rng(spec.seed)
    if spec.model is GraphModel.ER:
        return _erdos_renyi(spec.n, spec.p, rng)
    if spec.model is GraphModel.PA:
        return _preferential_attachment(spec.n, spec.m, rng)
    if spec.model is GraphModel.WS:
        return _watts_strogatz(spec.n, spec.k_ring, spec.p_rewire, rng)
    return _random_w(spec.n, spec.sparsity, spec.normalize, rng)


def influence_from_graph(spec: GraphSpec, steps: int = 3) -> np.ndarray:
    """Graph weights pushed through ``steps`` FJ updates (RandomW is used as is)."""
    w = gen_graph(spec)
    if spec.model is GraphModel.RANDOM_W:
        return w
    return fj_finite_steps(DynamicsSpec(DynamicsKind.FJ_FINITE_STEPS, weights=w, steps=steps))


def gen_instance(wbar, spec: InstanceSpec) -> Instance:
    """Labels from the prior; agent i predicts +1 with its own probability p_i.

    In class-balanced mode every outcome is paired with its mirror image
    (negated label and predictions), which makes per-class error rates equal.
    """
    wbar = check_influence_matrix(wbar)
    n = wbar.shape[0]
    rng = np.random.default_rng(spec.seed)
    p_plus = rng.uniform(spec.p_low, spec.p_high, size=n)
    labels = np.where(rng.random(spec.omega_size) < spec.label_prior, 1, -1)
    preds = np.where(rng.random((spec.omega_size, n)) < p_plus, 1, -1)
    if spec.class_balanced:
        labels = np.concatenate([labels, -labels])
        preds = np.concatenate([preds, -preds])
    weights = np.full(len(labels), 1.0 / len(labels))
    return Instance(weights, labels, preds, wbar)


def gen_group_instance(wbar, group: GroupStructure, omega_size: int, seed: int) -> Instance:
    """Sample outcomes from the group-dependence model."""
    wbar = check_influence_matrix(wbar)
    if wbar.shape[0] != group.n:
        raise ValidationError("influence matrix and group structure disagree on n")
    if omega_size < 1:
        raise ValidationError("omega_size must be positive")
    rng = np.random.default_rng(seed)
    m, n = omega_size, group.n
    labels = np.where(rng.random(m) < group.prior_pos, 1, -1)
    correct = rng.random((m, n)) >= group.err_indv
    grouped = rng.random(m) < group.rho
    red_wrong = rng.random(m) < group.err_R
    for a in np.flatnonzero(grouped):
        correct[a, group.red] = not red_wrong[a]
        correct[a, group.blue] = red_wrong[a]
    preds = labels[:, None] * np.where(correct, 1, -1)
    return Instance(np.full(m, 1.0 / m), labels, preds, wbar)


def adversarial_fixture(n: int, variant: int) -> Instance:
    """Two instances with equal influence matrix and error rates but opposite optima.

    Agents 0..3 are the hubs u1..u4 and agents 4..4+2n-1 the followers. The
    first n followers listen to u1 and u2, the rest to u3 and u4. Followers
    are always right and each hub is wrong half of the time. In variant 1,
    u1 and u2 always disagree while u3 and u4 agree; variant 2 swaps this.
    """
    if n < 1:
        raise ValidationError("fixture needs n >= 1")
    if variant not in (1, 2):
        raise ValidationError("variant must be 1 or 2")
    size = 4 + 2 * n
    wbar = np.eye(size)
    followers = np.arange(4, size)
    wbar[followers[:n], 0] = wbar[followers[:n], 1] = 1.0
    wbar[followers[n:], 2] = wbar[followers[n:], 3] = 1.0
    preds = np.ones((4, size), dtype=int)
    for a, (c1, c2) in enumerate(((1, 1), (1, -1), (-1, 1), (-1, -1))):
        if variant == 1:
            preds[a, :4] = (c1, -c1, c2, c2)
        else:
            preds[a, :4] = (c1, c1, c2, -c2)
    return Instance(np.full(4, 0.25), np.ones(4, dtype=int), preds, wbar)


def random_err(n: int, rng: np.random.Generator, low: float = 0.05, high: float = 0.95) -> np.ndarray:
    return rng.uniform(low, high, size=n)


def random_influence(n: int, rng: np.random.Generator, density: float = 0.5,
                     row_stochastic: bool = True, scale: Optional[float] = None) -> np.ndarray:
    """Sparse non-negative matrix with a positive diagonal (handy for tests and oracles)."""
    w = rng.random((n, n)) * (rng.random((n, n)) < density)
    np.fill_diagonal(w, rng.random(n) + 0.1)
    if row_stochastic:
        w = w / w.sum(axis=1, keepdims=True)
    if scale is not None:
        w = w * scale
    return w
