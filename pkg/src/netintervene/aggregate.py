"""Exact selection for the aggregate objective.

Correcting agent ``j`` raises everyone's correctness by ``wbar[:, j]`` times
``phi * (1 - y * y_hat_j)``, whose expectation is ``2 * phi * err_j``. The
aggregate gain of a set is therefore additive over its members, and
picking the top-k scores ``err_j * sum_i wbar[i, j]`` is optimal.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import check_influence_matrix
from .errors import DimensionMismatch, ValidationError
from .instance import InterventionPlan


def _check_err(wbar, err):
    wbar = check_influence_matrix(wbar)
    err = np.asarray(err, dtype=float)
    if err.shape != (wbar.shape[0],):
        raise DimensionMismatch(f"error vector has shape {err.shape}, expected {(wbar.shape[0],)}")
    if np.any(err < 0) or np.any(err > 1):
        raise ValidationError("error rates must lie in [0, 1]")
    return wbar, err


def influence_scores(wbar, err) -> np.ndarray:
    """Per-agent aggregate influence: its error rate times its column mass."""
    wbar, err = _check_err(wbar, err)
    return err * wbar.sum(axis=0)


def top_k(scores, k: int) -> list:
    """Indices of the k largest scores, ties broken towards smaller index."""
    scores = np.asarray(scores, dtype=float)
    n = scores.shape[0]
    if not 0 <= k <= n:
        raise ValidationError(f"k = {k} outside [0, {n}]")
    order = np.lexsort((np.arange(n), -scores))
    return [int(j) for j in order[:k]]


def select_top_k_agg(wbar, err, k: int, phi: float = 1.0) -> InterventionPlan:
    n = np.asarray(wbar).shape[0]
    if not 1 <= k <= n:
        raise ValidationError(f"k = {k} outside [1, {n}]")
    scores = influence_scores(wbar, err)
    return InterventionPlan(tuple(top_k(scores, k)), phi)


def gain_agg_closed(wbar, err, S, phi: float = 1.0) -> float:
    scores = influence_scores(wbar, err)
    idx = list(S)
    return float(2.0 * phi * scores[idx].sum()) if idx else 0.0


@dataclass(frozen=True)
class PerturbationBound:
    epsilon: float
    bound: float
    stated_bound: float


def agg_perturbation_bound(wbar, wbar_hat, err, k: int, phi: float = 1.0) -> PerturbationBound:
    """Worst-case loss from ranking with an estimate of the influence matrix.

    ``epsilon`` is the largest column l1 deviation. ``bound`` is the provable
    4*k*epsilon*phi; ``stated_bound`` is the tighter 2*k*epsilon that is
    reported for comparison only.
    """
    wbar = check_influence_matrix(wbar)
    wbar_hat = check_influence_matrix(wbar_hat)
    if wbar.shape != wbar_hat.shape:
        raise DimensionMismatch("influence matrix and its estimate differ in shape")
    _check_err(wbar, err)
    eps = float(np.abs(wbar - wbar_hat).sum(axis=0).max())
    return PerturbationBound(epsilon=eps, bound=4.0 * k * eps * phi, stated_bound=2.0 * k * eps)
