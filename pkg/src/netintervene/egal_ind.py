"""Egalitarian greedy driven only by per-agent error rates.

Agents mispredict independently, agent ``j`` with probability ``err[j]``.
Conditioned on the set S being correct and candidate ``u`` being wrong, the
expected correctness of agent ``i`` is ``psi(i, S, u)``. A Hoeffding bound
makes the sign of that margin a good proxy for whether ``i`` is faulty, so
the marginal gain is estimated without touching any outcome table.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .dynamics import check_influence_matrix
from .egal_exact import GreedyTrace, run_greedy
from .errors import CombinatorialBlowup, DimensionMismatch, ValidationError
from .instance import Instance, InterventionPlan

ORACLE_MAX_AGENTS = 20


def _check_inputs(wbar, err):
    wbar = check_influence_matrix(wbar)
    err = np.asarray(err, dtype=float)
    if err.shape != (wbar.shape[0],):
        raise DimensionMismatch(f"error vector has shape {err.shape}, expected {(wbar.shape[0],)}")
    if np.any(err < 0) or np.any(err > 1):
        raise ValidationError("error rates must lie in [0, 1]")
    return wbar, err


def hoeffding_tail(margin, sq_weight):
    """exp(-margin^2 / (4 * sq_weight)), taken as 1 when the weight vanishes."""
    margin = np.asarray(margin, dtype=float)
    sq_weight = np.asarray(sq_weight, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp(-(margin**2) / (4.0 * sq_weight))
    return np.where(sq_weight > 0, out, 1.0)


@dataclass(frozen=True)
class PsiContext:
    """Row caches for the margin statistic."""

    wbar: np.ndarray
    err: np.ndarray
    base: np.ndarray = field(init=False)
    sq_weight: np.ndarray = field(init=False)
    mask: np.ndarray = field(init=False)

    def __post_init__(self):
        wbar, err = _check_inputs(self.wbar, self.err)
        object.__setattr__(self, "wbar", wbar)
        object.__setattr__(self, "err", err)
        object.__setattr__(self, "base", wbar @ (1.0 - 2.0 * err))
        object.__setattr__(self, "sq_weight", (wbar**2).sum(axis=1))
        object.__setattr__(self, "mask", wbar != 0)

    @property
    def n(self) -> int:
        return self.wbar.shape[0]

    def margins(self, S) -> np.ndarray:
        """Expected correctness of every row when S is forced correct."""
        S = list(S)
        if not S:
            return self.base.copy()
        return self.base + self.wbar[:, S] @ (2.0 * self.err[S])

    def survival(self, S) -> np.ndarray:
        """Per-row probability that every influencing member of S is correct."""
        out = np.ones(self.n)
        for j in S:
            out = np.where(self.mask[:, j], out * (1.0 - self.err[j]), out)
        return out


def _check_candidate(ctx: PsiContext, S, u):
    if u in set(S):
        raise ValidationError(f"agent {u} is already selected")
    if not 0 <= u < ctx.n:
        raise ValidationError(f"agent {u} out of range")


def psi(ctx: PsiContext, i: int, S, u: int) -> float:
    """Expected correctness of row i given S correct and u wrong."""
    _check_candidate(ctx, S, u)
    S = list(S)
    extra = float(ctx.wbar[i, S] @ (2.0 * ctx.err[S])) if S else 0.0
    return float(ctx.base[i] + extra - ctx.wbar[i, u] * (2.0 - 2.0 * ctx.err[u]))


def psi_rows(ctx: PsiContext, S, u: int) -> np.ndarray:
    _check_candidate(ctx, S, u)
    return ctx.margins(S) - ctx.wbar[:, u] * (2.0 - 2.0 * ctx.err[u])


def approx_delta_gain_rows(ctx: PsiContext, S, u: int) -> np.ndarray:
    """Per-row estimated marginal gain; rows not influenced by u are 0."""
    active = (psi_rows(ctx, S, u) < 0) & ctx.mask[:, u]
    return np.where(active, ctx.err[u] * ctx.survival(S), 0.0)


def approx_delta_gain_ind(ctx: PsiContext, S, u: int) -> float:
    return float(approx_delta_gain_rows(ctx, S, u).sum())


def estimator_bound_rows(ctx: PsiContext, S, u: int) -> np.ndarray:
    """Per-row Hoeffding bound on the estimator's error."""
    return hoeffding_tail(psi_rows(ctx, S, u), ctx.sq_weight)


def all_approx_delta_gains_ind(ctx: PsiContext, S) -> np.ndarray:
    """Estimated marginal gain of every candidate at once."""
    margins = ctx.margins(S)
    psi_all = margins[:, None] - ctx.wbar * (2.0 - 2.0 * ctx.err)[None, :]
    active = ((psi_all < 0) & ctx.mask).astype(float)
    return ctx.err * (active.T @ ctx.survival(S))


def greedy_egal_appx_ind(wbar, err, k: int, phi: float = 1.0) -> Tuple[InterventionPlan, GreedyTrace]:
    ctx = PsiContext(wbar, err)
    S, trace = run_greedy(ctx.n, k, lambda cur: all_approx_delta_gains_ind(ctx, cur))
    return InterventionPlan(tuple(S), phi), trace


class IndependentOracle:
    """Exact marginal gains under independent errors by full enumeration.

    Correctness patterns ``c`` in {-1, +1}^n get probability
    prod_j (1 - err_j if c_j = +1 else err_j). Since errors do not depend on
    the label, ``Z = wbar @ c`` for either label and the prior cancels.
    """

    def __init__(self, wbar, err, max_agents: int = ORACLE_MAX_AGENTS):
        wbar, err = _check_inputs(wbar, err)
        n = wbar.shape[0]
        if n > max_agents:
            raise CombinatorialBlowup(f"enumerating 2^{n} patterns exceeds the {max_agents}-agent guard")
        self.wbar = wbar
        self.err = err
        self.mask = wbar != 0
        self.patterns = 1 - 2 * ((np.arange(2**n)[:, None] >> np.arange(n)[None, :]) & 1).astype(np.int8)
        correct = self.patterns == 1
        self.probs = np.prod(np.where(correct, 1.0 - err, err), axis=1)
        self.z = self.patterns @ wbar.T

    def delta_gain_rows(self, S, u: int) -> np.ndarray:
        """Exact per-row marginal gain of adding u to S."""
        if u in set(S):
            raise ValidationError(f"agent {u} is already selected")
        wrong_u = self.patterns[:, u] == -1
        out = np.zeros(self.wbar.shape[0])
        for i in np.flatnonzero(self.mask[:, u]):
            ok = wrong_u & (self.z[:, i] < 0)
            for j in S:
                if self.mask[i, j]:
                    ok &= self.patterns[:, j] == 1
            out[i] = self.probs @ ok
        return out


def delta_gain_ind_oracle(wbar, err, S, u: int, i: int, oracle: Optional[IndependentOracle] = None) -> float:
    oracle = IndependentOracle(wbar, err) if oracle is None else oracle
    return float(oracle.delta_gain_rows(S, u)[i])


def independent_distribution_instance(wbar, err, prior_pos: float = 0.5, max_agents: int = ORACLE_MAX_AGENTS) -> Instance:
    """Tabular instance realising the independent-error distribution exactly."""
    oracle = IndependentOracle(wbar, err, max_agents)
    keep = oracle.probs > 0
    c = oracle.patterns[keep]
    p = oracle.probs[keep]
    blocks_w, blocks_y, blocks_p = [], [], []
    for label, mass in ((1, prior_pos), (-1, 1.0 - prior_pos)):
        if mass > 0:
            blocks_w.append(mass * p)
            blocks_y.append(np.full(len(p), label))
            blocks_p.append(label * c)
    weights = np.concatenate(blocks_w)
    return Instance(weights / weights.sum(), np.concatenate(blocks_y), np.concatenate(blocks_p), oracle.wbar)


@dataclass(frozen=True)
class AmbiguityReport:
    statistic: np.ndarray
    threshold: float
    ambiguous: np.ndarray
    delta_proxy: float

    @property
    def count(self) -> int:
        return int(self.ambiguous.sum())


def signed_error_statistic(wbar, err, cols=None) -> np.ndarray:
    """|<W+, E+> - <W-, E->| / |W|_2 per row, restricted to ``cols``."""
    n = wbar.shape[0]
    cols = np.arange(n) if cols is None else np.asarray(cols, dtype=int)
    w = wbar[:, cols]
    e = err[cols]
    low = e <= 0.5
    pos = w[:, low] @ (1.0 - 2.0 * e[low])
    neg = w[:, ~low] @ (2.0 * e[~low] - 1.0)
    norm = np.sqrt((w**2).sum(axis=1))
    with np.errstate(divide="ignore", invalid="ignore"):
        stat = np.abs(pos - neg) / norm
    return np.where(norm > 0, stat, 0.0), norm


def ambiguity_threshold(n: int) -> float:
    return 4.0 * math.sqrt(math.log(n))


def coarse_margins(wbar, err, cols=None) -> np.ndarray:
    """(i, u) table of sum_j w_ij (1 - 2 err_j) - 2 err_u w_iu over ``cols``."""
    n = wbar.shape[0]
    cols = np.arange(n) if cols is None else np.asarray(cols, dtype=int)
    base = wbar[:, cols] @ (1.0 - 2.0 * err[cols])
    return base[:, None] - 2.0 * err[None, :] * wbar


def ambiguity_report(wbar, err) -> AmbiguityReport:
    wbar, err = _check_inputs(wbar, err)
    n = wbar.shape[0]
    if n < 2:
        raise ValidationError("ambiguity needs at least two agents")
    stat, norm = signed_error_statistic(wbar, err)
    threshold = ambiguity_threshold(n)
    ambiguous = (stat <= threshold) | (norm == 0)
    tails = hoeffding_tail(coarse_margins(wbar, err), (wbar**2).sum(axis=1)[:, None])
    return AmbiguityReport(stat, threshold, ambiguous, float(tails.sum(axis=0).min()))

