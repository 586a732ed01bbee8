"""Egalitarian greedy under the Red/Blue/White group-dependence model.

With probability ``rho`` a single group decision is drawn. Red agents are
then all wrong with probability ``err_R`` while Blue agents are wrong
exactly when Red agents are right. White agents always decide
individually. With probability ``1 - rho`` every agent decides
individually with its own ``err_indv``.

The estimated marginal gain mixes the group and individual branches. The
group branch depends on which colours appear among the selected agents that
influence row ``i``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .dynamics import check_influence_matrix
from .egal_exact import GreedyTrace, run_greedy
from .egal_ind import (
    AmbiguityReport,
    IndependentOracle,
    PsiContext,
    all_approx_delta_gains_ind,
    approx_delta_gain_rows,
    coarse_margins,
    estimator_bound_rows,
    hoeffding_tail,
    ambiguity_threshold,
    signed_error_statistic,
)
from .errors import CombinatorialBlowup, DimensionMismatch, ValidationError
from .instance import InterventionPlan

RED, BLUE, WHITE = "R", "B", "W"
ORACLE_MAX_WHITE = 18
ORACLE_MAX_AGENTS = 18


@dataclass
class GroupStructure:
    colors: np.ndarray
    rho: float
    err_indv: np.ndarray
    err_R: float
    prior_pos: float = 0.5

    def __post_init__(self):
        self.colors = np.asarray([str(c).upper() for c in self.colors])
        self.err_indv = np.asarray(self.err_indv, dtype=float)
        if not np.all(np.isin(self.colors, (RED, BLUE, WHITE))):
            raise ValidationError("colours must be R, B or W")
        if self.err_indv.shape != self.colors.shape:
            raise DimensionMismatch("colour and error vectors differ in length")
        if np.any(self.err_indv < 0) or np.any(self.err_indv > 1):
            raise ValidationError("individual error rates must lie in [0, 1]")
        for name in ("rho", "err_R", "prior_pos"):
            value = float(getattr(self, name))
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1], got {value}")
            setattr(self, name, value)

    @property
    def n(self) -> int:
        return self.colors.shape[0]

    @property
    def err_B(self) -> float:
        return 1.0 - self.err_R

    @property
    def red(self) -> np.ndarray:
        return self.colors == RED

    @property
    def blue(self) -> np.ndarray:
        return self.colors == BLUE

    @property
    def white(self) -> np.ndarray:
        return self.colors == WHITE

    def group_error(self, color: str) -> float:
        return self.err_R if color == RED else self.err_B


@dataclass(frozen=True)
class GroupPsiContext:
    wbar: np.ndarray
    group: GroupStructure
    residual: np.ndarray = field(init=False)
    red_mass: np.ndarray = field(init=False)
    blue_mass: np.ndarray = field(init=False)
    mask: np.ndarray = field(init=False)

    def __post_init__(self):
        wbar = check_influence_matrix(self.wbar)
        if wbar.shape[0] != self.group.n:
            raise DimensionMismatch("influence matrix and group structure disagree on n")
        object.__setattr__(self, "wbar", wbar)
        object.__setattr__(self, "residual", 1.0 - 2.0 * self.group.err_indv)
        object.__setattr__(self, "red_mass", wbar[:, self.group.red].sum(axis=1))
        object.__setattr__(self, "blue_mass", wbar[:, self.group.blue].sum(axis=1))
        object.__setattr__(self, "mask", wbar != 0)

    @property
    def n(self) -> int:
        return self.wbar.shape[0]

    @property
    def color_gap(self) -> np.ndarray:
        return np.abs(self.red_mass - self.blue_mass)

    def rows_psi(self, correct, wrong) -> np.ndarray:
        """Margin of every row with ``correct`` forced right and ``wrong`` forced wrong.

        Overlaps resolve in favour of ``correct``. Callers only read rows on
        which the overlapping columns carry zero weight.
        """
        coef = self.residual.copy()
        coef[wrong] = -1.0
        coef[correct] = 1.0
        return self.wbar @ coef


def _as_mask(n, idx) -> np.ndarray:
    m = np.zeros(n, dtype=bool)
    m[list(idx)] = True
    return m


def psi_xy(ctx: GroupPsiContext, i: int, X, Y) -> float:
    """Margin of row i when X is right, Y is wrong and the rest are individual."""
    X, Y = set(X), set(Y)
    if X & Y:
        raise ValidationError(f"sets overlap on {sorted(X & Y)}")
    row = ctx.wbar[i]
    rest = [j for j in range(ctx.n) if j not in X and j not in Y]
    return float(row[rest] @ ctx.residual[rest] + row[list(X)].sum() - row[list(Y)].sum())


def gamma_hat(ctx: GroupPsiContext, i: int, X, Y) -> int:
    """1 when the margin is negative (row predicted faulty), else 0."""
    return int(psi_xy(ctx, i, X, Y) < 0)


def _group_branch_rows(ctx: GroupPsiContext, S, u: int) -> np.ndarray:
    g = ctx.group
    n = ctx.n
    S = list(S)
    S_mask = _as_mask(n, S)
    red, blue, white = g.red, g.blue, g.white
    err = g.err_indv

    touches_red = (ctx.mask[:, S_mask & red]).any(axis=1)
    touches_blue = (ctx.mask[:, S_mask & blue]).any(axis=1)
    survive = np.ones(n)
    for j in np.flatnonzero(S_mask & white):
        survive = np.where(ctx.mask[:, j], survive * (1.0 - err[j]), survive)

    u_mask = _as_mask(n, [u])
    out = np.zeros(n)
    colorless = ~touches_red & ~touches_blue
    color_u = g.colors[u]

    # colorless S_i
    if color_u == WHITE:
        red_right = ctx.rows_psi(red | S_mask, blue | u_mask) < 0
        blue_right = ctx.rows_psi(blue | S_mask, red | u_mask) < 0
        factor = np.where(red_right & blue_right, 1.0,
                          np.where(blue_right, g.err_R, np.where(red_right, g.err_B, 0.0)))
        out = np.where(colorless, factor * err[u] * survive, out)
    else:
        own = red if color_u == RED else blue
        other = blue if color_u == RED else red
        faulty = ctx.rows_psi(other | S_mask, own | u_mask) < 0
        out = np.where(colorless & faulty, g.group_error(color_u) * survive, out)

    # monochromatic S_i: the colour present in S_i is forced right
    for color, present, absent in ((RED, touches_red, touches_blue), (BLUE, touches_blue, touches_red)):
        mono = present & ~absent
        if not mono.any() or color_u == color:
            continue
        own = red if color == RED else blue
        other = blue if color == RED else red
        opposite_err = g.group_error(BLUE if color == RED else RED)
        if color_u == WHITE:
            faulty = ctx.rows_psi(own | S_mask, other | u_mask) < 0
            value = err[u] * opposite_err * survive
        else:
            faulty = ctx.rows_psi(own | S_mask, other) < 0
            value = opposite_err * survive
        out = np.where(mono & faulty, value, out)

    # bichromatic S_i stays 0
    return np.where(ctx.mask[:, u], out, 0.0)


def approx_delta_gain_group_rows(ctx: GroupPsiContext, S, u: int, ind_ctx: Optional[PsiContext] = None) -> np.ndarray:
    """Per-row mixture estimate rho * group + (1 - rho) * individual."""
    if u in set(S):
        raise ValidationError(f"agent {u} is already selected")
    ind_ctx = PsiContext(ctx.wbar, ctx.group.err_indv) if ind_ctx is None else ind_ctx
    rho = ctx.group.rho
    return rho * _group_branch_rows(ctx, S, u) + (1.0 - rho) * approx_delta_gain_rows(ind_ctx, S, u)


def approx_delta_gain_group(ctx: GroupPsiContext, group: GroupStructure, S, u: int) -> float:
    if group is not ctx.group:
        ctx = GroupPsiContext(ctx.wbar, group)
    return float(approx_delta_gain_group_rows(ctx, S, u).sum())


def greedy_egal_appx_group(wbar, group: GroupStructure, k: int, phi: float = 1.0) -> Tuple[InterventionPlan, GreedyTrace]:
    ctx = GroupPsiContext(wbar, group)
    ind_ctx = PsiContext(ctx.wbar, group.err_indv)
    rho = group.rho

    def gains(S):
        ind = all_approx_delta_gains_ind(ind_ctx, S)
        grp = np.zeros(ctx.n)
        if rho > 0:
            for u in range(ctx.n):
                if u not in S:
                    grp[u] = _group_branch_rows(ctx, S, u).sum()
        return rho * grp + (1.0 - rho) * ind

    S, trace = run_greedy(ctx.n, k, gains)
    return InterventionPlan(tuple(S), phi), trace


class GroupOracle:
    """Exact per-row marginal gains under the group model by enumeration."""

    def __init__(self, wbar, group: GroupStructure, max_white: int = ORACLE_MAX_WHITE,
                 max_agents: int = ORACLE_MAX_AGENTS):
        wbar = check_influence_matrix(wbar)
        if wbar.shape[0] != group.n:
            raise DimensionMismatch("influence matrix and group structure disagree on n")
        whites = np.flatnonzero(group.white)
        if len(whites) > max_white:
            raise CombinatorialBlowup(f"2^{len(whites)} white patterns exceed the {max_white}-agent guard")
        self.wbar = wbar
        self.group = group
        self.mask = wbar != 0
        n = group.n
        w = len(whites)
        bits = ((np.arange(2**w)[:, None] >> np.arange(w)[None, :]) & 1).astype(bool)
        white_p = np.prod(np.where(bits, group.err_indv[whites], 1.0 - group.err_indv[whites]), axis=1)
        blocks, probs = [], []
        for red_wrong, p_bit in ((False, 1.0 - group.err_R), (True, group.err_R)):
            c = np.ones((2**w, n), dtype=np.int8)
            c[:, group.red] = -1 if red_wrong else 1
            c[:, group.blue] = 1 if red_wrong else -1
            c[:, whites] = np.where(bits, -1, 1)
            blocks.append(c)
            probs.append(p_bit * white_p)
        self.patterns = np.concatenate(blocks)
        self.probs = np.concatenate(probs)
        self.z = self.patterns @ wbar.T
        self.individual = None
        if group.rho < 1.0:
            if n > max_agents:
                raise CombinatorialBlowup(f"2^{n} individual patterns exceed the {max_agents}-agent guard")
            self.individual = IndependentOracle(wbar, group.err_indv, max_agents)

    def group_rows(self, S, u: int) -> np.ndarray:
        wrong_u = self.patterns[:, u] == -1
        out = np.zeros(self.wbar.shape[0])
        for i in np.flatnonzero(self.mask[:, u]):
            ok = wrong_u & (self.z[:, i] < 0)
            for j in S:
                if self.mask[i, j]:
                    ok &= self.patterns[:, j] == 1
            out[i] = self.probs @ ok
        return out

    def delta_gain_rows(self, S, u: int) -> np.ndarray:
        if u in set(S):
            raise ValidationError(f"agent {u} is already selected")
        rho = self.group.rho
        out = rho * self.group_rows(S, u)
        if self.individual is not None:
            out = out + (1.0 - rho) * self.individual.delta_gain_rows(S, u)
        return out


def delta_gain_group_oracle(wbar, group: GroupStructure, S, u: int, i: int,
                            oracle: Optional[GroupOracle] = None) -> float:
    oracle = GroupOracle(wbar, group) if oracle is None else oracle
    return float(oracle.delta_gain_rows(S, u)[i])


def group_bound_rows(ctx: GroupPsiContext, u: int) -> np.ndarray:
    """Per-row mixture error bound built from the coarse margins at candidate u."""
    g = ctx.group
    wbar = ctx.wbar
    whites = np.flatnonzero(g.white)
    white_margin = coarse_margins(wbar, g.err_indv, whites)[:, u]
    white_sq = (wbar[:, whites] ** 2).sum(axis=1)
    full_margin = coarse_margins(wbar, g.err_indv)[:, u]
    full_sq = (wbar**2).sum(axis=1)
    return (g.rho * hoeffding_tail(white_margin - ctx.color_gap, white_sq)
            + (1.0 - g.rho) * hoeffding_tail(full_margin, full_sq))


def w_ambiguity_report(wbar, group: GroupStructure) -> AmbiguityReport:
    ctx = GroupPsiContext(wbar, group)
    n = ctx.n
    if n < 2:
        raise ValidationError("ambiguity needs at least two agents")
    whites = np.flatnonzero(group.white)
    stat, norm = signed_error_statistic(ctx.wbar, group.err_indv, whites)
    threshold = ambiguity_threshold(n)
    ambiguous = (stat <= threshold + ctx.color_gap) | (norm == 0)
    total = np.stack([group_bound_rows(ctx, u) for u in range(n)], axis=1).sum(axis=0)
    return AmbiguityReport(stat, threshold, ambiguous, float(total.min()))


def case_bound_rows(ctx: GroupPsiContext, S, u: int) -> np.ndarray:
    """Per-row error bound that conditions on the group bit.

    For each group outcome the estimator thresholds the conditional margin
    of the remaining white agents, so its error is the Hoeffding tail of
    that margin weighted by the probability of the conditioning event. The
    individual branch uses the set-dependent tail.
    """
    g = ctx.group
    n = ctx.n
    S = list(S)
    if u in S:
        raise ValidationError(f"agent {u} is already selected")
    S_mask = _as_mask(n, S)
    red, blue, white = g.red, g.blue, g.white
    err = g.err_indv
    survive = np.ones(n)
    for j in np.flatnonzero(S_mask & white):
        survive = np.where(ctx.mask[:, j], survive * (1.0 - err[j]), survive)
    touches_red = (ctx.mask[:, S_mask & red]).any(axis=1)
    touches_blue = (ctx.mask[:, S_mask & blue]).any(axis=1)
    u_mask = _as_mask(n, [u])
    residual = white & ~S_mask & ~u_mask
    sq = (ctx.wbar[:, residual] ** 2).sum(axis=1)

    group_part = np.zeros(n)
    for red_right, p_bit in ((True, 1.0 - g.err_R), (False, g.err_R)):
        right = red if red_right else blue
        wrong = blue if red_right else red
        consistent = ~(touches_blue if red_right else touches_red)
        if g.colors[u] == WHITE:
            p_u = err[u]
        else:
            p_u = 1.0 if wrong[u] else 0.0
        weight = p_bit * p_u * np.where(consistent, survive, 0.0)
        margin = ctx.rows_psi(right | S_mask, wrong | u_mask)
        group_part += weight * hoeffding_tail(margin, sq)

    ind_ctx = PsiContext(ctx.wbar, err)
    out = g.rho * group_part + (1.0 - g.rho) * estimator_bound_rows(ind_ctx, S, u)
    return np.where(ctx.mask[:, u], out, 0.0)
