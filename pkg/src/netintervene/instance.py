"""Tabular problem instances and direct evaluation of both objectives.

An :class:`Instance` is a finite weighted set of outcomes. Each outcome has a
true label in {-1, +1} and a fixed innate prediction for every agent. The
expressed prediction of agent ``i`` is ``(wbar @ preds)[i]`` and it is
faulty when its product with the label is strictly negative.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .dynamics import check_influence_matrix
from .errors import DimensionMismatch, ValidationError

WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class Outcome:
    weight: float
    label: int
    preds: np.ndarray


@dataclass(frozen=True)
class ErrorProfile:
    """Per-agent innate error rates, overall and conditioned on the label."""

    err: np.ndarray
    err_pos: np.ndarray
    err_neg: np.ndarray
    label_independent: bool
    prior_pos: float


@dataclass
class InterventionPlan:
    """A chosen agent set together with the correction strength ``phi``."""

    S: tuple
    phi: float = 1.0
    reports: dict = field(default_factory=dict)

    def __post_init__(self):
        self.S = tuple(int(j) for j in self.S)
        if len(set(self.S)) != len(self.S):
            raise ValidationError(f"plan has repeated agents: {self.S}")
        if not 0.0 < self.phi <= 1.0:
            raise ValidationError(f"phi must lie in (0, 1], got {self.phi}")

    def validate(self, n: int):
        if len(self.S) > n:
            raise ValidationError(f"plan selects {len(self.S)} agents but n = {n}")
        for j in self.S:
            if not 0 <= j < n:
                raise ValidationError(f"agent index {j} outside [0, {n})")


class Instance:
    """Weighted outcomes with labels, innate predictions and an influence matrix.

    Arrays are stored column-wise: ``weights`` has shape (m,), ``labels``
    (m,) and ``preds`` (m, n). Instances are treated as immutable.
    """

    def __init__(self, weights, labels, preds, wbar):
        wbar = check_influence_matrix(wbar)
        weights = np.asarray(weights, dtype=float).reshape(-1)
        labels = np.asarray(labels).reshape(-1)
        preds = np.asarray(preds)
        if preds.ndim != 2:
            raise DimensionMismatch("prediction table must be 2-D (outcomes x agents)")
        m, n = preds.shape
        if m < 1:
            raise ValidationError("instance needs at least one outcome")
        if weights.shape != (m,) or labels.shape != (m,):
            raise DimensionMismatch("weights, labels and prediction rows disagree in length")
        if wbar.shape[0] != n:
            raise DimensionMismatch(f"influence matrix is {wbar.shape} but predictions cover {n} agents")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
            raise ValidationError("outcome weights must be positive")
        if abs(weights.sum() - 1.0) > WEIGHT_SUM_TOL * max(1, m):
            raise ValidationError(f"outcome weights sum to {weights.sum()!r}, expected 1")
        if not np.all(np.isin(labels, (-1, 1))):
            raise ValidationError("labels must be -1 or +1")
        if not np.all(np.isin(preds, (-1, 1))):
            raise ValidationError("predictions must be -1 or +1")
        self.weights = weights
        self.labels = labels.astype(np.int8)
        self.preds = preds.astype(np.int8)
        self.wbar = wbar
        for arr in (self.weights, self.labels, self.preds, self.wbar):
            arr.setflags(write=False)
        self._z = None

    @classmethod
    def from_outcomes(cls, outcomes: Sequence[Outcome], wbar) -> "Instance":
        return cls(
            [o.weight for o in outcomes],
            [o.label for o in outcomes],
            np.array([np.asarray(o.preds) for o in outcomes]),
            wbar,
        )

    @property
    def n(self) -> int:
        return self.preds.shape[1]

    @property
    def m(self) -> int:
        return self.preds.shape[0]

    @property
    def outcomes(self) -> list:
        return [Outcome(float(w), int(y), p) for w, y, p in zip(self.weights, self.labels, self.preds)]

    @property
    def wrong(self) -> np.ndarray:
        """Boolean (m, n) table of innate mispredictions."""
        return self.preds != self.labels[:, None]

    @property
    def correctness_table(self) -> np.ndarray:
        """Z for every outcome, shape (m, n); cached."""
        if self._z is None:
            z = self.labels[:, None] * (self.preds @ self.wbar.T)
            z.setflags(write=False)
            self._z = z
        return self._z

    def __repr__(self):
        return f"Instance(n={self.n}, outcomes={self.m})"


def _outcome_index(instance: Instance, a: int) -> int:
    if not -instance.m <= a < instance.m:
        raise IndexError(f"outcome {a} out of range for {instance.m} outcomes")
    return a


def expressed(instance: Instance, a: int) -> np.ndarray:
    """Expressed predictions ``wbar @ preds[a]``."""
    a = _outcome_index(instance, a)
    return instance.wbar @ instance.preds[a].astype(float)


def correctness(instance: Instance, a: int) -> np.ndarray:
    """Label times expressed prediction; negative entries are faulty."""
    return instance.labels[a] * expressed(instance, a)


def apply_intervention(instance: Instance, plan: InterventionPlan) -> np.ndarray:
    """Prediction table after moving each selected agent towards the label."""
    plan.validate(instance.n)
    improved = instance.preds.astype(float)
    if plan.S:
        cols = list(plan.S)
        improved[:, cols] = (1.0 - plan.phi) * improved[:, cols] + plan.phi * instance.labels[:, None]
    return improved


def improvement_table(instance: Instance, plan: InterventionPlan) -> np.ndarray:
    """B_new - Z for every (outcome, agent), shape (m, n).

    Evaluated as ``y * wbar @ (y_tilde - y_hat)`` so unaffected agents get an
    exact zero and all other entries are sums of non-negative terms.
    """
    delta = apply_intervention(instance, plan) - instance.preds
    return instance.labels[:, None] * (delta @ instance.wbar.T)


def gain_agg_direct(instance: Instance, plan: InterventionPlan) -> float:
    """Expected total increase in correctness over all agents."""
    return float(instance.weights @ improvement_table(instance, plan).sum(axis=1))


def gain_egal_direct(instance: Instance, plan: InterventionPlan) -> float:
    """Expected number of faulty agents whose correctness strictly increases."""
    z = instance.correctness_table
    improved = (z < 0) & (improvement_table(instance, plan) > 0)
    return float(instance.weights @ improved.sum(axis=1))


def error_profile(instance: Instance) -> ErrorProfile:
    wrong = instance.wrong.astype(float)
    w = instance.weights
    # rounding in the weight sum can push a rate a hair past 1
    err = np.clip(w @ wrong, 0.0, 1.0)
    pos = instance.labels == 1
    mass_pos = float(w[pos].sum())
    mass_neg = float(w[~pos].sum())
    empty = mass_pos == 0.0 or mass_neg == 0.0
    err_pos = np.clip(w[pos] @ wrong[pos] / mass_pos, 0.0, 1.0) if mass_pos > 0 else np.zeros(instance.n)
    err_neg = np.clip(w[~pos] @ wrong[~pos] / mass_neg, 0.0, 1.0) if mass_neg > 0 else np.zeros(instance.n)
    if empty:
        warnings.warn("one label class has no mass; its conditional error rates are set to 0", stacklevel=2)
        independent = False
    else:
        independent = bool(np.all(np.abs(err_pos - err_neg) <= 1e-9))
    return ErrorProfile(err=err, err_pos=err_pos, err_neg=err_neg, label_independent=independent, prior_pos=mass_pos)


def faulty_mass(instance: Instance) -> float:
    """Expected number of agents whose expressed prediction is faulty."""
    return float(instance.weights @ (instance.correctness_table < 0).sum(axis=1))


def as_plan(S: Iterable[int], phi: float = 1.0) -> InterventionPlan:
    return InterventionPlan(tuple(S), phi)

