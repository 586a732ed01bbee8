"""Expressed influence matrices for linear opinion dynamics.

Each supported model maps innate predictions ``y_hat`` to expressed
predictions through a fixed linear operator ``wbar`` (``z* = wbar @ y_hat``).
The closed forms are computed here, and ``simulate_until_converged`` runs
the update rule directly so the two routes can be checked against each
other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, NonConvergent, NotRowStochastic, SingularSystem, ValidationError

ROW_SUM_TOL = 1e-9


class DynamicsKind(str, Enum):
    DEGROOT = "degroot"
    FJ = "fj"
    FINITE_PRODUCT = "finite"
    FJ_FINITE_STEPS = "fj-steps"


@dataclass
class DynamicsSpec:
    """Parameters of one opinion-dynamics model.

    ``weights`` is the base matrix W. For ``FINITE_PRODUCT`` it may instead
    be a sequence of factors W^(1), ..., W^(T) (``factors``).
    """

    kind: DynamicsKind
    weights: Optional[np.ndarray] = None
    factors: Sequence[np.ndarray] = field(default_factory=list)
    alpha: Optional[np.ndarray] = None
    steps: int = 3
    tolerance: float = 1e-10
    max_iterations: int = 1_000_000

    def __post_init__(self):
        self.kind = DynamicsKind(self.kind)
        if self.weights is not None:
            self.weights = np.asarray(self.weights, dtype=float)
        self.factors = [np.asarray(f, dtype=float) for f in self.factors]
        if self.alpha is not None:
            self.alpha = np.asarray(self.alpha, dtype=float)
        if self.tolerance <= 0:
            raise ValidationError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be positive")
        if self.steps < 0:
            raise ValidationError("steps must be non-negative")


def check_influence_matrix(wbar) -> np.ndarray:
    """Validate and return ``wbar`` as a float array (square, finite, >= 0)."""
    wbar = np.asarray(wbar, dtype=float)
    if wbar.ndim != 2 or wbar.shape[0] != wbar.shape[1] or wbar.shape[0] < 1:
        raise DimensionMismatch(f"influence matrix must be square n x n with n >= 1, got {wbar.shape}")
    if not np.all(np.isfinite(wbar)):
        raise ValidationError("influence matrix has non-finite entries")
    if np.any(wbar < 0):
        raise ValidationError("influence matrix has negative entries")
    return wbar


def _square(w, name="W") -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise ValidationError(f"{name} has non-finite entries")
    if np.any(w < 0):
        raise ValidationError(f"{name} has negative entries")
    return w


def _check_row_stochastic(w, name="W"):
    rows = w.sum(axis=1)
    bad = np.abs(rows - 1.0) > ROW_SUM_TOL
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise NotRowStochastic(f"row {i} of {name} sums to {rows[i]!r}")


def laplacian(w) -> np.ndarray:
    """Combinatorial Laplacian D - W (self-loops cancel)."""
    w = np.asarray(w, dtype=float)
    return np.diag(w.sum(axis=1)) - w


def degroot_limit(spec: DynamicsSpec) -> np.ndarray:
    """Limit of W^t by repeated squaring.

    Raises NonConvergent when squaring does not settle within the budget of
    ``max_iterations`` effective multiplications, or when the settled matrix
    is not a fixed point of W (periodic chains make W^(2^t) stabilise on a
    non-limit).
    """
    w = _square(spec.weights)
    _check_row_stochastic(w)
    tol = spec.tolerance
    max_squarings = max(1, math.ceil(math.log2(spec.max_iterations)))
    cur = w
    for _ in range(max_squarings):
        nxt = cur @ cur
        if np.max(np.abs(nxt - cur)) <= tol:
            cur = nxt
            break
        cur = nxt
    else:
        raise NonConvergent(f"DeGroot powers did not settle after {max_squarings} squarings")
    if np.max(np.abs(w @ cur - cur)) > tol:
        raise NonConvergent("DeGroot iterates settled on a non-fixed point (periodic chain?)")
    return cur


def fj_limit(spec: DynamicsSpec) -> np.ndarray:
    """Closed form (I + L)^-1 for a symmetric non-negative W."""
    w = _square(spec.weights)
    if not np.allclose(w, w.T, rtol=0.0, atol=1e-12):
        raise ValidationError("FJ closed form requires a symmetric W")
    n = w.shape[0]
    system = np.eye(n) + laplacian(w)
    try:
        wbar = np.linalg.solve(system, np.eye(n))
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    if not np.all(np.isfinite(wbar)):
        raise SingularSystem("non-finite entries in (I+L)^-1")
    # exact entries are >= 0; clip round-off below zero
    if np.min(wbar) < -1e-12:
        raise SingularSystem(f"(I+L)^-1 has a negative entry {np.min(wbar)!r}")
    return np.maximum(wbar, 0.0)


def finite_product(spec: DynamicsSpec) -> np.ndarray:
    """Product W^(T) ... W^(1) matching z^(t) = W^(t) z^(t-1)."""
    factors = list(spec.factors) if spec.factors else [spec.weights]
    if not factors or factors[0] is None:
        raise ValidationError("finite product needs at least one factor")
    n = np.asarray(factors[0]).shape[0]
    out = np.eye(n)
    for t, f in enumerate(factors, start=1):
        f = _square(f, name=f"W^({t})")
        if f.shape[0] != n:
            raise DimensionMismatch(f"factor {t} has shape {f.shape}, expected {(n, n)}")
        _check_row_stochastic(f, name=f"W^({t})")
        out = f @ out
    return out


def _fj_parts(spec: DynamicsSpec):
    w = _square(spec.weights)
    n = w.shape[0]
    alpha = np.ones(n) if spec.alpha is None else np.asarray(spec.alpha, dtype=float)
    if alpha.shape != (n,):
        raise DimensionMismatch(f"alpha has shape {alpha.shape}, expected {(n,)}")
    if np.any(alpha < 0):
        raise ValidationError("stubbornness must be non-negative")
    c = 1.0 / (1.0 + w.sum(axis=1))
    return w, alpha, c


def fj_finite_steps(spec: DynamicsSpec) -> np.ndarray:
    """Linear map of T FJ updates started from z^(0) = y_hat."""
    w, alpha, c = _fj_parts(spec)
    n = w.shape[0]
    a = c[:, None] * w
    b = np.diag(c * alpha)
    out = np.eye(n)
    for _ in range(spec.steps):
        out = a @ out + b
    return out


def influence_matrix(spec: DynamicsSpec) -> np.ndarray:
    """Dispatch to the closed form for ``spec.kind``."""
    kind = spec.kind
    if kind is DynamicsKind.DEGROOT:
        return degroot_limit(spec)
    if kind is DynamicsKind.FJ:
        return fj_limit(spec)
    if kind is DynamicsKind.FINITE_PRODUCT:
        return finite_product(spec)
    return fj_finite_steps(spec)


def simulate_until_converged(spec: DynamicsSpec, y_hat) -> np.ndarray:
    """Run the update rule from z^(0) = y_hat and return the expressed vector.

    Finite kinds run exactly T steps. DeGroot stops once successive iterates
    differ by at most ``tolerance``; FJ is a contraction with modulus
    q = max_i d_i / (1 + d_i) and stops once the a-posteriori bound
    q/(1-q) * |z_t - z_{t-1}| drops below ``tolerance``.
    """
    y = np.asarray(y_hat, dtype=float)
    kind = spec.kind

    if kind is DynamicsKind.FINITE_PRODUCT:
        factors = list(spec.factors) if spec.factors else [spec.weights]
        z = y.copy()
        for t, f in enumerate(factors, start=1):
            f = _square(f, name=f"W^({t})")
            if f.shape[0] != y.shape[0]:
                raise DimensionMismatch("factor and prediction vector disagree")
            _check_row_stochastic(f, name=f"W^({t})")
            z = f @ z
        return z

    if kind is DynamicsKind.FJ_FINITE_STEPS:
        w, alpha, c = _fj_parts(spec)
        if w.shape[0] != y.shape[0]:
            raise DimensionMismatch("W and prediction vector disagree")
        z = y.copy()
        for _ in range(spec.steps):
            z = c * (w @ z + alpha * y)
        return z

    w = _square(spec.weights)
    if w.shape[0] != y.shape[0]:
        raise DimensionMismatch("W and prediction vector disagree")
    if kind is DynamicsKind.DEGROOT:
        _check_row_stochastic(w)
        c = np.ones(w.shape[0])
        alpha = np.zeros(w.shape[0])
        factor = 1.0
    else:
        _, alpha, c = _fj_parts(spec)
        q = float(np.max(c * w.sum(axis=1)))
        factor = q / (1.0 - q) if q > 0 else 0.0

    z = y.copy()
    for _ in range(spec.max_iterations):
        z_new = c * (w @ z + alpha * y)
        step = np.max(np.abs(z_new - z))
        z = z_new
        if step * max(factor, 1.0) <= spec.tolerance:
            return z
    raise NonConvergent(f"{kind.value} update did not converge in {spec.max_iterations} iterations")
