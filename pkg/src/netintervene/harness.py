"""Baselines, the accuracy metric and k-sweeps over selection methods."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .aggregate import top_k
from .egal_exact import greedy_egal_exact
from .egal_group import GroupStructure, greedy_egal_appx_group
from .egal_ind import greedy_egal_appx_ind
from .errors import ValidationError
from .generators import GraphModel, GraphSpec, InstanceSpec, gen_instance, influence_from_graph
from .instance import Instance, InterventionPlan, faulty_mass, gain_egal_direct

BASELINES = ("Random", "Degree", "ErrRate", "DegXErr")
METHODS = BASELINES + ("Appx", "Egal")
THRESHOLDS = (0.9, 0.75)


def in_degree(wbar) -> np.ndarray:
    """Number of other agents each agent influences (nonzero off-diagonal column entries)."""
    nz = np.asarray(wbar) != 0
    return nz.sum(axis=0) - np.diag(nz)


def baseline_order(method: str, instance: Instance, k: int, seed: int = 0) -> list:
    n = instance.n
    if not 0 <= k <= n:
        raise ValidationError(f"k = {k} outside [0, {n}]")
    if method == "Random":
        return [int(j) for j in np.random.default_rng(seed).permutation(n)[:k]]
    err = error_profile_quiet(instance)
    if method == "Degree":
        scores = in_degree(instance.wbar).astype(float)
    elif method == "ErrRate":
        scores = err
    elif method == "DegXErr":
        scores = in_degree(instance.wbar) * err
    else:
        raise ValidationError(f"unknown baseline {method!r}; choose from {BASELINES}")
    return top_k(scores, k)


def baseline_select(method: str, instance: Instance, k: int, seed: int = 0) -> InterventionPlan:
    return InterventionPlan(tuple(baseline_order(method, instance, k, seed)))


def error_profile_quiet(instance: Instance) -> np.ndarray:
    """Overall error rates without the single-class warning."""
    return np.clip(instance.weights @ instance.wrong, 0.0, 1.0)


def accuracy(instance: Instance, plan: InterventionPlan) -> float:
    """Egalitarian gain as a fraction of the faulty mass (1 when nothing is faulty)."""
    zf = faulty_mass(instance)
    if zf == 0:
        return 1.0
    return gain_egal_direct(instance, plan) / zf


@dataclass
class SweepRow:
    method: str
    seed: int
    k: int
    gain: float
    acc: float
    wall_ms: float


@dataclass
class SweepResult:
    method: str
    seed: int
    rows: List[SweepRow] = field(default_factory=list)
    tag: str = ""

    def acc_at(self, k: int) -> float:
        return next(r.acc for r in self.rows if r.k == k)

    def k_at_acc(self, tau: float):
        """Smallest k with Acc strictly above tau, or '>k_max'."""
        for r in self.rows:
            if r.acc > tau:
                return r.k
        return f">{self.rows[-1].k if self.rows else 0}"


def method_order(method: str, instance: Instance, k: int, seed: int = 0,
                 group: Optional[GroupStructure] = None):
    """Selection order of length k plus cumulative seconds spent per prefix."""
    t0 = time.perf_counter()
    if method in BASELINES:
        order = baseline_order(method, instance, k, seed)
        elapsed = time.perf_counter() - t0
        return order, [elapsed] * k
    if method == "Egal":
        plan, trace = greedy_egal_exact(instance, k)
    elif method == "Appx":
        plan, trace = greedy_egal_appx_ind(instance.wbar, error_profile_quiet(instance), k)
    elif method == "AppxGroup":
        if group is None:
            raise ValidationError("AppxGroup needs a group structure")
        plan, trace = greedy_egal_appx_group(instance.wbar, group, k)
    else:
        raise ValidationError(f"unknown method {method!r}")
    return list(plan.S), list(np.cumsum(trace.step_seconds))


def sweep(instance: Instance, methods: Sequence[str], k_max: int, seeds: Iterable[int] = (0,),
          tag: str = "", group: Optional[GroupStructure] = None) -> List[SweepResult]:
    """Accuracy of every prefix k = 1..k_max of each method's selection order."""
    if not 1 <= k_max <= instance.n:
        raise ValidationError(f"k_max = {k_max} outside [1, {instance.n}]")
    zf = faulty_mass(instance)
    results = []
    for seed in seeds:
        for method in methods:
            order, seconds = method_order(method, instance, k_max, seed, group)
            res = SweepResult(method, seed, tag=tag)
            for k in range(1, k_max + 1):
                gain = gain_egal_direct(instance, InterventionPlan(tuple(order[:k])))
                acc = 1.0 if zf == 0 else gain / zf
                res.rows.append(SweepRow(method, seed, k, gain, acc, 1000.0 * seconds[k - 1]))
            results.append(res)
    return results


def default_k(n: int) -> int:
    """ceil(log2 n), the budget used for the headline comparison."""
    return max(1, math.ceil(math.log2(n))) if n > 1 else 1


def summarize(results: Sequence[SweepResult], k_ref: int) -> Dict[str, dict]:
    """Three blocks: Acc at k_ref, and the smallest k beating each threshold."""
    out: Dict[str, dict] = {f"acc_at_k{k_ref}": {}}
    for tau in THRESHOLDS:
        out[f"k_at_acc_gt_{tau}"] = {}
    for res in results:
        key = res.method if len({r.seed for r in results}) == 1 else f"{res.method}@{res.seed}"
        out[f"acc_at_k{k_ref}"][key] = res.acc_at(k_ref) if k_ref <= len(res.rows) else None
        for tau in THRESHOLDS:
            out[f"k_at_acc_gt_{tau}"][key] = res.k_at_acc(tau)
    return out


@dataclass
class ExperimentConfig:
    """Synthetic experiment defaults: 128 agents, three outcomes, three FJ steps."""

    model: str = "PA"
    n: int = 128
    seed: int = 0
    steps: int = 3
    omega_size: int = 3
    p_low: float = 0.3
    p_high: float = 0.9
    label_prior: float = 1.0
    class_balanced: bool = False


def experiment_instance(cfg: ExperimentConfig) -> Instance:
    graph_seed, inst_seed = (int(s.generate_state(1)[0]) for s in np.random.SeedSequence(cfg.seed).spawn(2))
    wbar = influence_from_graph(GraphSpec(GraphModel(cfg.model), n=cfg.n, seed=graph_seed), steps=cfg.steps)
    spec = InstanceSpec(cfg.omega_size, cfg.p_low, cfg.p_high, cfg.label_prior, cfg.class_balanced, inst_seed)
    return gen_instance(wbar, spec)
