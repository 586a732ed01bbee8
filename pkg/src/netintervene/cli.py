"""Command-line entry point.

Exit codes: 0 on success, 2 for invalid input, 3 when an iterative or
linear solve fails, 4 when exhaustive enumeration is refused.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import io as fio
from .aggregate import gain_agg_closed, influence_scores, select_top_k_agg
from .dynamics import DynamicsKind, DynamicsSpec, influence_matrix
from .egal_exact import brute_force_opt_egal, greedy_egal_exact
from .egal_group import GroupStructure, greedy_egal_appx_group, w_ambiguity_report
from .egal_ind import ambiguity_report, greedy_egal_appx_ind
from .errors import CombinatorialBlowup, NonConvergent, SingularSystem, ValidationError
from .generators import (
    GraphModel,
    GraphSpec,
    InstanceSpec,
    adversarial_fixture,
    gen_graph,
    gen_group_instance,
    gen_instance,
    influence_from_graph,
)
from .harness import (
    METHODS,
    ExperimentConfig,
    accuracy,
    default_k,
    error_profile_quiet,
    experiment_instance,
    summarize,
    sweep,
)
from .instance import (
    faulty_mass,
    gain_agg_direct,
    gain_egal_direct,
)

EXIT_VALIDATION, EXIT_CONVERGENCE, EXIT_GUARD = 2, 3, 4


def _emit(args, text: str):
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_json(args, doc):
    _emit(args, json.dumps(doc, indent=1, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj)}")


def _parse_seeds(text: str) -> list:
    seeds = []
    for part in text.split(","):
        if "-" in part:
            lo, hi = part.split("-")
            seeds.extend(range(int(lo), int(hi) + 1))
        elif part:
            seeds.append(int(part))
    return seeds


def _load_wbar_and_instance(args):
    instance = fio.read_instance(args.instance) if getattr(args, "instance", None) else None
    if getattr(args, "wbar", None):
        wbar = fio.read_matrix(args.wbar)
    elif instance is not None:
        wbar = instance.wbar
    else:
        raise ValidationError("need --instance or --wbar")
    return wbar, instance


def cmd_gen_graph(args):
    spec = GraphSpec(args.model, n=args.n, seed=args.seed, p=args.p, m=args.m, k_ring=args.k_ring,
                     p_rewire=args.p_rewire, sparsity=args.sparsity)
    _emit(args, fio.matrix_to_csv(gen_graph(spec), sparse=args.sparse))


def cmd_weights(args):
    kind = DynamicsKind(args.kind)
    base = fio.read_matrix(args.W) if args.W else None
    factors = [fio.read_matrix(p) for p in args.factor] if args.factor else []
    alpha = fio.read_err(args.alpha) if args.alpha else None
    spec = DynamicsSpec(kind, weights=base, factors=factors, alpha=alpha, steps=args.steps,
                        tolerance=args.tol, max_iterations=args.max_iter)
    if base is None and not factors:
        raise ValidationError("need --W or at least one --factor")
    _emit(args, fio.matrix_to_csv(influence_matrix(spec), sparse=args.sparse))


def cmd_gen_instance(args):
    if args.wbar:
        wbar = fio.read_matrix(args.wbar)
    elif args.model:
        wbar = influence_from_graph(GraphSpec(args.model, n=args.n, seed=args.seed), steps=args.steps)
    else:
        raise ValidationError("need --wbar or --model")
    spec = InstanceSpec(args.omega_size, args.p_low, args.p_high, args.label_prior, args.class_balanced, args.seed)
    instance = gen_instance(wbar, spec)
    _write_instance(args, instance)


def _write_instance(args, instance):
    if args.out and args.wbar_out:
        fio.write_instance(args.out, instance, args.wbar_out)
    else:
        _emit_json(args, fio.instance_to_dict(instance))


def cmd_gen_group(args):
    rng = np.random.default_rng(args.seed)
    if args.wbar:
        wbar = fio.read_matrix(args.wbar)
        n = wbar.shape[0]
    else:
        n, wbar = args.n, None
    if args.n_red + args.n_blue > n:
        raise ValidationError("more coloured agents than agents")
    colors = np.array(["W"] * n)
    perm = rng.permutation(n)
    colors[perm[: args.n_red]] = "R"
    colors[perm[args.n_red: args.n_red + args.n_blue]] = "B"
    err = rng.uniform(args.err_low, args.err_high, size=n)
    group = GroupStructure(colors, args.rho, err, args.err_R, args.label_prior)
    if args.instance_out:
        if wbar is None:
            raise ValidationError("--instance-out needs --wbar")
        instance = gen_group_instance(wbar, group, args.omega_size, args.seed)
        Path(args.instance_out).write_text(json.dumps(fio.instance_to_dict(instance), indent=1) + "\n")
    _emit_json(args, fio.group_to_dict(group))


def _trace_text(args, trace) -> str:
    if args.format == "json":
        rows = [dict(step=s, chosen=u, marginal=m, cumulative=c) for s, u, m, c in trace.rows()]
        return json.dumps(rows, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["step", "chosen", "marginal", "cumulative"])
    for s, u, m, c in trace.rows():
        w.writerow([s, u, repr(m), repr(c)])
    return buf.getvalue()


def cmd_optimize(args):
    wbar, instance = _load_wbar_and_instance(args)
    n = wbar.shape[0]
    if args.err:
        err = fio.read_err(args.err)
    elif instance is not None:
        err = error_profile_quiet(instance)
    else:
        err = None
    report = {}
    trace = None

    if args.objective == "agg":
        if err is None:
            raise ValidationError("aggregate selection needs --err or --instance")
        plan = select_top_k_agg(wbar, err, args.k, args.phi)
        report["scores"] = influence_scores(wbar, err)
        report["gain_closed"] = gain_agg_closed(wbar, err, plan.S, args.phi)
        if instance is not None:
            report["gain_direct"] = gain_agg_direct(instance, plan)
    elif args.method == "exact":
        if instance is None:
            raise ValidationError("the exact method needs --instance")
        plan, trace = greedy_egal_exact(instance, args.k, args.phi)
    elif args.method == "brute-force":
        if instance is None:
            raise ValidationError("brute force needs --instance")
        plan, opt = brute_force_opt_egal(instance, args.k, args.phi)
        report["opt"] = opt
    elif args.method == "appx-ind":
        if err is None:
            raise ValidationError("appx-ind needs --err or --instance")
        plan, trace = greedy_egal_appx_ind(wbar, err, args.k, args.phi)
        if n >= 2:
            amb = ambiguity_report(wbar, err)
            report["ambiguous"] = [int(x) for x in np.flatnonzero(amb.ambiguous)]
            report["delta_ind"] = amb.delta_proxy
    elif args.method == "appx-group":
        if not args.group:
            raise ValidationError("appx-group needs --group")
        group = fio.read_group(args.group)
        plan, trace = greedy_egal_appx_group(wbar, group, args.k, args.phi)
        if n >= 2:
            amb = w_ambiguity_report(wbar, group)
            report["w_ambiguous"] = [int(x) for x in np.flatnonzero(amb.ambiguous)]
            report["delta_gr"] = amb.delta_proxy
    else:
        raise ValidationError(f"unknown method {args.method!r}")

    if args.objective == "egal" and instance is not None:
        report["gain_egal"] = gain_egal_direct(instance, plan)
        report["acc"] = accuracy(instance, plan)
    plan.reports = report
    if trace is not None and args.trace:
        Path(args.trace).write_text(_trace_text(args, trace))
    _emit_json(args, fio.plan_to_dict(plan))


def cmd_evaluate(args):
    instance = fio.read_instance(args.instance)
    plan = fio.plan_from_dict(json.loads(Path(args.plan).read_text()))
    plan.validate(instance.n)
    _emit_json(args, {
        "S": list(plan.S),
        "phi": plan.phi,
        "gain_agg": gain_agg_direct(instance, plan),
        "gain_egal": gain_egal_direct(instance, plan),
        "faulty_mass": faulty_mass(instance),
        "acc": accuracy(instance, plan),
    })


def _sweep_jobs(args):
    methods = args.methods.split(",")
    for m in methods:
        if m not in METHODS:
            raise ValidationError(f"unknown method {m!r}; choose from {METHODS}")
    seeds = _parse_seeds(args.seeds) if args.seeds else [args.seed]
    if args.instance:
        instance = fio.read_instance(args.instance)
        return [(instance, seed, args.instance) for seed in seeds], methods
    if not args.model:
        raise ValidationError("need --instance or --model")
    jobs = []
    for seed in seeds:
        cfg = ExperimentConfig(model=args.model, n=args.n, seed=seed, steps=args.steps, label_prior=args.label_prior)
        jobs.append((experiment_instance(cfg), seed, args.model))
    return jobs, methods


def cmd_sweep(args):
    jobs, methods = _sweep_jobs(args)

    def run(job):
        instance, seed, tag = job
        k_max = min(args.k_max or default_k(instance.n), instance.n)
        return sweep(instance, methods, k_max, [seed], tag=tag)

    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
        results = [r for batch in pool.map(run, jobs) for r in batch]

    if args.summary:
        k_ref = default_k(jobs[0][0].n)
        Path(args.summary).write_text(json.dumps(summarize(results, k_ref), indent=1) + "\n")
    if args.format == "json":
        rows = [dict(method=r.method, seed=r.seed, k=r.k, gain=r.gain, acc=r.acc,
                     wall_ms=r.wall_ms if args.timing else None)
                for res in results for r in res.rows]
        _emit_json(args, rows)
        return
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "seed", "k", "gain", "acc", "wall_ms"])
    for res in results:
        for r in res.rows:
            w.writerow([r.method, r.seed, r.k, repr(r.gain), repr(r.acc), f"{r.wall_ms:.3f}" if args.timing else ""])
    _emit(args, buf.getvalue())


def cmd_fixture(args):
    instance = adversarial_fixture(args.n, args.variant)
    _write_instance(args, instance)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--threads", type=int, default=1)

    parser = argparse.ArgumentParser(prog="netintervene", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-graph", parents=[common], help="sample a synthetic graph")
    p.add_argument("--model", choices=[m.value for m in GraphModel], required=True)
    p.add_argument("--n", type=int, default=128)
    p.add_argument("--p", type=float, default=0.005)
    p.add_argument("--m", type=int, default=5)
    p.add_argument("--k-ring", type=int, default=5)
    p.add_argument("--p-rewire", type=float, default=0.25)
    p.add_argument("--sparsity", type=float, default=0.95)
    p.add_argument("--sparse", action="store_true", help="write i,j,w triplets")
    p.set_defaults(func=cmd_gen_graph)

    p = sub.add_parser("weights", parents=[common], help="influence matrix from dynamics")
    p.add_argument("--kind", choices=[k.value for k in DynamicsKind], required=True)
    p.add_argument("--W", help="base weight matrix CSV")
    p.add_argument("--factor", action="append", help="factor CSV for the finite product (repeatable)")
    p.add_argument("--alpha", help="stubbornness vector")
    p.add_argument("--steps", type=int, default=3)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=1_000_000)
    p.add_argument("--sparse", action="store_true")
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("gen-instance", parents=[common], help="sample outcomes over an influence matrix")
    p.add_argument("--wbar")
    p.add_argument("--model", choices=[m.value for m in GraphModel])
    p.add_argument("--n", type=int, default=128)
    p.add_argument("--steps", type=int, default=3)
    p.add_argument("--omega-size", type=int, default=3)
    p.add_argument("--p-low", type=float, default=0.3)
    p.add_argument("--p-high", type=float, default=0.9)
    p.add_argument("--label-prior", type=float, default=1.0)
    p.add_argument("--class-balanced", action="store_true")
    p.add_argument("--wbar-out", help="write the matrix to this CSV and reference it by path")
    p.set_defaults(func=cmd_gen_instance)

    p = sub.add_parser("gen-group", parents=[common], help="random Red/Blue/White group structure")
    p.add_argument("--wbar")
    p.add_argument("--n", type=int, default=12)
    p.add_argument("--n-red", type=int, default=2)
    p.add_argument("--n-blue", type=int, default=2)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--err-R", type=float, default=0.3)
    p.add_argument("--err-low", type=float, default=0.1)
    p.add_argument("--err-high", type=float, default=0.7)
    p.add_argument("--label-prior", type=float, default=0.5)
    p.add_argument("--omega-size", type=int, default=64)
    p.add_argument("--instance-out", help="also sample an instance from the model")
    p.set_defaults(func=cmd_gen_group)

    p = sub.add_parser("optimize", parents=[common], help="select k agents")
    p.add_argument("--objective", choices=("agg", "egal"), default="egal")
    p.add_argument("--method", choices=("exact", "brute-force", "appx-ind", "appx-group"), default="exact")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--phi", type=float, default=1.0)
    p.add_argument("--instance")
    p.add_argument("--wbar")
    p.add_argument("--err")
    p.add_argument("--group")
    p.add_argument("--trace", help="write the greedy trace here")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("evaluate", parents=[common], help="score a plan on an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--plan", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", parents=[common], help="accuracy versus k for several methods")
    p.add_argument("--instance")
    p.add_argument("--model", choices=[m.value for m in GraphModel])
    p.add_argument("--n", type=int, default=128)
    p.add_argument("--steps", type=int, default=3)
    p.add_argument("--label-prior", type=float, default=1.0)
    p.add_argument("--seeds", help="e.g. 0-9 or 1,4,7")
    p.add_argument("--methods", default=",".join(METHODS))
    p.add_argument("--k-max", type=int)
    p.add_argument("--summary", help="write the summary JSON here")
    p.add_argument("--timing", action="store_true", help="fill wall_ms (output is then not reproducible)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fixture", parents=[common], help="built-in fixtures")
    p.add_argument("name", choices=("adversarial",))
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--variant", type=int, choices=(1, 2), default=1)
    p.add_argument("--wbar-out")
    p.set_defaults(func=cmd_fixture)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ValidationError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NonConvergent, SingularSystem) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except CombinatorialBlowup as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    return 0


if __name__ == "__main__":
    sys.exit(main())
