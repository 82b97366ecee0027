"""Command-line entry point.

Subcommands: construct, defect, sweep, metric, chain, converge, oracle.
Reports embed the full config and are byte-identical across runs with
equal configuration.  Exit codes: 0 ok, 2 input error, 3 digit-budget
exhaustion, 4 internal invariant violation.
"""
from __future__ import annotations

import argparse
import math
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import __version__
from .exact import BudgetExceeded, DependentGenerators
from .families import (
    FamilySyntaxError,
    MalformedDefectSet,
    RandomFiniteFamily,
    UnsupportedFamily,
    parse_family,
)
from .indexsets import SetSyntaxError, parse_set, rho
from .mixed import (
    MixedSelection,
    TooLarge,
    WrongSide,
    classify_defect,
    defect_truncated,
    hereditary_scan,
    swap_move,
)
from .reports import (
    decay_csv,
    defect_report_json,
    dump_json,
    exact_value,
    interval_value,
    rational_str,
    report_envelope,
    table_csv,
)
from .topology import (
    ZeroVector,
    convergence_probe,
    intersection_chain,
    metric_ds,
    metric_dw,
    semicontinuity_probe,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_BUDGET = 3
EXIT_INVARIANT = 4

_INPUT_ERRORS = (
    SetSyntaxError,
    FamilySyntaxError,
    MalformedDefectSet,
    UnsupportedFamily,
    WrongSide,
    TooLarge,
    DependentGenerators,
    ZeroVector,
    ValueError,
)


class InvariantViolation(RuntimeError):
    """A certified property that must always hold failed: this is a bug."""


def _default_precision() -> int:
    return int(os.environ.get("DEFECTLAB_PRECISION", "64"))


def _int_list(text: str) -> list:
    return [int(x) for x in text.split(",") if x.strip()]


def _write(path, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _emit(args, command: str, config: dict, results: dict) -> None:
    payload = report_envelope(command, config, results, __version__)
    _write(getattr(args, "out", None), dump_json(payload))


def cmd_construct(args) -> int:
    family = parse_family(args.family)
    n = args.n
    if family.max_index() is not None:
        n = min(n, family.max_index())
    vectors = []
    ok = True
    for k in range(1, n + 1):
        xk = family.vector(k)
        dk = family.dual(k)
        vectors.append({
            "k": k,
            "x": [[i, rational_str(v)] for i, v in xk.entries],
            "x_star": [[i, rational_str(v)] for i, v in dk.entries],
        })
    for j in range(1, n + 1):
        for k in range(1, n + 1):
            expect = Fraction(1 if j == k else 0)
            if family.vector(j).dot(family.dual(k)) != expect:
                ok = False
    results = {
        "ambient": family.ambient(n),
        "index_offset": family.index_offset,
        "biorthogonal": ok,
        "vectors": vectors,
    }
    _emit(args, "construct", {"family": args.family, "n": args.n}, results)
    if not ok:
        raise InvariantViolation("biorthogonality failed for a built-in family")
    return EXIT_OK


def cmd_defect(args) -> int:
    family = parse_family(args.family)
    sigma = parse_set(args.sigma)
    n_list = _int_list(args.n_list) if args.n_list else None
    if n_list is None:
        step = max(args.n // 6, 1)
        n_list = sorted(set(list(range(step, args.n + 1, step)) + [args.n]))
    report = classify_defect(
        family,
        sigma,
        n_list,
        decay_threshold=Fraction(args.threshold),
        min_points=args.min_points,
        probe_window=args.probe_window,
        digit_budget=args.digit_budget,
    )
    config = {
        "family": args.family,
        "sigma": args.sigma,
        "n": args.n,
        "n_list": n_list,
        "threshold": args.threshold,
        "min_points": args.min_points,
        "probe_window": report.probe_window,
        "digit_budget": args.digit_budget,
    }
    _emit(args, "defect", config, defect_report_json(report))
    if args.csv:
        _write(args.csv, decay_csv(report))
    return EXIT_OK


def _sweep_task(payload):
    family_text, sigma_text, n, digit_budget = payload
    family = parse_family(family_text)
    sigma = parse_set(sigma_text)
    sel = MixedSelection(family, sigma, n)
    return defect_truncated(sel, digit_budget=digit_budget)


def cmd_sweep(args) -> int:
    sigmas = [s.strip() for s in args.sigmas.split(";") if s.strip()]
    n_grid = _int_list(args.n_grid)
    tasks = [
        (args.family, sigma_text, n, args.digit_budget)
        for sigma_text in sigmas
        for n in n_grid
    ]
    for family_text, sigma_text, _n, _b in tasks:
        parse_family(family_text)
        parse_set(sigma_text)
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            values = list(pool.map(_sweep_task, tasks))
    else:
        values = [_sweep_task(t) for t in tasks]
    rows = [
        {"sigma": t[1], "n": t[2], "defect_truncated": v}
        for t, v in zip(tasks, values)
    ]
    config = {
        "family": args.family,
        "sigmas": sigmas,
        "n_grid": n_grid,
        "workers": args.workers,
        "digit_budget": args.digit_budget,
    }
    _emit(args, "sweep", config, {"grid": rows})
    if args.csv:
        _write(args.csv, table_csv(
            ["sigma", "n", "defect_truncated"],
            [[r["sigma"], r["n"], r["defect_truncated"]] for r in rows],
        ))
    return EXIT_OK


def cmd_metric(args) -> int:
    family = parse_family(args.family)
    sigma = parse_set(args.sigma)
    tau = parse_set(args.tau)
    ds = metric_ds(family, sigma, tau, args.n, args.terms, args.precision,
                   digit_budget=args.digit_budget)
    dw = metric_dw(family, sigma, tau, args.n, args.terms, args.precision,
                   digit_budget=args.digit_budget)
    results = {
        "rho": exact_value(rho(sigma, tau)),
        "d_s": interval_value(ds),
        "d_w": interval_value(dw),
    }
    config = {
        "family": args.family,
        "sigma": args.sigma,
        "tau": args.tau,
        "n": args.n,
        "K": args.terms,
        "precision": args.precision,
        "digit_budget": args.digit_budget,
    }
    _emit(args, "metric", config, results)
    if dw.lo > ds.hi:
        raise InvariantViolation("certified d_w enclosure exceeds d_s upper bound")
    return EXIT_OK


def cmd_chain(args) -> int:
    family = parse_family(args.family)
    sigma = parse_set(args.sigma)
    dims, equal = intersection_chain(family, sigma, args.depth, args.n,
                                     digit_budget=args.digit_budget)
    config = {
        "family": args.family,
        "sigma": args.sigma,
        "depth": args.depth,
        "n": args.n,
        "digit_budget": args.digit_budget,
    }
    _emit(args, "chain", config, {"dims": dims, "equal_to_h_sigma": equal})
    if any(b > a for a, b in zip(dims, dims[1:])):
        raise InvariantViolation("intersection-chain dimensions increased")
    return EXIT_OK


def cmd_converge(args) -> int:
    family = parse_family(args.family)
    sigma = parse_set(args.sigma)
    rows = convergence_probe(family, sigma, args.m_max, args.n, args.terms,
                             args.precision, digit_budget=args.digit_budget)
    out_rows = [
        {
            "m": row["m"],
            "sigma_m": row["sigma_m"],
            "rho": exact_value(row["rho"]),
            "ds_to_zero": interval_value(row["ds_to_zero"]),
            "pointwise": [interval_value(iv) for iv in row["pointwise"]],
        }
        for row in rows
    ]
    results = {"rows": out_rows}
    violation = False
    if args.semicontinuity:
        semi = semicontinuity_probe(family, sigma, args.m_max, args.n,
                                    args.terms, args.precision,
                                    digit_budget=args.digit_budget)
        results["semicontinuity"] = {
            "limit": interval_value(semi["limit"]),
            "violation": semi["violation"],
        }
        violation = semi["violation"]
    config = {
        "family": args.family,
        "sigma": args.sigma,
        "m_max": args.m_max,
        "n": args.n,
        "K": args.terms,
        "precision": args.precision,
        "semicontinuity": args.semicontinuity,
        "digit_budget": args.digit_budget,
    }
    _emit(args, "converge", config, results)
    if violation:
        raise InvariantViolation("certified lower-semicontinuity violation")
    return EXIT_OK


def _run_swap_suite(instances: int, seed: int) -> dict:
    rng = random.Random(seed)
    violations = 0
    checks = 0
    for i in range(instances):
        dim = rng.randint(2, 8)
        count = rng.randint(1, dim)
        dual = rng.choice(["span", "perturbed"])
        family = RandomFiniteFamily(dim=dim, count=count,
                                    seed=rng.randrange(1 << 30), dual_style=dual)
        from .indexsets import EventuallyPeriodicSet

        members = [k for k in range(1, count + 1) if rng.random() < 0.5]
        sigma = EventuallyPeriodicSet.finite(members)
        base = defect_truncated(MixedSelection(family, sigma, count))
        for k0 in range(1, count + 1):
            direction = "out" if sigma.contains(k0) else "in"
            moved = swap_move(sigma, k0, direction)
            checks += 1
            if defect_truncated(MixedSelection(family, moved, count)) != base:
                violations += 1
        for _chain in range(4):
            cur = sigma
            for _step in range(rng.randint(1, 3)):
                k0 = rng.randint(1, count)
                direction = "out" if cur.contains(k0) else "in"
                cur = swap_move(cur, k0, direction)
            checks += 1
            if defect_truncated(MixedSelection(family, cur, count)) != base:
                violations += 1
    return {"instances": instances, "checks": checks, "violations": violations}


def _run_hereditary_suite(instances: int, seed: int) -> dict:
    rng = random.Random(seed)
    violations = 0
    for i in range(instances):
        dim = rng.randint(1, 6)
        family = RandomFiniteFamily(dim=dim, count=dim,
                                    seed=rng.randrange(1 << 30), dual_style="span")
        if hereditary_scan(family) != 0:
            violations += 1
    return {"instances": instances, "violations": violations}


def cmd_oracle(args) -> int:
    results = {}
    if args.suite in ("swap", "all"):
        results["swap"] = _run_swap_suite(args.instances, args.seed)
    if args.suite in ("hereditary", "all"):
        results["hereditary"] = _run_hereditary_suite(
            min(args.instances, 100), args.seed
        )
    config = {"suite": args.suite, "instances": args.instances, "seed": args.seed}
    _emit(args, "oracle", config, results)
    if any(r["violations"] for r in results.values()):
        raise InvariantViolation("oracle suite found a violated invariant")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="defectlab",
        description="Exact-arithmetic experiments on mixed vector systems.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=None, help="JSON report path (default stdout)")
        p.add_argument("--digit-budget", type=int, default=None,
                       help="abort if any rational exceeds this many digits")

    p = sub.add_parser("construct", help="dump family vectors and check biorthogonality")
    p.add_argument("--family", required=True)
    p.add_argument("--n", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("defect", help="two-sided defect certification")
    p.add_argument("--family", required=True)
    p.add_argument("--sigma", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--n-list", default=None, help="comma-separated truncations")
    p.add_argument("--threshold", default="1/100", help="decay threshold (rational)")
    p.add_argument("--min-points", type=int, default=4)
    p.add_argument("--probe-window", type=int, default=None)
    p.add_argument("--csv", default=None, help="decay-table CSV path")
    common(p)
    p.set_defaults(func=cmd_defect)

    p = sub.add_parser("sweep", help="truncated defect over a sigma x n grid")
    p.add_argument("--family", required=True)
    p.add_argument("--sigmas", required=True, help="semicolon-separated expressions")
    p.add_argument("--n-grid", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--csv", default=None)
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("metric", help="certified d_s / d_w enclosures")
    p.add_argument("--family", required=True)
    p.add_argument("--sigma", required=True)
    p.add_argument("--tau", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--terms", type=int, default=10, help="series cut K")
    p.add_argument("--precision", type=int, default=_default_precision())
    common(p)
    p.set_defaults(func=cmd_metric)

    p = sub.add_parser("chain", help="iterated intersection of H_{sigma_m}")
    p.add_argument("--family", required=True)
    p.add_argument("--sigma", required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("converge", help="projector convergence / semicontinuity probes")
    p.add_argument("--family", required=True)
    p.add_argument("--sigma", required=True)
    p.add_argument("--m-max", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--terms", type=int, default=10)
    p.add_argument("--precision", type=int, default=_default_precision())
    p.add_argument("--semicontinuity", action="store_true")
    common(p)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("oracle", help="swap-invariance and hereditary scan suites")
    p.add_argument("--suite", choices=["swap", "hereditary", "all"], default="all")
    p.add_argument("--instances", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_oracle)

    return parser


def _error_json(kind: str, message: str) -> str:
    return dump_json({"error": {"kind": kind, "message": message}})


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on bad flags, matching our input-error code
        return int(exc.code or 0)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        sys.stderr.write(_error_json("budget", str(exc)))
        return EXIT_BUDGET
    except InvariantViolation as exc:
        sys.stderr.write(_error_json("invariant", str(exc)))
        return EXIT_INVARIANT
    except _INPUT_ERRORS as exc:
        sys.stderr.write(_error_json("input", str(exc)))
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
