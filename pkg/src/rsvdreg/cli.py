"""Command-line front end.

Subcommands: ``gen`` (write a problem directory), ``solve`` (run one
solver), ``table`` (error tables over examples and noise levels),
``sweep-alpha`` (parameter sweep curve), ``sweep-rank`` (error vs rank),
``bench`` (wall-clock scaling) and ``verify`` (bound verification).

Exit code is 0 when every requested row was produced; otherwise a
machine-readable JSON error is printed to stderr and the exit code is
nonzero.
"""

import argparse
import json
import sys
import warnings

import numpy as np

from . import diagnostics, harness, mmio, problems, smoothing, solvers
from .diagnostics import default_alpha_grid, select_alpha
from .linalg import RankDeficiencyWarning, svd_full
from .rsvd import RsvdConfig, rsvd_auto

VERIFY_NAMES = {
    "weyl": "weyl",
    "pinv-perturb": "pinv_perturbation",
    "rsvd-prob": "rsvd_capture",
    "trsvd": "trsvd",
    "tsvd-rel": "tsvd_rel",
    "tikh": "tikh",
    "gtikh": "gtikh",
    "est-product": "est_product",
    "est-trsvd": "est_trsvd",
    "resolvent": "resolvent",
}


def _int_list(text):
    return [int(v) for v in text.split(",") if v]


def _float_list(text):
    return [float(v) for v in text.split(",") if v]


def _problem_list(text):
    if text == "all":
        return list(problems.PROBLEM_NAMES)
    return [v for v in text.split(",") if v]


def _add_common(sub):
    sub.add_argument("--out", default=None, help="output path (default: stdout)")
    sub.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rsvdreg",
        description="Randomized-SVD regularization benchmark harness",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("gen", help="generate a problem directory")
    s.add_argument("--problem", required=True, choices=problems.PROBLEM_NAMES)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--delta", type=float, default=0.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True, help="output directory")

    s = subs.add_parser("solve", help="run one solver on one problem")
    s.add_argument("--problem", required=True, choices=problems.PROBLEM_NAMES)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--delta", type=float, default=0.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--method", required=True, choices=solvers.METHODS)
    s.add_argument("--k", type=int, default=20)
    s.add_argument("--p", type=int, default=5)
    s.add_argument("--q", type=int, default=0)
    s.add_argument("--alpha", type=float, default=None)
    s.add_argument("--alpha-grid", default=None, metavar="LO,HI,COUNT",
                   help="select alpha by error minimization over a log grid")
    s.add_argument("--penalty", choices=sorted(harness.PENALTIES), default="none")
    _add_common(s)

    s = subs.add_parser("table", help="error table over examples and noise levels")
    s.add_argument("--problems", default="all",
                   help="comma-separated names or 'all'")
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--deltas", default="0.01,0.05")
    s.add_argument("--penalty", choices=sorted(harness.PENALTIES), default="none")
    s.add_argument("--k", type=int, default=20)
    s.add_argument("--p", type=int, default=5)
    s.add_argument("--q", type=int, default=0)
    s.add_argument("--repeats", type=int, default=5)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--detail", action="store_true",
                   help="emit per-seed records instead of medians")
    _add_common(s)

    s = subs.add_parser("sweep-alpha", help="error curve over the alpha grid")
    s.add_argument("--problem", required=True, choices=problems.PROBLEM_NAMES)
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--delta", type=float, default=0.01)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--k", type=int, default=100)
    s.add_argument("--p", type=int, default=5)
    s.add_argument("--q", type=int, default=0)
    s.add_argument("--alpha-grid", default=None, metavar="LO,HI,COUNT")
    s.add_argument("--penalty", choices=sorted(harness.PENALTIES), default="none")
    _add_common(s)

    s = subs.add_parser("sweep-rank", help="error vs factorization rank")
    s.add_argument("--problem", required=True, choices=problems.PROBLEM_NAMES)
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--delta", type=float, default=0.01)
    s.add_argument("--ks", default="2,4,6,8,10,14,18,22,26,30,40,50,60")
    s.add_argument("--policies", default="alpha_star,10x,0.1x")
    s.add_argument("--penalty", choices=sorted(harness.PENALTIES), default="none")
    s.add_argument("--repeats", type=int, default=3)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--p", type=int, default=5)
    s.add_argument("--q", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    _add_common(s)

    s = subs.add_parser("bench", help="wall-clock scaling of the solvers")
    s.add_argument("--problem", default="deriv2", choices=problems.PROBLEM_NAMES)
    s.add_argument("--ns", default="250,500,1000,2000")
    s.add_argument("--ks", default="20")
    s.add_argument("--methods", default="direct,projected,range")
    s.add_argument("--penalty", choices=sorted(harness.PENALTIES), default="none")
    s.add_argument("--delta", type=float, default=0.01)
    s.add_argument("--repeats", type=int, default=3)
    s.add_argument("--seed", type=int, default=0)
    _add_common(s)

    s = subs.add_parser("verify", help="verify the error bounds over seeds")
    s.add_argument("--theorem", default="all",
                   help=f"comma list from {{{','.join(sorted(VERIFY_NAMES))}}} or 'all'")
    s.add_argument("--seeds", type=int, default=50)
    s.add_argument("--n", type=int, default=diagnostics.VERIFY_DEFAULT_N)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default=None)
    s.add_argument("--format", choices=("csv", "json"), default="json")
    return parser


def cmd_gen(args):
    prob = problems.make_problem(
        args.problem, args.n, problems.NoiseSpec(args.delta, args.seed)
    )
    files = mmio.save_problem(prob, args.out)
    print("\n".join(files))
    return 0


def _solve_one(args):
    prob = problems.make_problem(
        args.problem, args.n, problems.NoiseSpec(args.delta, args.seed)
    )
    A, b = prob.A, prob.b
    cfg = RsvdConfig(k=args.k, p=args.p, q=args.q, seed=args.seed + 777_000)
    method = args.method
    L = harness.make_penalty(args.penalty, A.shape[1])
    bundle = None
    if method.startswith("gtikh"):
        bundle = smoothing.weighted_pinv(A, L)

    def needs_alpha():
        return method not in ("tsvd", "trsvd_proj", "trsvd_range")

    alpha = args.alpha
    if needs_alpha() and alpha is None:
        sel_cfg = RsvdConfig(k=min(100, A.shape[1] - args.p), p=args.p, q=args.q,
                             seed=args.seed + 555_000)
        if method.startswith("gtikh"):
            B = smoothing.form_B(A, bundle)
            approx_sel = rsvd_auto(B, sel_cfg)
            solver = lambda a: solvers.rsvd_gen_tikhonov_range(
                A, L, approx_sel, b, a, bundle).x
        else:
            approx_sel = rsvd_auto(A, sel_cfg)
            solver = lambda a: solvers.rsvd_tikhonov_range(A, approx_sel, b, a).x
        if args.alpha_grid:
            lo, hi, count = args.alpha_grid.split(",")
            grid = (float(lo), float(hi), int(count))
        else:
            grid = default_alpha_grid(approx_sel.sigma[0])
        alpha, _ = select_alpha(prob, solver, grid)

    if method == "tsvd":
        result = solvers.tsvd_solve(svd_full(A), args.k, b)
    elif method == "trsvd_proj":
        result = solvers.trsvd_solve_projected(rsvd_auto(A, cfg), b)
    elif method == "trsvd_range":
        result = solvers.trsvd_solve_range(A, rsvd_auto(A, cfg), b)
    elif method == "tikh_direct":
        result = solvers.tikhonov_solve_direct(A, b, alpha)
    elif method == "tikh_proj":
        result = solvers.rsvd_tikhonov_projected(rsvd_auto(A, cfg), b, alpha)
    elif method == "tikh_range":
        result = solvers.rsvd_tikhonov_range(A, rsvd_auto(A, cfg), b, alpha)
    elif method == "gtikh_direct":
        result = solvers.gen_tikhonov_direct(A, L, b, alpha, bundle)
    elif method == "gtikh_proj":
        result = solvers.rsvd_gen_tikhonov_projected(rsvd_auto(A, cfg), L, b, alpha)
    elif method == "gtikh_range":
        B = smoothing.form_B(A, bundle)
        result = solvers.rsvd_gen_tikhonov_range(A, L, rsvd_auto(B, cfg), b,
                                                 alpha, bundle)
    else:
        raise ValueError(f"unknown method {method!r}")
    row = {
        "example": args.problem, "n": args.n, "delta": args.delta,
        "seed": args.seed, "method": method, "penalty": args.penalty,
        "k": result.k if result.k is not None else "",
        "alpha": result.alpha if result.alpha is not None else "",
        "noise_norm": prob.noise_norm,
        "error": float(np.linalg.norm(result.x - prob.x_true)),
        "residual": float(np.linalg.norm(A @ result.x - b)),
        "wall_time_seconds": result.wall_time,
    }
    return row


def cmd_solve(args):
    row = _solve_one(args)
    if args.format == "json":
        harness.write_output(row, args.out, "json")
    else:
        harness.write_output(harness.rows_to_csv([row]), args.out, "csv")
    return 0


def cmd_table(args):
    names = _problem_list(args.problems)
    deltas = _float_list(args.deltas)
    records = harness.table_run(
        names, deltas, penalty=args.penalty, n=args.n, k=args.k, p=args.p,
        q=args.q, repeats=args.repeats, base_seed=args.seed, workers=args.workers,
    )
    if args.detail:
        rows = [r.as_dict() for r in records]
    else:
        rows = harness.aggregate_table(records)
    if args.format == "json":
        harness.write_output(rows, args.out, "json")
    else:
        cols = None if args.detail else harness.TABLE_COLUMNS
        harness.write_output(harness.rows_to_csv(rows, cols), args.out, "csv")
    return 1 if any(r.note for r in records) else 0


def cmd_sweep_alpha(args):
    prob = problems.make_problem(
        args.problem, args.n, problems.NoiseSpec(args.delta, args.seed)
    )
    A, b = prob.A, prob.b
    cfg = RsvdConfig(k=args.k, p=args.p, q=args.q, seed=args.seed + 555_000)
    if args.penalty == "none":
        approx = rsvd_auto(A, cfg)
        solver = lambda a: solvers.rsvd_tikhonov_range(A, approx, b, a).x
    else:
        L = harness.make_penalty(args.penalty, A.shape[1])
        bundle = smoothing.weighted_pinv(A, L)
        approx = rsvd_auto(smoothing.form_B(A, bundle), cfg)
        solver = lambda a: solvers.rsvd_gen_tikhonov_range(A, L, approx, b, a, bundle).x
    if args.alpha_grid:
        lo, hi, count = args.alpha_grid.split(",")
        grid = (float(lo), float(hi), int(count))
    else:
        grid = default_alpha_grid(approx.sigma[0])
    alpha_star, curve = select_alpha(prob, solver, grid)
    rows = [
        {"alpha": float(a), "error": float(e),
         "is_alpha_star": int(a == alpha_star),
         "excluded": int(j in curve.excluded)}
        for j, (a, e) in enumerate(zip(curve.alphas, curve.errors))
    ]
    if args.format == "json":
        harness.write_output({"alpha_star": alpha_star, "curve": rows}, args.out, "json")
    else:
        harness.write_output(harness.rows_to_csv(rows), args.out, "csv")
    return 0


def cmd_sweep_rank(args):
    policies = tuple(args.policies.split(","))
    rows = harness.rank_sweep(
        args.problem, args.delta, _int_list(args.ks), n=args.n,
        penalty=args.penalty, policies=policies,
        repeats=args.repeats, base_seed=args.seed, p=args.p, q=args.q,
        workers=args.workers,
    )
    patterns = {}
    for pol in policies:
        ks, errs = harness.median_curve(rows, pol)
        patterns[pol] = {
            "nonincreasing_to_plateau": harness.nonincreasing_to_plateau(errs),
            "dip_rise_plateau": harness.dip_rise_plateau(errs),
            "optimal_k": harness.optimal_rank(ks, errs),
        }
    if args.format == "json":
        harness.write_output({"rows": rows, "patterns": patterns}, args.out, "json")
    else:
        for pol, pat in sorted(patterns.items()):
            print(f"# {pol}: nonincreasing_to_plateau="
                  f"{pat['nonincreasing_to_plateau']} "
                  f"dip_rise_plateau={pat['dip_rise_plateau']} "
                  f"optimal_k={pat['optimal_k']}", file=sys.stderr)
        harness.write_output(harness.rows_to_csv(rows), args.out, "csv")
    return 0


def cmd_bench(args):
    rows = harness.bench_run(
        name=args.problem, ns=_int_list(args.ns), ks=_int_list(args.ks),
        penalty=args.penalty, methods=tuple(args.methods.split(",")),
        delta=args.delta, repeats=args.repeats, base_seed=args.seed,
    )
    slopes = {
        method: harness.loglog_slope(rows, method)
        for method in args.methods.split(",")
    }
    if args.format == "json":
        harness.write_output({"rows": rows, "slopes": slopes}, args.out, "json")
    else:
        for method, slope in sorted(slopes.items()):
            print(f"# loglog slope {method}: {slope:.3f}", file=sys.stderr)
        harness.write_output(harness.rows_to_csv(rows), args.out, "csv")
    return 0


def cmd_verify(args):
    if args.theorem == "all":
        ids = list(VERIFY_NAMES.values())
    else:
        ids = []
        for name in args.theorem.split(","):
            if name not in VERIFY_NAMES:
                raise ValueError(
                    f"unknown theorem name {name!r}; valid: {sorted(VERIFY_NAMES)}"
                )
            ids.append(VERIFY_NAMES[name])
    report = harness.verify_run(ids, seeds=args.seeds, n=args.n,
                                base_seed=args.seed)
    harness.write_output(report, args.out, "json")
    failures = [cid for cid, r in report.items()
                if r["hypotheses_met"] and r["passed"] < r["hypotheses_met"]]
    return 1 if failures else 0


COMMANDS = {
    "gen": cmd_gen,
    "solve": cmd_solve,
    "table": cmd_table,
    "sweep-alpha": cmd_sweep_alpha,
    "sweep-rank": cmd_sweep_rank,
    "bench": cmd_bench,
    "verify": cmd_verify,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    # severely ill-posed problems legitimately exhaust the probe rank; say so
    # once instead of once per cell
    warnings.filterwarnings("once", category=RankDeficiencyWarning)
    try:
        return COMMANDS[args.command](args)
    except Exception as exc:  # noqa: BLE001 - uniform machine-readable failure
        print(
            json.dumps({"error": str(exc), "type": type(exc).__name__}),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
