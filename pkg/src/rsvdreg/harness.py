"""Benchmark drivers: error tables, rank sweeps, timing runs and bound
verification, with CSV/JSON serialization.

Every record carries the seeds needed to reproduce it exactly.  Cells of a
sweep are independent; when run concurrently the output ordering is still
deterministic (records are sorted by their keys, not completion order).
"""

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import diagnostics, problems, smoothing, solvers
from .diagnostics import default_alpha_grid, error_report, select_alpha
from .linalg import estimate_spectral_norm
from .rsvd import RsvdConfig, rsvd_auto

PENALTIES = {"none": "identity", "d1": "first_difference", "d2": "second_difference"}


def make_penalty(code, m):
    """Penalty operator from its CLI code (none / d1 / d2)."""
    if code not in PENALTIES:
        raise ValueError(f"unknown penalty {code!r}; expected one of {sorted(PENALTIES)}")
    return smoothing.SmoothingOperator(PENALTIES[code], m)


@dataclass(frozen=True)
class RunRecord:
    """One benchmark cell: problem, method parameters, errors and times.

    ``note`` is empty on success and carries the failure diagnostic when a
    solver aborted the cell (the numeric fields are then NaN).
    """

    example: str
    n: int
    delta: float
    penalty: str
    k: int
    p: int
    q: int
    repeat: int
    noise_seed: int
    select_seed: int
    rsvd_seed: int
    alpha_star: float
    noise_norm: float
    e_tilde_xz: float
    e_tilde_ij: float
    e: float
    e_xz: float
    e_ij: float
    t_direct: float
    t_proj: float
    t_range: float
    note: str = ""

    def as_dict(self):
        return asdict(self)


def _table_cell(name, n, delta, penalty, k, p, q, repeat, base_seed,
                k_select, grid_count):
    noise_seed = base_seed + repeat
    select_seed = base_seed + repeat + 555_000
    rsvd_seed = base_seed + repeat + 777_000
    prob = problems.make_problem(name, n, problems.NoiseSpec(delta, noise_seed))
    A, b = prob.A, prob.b
    m = A.shape[1]
    # the selection factorization wants a generous rank; clamp at small sizes
    cfg_sel = RsvdConfig(k=min(k_select, min(A.shape) - p), p=p, q=q,
                         seed=select_seed)
    cfg_k = RsvdConfig(k=k, p=p, q=q, seed=rsvd_seed)

    if penalty == "none":
        approx_sel = rsvd_auto(A, cfg_sel)
        grid = default_alpha_grid(approx_sel.sigma[0], grid_count)
        alpha_star, _ = select_alpha(
            prob, lambda a: solvers.rsvd_tikhonov_range(A, approx_sel, b, a).x, grid
        )
        direct = solvers.tikhonov_solve_direct(A, b, alpha_star)
        t0 = time.perf_counter()
        approx_k = rsvd_auto(A, cfg_k)
        t_factor = time.perf_counter() - t0
        hat = solvers.rsvd_tikhonov_projected(approx_k, b, alpha_star)
        tilde = solvers.rsvd_tikhonov_range(A, approx_k, b, alpha_star)
        t_proj = t_factor + hat.wall_time
        t_range = t_factor + tilde.wall_time
    else:
        L = make_penalty(penalty, m)
        bundle = smoothing.weighted_pinv(A, L)
        B = smoothing.form_B(A, bundle)
        approx_sel = rsvd_auto(B, cfg_sel)
        grid = default_alpha_grid(approx_sel.sigma[0], grid_count)
        alpha_star, _ = select_alpha(
            prob,
            lambda a: solvers.rsvd_gen_tikhonov_range(A, L, approx_sel, b, a, bundle).x,
            grid,
        )
        direct = solvers.gen_tikhonov_direct(A, L, b, alpha_star, bundle)
        t0 = time.perf_counter()
        approx_A = rsvd_auto(A, cfg_k)
        t_factor_A = time.perf_counter() - t0
        hat = solvers.rsvd_gen_tikhonov_projected(approx_A, L, b, alpha_star)
        t0 = time.perf_counter()
        approx_B = rsvd_auto(B, cfg_k)
        t_factor_B = time.perf_counter() - t0
        tilde = solvers.rsvd_gen_tikhonov_range(A, L, approx_B, b, alpha_star, bundle)
        t_proj = t_factor_A + hat.wall_time
        t_range = t_factor_B + tilde.wall_time

    rep = error_report(hat.x, tilde.x, direct.x, prob.x_true)
    return RunRecord(
        example=name, n=n, delta=delta, penalty=penalty, k=k, p=p, q=q,
        repeat=repeat, noise_seed=noise_seed, select_seed=select_seed,
        rsvd_seed=rsvd_seed, alpha_star=alpha_star, noise_norm=prob.noise_norm,
        t_direct=direct.wall_time, t_proj=t_proj, t_range=t_range,
        **rep.as_dict(),
    )


def table_run(names, deltas, penalty="none", n=1000, k=20, p=5, q=0,
              repeats=5, base_seed=0, k_select=100, grid_count=100, workers=1):
    """Error table over (example, noise level) cells, ``repeats`` seeds each.

    The regularization parameter is selected per cell by minimizing the
    reconstruction error of a high-rank (``k_select``) range-preserving
    solve over a logarithmic grid; the reported solutions then use rank
    ``k``.
    """
    cells = [
        (name, delta, rep)
        for name in names
        for delta in deltas
        for rep in range(repeats)
    ]

    def run(cell):
        name, delta, rep = cell
        try:
            return _table_cell(name, n, delta, penalty, k, p, q, rep, base_seed,
                               k_select, grid_count)
        except Exception as exc:  # noqa: BLE001 - a failed cell must not
            # take down the rest of the table; it is reported in its row
            nan = float("nan")
            return RunRecord(
                example=name, n=n, delta=delta, penalty=penalty, k=k, p=p,
                q=q, repeat=rep, noise_seed=base_seed + rep,
                select_seed=base_seed + rep + 555_000,
                rsvd_seed=base_seed + rep + 777_000, alpha_star=nan,
                noise_norm=nan, e_tilde_xz=nan, e_tilde_ij=nan, e=nan,
                e_xz=nan, e_ij=nan, t_direct=nan, t_proj=nan, t_range=nan,
                note=f"{type(exc).__name__}: {exc}",
            )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run, cells))
    else:
        records = [run(c) for c in cells]
    records.sort(key=lambda r: (r.example, r.delta, r.repeat))
    return records


TABLE_COLUMNS = ("example", "delta", "e_tilde_xz", "e_tilde_ij", "e", "e_xz",
                 "e_ij", "note")


def aggregate_table(records):
    """Median over the successful repeats for each (example, delta) cell;
    failed repeats surface in the ``note`` column."""
    keys = sorted({(r.example, r.delta) for r in records})
    rows = []
    for example, delta in keys:
        group = [r for r in records if r.example == example and r.delta == delta]
        good = [r for r in group if not r.note]
        row = {"example": example, "delta": delta}
        for col in TABLE_COLUMNS[2:-1]:
            row[col] = float(np.median([getattr(r, col) for r in good])) \
                if good else float("nan")
        row["note"] = "; ".join(
            f"repeat {r.repeat}: {r.note}" for r in group if r.note)
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# Rank sweeps

ALPHA_POLICIES = {"alpha_star": 1.0, "10x": 10.0, "0.1x": 0.1}


def rank_sweep(name, delta, ks, n=1000, penalty="none", policies=("alpha_star", "10x", "0.1x"),
               repeats=3, base_seed=0, p=5, q=0, k_select=100, grid_count=100,
               workers=1):
    """Reconstruction error of the range-preserving solver as a function of
    the factorization rank, at the selected parameter and scalings of it."""
    for pol in policies:
        if pol not in ALPHA_POLICIES:
            raise ValueError(f"unknown alpha policy {pol!r}")

    def run_rep(rep):
        noise_seed = base_seed + rep
        select_seed = base_seed + rep + 555_000
        prob = problems.make_problem(name, n, problems.NoiseSpec(delta, noise_seed))
        A, b = prob.A, prob.b
        m = A.shape[1]
        if penalty == "none":
            L = bundle = None
            target = A
        else:
            L = make_penalty(penalty, m)
            bundle = smoothing.weighted_pinv(A, L)
            target = smoothing.form_B(A, bundle)
        cfg_sel = RsvdConfig(k=min(k_select, min(target.shape) - p), p=p, q=q,
                             seed=select_seed)
        approx_sel = rsvd_auto(target, cfg_sel)
        if penalty == "none":
            solver_sel = lambda a: solvers.rsvd_tikhonov_range(A, approx_sel, b, a).x
        else:
            solver_sel = lambda a: solvers.rsvd_gen_tikhonov_range(
                A, L, approx_sel, b, a, bundle).x
        grid = default_alpha_grid(approx_sel.sigma[0], grid_count)
        alpha_star, _ = select_alpha(prob, solver_sel, grid)
        rows = []
        for k in ks:
            rsvd_seed = base_seed + rep + 777_000 + 1000 * k
            approx_k = rsvd_auto(target, RsvdConfig(k=k, p=p, q=q, seed=rsvd_seed))
            for pol in policies:
                alpha = alpha_star * ALPHA_POLICIES[pol]
                if penalty == "none":
                    x = solvers.rsvd_tikhonov_range(A, approx_k, b, alpha).x
                else:
                    x = solvers.rsvd_gen_tikhonov_range(
                        A, L, approx_k, b, alpha, bundle).x
                rows.append({
                    "example": name, "n": n, "delta": delta, "penalty": penalty,
                    "k": k, "policy": pol, "alpha": alpha, "repeat": rep,
                    "noise_seed": noise_seed, "rsvd_seed": rsvd_seed,
                    "e_ij": float(np.linalg.norm(x - prob.x_true)),
                })
        return rows

    reps = range(repeats)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(run_rep, reps))
    else:
        chunks = [run_rep(r) for r in reps]
    rows = [row for chunk in chunks for row in chunk]
    rows.sort(key=lambda r: (r["policy"], r["k"], r["repeat"]))
    return rows


def median_curve(rows, policy):
    """Median e_ij over repeats, as (ks, errors) arrays for one policy."""
    ks = sorted({r["k"] for r in rows if r["policy"] == policy})
    med = [
        float(np.median([r["e_ij"] for r in rows
                         if r["policy"] == policy and r["k"] == k]))
        for k in ks
    ]
    return np.array(ks), np.array(med)


def nonincreasing_to_plateau(errors, tol=0.10):
    """True when the curve decreases (within ``tol`` noise) until it enters
    its terminal plateau and stays there."""
    e = np.asarray(errors, dtype=float)
    plateau = float(np.median(e[-3:])) if e.size >= 3 else float(e[-1])
    entered = False
    run_min = math.inf
    for v in e:
        if not entered and v <= (1.0 + tol) * plateau:
            entered = True
        if entered:
            if v > (1.0 + tol) * plateau:
                return False
        else:
            if v > (1.0 + tol) * run_min:
                return False
        run_min = min(run_min, v)
    return True


def dip_rise_plateau(errors, tol=0.10, rise=1.15):
    """True when the curve first decreases, then increases by at least
    ``rise`` relative to its minimum, and finally levels off."""
    e = np.asarray(errors, dtype=float)
    if e.size < 4:
        return False
    jmin = int(np.argmin(e))
    if jmin == 0 or jmin >= e.size - 2:
        return False
    plateau = float(np.median(e[-3:])) if e.size >= 3 else float(e[-1])
    if plateau < rise * e[jmin]:
        return False
    tail = e[-3:]
    return bool(np.all(np.abs(tail - plateau) <= tol * plateau))


def optimal_rank(ks, errors):
    """Rank attaining the smallest error (ties toward the smaller rank)."""
    errors = np.asarray(errors, dtype=float)
    return int(np.asarray(ks)[int(np.argmin(errors))])


# ---------------------------------------------------------------------------
# Timing bench

#: Minimum wall-clock spent per timing cell; sub-millisecond cells get many
#: repetitions so the best-of floor is the arithmetic cost, not jitter.
BENCH_TIME_BUDGET = 0.5
BENCH_MAX_REPEATS = 800


def _best_of(fn, repeats):
    fn()  # warmup: first-touch page faults and BLAS setup stay untimed
    best = math.inf
    spent = 0.0
    done = 0
    while done < repeats or (spent < BENCH_TIME_BUDGET and done < BENCH_MAX_REPEATS):
        t0 = time.perf_counter()
        fn()
        dt = time.perf_counter() - t0
        best = min(best, dt)
        spent += dt
        done += 1
    return best


class _null_context:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


def _single_thread_blas():
    """Pin BLAS to one thread for stable scaling measurements; no-op when
    threadpoolctl is unavailable."""
    try:
        import threadpoolctl

        return threadpoolctl.threadpool_limits(limits=1)
    except ImportError:  # pragma: no cover - measurement degrades gracefully
        return _null_context()


def bench_run(name="deriv2", ns=(250, 500, 1000, 2000), ks=(20,), penalty="none",
              methods=("direct", "projected", "range"), delta=0.01,
              alpha_scale=1e-3, repeats=3, base_seed=0, p=5, q=0):
    """Best-of-``repeats`` wall times per (n, method, k) cell.

    Randomized cells include the factorization time.  The shift is pinned
    to ``alpha_scale`` times the squared top singular value estimate so
    all methods solve the same problem.  Each cell gets one untimed warmup
    call, and BLAS is pinned to a single thread so small and large sizes
    run at comparable arithmetic rates.
    """
    with _single_thread_blas():
        return _bench_cells(name, ns, ks, penalty, methods, delta,
                            alpha_scale, repeats, base_seed, p, q)


def _bench_cells(name, ns, ks, penalty, methods, delta, alpha_scale,
                 repeats, base_seed, p, q):
    rows = []
    for n in ns:
        prob = problems.make_problem(name, n, problems.NoiseSpec(delta, base_seed))
        A, b = prob.A, prob.b
        alpha = alpha_scale * estimate_spectral_norm(A, seed=base_seed) ** 2
        if penalty == "none":
            for k in ks:
                cfg = RsvdConfig(k=k, p=p, q=q, seed=base_seed + 777_000)
                for method in methods:
                    if method == "direct":
                        fn = lambda: solvers.tikhonov_solve_direct(A, b, alpha)
                    elif method == "projected":
                        fn = lambda: solvers.rsvd_tikhonov_projected(
                            rsvd_auto(A, cfg), b, alpha)
                    elif method == "range":
                        fn = lambda: solvers.rsvd_tikhonov_range(
                            A, rsvd_auto(A, cfg), b, alpha)
                    else:
                        raise ValueError(f"unknown bench method {method!r}")
                    rows.append({
                        "example": name, "n": n, "k": k, "method": method,
                        "penalty": penalty, "alpha": alpha,
                        "seconds": _best_of(fn, repeats),
                    })
        else:
            L = make_penalty(penalty, A.shape[1])
            bundle = smoothing.weighted_pinv(A, L)
            B = smoothing.form_B(A, bundle)
            for k in ks:
                cfg = RsvdConfig(k=k, p=p, q=q, seed=base_seed + 777_000)
                for method in methods:
                    if method == "direct":
                        fn = lambda: solvers.gen_tikhonov_direct(A, L, b, alpha, bundle)
                    elif method == "projected":
                        fn = lambda: solvers.rsvd_gen_tikhonov_projected(
                            rsvd_auto(A, cfg), L, b, alpha)
                    elif method == "range":
                        fn = lambda: solvers.rsvd_gen_tikhonov_range(
                            A, L, rsvd_auto(B, cfg), b, alpha, bundle)
                    else:
                        raise ValueError(f"unknown bench method {method!r}")
                    rows.append({
                        "example": name, "n": n, "k": k, "method": method,
                        "penalty": penalty, "alpha": alpha,
                        "seconds": _best_of(fn, repeats),
                    })
    return rows


def loglog_slope(rows, method, k=None):
    """Least-squares slope of log(seconds) against log(n) for one method."""
    pts = [(r["n"], r["seconds"]) for r in rows
           if r["method"] == method and (k is None or r["k"] == k)]
    if len(pts) < 2:
        raise ValueError(f"need at least two dimensions for {method!r}")
    ns = np.log([p[0] for p in pts])
    ts = np.log([p[1] for p in pts])
    return float(np.polyfit(ns, ts, 1)[0])


# ---------------------------------------------------------------------------
# Bound verification

def verify_run(check_ids, seeds=50, n=diagnostics.VERIFY_DEFAULT_N, base_seed=0):
    """Run the seeded verification protocols.

    Returns a report keyed by check id with pass counts among
    hypotheses-met trials (hypotheses-not-met trials are tallied
    separately, never as failures) and the worst relative slack observed.
    """
    report = {}
    for cid in check_ids:
        met = unmet = passed = 0
        worst = -math.inf
        failures = []
        for s in range(seeds):
            for chk in diagnostics.run_bound_trial(cid, base_seed + s, n=n):
                if not chk.hypotheses_met:
                    unmet += 1
                    continue
                met += 1
                slack = (chk.lhs - chk.rhs) / (1.0 + chk.rhs)
                worst = max(worst, slack)
                if chk.passed:
                    passed += 1
                else:
                    failures.append({"seed": chk.seed, "lhs": chk.lhs, "rhs": chk.rhs})
        report[cid] = {
            "trials": seeds,
            "hypotheses_met": met,
            "hypotheses_not_met": unmet,
            "passed": passed,
            "pass_rate": (passed / met) if met else None,
            "worst_slack": worst if met else None,
            "failures": failures,
        }
    return report


# ---------------------------------------------------------------------------
# Serialization

def _fmt(value):
    if isinstance(value, float):
        return f"{value:.5e}"
    return str(value)


def rows_to_csv(rows, columns=None):
    """Render dict rows as RFC-4180 CSV text with 6-significant-digit
    scientific notation for floats."""
    if not rows:
        return ""
    columns = list(columns) if columns else list(rows[0].keys())
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def write_output(text_or_obj, out=None, fmt="csv"):
    """Write CSV text or a JSON-serializable object to ``out`` (or stdout)."""
    if fmt == "json":
        payload = json.dumps(text_or_obj, indent=2, sort_keys=True, default=float)
        payload += "\n"
    else:
        payload = text_or_obj
    if out is None:
        print(payload, end="")
    else:
        with open(out, "w", newline="") as fh:
            fh.write(payload)
