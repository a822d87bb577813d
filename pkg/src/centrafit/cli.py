"""Command-line surface tying ingestion, fitting, sweeping, batch
processing, and figure-data export together.

Exit codes: 0 success, 1 input or configuration error, 2 computational
failure (no maximum found, non-convergence).  All numeric output is
written with round-trip precision so repeated runs are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import data
from .centrality import CentralityQuery, Kind, log_centrality_grid
from .errors import (
    AllFitsFailed,
    DegenerateSample,
    EmptyHistogram,
    FitError,
    ImageTooSmall,
    MissingDensities,
    NoConvergence,
    NotACriticalPoint,
    NotAMaximum,
    PointOutsideSupport,
)
from .estimate import (
    Classification,
    SolverConfig,
    find_critical_points,
    suggest_theta_bracket,
)
from .models import get_model
from .residuals import (
    abs_error_power_moments,
    default_alpha_grid,
    holder_residual_pdf,
    lehmer_residual_pdf,
    sweep_alpha,
)

_COMPUTE_ERRORS = (
    NoConvergence,
    AllFitsFailed,
    DegenerateSample,
    NotACriticalPoint,
    NotAMaximum,
)
_INPUT_ERRORS = (
    OSError,
    ValueError,
    EmptyHistogram,
    ImageTooSmall,
    MissingDensities,
    PointOutsideSupport,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; route that through the
    # input-error path instead so 2 stays reserved for computational failures
    def error(self, message):
        raise _UsageError(message)


def _fmt(x) -> str:
    return repr(float(x))


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _write_json(path, payload):
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _solver_config(args) -> SolverConfig:
    if (args.theta_min is None) != (args.theta_max is None):
        raise ValueError("pass both --theta-min and --theta-max or neither")
    bracket = None
    if args.theta_min is not None:
        bracket = (args.theta_min, args.theta_max)
    return SolverConfig(tol=args.tol, max_iter=args.max_iter, theta_bracket=bracket)


def _load_sample(path):
    return data.histogram_to_sample(data.read_histogram_csv(path))


def cmd_fit(args) -> int:
    sample = _load_sample(args.input)
    model = get_model(args.model)
    query = CentralityQuery(kind=Kind(args.kind), alpha=args.alpha, epsilon=args.epsilon)
    points = find_critical_points(sample, model, query, _solver_config(args))
    if args.format == "json":
        _write_json(args.out, [p.to_json_dict() for p in points])
    else:
        header = [
            "kind",
            "alpha",
            "theta_star",
            "classification",
            "second_derivative",
            "observed_fisher",
            "solver",
            "iterations",
        ]
        rows = [
            [
                p.kind.value,
                _fmt(p.alpha),
                _fmt(p.theta_star),
                p.classification.value,
                _fmt(p.second_derivative),
                _fmt(p.observed_fisher),
                p.solver.value,
                str(p.iterations),
            ]
            for p in points
        ]
        _write_csv(args.out, header, rows)
    if any(p.classification is Classification.MAXIMUM for p in points):
        return 0
    print("no maximum found", file=sys.stderr)
    return 2


def _run_sweep(args, sample):
    model = get_model(args.model)
    grid = default_alpha_grid(args.alpha_min, args.alpha_max, args.alpha_steps)
    return sweep_alpha(
        sample,
        model,
        grid,
        Kind(args.kind),
        beta=args.beta,
        config=_solver_config(args),
        model_name=args.model,
        epsilon=args.epsilon,
    )


def _entry_rows(report):
    rows = []
    for e in report.entries:
        rows.append(
            [
                _fmt(e.alpha),
                "" if e.theta_star is None else _fmt(e.theta_star),
                e.classification or "",
                "" if e.residual is None else _fmt(e.residual),
                "" if e.observed_fisher is None else _fmt(e.observed_fisher),
                e.status,
            ]
        )
    return rows


def cmd_sweep(args) -> int:
    sample = _load_sample(args.input)
    report = _run_sweep(args, sample)
    if args.format == "json":
        _write_json(args.out, report.to_json_dict())
    else:
        header = ["alpha", "theta", "classification", "residual", "observed_fisher", "status"]
        _write_csv(args.out, header, _entry_rows(report))
    return 0


def _alpha_text_histogram(alphas, lo, hi, bins=20):
    counts, edges = np.histogram(np.asarray(alphas, dtype=float), bins=bins, range=(lo, hi))
    peak = max(int(counts.max()), 1)
    lines = ["selected alpha histogram"]
    for left, right, count in zip(edges[:-1], edges[1:], counts):
        bar = "#" * round(40 * int(count) / peak)
        lines.append(f"[{left:+.3f}, {right:+.3f})  {int(count):4d}  {bar}")
    return "\n".join(lines) + "\n"


def cmd_batch(args) -> int:
    in_dir = Path(args.input)
    files = sorted(in_dir.glob("*.csv"))
    if not files:
        raise ValueError(f"no .csv histograms under {in_dir}")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    selected_alphas = []
    best_residuals = []
    failures = []
    for path in files:
        try:
            sample = _load_sample(path)
            report = _run_sweep(args, sample)
        except (FitError, ValueError, OSError) as exc:
            failures.append((path.name, str(exc)))
            rows.append([path.name, "", "", ""])
            continue
        _write_json(out_dir / f"{path.stem}.report.json", report.to_json_dict())
        best = report.best_entry
        rows.append(
            [path.name, _fmt(best.alpha), _fmt(best.theta_star), _fmt(best.residual)]
        )
        selected_alphas.append(best.alpha)
        best_residuals.append(best.residual)

    _write_csv(
        out_dir / "aggregate.csv",
        ["file", "best_alpha", "best_theta", "best_residual"],
        rows,
    )
    (out_dir / "alpha_hist.txt").write_text(
        _alpha_text_histogram(selected_alphas, args.alpha_min, args.alpha_max),
        encoding="utf-8",
    )
    if best_residuals:
        print(f"mean best residual: {_fmt(float(np.mean(best_residuals)))}")
    if failures:
        for name, reason in failures:
            print(f"failed: {name}: {reason}", file=sys.stderr)
        return 2
    return 0


def cmd_surface(args) -> int:
    sample = _load_sample(args.input)
    model = get_model(args.model)
    kind = Kind(args.kind)
    alphas = np.linspace(args.alpha_min, args.alpha_max, args.alpha_steps)
    if args.theta_min is None and args.theta_max is None:
        lo, hi = suggest_theta_bracket(sample, model)
    elif args.theta_min is not None and args.theta_max is not None:
        lo, hi = args.theta_min, args.theta_max
    else:
        raise ValueError("pass both --theta-min and --theta-max or neither")
    thetas = np.geomspace(lo, hi, args.theta_steps)

    rows = []
    for alpha in alphas:
        query = CentralityQuery(kind=kind, alpha=float(alpha), epsilon=args.epsilon)
        values = log_centrality_grid(sample, model, thetas, query)
        rows.extend(
            [_fmt(alpha), _fmt(theta), _fmt(value)]
            for theta, value in zip(thetas, values)
        )
    out = Path(args.out)
    _write_csv(out, ["alpha", "theta", "log_centrality"], rows)

    config = SolverConfig(tol=args.tol, max_iter=args.max_iter, theta_bracket=(lo, hi))
    overlay = []
    for alpha in alphas:
        query = CentralityQuery(kind=kind, alpha=float(alpha), epsilon=args.epsilon)
        for point in find_critical_points(sample, model, query, config):
            overlay.append(
                [_fmt(alpha), _fmt(point.theta_star), point.classification.value]
            )
    overlay_path = out.parent / (out.stem + ".critical" + out.suffix)
    _write_csv(overlay_path, ["alpha", "theta", "classification"], overlay)
    return 0


def cmd_synth(args) -> int:
    hist = data.synth_exponential(
        theta=args.theta,
        n=args.n,
        contamination=args.contamination,
        outlier_scale=args.outlier_scale,
        seed=args.seed,
        bins=args.bins,
    )
    data.write_histogram_csv(args.out, hist)
    return 0


def cmd_dct_hist(args) -> int:
    image = data.read_pgm(args.input)
    hist = data.dct_abs_histogram(
        image, block=args.block, bins=args.bins, exclude_dc=args.exclude_dc
    )
    data.write_histogram_csv(args.out, hist)
    return 0


def cmd_resid_dist(args) -> int:
    kind = Kind(args.kind)
    if kind is Kind.HOLDER:
        if args.mean_y is not None and args.var_y is not None:
            mean_y, var_y = args.mean_y, args.var_y
        elif args.sigma is not None:
            mean_y, var_y = abs_error_power_moments(args.sigma, args.beta)
        else:
            raise ValueError("provide --sigma or both --mean-y and --var-y")
        loc = args.n * mean_y
        spread = (args.n * var_y) ** 0.5
        z_max = args.z_max or (loc + 8.0 * spread) ** (1.0 / args.beta)
        z = np.linspace(0.0, z_max, args.z_steps)
        f = holder_residual_pdf(z, args.beta, args.n, mean_y, var_y)
    else:
        params = (args.mu_num, args.mu_den, args.sigma_num, args.sigma_den)
        if any(p is None for p in params):
            raise ValueError(
                "provide --mu-num, --mu-den, --sigma-num and --sigma-den"
            )
        mu = args.mu_num / args.mu_den
        rel = args.sigma_num / abs(args.mu_num) + args.sigma_den / abs(args.mu_den)
        z_max = args.z_max or max(mu * (1.0 + 10.0 * rel), 2.0 * abs(mu))
        z = np.linspace(0.0, z_max, args.z_steps)
        f = lehmer_residual_pdf(z, *params)
    _write_csv(
        args.out, ["z", "density"], [[_fmt(a), _fmt(b)] for a, b in zip(z, f)]
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="centrafit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, *, model=False, solver=False, alpha_grid=False, beta=False):
        p.add_argument("--out", required=True, help="output path")
        if model:
            p.add_argument("--model", default="exponential")
            p.add_argument("--kind", choices=["holder", "lehmer"], default="holder")
            p.add_argument("--epsilon", type=float, default=1.0)
            p.add_argument("--format", choices=["json", "csv"], default="json")
        if solver:
            p.add_argument("--tol", type=float, default=1e-10)
            p.add_argument("--max-iter", type=int, default=500)
            p.add_argument("--theta-min", type=float, default=None)
            p.add_argument("--theta-max", type=float, default=None)
        if alpha_grid:
            p.add_argument("--alpha-min", type=float, default=-2.0)
            p.add_argument("--alpha-max", type=float, default=2.0)
            p.add_argument("--alpha-steps", type=int, default=81)
        if beta:
            p.add_argument("--beta", type=float, default=2.0)

    p = sub.add_parser("fit", help="critical points of one centrality")
    p.add_argument("input", help="histogram CSV")
    p.add_argument("--alpha", type=float, default=0.0)
    add_common(p, model=True, solver=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sweep", help="alpha sweep with residual selection")
    p.add_argument("input", help="histogram CSV")
    add_common(p, model=True, solver=True, alpha_grid=True, beta=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("batch", help="sweep every histogram in a directory")
    p.add_argument("input", help="directory of histogram CSVs")
    add_common(p, model=True, solver=True, alpha_grid=True, beta=True)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("surface", help="log centrality over an (alpha, theta) grid")
    p.add_argument("input", help="histogram CSV")
    p.add_argument("--theta-steps", type=int, default=128)
    add_common(p, model=True, solver=True, alpha_grid=True)
    p.set_defaults(func=cmd_surface)

    p = sub.add_parser("synth", help="synthetic contaminated exponential histogram")
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--contamination", type=float, default=0.0)
    p.add_argument("--outlier-scale", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bins", type=int, default=64)
    add_common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("dct-hist", help="abs DCT coefficient histogram of a PGM image")
    p.add_argument("input", help="binary PGM (P5) image")
    p.add_argument("--block", type=int, default=8)
    p.add_argument("--bins", type=int, default=64)
    p.add_argument(
        "--exclude-dc",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="drop each block's DC coefficient (default: yes)",
    )
    add_common(p)
    p.set_defaults(func=cmd_dct_hist)

    p = sub.add_parser("resid-dist", help="residual-statistic density curve")
    p.add_argument("--kind", choices=["holder", "lehmer"], default="holder")
    p.add_argument("--beta", type=float, default=2.0)
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--mean-y", type=float, default=None)
    p.add_argument("--var-y", type=float, default=None)
    p.add_argument("--mu-num", type=float, default=None)
    p.add_argument("--mu-den", type=float, default=None)
    p.add_argument("--sigma-num", type=float, default=None)
    p.add_argument("--sigma-den", type=float, default=None)
    p.add_argument("--z-max", type=float, default=None)
    p.add_argument("--z-steps", type=int, default=512)
    add_common(p)
    p.set_defaults(func=cmd_resid_dist)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except _COMPUTE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
