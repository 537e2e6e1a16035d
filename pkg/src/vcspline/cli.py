"""Command-line front end.

Subcommands: ``simulate`` (benchmark data generators), ``fit`` (one-step or
two-step spline fit), ``select`` (sparse predictor selection), ``bench``
(replication studies) and ``lagscan`` (response-shift analysis). Report
paths write delimited output plus a rendered PNG figure alongside, and every
command with a fixed seed is byte-reproducible.

Exit codes: 0 on success, 1 on usage errors, 2 on data errors.
"""

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from . import bench as bench_mod
from . import figures
from .bench import rows_to_csv, run_table1, run_table2
from .model import eval_coefficients, fit_one_step, fit_to_json, fit_two_step
from .panel import (
    correlation_report,
    ingest_csv,
    lag_scan,
    preprocess,
    write_panel_csv,
)
from .select import select_variables
from .simulate import simulate_lagged_panel, simulate_tang, simulate_wei

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    """argparse variant that exits 1 (not 2) on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# atomic output helpers
# ---------------------------------------------------------------------------

def _replace_into(path, write_fn):
    """Write via a sibling temp file and rename, so outputs appear atomically."""
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    os.close(fd)
    try:
        write_fn(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_text(path, text: str) -> None:
    def go(tmp):
        with open(tmp, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)

    _replace_into(path, go)


def _sibling_png(path) -> str:
    base, _ = os.path.splitext(path)
    return base + ".png"


# ---------------------------------------------------------------------------
# shared option groups
# ---------------------------------------------------------------------------

def _add_config_option(p):
    p.add_argument(
        "--config",
        help="flat key=value file of defaults; command-line flags override it",
    )


def _add_fit_options(p):
    g = p.add_argument_group("fitting")
    g.add_argument("--degree", type=int, default=3, choices=[0, 1, 2, 3])
    g.add_argument("--alpha", type=float, default=0.5, help="min segment exponent")
    g.add_argument("--lambda0-min", type=float, default=0.01)
    g.add_argument("--lambda0-max", type=float, default=100.0)
    g.add_argument("--lambda0-points", type=int, default=25)
    g.add_argument(
        "--knot-grid",
        choices=["auto", "full", "sqrt"],
        default="auto",
        help="candidate split positions: every position, the sqrt-quantile grid, "
        "or automatic (sqrt grid for n > 2000)",
    )


def _add_data_options(p):
    g = p.add_argument_group("input data")
    g.add_argument("--data", required=True, help="panel CSV with header unit,t,y,x1..xp")
    g.add_argument("--col-unit", default="unit")
    g.add_argument("--col-t", default="t")
    g.add_argument("--col-y", default="y")
    g.add_argument("--col-x", default=None, help="comma-separated predictor columns")
    g.add_argument("--standardize", action=argparse.BooleanOptionalAction, default=False)
    g.add_argument(
        "--intercept",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="prepend an all-ones predictor (default: only when standardizing)",
    )
    g.add_argument("--rolling-window", type=int, default=0, metavar="DAYS")
    g.add_argument("--log-response", action=argparse.BooleanOptionalAction, default=False)


def _lambda0_grid(args):
    return np.geomspace(args.lambda0_min, args.lambda0_max, args.lambda0_points)


def _candidate_grid(args):
    return None if args.knot_grid == "auto" else args.knot_grid


def _load_table(args):
    x_cols = args.col_x.split(",") if args.col_x else None
    return ingest_csv(args.data, args.col_unit, args.col_t, args.col_y, x_cols)


def _preprocessed(args):
    table = _load_table(args)
    dataset, info = preprocess(
        table,
        standardize=args.standardize,
        add_intercept=args.intercept,
        rolling_window=args.rolling_window,
        log_response=args.log_response,
    )
    return table, dataset, info


def _parse_taus(spec: str) -> list[float]:
    spec = spec.strip()
    if not spec:
        return []
    if ":" in spec:
        a, b = spec.split(":", 1)
        return [float(v) for v in range(int(a), int(b) + 1)]
    return [float(v) for v in spec.split(",")]


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------

def _cmd_simulate(args) -> int:
    if args.generator == "tang":
        sim = simulate_tang(args.n, seed=args.seed)
    elif args.generator == "wei":
        sim = simulate_wei(args.n, seed=args.seed, p=args.p)
    else:
        unit, t, y, X = simulate_lagged_panel(
            args.units, args.days, args.lag, seed=args.seed, n_predictors=args.predictors
        )
        _replace_into(args.out, lambda tmp: write_panel_csv(tmp, unit, t, y, X))
        print(f"wrote {len(t)} rows to {args.out}")
        return 0

    ds = sim.dataset
    _replace_into(
        args.out, lambda tmp: write_panel_csv(tmp, ds.individual_id, ds.u, ds.y, ds.X)
    )
    print(f"wrote {ds.n} rows ({ds.p} predictors) to {args.out}")
    if args.truth:
        names = [f"beta{j + 1}" for j in range(sim.beta_true.shape[1])]
        _replace_into(
            args.truth,
            lambda tmp: write_panel_csv(
                tmp, ds.individual_id, ds.u, np.zeros(ds.n), sim.beta_true, x_names=names
            ),
        )
        print(f"wrote true coefficients to {args.truth}")
    return 0


def _cmd_fit(args) -> int:
    table, dataset, info = _preprocessed(args)
    fitter = fit_one_step if args.mode == "one-step" else fit_two_step
    fit = fitter(
        dataset,
        degree=args.degree,
        lambda0_grid=_lambda0_grid(args),
        alpha=args.alpha,
        candidate_grid=_candidate_grid(args),
    )
    _write_text(args.out_model, fit_to_json(fit) + "\n")

    grid = np.linspace(fit.boundary[0], fit.boundary[1], args.curve_points)
    beta = eval_coefficients(fit, grid)
    names = [f"beta_{n}" for n in info.x_names]
    lines = ["u," + ",".join(names)]
    for i, g in enumerate(grid):
        lines.append(",".join([repr(float(g))] + [repr(float(v)) for v in beta[i]]))
    _write_text(args.out_curves, "\n".join(lines) + "\n")

    if args.figures:
        _replace_into(
            _sibling_png(args.out_curves),
            lambda tmp: figures.save_coefficient_curves(grid, beta, info.x_names, tmp),
        )
    if args.corr_out:
        _write_text(args.corr_out, rows_to_csv(correlation_report(table)))

    rmse = (fit.rss / fit.n) ** 0.5
    print(f"fit: mode={args.mode} n={fit.n} p={fit.p} bic={fit.bic:.3f} rmse={rmse:.4f}")
    print("knots per predictor:", " ".join(str(c) for c in fit.knots.counts()))
    print(f"model -> {args.out_model}; curves -> {args.out_curves}")
    return 0


def _cmd_select(args) -> int:
    _, dataset, info = _preprocessed(args)
    report = select_variables(
        dataset,
        degree=args.degree,
        lambda0_grid=_lambda0_grid(args),
        alpha=args.alpha,
        candidate_grid=_candidate_grid(args),
        knot_mode=args.knot_mode,
    )
    _write_text(args.out, report.to_json() + "\n")
    if args.figures:
        _replace_into(
            _sibling_png(args.out), lambda tmp: figures.save_selection_figure(report, tmp)
        )
    active_names = [info.x_names[j - 1] for j in report.active]
    print(f"selected {len(report.active)} predictors: {' '.join(active_names) or '(none)'}")
    print(f"lambda1={report.lambda1:.4g} lambda2={report.lambda2:.4g} bic={report.bic:.3f}")
    print(f"report -> {args.out}")
    return 0


def _cmd_bench(args) -> int:
    if args.which == "table1":
        result = run_table1(
            reps=args.reps,
            n=args.n,
            seed=args.seed,
            degree=args.degree,
            alpha=args.alpha,
            workers=args.workers,
        )
        summary = result.summary_rows()
        fig_fn = figures.save_table1_figure
    else:
        n_list = [int(v) for v in args.n_list.split(",")]
        result = run_table2(
            reps=args.reps,
            n_list=n_list,
            seed=args.seed,
            degree=args.degree,
            alpha=args.alpha,
            mode=args.mode,
            workers=args.workers,
            p=args.p,
        )
        summary = result.summary_rows()
        fig_fn = figures.save_table2_figure

    _write_text(args.out, rows_to_csv(summary))
    if args.raw:
        _write_text(args.raw, rows_to_csv(result.raw_rows()))
    if args.figures:
        _replace_into(_sibling_png(args.out), lambda tmp: fig_fn(summary, tmp))
    for row in summary:
        print(" ".join(f"{k}={v}" for k, v in row.items()))
    print(f"summary -> {args.out}")
    return 0


def _cmd_lagscan(args) -> int:
    _, dataset, _ = _preprocessed(args)
    rows = lag_scan(
        dataset,
        _parse_taus(args.taus),
        mode=args.mode,
        degree=args.degree,
        lambda0_grid=_lambda0_grid(args),
        alpha=args.alpha,
        candidate_grid=_candidate_grid(args),
    )
    _write_text(args.out, rows_to_csv(rows))
    if args.figures and rows:
        taus = [r["tau"] for r in rows]
        rmses = [r["rmse"] for r in rows]
        _replace_into(
            _sibling_png(args.out), lambda tmp: figures.save_lag_curve(taus, rmses, tmp)
        )
    if rows:
        best = min(rows, key=lambda r: r["rmse"])
        print(f"best lag: tau={best['tau']:g} rmse={best['rmse']:.4f}")
    else:
        print("no admissible lags")
    print(f"lag table -> {args.out}")
    return 0


# ---------------------------------------------------------------------------
# parser construction and config-file handling
# ---------------------------------------------------------------------------

def _build_parser() -> _Parser:
    parser = _Parser(prog="vcspline", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parser_class=_Parser, help="generate benchmark data")
    p.add_argument("generator", choices=["tang", "wei", "panel"])
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n", type=int, default=200, help="number of individuals")
    p.add_argument("--p", type=int, default=500, help="predictors (wei only)")
    p.add_argument("--units", type=int, default=6, help="panel units (panel only)")
    p.add_argument("--days", type=int, default=300, help="panel days (panel only)")
    p.add_argument("--lag", type=int, default=0, help="planted lag (panel only)")
    p.add_argument("--predictors", type=int, default=4, help="panel predictors")
    p.add_argument("--out", required=True)
    p.add_argument("--truth", default=None, help="write true coefficients here")
    _add_config_option(p)
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("fit", parser_class=_Parser, help="fit a varying-coefficient model")
    _add_data_options(p)
    _add_fit_options(p)
    p.add_argument("--mode", choices=["one-step", "two-step"], default="two-step")
    p.add_argument("--out-model", default="model.json")
    p.add_argument("--out-curves", default="curves.csv")
    p.add_argument("--curve-points", type=int, default=200)
    p.add_argument("--corr-out", default=None, help="write predictor correlations here")
    p.add_argument("--figures", action=argparse.BooleanOptionalAction, default=True)
    _add_config_option(p)
    p.set_defaults(fn=_cmd_fit)

    p = sub.add_parser("select", parser_class=_Parser, help="sparse predictor selection")
    _add_data_options(p)
    _add_fit_options(p)
    p.add_argument("--knot-mode", choices=["adaptive", "equidistant"], default="adaptive")
    p.add_argument("--out", default="selection.json")
    p.add_argument("--figures", action=argparse.BooleanOptionalAction, default=True)
    _add_config_option(p)
    p.set_defaults(fn=_cmd_select)

    p = sub.add_parser("bench", parser_class=_Parser, help="replication studies")
    p.add_argument("which", choices=["table1", "table2"])
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--n", type=int, default=200, help="individuals (table1)")
    p.add_argument("--n-list", default="50,100,200", help="individuals (table2)")
    p.add_argument("--mode", choices=["adaptive", "equidistant"], default="adaptive")
    p.add_argument("--p", type=int, default=500, help="predictors (table2)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--degree", type=int, default=3, choices=[0, 1, 2, 3])
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--raw", default=None, help="write per-replicate metrics here")
    p.add_argument("--figures", action=argparse.BooleanOptionalAction, default=True)
    _add_config_option(p)
    p.set_defaults(fn=_cmd_bench)

    p = sub.add_parser("lagscan", parser_class=_Parser, help="response-shift analysis")
    _add_data_options(p)
    _add_fit_options(p)
    p.add_argument("--taus", default="0:21", help='either "a:b" (inclusive) or "t1,t2,..."')
    p.add_argument("--mode", choices=["one-step", "two-step"], default="one-step")
    p.add_argument("--out", default="lagscan.csv")
    p.add_argument("--figures", action=argparse.BooleanOptionalAction, default=True)
    _add_config_option(p)
    p.set_defaults(fn=_cmd_lagscan)

    return parser


_POSITIONAL_TOKENS = {"simulate": 2, "bench": 2, "fit": 1, "select": 1, "lagscan": 1}


def _config_tokens(path) -> list[str]:
    """Turn key=value lines into command-line tokens (flags still override)."""
    tokens = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            flag = "--" + key.replace("_", "-")
            if value.lower() in ("true", "false"):
                tokens.append(flag if value.lower() == "true" else flag.replace("--", "--no-", 1))
            else:
                tokens.extend([flag, value])
    return tokens


def _inject_config(argv: list[str]) -> list[str]:
    config = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            config = argv[i + 1]
        elif tok.startswith("--config="):
            config = tok.split("=", 1)[1]
    if config is None:
        return argv
    n_pos = _POSITIONAL_TOKENS.get(argv[0], 1) if argv else 0
    return argv[:n_pos] + _config_tokens(config) + argv[n_pos:]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        argv = _inject_config(argv)
    except (OSError, ValueError) as exc:
        print(f"vcspline: error: {exc}", file=sys.stderr)
        return 1
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (OSError, ValueError) as exc:
        print(f"vcspline: data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
