"""Panel CSV ingestion, preprocessing and the lag-scan analysis.

The expected file layout is a header row with columns ``unit,t,y,x1..xp``
(remappable), comma-delimited UTF-8 with ``.`` as the decimal separator.
Rows with missing or unparseable mapped cells are dropped and counted, never
silently imputed.
"""

import csv
import logging
import math
import re
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .knots import min_segment_size
from .model import fit_one_step, fit_two_step

__all__ = [
    "PanelTable",
    "PreprocessInfo",
    "ingest_csv",
    "write_panel_csv",
    "preprocess",
    "lag_scan",
    "correlation_report",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PanelTable:
    """Rows ``(unit, t, y, x_1..x_p)``, sorted by time within each unit."""

    unit: np.ndarray
    t: np.ndarray
    y: np.ndarray
    X: np.ndarray
    x_names: tuple[str, ...]
    n_dropped: int = 0

    @property
    def n(self) -> int:
        return self.t.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class PreprocessInfo:
    x_names: tuple[str, ...]
    n_dropped_window: int
    n_dropped_log: int
    means: np.ndarray | None
    scales: np.ndarray | None


def _detect_x_columns(header: list[str]) -> list[str]:
    pat = re.compile(r"^x(\d+)$")
    hits = [(int(m.group(1)), name) for name in header if (m := pat.match(name))]
    return [name for _, name in sorted(hits)]


def ingest_csv(
    path,
    unit_col: str = "unit",
    t_col: str = "t",
    y_col: str = "y",
    x_cols: list[str] | None = None,
) -> PanelTable:
    """Read a panel CSV, dropping (and counting) rows with bad mapped cells.

    A missing header or missing mapped column is fatal; a blank or
    unparseable numeric cell only rejects its row. Rows are sorted by time
    within each unit, units in order of first appearance.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, header row required") from None
        if x_cols is None:
            x_cols = _detect_x_columns(header)
            if not x_cols:
                raise ValueError(f"{path}: no x1..xp columns found in header {header}")
        needed = [unit_col, t_col, y_col, *x_cols]
        missing = [c for c in needed if c not in header]
        if missing:
            raise ValueError(f"{path}: missing required columns {missing}")
        idx = {c: header.index(c) for c in needed}

        units, ts, ys, xs = [], [], [], []
        dropped = 0
        numeric = [t_col, y_col, *x_cols]
        for lineno, row in enumerate(reader, start=2):
            if len(row) < len(header):
                dropped += 1
                logger.debug("%s:%d: short row rejected", path, lineno)
                continue
            try:
                vals = [float(row[idx[c]]) for c in numeric]
            except ValueError:
                dropped += 1
                logger.debug("%s:%d: unparseable numeric cell, row rejected", path, lineno)
                continue
            if not all(math.isfinite(v) for v in vals):
                dropped += 1
                continue
            units.append(row[idx[unit_col]])
            ts.append(vals[0])
            ys.append(vals[1])
            xs.append(vals[2:])

    if dropped:
        logger.warning("%s: dropped %d rows with missing or bad cells", path, dropped)
    if not ts:
        raise ValueError(f"{path}: no usable data rows")

    unit = np.array(units, dtype=object)
    t = np.array(ts)
    y = np.array(ys)
    X = np.array(xs)
    # sort by time within unit, units kept in first-appearance order
    first_seen: dict = {}
    for v in units:
        first_seen.setdefault(v, len(first_seen))
    codes = np.array([first_seen[v] for v in units])
    order = np.lexsort((t, codes))
    return PanelTable(
        unit=unit[order],
        t=t[order],
        y=y[order],
        X=X[order],
        x_names=tuple(x_cols),
        n_dropped=dropped,
    )


def _fmt(v) -> str:
    return repr(float(v))


def write_panel_csv(path, unit, t, y, X, x_names=None) -> None:
    """Write panel rows; floats use their shortest exact decimal form."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if x_names is None:
        x_names = [f"x{j + 1}" for j in range(X.shape[1])]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["unit", "t", "y", *x_names])
        for i in range(len(t)):
            writer.writerow(
                [unit[i], _fmt(t[i]), _fmt(y[i]), *(_fmt(v) for v in X[i])]
            )


def _unit_codes(unit: np.ndarray) -> np.ndarray:
    first_seen: dict = {}
    for v in unit:
        first_seen.setdefault(v, len(first_seen))
    return np.array([first_seen[v] for v in unit])


def preprocess(
    table: PanelTable,
    standardize: bool = False,
    add_intercept: bool | None = None,
    rolling_window: int = 0,
    log_response: bool = False,
) -> tuple[Dataset, PreprocessInfo]:
    """Turn a panel table into a fitting dataset.

    Order of operations: forward rolling mean of the response per unit (a
    row keeps the average of itself and the following ``window - 1`` rows;
    trailing rows without a full window are dropped), then the optional log
    transform (non-positive responses drop their rows, with a count), then
    standardization of the predictors to mean 0 / variance 1. When
    standardizing, an all-ones intercept column is prepended (never scaled)
    unless ``add_intercept`` says otherwise.
    """
    if add_intercept is None:
        add_intercept = standardize
    codes = _unit_codes(table.unit)
    t, y, X = table.t, table.y, table.X

    dropped_window = 0
    if rolling_window > 1:
        keep_rows, new_y = [], []
        for c in np.unique(codes):
            rows = np.nonzero(codes == c)[0]  # already time-sorted
            k = rows.size - rolling_window + 1
            if k <= 0:
                dropped_window += rows.size
                continue
            win = np.lib.stride_tricks.sliding_window_view(y[rows], rolling_window)
            keep_rows.append(rows[:k])
            new_y.append(win.mean(axis=1))
            dropped_window += rows.size - k
        if not keep_rows:
            raise ValueError("rolling window longer than every unit's series")
        keep = np.concatenate(keep_rows)
        y = np.concatenate(new_y)
        t, X, codes = t[keep], X[keep], codes[keep]

    dropped_log = 0
    if log_response:
        ok = y > 0
        dropped_log = int((~ok).sum())
        if dropped_log:
            logger.warning("dropped %d rows with non-positive response before log", dropped_log)
        t, y, X, codes = t[ok], np.log(y[ok]), X[ok], codes[ok]
        if y.size == 0:
            raise ValueError("no rows left after dropping non-positive responses")

    means = scales = None
    names = list(table.x_names)
    if standardize:
        means = X.mean(axis=0)
        scales = X.std(axis=0)
        flat = scales == 0
        scales = np.where(flat, 1.0, scales)
        X = (X - np.where(flat, 0.0, means)) / scales
    if add_intercept:
        X = np.hstack([np.ones((X.shape[0], 1)), X])
        names = ["intercept", *names]

    info = PreprocessInfo(
        x_names=tuple(names),
        n_dropped_window=dropped_window,
        n_dropped_log=dropped_log,
        means=means,
        scales=scales,
    )
    return Dataset(X, t, y, codes), info


def lag_scan(
    dataset: Dataset,
    taus,
    mode: str = "one-step",
    degree: int = 3,
    lambda0_grid=None,
    alpha: float = 0.5,
    candidate_grid=None,
) -> list[dict]:
    """Refit the model with the response shifted ``tau`` time units ahead.

    For each ``tau``, predictors at time ``t`` are joined with the response
    at exactly ``t + tau`` within the same unit, the configured model is
    refit, and the in-sample residual RMSE recorded. Shifts leaving too few
    joined rows are skipped with a warning. Returns rows of
    ``{"tau", "rmse", "n"}``.
    """
    if dataset.individual_id is None:
        raise ValueError("lag scan needs per-unit grouping")
    fitter = {"one-step": fit_one_step, "two-step": fit_two_step}.get(mode)
    if fitter is None:
        raise ValueError(f"unknown fit mode {mode!r}")
    codes = np.asarray(dataset.individual_id)
    rows = []
    for tau in taus:
        xs_idx, ys_idx = [], []
        for c in np.unique(codes):
            at = np.nonzero(codes == c)[0]
            lookup = {dataset.u[i]: i for i in at}
            for i in at:
                jt = lookup.get(dataset.u[i] + tau)
                if jt is not None:
                    xs_idx.append(i)
                    ys_idx.append(jt)
        if not xs_idx:
            logger.warning("lag %s: no joined rows, skipped", tau)
            continue
        xs_idx = np.array(xs_idx)
        ys_idx = np.array(ys_idx)
        joined = Dataset(
            dataset.X[xs_idx], dataset.u[xs_idx], dataset.y[ys_idx], codes[xs_idx]
        )
        m_s = min_segment_size(joined.n, joined.p, alpha)
        if joined.n < 2 * m_s:
            logger.warning("lag %s: only %d joined rows, skipped", tau, joined.n)
            continue
        fit = fitter(joined, degree, lambda0_grid, alpha, candidate_grid)
        rows.append(
            {"tau": float(tau), "rmse": math.sqrt(fit.rss / fit.n), "n": joined.n}
        )
    return rows


def correlation_report(table: PanelTable) -> list[dict]:
    """Pairwise Pearson correlations of the predictors (collinearity check)."""
    if table.p < 2:
        return []
    C = np.corrcoef(table.X, rowvar=False)
    rows = []
    for a in range(table.p):
        for b in range(a + 1, table.p):
            rows.append(
                {
                    "x_a": table.x_names[a],
                    "x_b": table.x_names[b],
                    "correlation": float(C[a, b]),
                }
            )
    return rows
