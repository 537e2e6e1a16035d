"""Longitudinal data generators for the benchmark studies.

Both designs observe each individual on an integer schedule where every slot
is skipped with probability 0.6 and surviving slots are jittered by
Unif(0, 1). Noise is the sum of an i.i.d. N(0, 4) measurement term and an
individual-level Gaussian process with variance 4 and correlation
``exp(-|t - s|)``, sampled exactly through the per-individual covariance
Cholesky factor.

A third generator produces a small daily panel with a planted predictor lag,
shaped like the environmental panels the lag-scan analysis targets.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset

__all__ = [
    "LongitudinalDesign",
    "SimulatedData",
    "simulate_tang",
    "simulate_wei",
    "simulate_lagged_panel",
    "replicate_rng",
    "TANG_BETAS",
    "WEI_BETAS",
]


@dataclass(frozen=True)
class LongitudinalDesign:
    """Observation schedule shared by the benchmark generators."""

    n_individuals: int
    schedule: np.ndarray
    skip_prob: float = 0.6

    def __post_init__(self):
        object.__setattr__(self, "schedule", np.asarray(self.schedule, dtype=float))
        if self.n_individuals < 1:
            raise ValueError("need at least one individual")
        if not 0 <= self.skip_prob < 1:
            raise ValueError(f"skip probability must be in [0, 1), got {self.skip_prob}")


@dataclass(frozen=True)
class SimulatedData:
    """A simulated dataset plus the truth needed for error metrics."""

    dataset: Dataset
    beta_true: np.ndarray  # (n, p) true coefficients at the observed times
    beta_funcs: tuple = field(repr=False)
    active: tuple[int, ...] = ()  # 1-based indices of truly non-zero coefficients


TANG_BETAS = (
    lambda t: 1 + 3.5 * np.sin(t - 3),
    lambda t: 2 - 5 * np.cos(0.75 * t - 0.25),
    lambda t: 4 - 0.04 * (t - 12) ** 2,
    lambda t: 1 + 0.125 * t + 4.6 * (1 - 0.1 * t) ** 3,
)

WEI_BETAS = (
    lambda t: 15 + 20 * np.sin(np.pi * (t + 0.5) / 15),
    lambda t: 15 + 20 * np.cos(np.pi * (t + 0.5) / 15),
    lambda t: 2 - 3 * np.sin(np.pi * (t - 24.5) / 15),
    lambda t: 2 - 3 * np.cos(np.pi * (t - 24.5) / 15),
    lambda t: 6 - 0.2 * (t + 0.5) ** 2,
    lambda t: -4 + 5e-4 * (19.5 - t) ** 3,
)

WEI_P = 500


def replicate_rng(seed: int, replicate: int) -> np.random.Generator:
    """Independent stream for one replicate: the pair (seed, replicate) is
    hashed by numpy's SeedSequence into a fresh 64-bit state."""
    return np.random.default_rng([seed, replicate])


def _observed_times(design: LongitudinalDesign, rng: np.random.Generator) -> np.ndarray:
    """Skip schedule slots, jitter the survivors; resample until non-empty."""
    while True:
        keep = rng.random(design.schedule.size) >= design.skip_prob
        if keep.any():
            return design.schedule[keep] + rng.random(int(keep.sum()))


def _correlated_process(times: np.ndarray, rng, variance: float = 4.0) -> np.ndarray:
    """Zero-mean Gaussian with cov ``variance * exp(-|t_a - t_b|)`` at ``times``."""
    cov = variance * np.exp(-np.abs(times[:, None] - times[None, :]))
    chol = np.linalg.cholesky(cov + 1e-10 * variance * np.eye(times.size))
    return chol @ rng.standard_normal(times.size)


def _correlated_matrix(times: np.ndarray, rng, n_cols: int, variance: float) -> np.ndarray:
    """``n_cols`` independent processes sharing one covariance Cholesky."""
    cov = variance * np.exp(-np.abs(times[:, None] - times[None, :]))
    chol = np.linalg.cholesky(cov + 1e-10 * variance * np.eye(times.size))
    return chol @ rng.standard_normal((times.size, n_cols))


def simulate_tang(n_individuals: int, seed: int, schedule=None) -> SimulatedData:
    """Four-predictor longitudinal design on the schedule {0, ..., 19}.

    Predictors: an intercept, a Bernoulli(0.6) indicator, a time-shifted
    uniform, and a conditionally normal fourth predictor. All four true
    coefficient functions vary over time.
    """
    if schedule is None:
        schedule = np.arange(20)
    design = LongitudinalDesign(n_individuals, schedule)
    rng = np.random.default_rng(seed)

    rows_t, rows_x, rows_eps, rows_id = [], [], [], []
    for i in range(design.n_individuals):
        t = _observed_times(design, rng)
        k = t.size
        x1 = np.ones(k)
        x2 = (rng.random(k) < 0.6).astype(float)
        x3 = rng.uniform(0.1 * t, 2 + 0.1 * t)
        x4 = rng.normal(0.0, np.sqrt((1 + x3) / (2 + x3)))
        v = _correlated_process(t, rng)
        e = rng.normal(0.0, 2.0, k)
        rows_t.append(t)
        rows_x.append(np.column_stack([x1, x2, x3, x4]))
        rows_eps.append(v + e)
        rows_id.append(np.full(k, i))

    t = np.concatenate(rows_t)
    X = np.vstack(rows_x)
    eps = np.concatenate(rows_eps)
    ids = np.concatenate(rows_id)
    beta = np.column_stack([f(t) for f in TANG_BETAS])
    y = np.einsum("ij,ij->i", beta, X) + eps
    return SimulatedData(
        dataset=Dataset(X, t, y, ids),
        beta_true=beta,
        beta_funcs=TANG_BETAS,
        active=(1, 2, 3, 4),
    )


def simulate_wei(n_individuals: int, seed: int, schedule=None, p: int = WEI_P) -> SimulatedData:
    """Sparse 500-predictor design on the schedule {0, ..., 29}.

    Only the first six predictors carry signal; predictors 7..p are N(0, 4)
    noise processes with within-individual correlation ``exp(-|t - s|)``.
    ``p`` can be lowered (never below 6) to keep unit tests quick.
    """
    if p < 6:
        raise ValueError("the design needs at least the six signal predictors")
    if schedule is None:
        schedule = np.arange(30)
    design = LongitudinalDesign(n_individuals, schedule)
    rng = np.random.default_rng(seed)

    rows_t, rows_x, rows_eps, rows_id = [], [], [], []
    for i in range(design.n_individuals):
        t = _observed_times(design, rng)
        k = t.size
        x1 = rng.uniform(0.05 + 0.1 * t, 2.05 + 0.1 * t)
        sd25 = np.sqrt((1 + x1) / (2 + x1))
        x2to5 = rng.normal(0.0, sd25[:, None], (k, 4))
        x6 = rng.normal(3 * np.exp((t + 0.5) / 30), 1.0)
        noise_x = _correlated_matrix(t, rng, p - 6, variance=4.0)
        rows_t.append(t)
        rows_x.append(np.column_stack([x1, x2to5, x6, noise_x]))
        v = _correlated_process(t, rng)
        e = rng.normal(0.0, 2.0, k)
        rows_eps.append(v + e)
        rows_id.append(np.full(k, i))

    t = np.concatenate(rows_t)
    X = np.vstack(rows_x)
    eps = np.concatenate(rows_eps)
    ids = np.concatenate(rows_id)
    beta_sig = np.column_stack([f(t) for f in WEI_BETAS])
    beta = np.hstack([beta_sig, np.zeros((t.size, p - 6))])
    y = np.einsum("ij,ij->i", beta_sig, X[:, :6]) + eps
    funcs = WEI_BETAS + tuple([lambda t: np.zeros_like(t)] * (p - 6))
    return SimulatedData(
        dataset=Dataset(X, t, y, ids),
        beta_true=beta,
        beta_funcs=funcs,
        active=(1, 2, 3, 4, 5, 6),
    )


def simulate_lagged_panel(
    n_units: int,
    n_days: int,
    lag: int,
    seed: int,
    n_predictors: int = 4,
    noise_sd: float = 0.5,
):
    """Daily panel where the response reacts to the predictors ``lag`` days late.

    Predictors are stationary AR(1) processes per unit; the response at day
    ``t`` is ``sum_j beta_j(t) x_j(t - lag)`` plus noise, so regressing
    ``y(t + tau)`` on ``x(t)`` attains its smallest residual error at
    ``tau == lag``. Returns rows ``(unit, t, y, x_1..x_p)`` as plain arrays.
    """
    if lag < 0:
        raise ValueError("lag must be non-negative")
    rng = np.random.default_rng(seed)
    offsets = np.linspace(0.0, 2.0, n_predictors)
    span = max(n_days - 1, 1)

    def beta(j, t):
        return 1.0 + np.sin(2 * np.pi * (t / span) + offsets[j]) + 0.5 * offsets[j]

    units, times, ys, xs = [], [], [], []
    phi = 0.6
    for unit in range(n_units):
        # generate on an extended grid so x(t - lag) exists for every day
        total = n_days + lag
        x_ext = np.empty((total, n_predictors))
        x_ext[0] = rng.standard_normal(n_predictors)
        innov_sd = math.sqrt(1 - phi**2)
        for k in range(1, total):
            x_ext[k] = phi * x_ext[k - 1] + innov_sd * rng.standard_normal(n_predictors)
        t = np.arange(n_days, dtype=float)
        x_now = x_ext[lag:]
        x_lagged = x_ext[: n_days] if lag else x_now
        b = np.column_stack([beta(j, t) for j in range(n_predictors)])
        y = np.einsum("ij,ij->i", b, x_lagged) + rng.normal(0.0, noise_sd, n_days)
        units.append(np.full(n_days, unit))
        times.append(t)
        ys.append(y)
        xs.append(x_now)

    return (
        np.concatenate(units),
        np.concatenate(times),
        np.concatenate(ys),
        np.vstack(xs),
    )
