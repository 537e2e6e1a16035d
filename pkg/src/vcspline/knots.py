"""Penalized dynamic-programming knot selection.

Observations are ordered by the conditioner ``u`` and partitioned into
contiguous segments; within a segment the response is regressed on
``(X, u*X)`` and the segment contributes ``len * log(residual variance)``
to the loss. A per-segment penalty ``lambda0 * log(n)`` controls the number
of segments, and the selected knots are the midpoints between the last
observation of one segment and the first of the next.

The forward recursion fills, for every admissible prefix end ``i``,

    Loss_i = min over admissible last-segment starts i' of
             Loss_{i'-1} + l_{i':i} + lambda,

where segments must contain at least ``min_segment`` observations and ties
go to the smallest ``i'`` (the longest last segment). Backtracing the
``Prev`` table yields the segmentation and hence the knots.

Split positions may optionally be restricted to a candidate grid (the
``floor(sqrt(n))``-quantile positions), which drops the cost-table work from
``O(n^2)`` to ``O(|grid|^2)`` segment regressions.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset

__all__ = [
    "KnotSet",
    "DpTables",
    "SegmentCostTable",
    "DEFAULT_ALPHA",
    "DEFAULT_LAMBDA0_GRID",
    "order_by_u",
    "min_segment_size",
    "segment_loss",
    "build_cost_table",
    "dp_forward",
    "dp_backtrace",
    "select_knots",
    "select_knots_path",
    "select_knots_segmentation_bic",
    "sqrt_candidate_boundaries",
]

DEFAULT_ALPHA = 0.5

# 25 logarithmically spaced penalty strengths; the endpoints comfortably span
# "as many segments as allowed" to "a single segment" on all tested designs.
DEFAULT_LAMBDA0_GRID = np.geomspace(0.01, 100.0, 25)

# Residual variances are clamped below at VAR_FLOOR_REL * var(y) so that
# exactly-interpolated segments keep the log-loss finite.
VAR_FLOOR_REL = 1e-12

# Datasets larger than this get the sqrt-quantile candidate grid by default.
AUTO_GRID_THRESHOLD = 2000

# Relative eigenvalue cutoff for the minimum-norm window solves.
_EIG_RCOND = 1e-12

# Below this many observations every window is solved densely (exact path).
_EXACT_TABLE_MAX_N = 128

# Chunk size (in matrix entries) for the batched window regressions.
_CHUNK_ENTRIES = 4_000_000


@dataclass(frozen=True)
class KnotSet:
    """Selected interior knots plus the penalty configuration that produced them."""

    knots: np.ndarray
    lambda0: float
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "knots", np.asarray(self.knots, dtype=float))

    def __len__(self) -> int:
        return len(self.knots)


@dataclass(frozen=True)
class DpTables:
    """Forward-recursion tables over the admissible prefix ends.

    ``ends[k]`` is the observation count of the ``k``-th admissible prefix
    (``ends[0] == 0``, ``ends[-1] == n``); ``loss[k]`` and ``prev[k]`` are the
    minimum penalized loss of that prefix and the node index of the optimal
    previous prefix (``-1`` where unreachable).
    """

    ends: np.ndarray
    loss: np.ndarray
    prev: np.ndarray


@dataclass(frozen=True)
class SegmentCostTable:
    """Cached per-segment losses ``l_{i':i}`` between admissible prefix ends.

    ``cost_to[b, a]`` is the loss of the segment covering observations
    ``ends[a]+1 .. ends[b]`` (1-based), or ``+inf`` when the segment is
    shorter than ``min_segment``.
    """

    n: int
    min_segment: int
    ends: np.ndarray
    cost_to: np.ndarray = field(repr=False)
    var_floor: float


def order_by_u(dataset: Dataset) -> tuple[Dataset, np.ndarray]:
    """Stable sort of the observations by ``u`` ascending.

    Returns the sorted dataset and the permutation such that
    ``sorted.u == dataset.u[perm]``. Ties keep their original order.
    """
    if dataset.n < 2:
        raise ValueError("need at least 2 observations to order")
    perm = np.argsort(dataset.u, kind="stable")
    ids = dataset.individual_id[perm] if dataset.individual_id is not None else None
    return Dataset(dataset.X[perm], dataset.u[perm], dataset.y[perm], ids), perm


def min_segment_size(n: int, p: int, alpha: float = DEFAULT_ALPHA) -> int:
    """Smallest admissible segment, ``max(ceil(n**alpha), 2p + 3)``.

    The floor guarantees every segment supports its ``2p``-regressor fit.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    return max(math.ceil(n**alpha), 2 * p + 3)


def _segment_regressors(dataset: Dataset) -> np.ndarray:
    return np.hstack([dataset.X, dataset.u[:, None] * dataset.X])


def _default_var_floor(y: np.ndarray) -> float:
    v = float(np.var(y))
    return VAR_FLOOR_REL * v if v > 0 else VAR_FLOOR_REL


def segment_loss(dataset: Dataset, start: int, stop: int, var_floor: float | None = None) -> float:
    """Loss ``len * log(residual variance)`` of the window ``[start, stop)``.

    The dataset must already be sorted by ``u``; the window response is
    regressed on ``(X, u*X)`` and the ML residual variance is floored at
    ``var_floor`` (default ``1e-12 * var(y)`` over the full dataset).
    """
    from .lsq import ols_fit

    if var_floor is None:
        var_floor = _default_var_floor(dataset.y)
    length = stop - start
    if length < 1:
        raise ValueError(f"empty window [{start}, {stop})")
    Z = _segment_regressors(dataset)[start:stop]
    fit = ols_fit(Z, dataset.y[start:stop])
    return length * math.log(max(fit.residual_variance, var_floor))


def sqrt_candidate_boundaries(n: int) -> np.ndarray:
    """Positions after which a split may occur: the ``m/floor(sqrt(n))`` quantiles."""
    m = math.floor(math.sqrt(n))
    if m < 2:
        return np.array([], dtype=int)
    pos = np.rint(n * np.arange(1, m) / m).astype(int)
    return np.unique(np.clip(pos, 1, n - 1))


def _resolve_boundaries(candidate_grid, n: int) -> np.ndarray | None:
    """Map the ``candidate_grid`` option to explicit split positions (or None for all)."""
    if candidate_grid is None or (isinstance(candidate_grid, str) and candidate_grid == "auto"):
        return sqrt_candidate_boundaries(n) if n > AUTO_GRID_THRESHOLD else None
    if isinstance(candidate_grid, str):
        if candidate_grid == "full":
            return None
        if candidate_grid == "sqrt":
            return sqrt_candidate_boundaries(n)
        raise ValueError(f"unknown candidate grid {candidate_grid!r}")
    pos = np.unique(np.asarray(candidate_grid, dtype=int))
    if pos.size and (pos[0] < 1 or pos[-1] > n - 1):
        raise ValueError("candidate split positions must lie in [1, n-1]")
    return pos


def build_cost_table(
    dataset: Dataset,
    min_segment: int,
    boundaries: np.ndarray | None = None,
    var_floor: float | None = None,
    exact: bool | None = None,
) -> SegmentCostTable:
    """Compute all admissible segment losses between candidate prefix ends.

    ``boundaries`` restricts the interior split positions; ``None`` admits
    every position. Small problems (``exact`` defaults to ``n <= 128``)
    solve every window with a dense least squares; larger tables use prefix
    Gram matrices with a batched eigendecomposition, which matches the
    minimum-norm window solution up to accumulation error.
    """
    n = dataset.n
    if var_floor is None:
        var_floor = _default_var_floor(dataset.y)
    if exact is None:
        exact = n <= _EXACT_TABLE_MAX_N
    if boundaries is None:
        interior = np.arange(min_segment, n, dtype=int)
    else:
        b = np.asarray(boundaries, dtype=int)
        interior = np.unique(b[(b >= min_segment) & (b <= n - min_segment)])
    ends = np.concatenate([[0], interior, [n]]).astype(int)

    Z = _segment_regressors(dataset)
    y = dataset.y
    q = Z.shape[1]

    K = len(ends)
    a_all, b_all = np.meshgrid(np.arange(K), np.arange(K), indexing="ij")
    admissible = (ends[b_all] - ends[a_all]) >= min_segment
    a_idx = a_all[admissible]
    b_idx = b_all[admissible]

    cost_to = np.full((K, K), np.inf)
    if exact:
        for a, b in zip(a_idx, b_idx):
            ea, eb = ends[a], ends[b]
            coef, _, _, _ = np.linalg.lstsq(Z[ea:eb], y[ea:eb], rcond=1e-10)
            r = y[ea:eb] - Z[ea:eb] @ coef
            length = eb - ea
            sigma2 = max(float(r @ r) / length, var_floor)
            cost_to[b, a] = length * math.log(sigma2)
        return SegmentCostTable(
            n=n, min_segment=min_segment, ends=ends, cost_to=cost_to, var_floor=var_floor
        )

    # Prefix sums of the Gram matrix, the cross moments and the response energy.
    P = np.zeros((n + 1, q, q))
    np.cumsum(Z[:, :, None] * Z[:, None, :], axis=0, out=P[1:])
    c = np.zeros((n + 1, q))
    np.cumsum(Z * y[:, None], axis=0, out=c[1:])
    s2 = np.zeros(n + 1)
    np.cumsum(y * y, out=s2[1:])

    chunk = max(1, _CHUNK_ENTRIES // (q * q))
    for k0 in range(0, a_idx.size, chunk):
        a = a_idx[k0 : k0 + chunk]
        b = b_idx[k0 : k0 + chunk]
        ea, eb = ends[a], ends[b]
        G = P[eb] - P[ea]
        g = c[eb] - c[ea]
        yy = s2[eb] - s2[ea]
        length = (eb - ea).astype(float)

        w, V = np.linalg.eigh(G)
        proj = np.einsum("kij,ki->kj", V, g)  # V^T g per window
        keep = w > _EIG_RCOND * w[:, -1:].clip(min=np.finfo(float).tiny)
        inv = np.where(keep, 1.0 / np.where(keep, w, 1.0), 0.0)
        rss = np.maximum(yy - np.einsum("kj,kj->k", proj * proj, inv), 0.0)
        sigma2 = np.maximum(rss / length, var_floor)
        cost_to[b, a] = length * np.log(sigma2)

    return SegmentCostTable(
        n=n, min_segment=min_segment, ends=ends, cost_to=cost_to, var_floor=var_floor
    )


def dp_forward(table: SegmentCostTable, lam: float) -> DpTables:
    """Fill the minimum-loss and predecessor tables for penalty ``lam`` per segment."""
    if lam < 0:
        raise ValueError(f"penalty must be non-negative, got {lam}")
    loss, prev = _dp_forward_batched(table, np.array([lam]))
    return DpTables(ends=table.ends, loss=loss[0], prev=prev[0])


def _dp_forward_batched(table: SegmentCostTable, lams: np.ndarray):
    """Forward recursion for several penalties at once (shared cost table).

    Ties break toward the smallest segment start for every penalty.
    """
    K = len(table.ends)
    L = len(lams)
    loss = np.full((L, K), np.inf)
    prev = np.full((L, K), -1, dtype=int)
    loss[:, 0] = 0.0
    rows = np.arange(L)
    for b in range(1, K):
        cand = loss[:, :b] + table.cost_to[b, :b][None, :]
        a = np.argmin(cand, axis=1)  # first minimum: smallest start wins
        v = cand[rows, a]
        ok = np.isfinite(v)
        loss[ok, b] = v[ok] + lams[ok]
        prev[ok, b] = a[ok]
    return loss, prev


def dp_backtrace(u_sorted: np.ndarray, tables: DpTables) -> np.ndarray:
    """Recover the knots (segment-boundary midpoints) from the forward tables."""
    u = np.asarray(u_sorted, dtype=float)
    b = len(tables.ends) - 1
    if tables.prev[b] < 0:
        raise ValueError("forward tables are incomplete: final prefix unreachable")
    knots = []
    while True:
        a = int(tables.prev[b])
        if a <= 0:
            break
        e = int(tables.ends[a])  # last segment starts at observation e + 1
        knots.append(0.5 * (u[e - 1] + u[e]))
        b = a
    return np.array(knots[::-1])


def select_knots(
    dataset: Dataset,
    lambda0: float,
    alpha: float = DEFAULT_ALPHA,
    candidate_grid=None,
) -> KnotSet:
    """Select knots for one penalty strength ``lambda0``.

    Sorts by ``u``, builds the segment-cost table with
    ``min_segment = max(ceil(n**alpha), 2p + 3)``, runs the forward recursion
    with ``lam = lambda0 * log(n)`` and backtraces. ``candidate_grid`` may be
    ``None``/"auto" (sqrt-quantile grid for n > 2000, every position
    otherwise), "full", "sqrt", or explicit split positions.
    """
    return select_knots_path(dataset, [lambda0], alpha, candidate_grid)[0]


def select_knots_path(
    dataset: Dataset,
    lambda0s,
    alpha: float = DEFAULT_ALPHA,
    candidate_grid=None,
) -> list[KnotSet]:
    """Select knots for every penalty in ``lambda0s``, reusing one cost table.

    The segment-cost table dominates the run time and does not depend on the
    penalty, so tuning loops should prefer this over repeated
    :func:`select_knots` calls.
    """
    out, _ = _knots_path_with_loss(dataset, lambda0s, alpha, candidate_grid)
    return out


def _knots_path_with_loss(dataset, lambda0s, alpha, candidate_grid):
    lambda0s = [float(l0) for l0 in lambda0s]
    if not lambda0s:
        raise ValueError("need at least one lambda0")
    if min(lambda0s) <= 0:
        raise ValueError("lambda0 must be positive")
    sorted_ds, _ = order_by_u(dataset)
    n, p = sorted_ds.n, sorted_ds.p
    m_s = min_segment_size(n, p, alpha)
    if n < 2 * m_s:
        raise ValueError(
            f"dataset too small for any admissible segmentation: n={n} < 2*min_segment={2 * m_s}"
        )
    boundaries = _resolve_boundaries(candidate_grid, n)
    table = build_cost_table(sorted_ds, m_s, boundaries)
    log_n = math.log(n)
    lams = np.array(lambda0s) * log_n
    loss, prev = _dp_forward_batched(table, lams)
    out = []
    losses = []
    for i, l0 in enumerate(lambda0s):
        tables = DpTables(ends=table.ends, loss=loss[i], prev=prev[i])
        knots = dp_backtrace(sorted_ds.u, tables)
        out.append(KnotSet(knots=knots, lambda0=l0, alpha=alpha))
        # unpenalized segmentation loss, recovered from the penalized optimum
        losses.append(float(tables.loss[-1]) - (len(knots) + 1) * l0 * log_n)
    return out, losses


def select_knots_segmentation_bic(
    dataset: Dataset,
    lambda0_grid=None,
    alpha: float = DEFAULT_ALPHA,
    candidate_grid=None,
    params_per_segment: int | None = None,
) -> KnotSet:
    """Tune ``lambda0`` by the BIC of the segmentation itself.

    Each candidate segmentation with ``L + 1`` segments is scored as its
    unpenalized loss plus ``params_per_segment * (L + 1) * log(n)`` (default
    ``2p``, the regression parameters of one segment); the knot set with the
    smallest score wins, ties going to fewer knots. Unlike the spline-based
    tuning this keeps knots wherever the coefficients are curved, even when
    a knot-free spline of the working degree could absorb the shape.
    """
    if lambda0_grid is None:
        lambda0_grid = DEFAULT_LAMBDA0_GRID
    knot_sets, losses = _knots_path_with_loss(dataset, lambda0_grid, alpha, candidate_grid)
    n, p = dataset.n, dataset.p
    if params_per_segment is None:
        params_per_segment = 2 * p
    log_n = math.log(n)
    best = None
    best_key = None
    for ks, loss in zip(knot_sets, losses):
        L = len(ks.knots)
        bic = loss + params_per_segment * (L + 1) * log_n
        key = (bic, L)
        if best is None or key < best_key:
            best, best_key = ks, key
    return best
