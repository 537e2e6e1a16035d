"""High-dimensional predictor selection via a two-stage group lasso.

Each predictor gets its own marginally selected knots, its spline block
``x_j * B_{j,k}(u)`` and a kernel matrix ``R_j`` (the empirical second moment
of the basis functions), so the penalty ``sqrt(c_j' R_j c_j)`` is the
empirical L2 norm of the coefficient function. A first group-lasso pass
screens groups; an adaptive second pass reweights the survivors by the
inverse of their first-stage norms. Both penalties are tuned by BIC with the
degrees of freedom counted over the selected groups only.

The solver is block coordinate descent in coordinates transformed by
``R_j^{1/2}``, where each block minimization is exact: either the zero
block (when the block gradient is inside the penalty ball) or the solution
of a one-dimensional secular equation in the block norm.
"""

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .basis import BSplineBasis, bspline_matrix
from .data import Dataset
from .knots import DEFAULT_ALPHA
from .model import PredictorKnots, fit_one_step

__all__ = [
    "GroupKernel",
    "GroupLassoFit",
    "SelectionReport",
    "marginal_knots",
    "group_kernel",
    "group_lasso",
    "group_lasso_path",
    "adaptive_group_lasso",
    "lambda_max",
    "kkt_residuals",
    "select_variables",
]

# Groups whose coefficient-function norm exceeds this are "selected".
ACTIVE_TOL = 1e-8

# Kernel eigenvalues are floored at this fraction of the largest one before
# taking the matrix square root.
_KERNEL_FLOOR = 1e-10

_DEFAULT_TOL = 1e-7
_DEFAULT_MAX_SWEEPS = 10_000

# BIC floor, as in the spline fits.
_BIC_VAR_FLOOR = 1e-300


@dataclass(frozen=True)
class GroupKernel:
    """Per-group kernel matrices ``R_j`` (symmetric positive semidefinite)."""

    matrices: tuple[np.ndarray, ...]

    def __post_init__(self):
        mats = tuple(np.asarray(R, dtype=float) for R in self.matrices)
        for R in mats:
            if R.ndim != 2 or R.shape[0] != R.shape[1]:
                raise ValueError("kernel matrices must be square")
            if not np.allclose(R, R.T, atol=1e-12):
                raise ValueError("kernel matrices must be symmetric")
        object.__setattr__(self, "matrices", mats)


@dataclass(frozen=True)
class GroupLassoFit:
    """Solution of one penalized problem.

    ``coefficients[j]`` are in the original basis coordinates; ``group_norms``
    hold ``sqrt(c_j' R_j c_j)``; ``active_set`` is the 0-based indices whose
    norm exceeds the numerical-zero threshold.
    """

    coefficients: tuple[np.ndarray, ...]
    lam: float
    weights: np.ndarray
    group_norms: np.ndarray
    active_set: tuple[int, ...]
    objective: float
    converged: bool
    n_sweeps: int
    objective_history: np.ndarray | None = field(default=None, compare=False)


def group_kernel(bases: list[BSplineBasis], u) -> GroupKernel:
    """Empirical kernels ``R_j[k1, k2] = mean_i B_{j,k1}(u_i) B_{j,k2}(u_i)``."""
    u = np.asarray(u, dtype=float).ravel()
    if u.size == 0:
        raise ValueError("need a non-empty sample of the conditioner")
    mats = []
    for basis in bases:
        B = bspline_matrix(basis, u)
        mats.append(B.T @ B / u.size)
    return GroupKernel(tuple(mats))


def _kernel_sqrt(R: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric square root of ``R`` and its inverse, with floored eigenvalues."""
    w, V = np.linalg.eigh(R)
    floor = _KERNEL_FLOOR * max(w[-1], np.finfo(float).tiny)
    wf = np.maximum(w, floor)
    A = (V * np.sqrt(wf)) @ V.T
    A_inv = (V / np.sqrt(wf)) @ V.T
    return A, A_inv


class _Problem:
    """Transformed design and cached per-block eigendecompositions."""

    def __init__(self, blocks, y, kernel: GroupKernel):
        self.y = np.asarray(y, dtype=float).ravel()
        self.n = self.y.size
        if len(blocks) != len(kernel.matrices):
            raise ValueError("one kernel matrix per block is required")
        self.p = len(blocks)
        self.sizes = []
        self.A = []
        self.A_inv = []
        W_cols = []
        for Z, R in zip(blocks, kernel.matrices):
            Z = np.asarray(Z, dtype=float)
            if Z.shape[0] != self.n:
                raise ValueError("block row count does not match the response")
            if Z.shape[1] != R.shape[0]:
                raise ValueError("block width does not match its kernel")
            A, A_inv = _kernel_sqrt(R)
            self.A.append(A)
            self.A_inv.append(A_inv)
            self.sizes.append(Z.shape[1])
            W_cols.append(Z @ A_inv)
        self.W = np.hstack(W_cols)
        stops = np.cumsum([0] + self.sizes)
        self.slices = [slice(stops[j], stops[j + 1]) for j in range(self.p)]
        # eigendecomposition of H_j = (2/n) W_j' W_j, reused by every update
        self.H_eig = []
        for j in range(self.p):
            Wj = self.W[:, self.slices[j]]
            d, Q = np.linalg.eigh((2.0 / self.n) * (Wj.T @ Wj))
            self.H_eig.append((np.maximum(d, 0.0), Q))

    def block_gradients(self, resid: np.ndarray) -> list[np.ndarray]:
        g = (2.0 / self.n) * (self.W.T @ resid)
        return [g[s] for s in self.slices]


def _exact_block_update(d, Q, g, lam_w):
    """Exact minimizer of ``(1/n)||r - W b||^2 + lam_w ||b||`` over one block.

    ``d, Q`` diagonalize ``H = (2/n) W'W`` and ``g = (2/n) W'r``. Returns the
    zero vector when ``||g|| <= lam_w``; otherwise solves the secular equation
    ``||(H + lam_w/nu I)^{-1} g|| = nu`` for the block norm ``nu``.
    """
    ghat = Q.T @ g
    d_tol = 1e-12 * max(d[-1], np.finfo(float).tiny)
    keep = d > d_tol
    if lam_w <= 0:
        # unpenalized: minimum-norm solve of H b = g
        inv = np.where(keep, 1.0 / np.where(keep, d, 1.0), 0.0)
        return Q @ (ghat * inv)
    ghat = np.where(keep, ghat, 0.0)  # drop the (exactly zero) null part
    gnorm = math.sqrt(float(ghat @ ghat))
    if gnorm <= lam_w * (1 + 1e-12):
        return np.zeros_like(g)
    nu_max = float(np.linalg.norm(ghat[keep] / d[keep]))

    def excess(nu):
        b = ghat / (d + lam_w / nu)
        return math.sqrt(float(b @ b)) - nu

    if excess(nu_max) >= 0:
        nu = nu_max
    else:
        lo = nu_max * 1e-14
        if excess(lo) <= 0:  # solution is numerically at the threshold
            return np.zeros_like(g)
        nu = brentq(excess, lo, nu_max, xtol=1e-300, rtol=1e-14)
    return Q @ (ghat / (d + lam_w / nu))


def _objective(problem: _Problem, b_blocks, lam, weights) -> float:
    resid = problem.y - problem.W @ np.concatenate(b_blocks)
    penalty = sum(
        w * math.sqrt(float(b @ b))
        for w, b in zip(weights, b_blocks)
        if np.isfinite(w)
    )
    return float(resid @ resid) / problem.n + lam * penalty


def _solve(
    problem: _Problem,
    lam: float,
    weights: np.ndarray,
    b_init=None,
    tol: float = _DEFAULT_TOL,
    max_sweeps: int = _DEFAULT_MAX_SWEEPS,
    debug: bool = False,
):
    """Working-set block coordinate descent, exact per-block minimization.

    Groups with infinite weight are pinned at zero. Returns transformed
    coefficients per block plus convergence metadata.
    """
    p = problem.p
    b = (
        [np.zeros(m) for m in problem.sizes]
        if b_init is None
        else [x.copy() for x in b_init]
    )
    finite = np.isfinite(weights)
    for j in range(p):
        if not finite[j]:
            b[j][:] = 0.0
    resid = problem.y - problem.W @ np.concatenate(b)
    work = {j for j in range(p) if finite[j] and np.any(b[j])}
    sweeps = 0
    history = [] if debug else None
    converged = False
    if debug:
        history.append(_objective_transformed(problem, b, resid, lam, weights))

    while sweeps < max_sweeps:
        # cycle the working set until it stabilizes
        stable = False
        while sweeps < max_sweeps and not stable:
            max_change = 0.0
            for j in sorted(work):
                Wj = problem.W[:, problem.slices[j]]
                r_j = resid + Wj @ b[j]
                g = (2.0 / problem.n) * (Wj.T @ r_j)
                d, Q = problem.H_eig[j]
                b_new = _exact_block_update(d, Q, g, lam * weights[j])
                delta = problem.A_inv[j] @ (b_new - b[j])
                change = float(np.abs(delta).max()) if delta.size else 0.0
                max_change = max(max_change, change)
                if change > 0:
                    resid = r_j - Wj @ b_new
                    b[j] = b_new
            sweeps += 1
            if debug:
                obj = _objective_transformed(problem, b, resid, lam, weights)
                assert obj <= history[-1] * (1 + 1e-12) + 1e-12, "objective increased"
                history.append(obj)
            stable = max_change < tol
        if not stable:
            break
        # KKT scan over the frozen residual; add violators and re-optimize
        grads = problem.block_gradients(resid)
        violators = {
            j
            for j in range(p)
            if finite[j]
            and j not in work
            and float(np.linalg.norm(grads[j])) > lam * weights[j] * (1 + 1e-10) + 1e-12
        }
        work -= {j for j in work if not np.any(b[j])}
        if not violators:
            converged = True
            break
        work |= violators

    if not converged:
        warnings.warn(
            f"group lasso did not converge within {max_sweeps} sweeps", RuntimeWarning
        )
    return b, resid, converged, sweeps, history


def _objective_transformed(problem, b, resid, lam, weights) -> float:
    penalty = sum(
        weights[j] * math.sqrt(float(b[j] @ b[j]))
        for j in range(problem.p)
        if np.isfinite(weights[j])
    )
    return float(resid @ resid) / problem.n + lam * penalty


def _finish(problem: _Problem, kernel, b, resid, lam, weights, converged, sweeps, history):
    coefs = tuple(problem.A_inv[j] @ b[j] for j in range(problem.p))
    norms = np.array(
        [
            math.sqrt(max(float(c @ (R @ c)), 0.0))
            for c, R in zip(coefs, kernel.matrices)
        ]
    )
    active = tuple(int(j) for j in np.nonzero(norms > ACTIVE_TOL)[0])
    finite_w = np.where(np.isfinite(weights), weights, 0.0)
    objective = float(resid @ resid) / problem.n + lam * float(finite_w @ norms)
    return GroupLassoFit(
        coefficients=coefs,
        lam=lam,
        weights=np.asarray(weights, dtype=float),
        group_norms=norms,
        active_set=active,
        objective=objective,
        converged=converged,
        n_sweeps=sweeps,
        objective_history=np.array(history) if history is not None else None,
    )


def group_lasso(
    blocks,
    y,
    kernel: GroupKernel,
    lambda1: float,
    weights=None,
    tol: float = _DEFAULT_TOL,
    max_sweeps: int = _DEFAULT_MAX_SWEEPS,
    debug: bool = False,
) -> GroupLassoFit:
    """Minimize ``(1/n)||y - sum_j Z_j c_j||^2 + lambda1 sum_j w_j sqrt(c_j'R_jc_j)``."""
    if lambda1 < 0:
        raise ValueError("the penalty must be non-negative")
    problem = _Problem(blocks, y, kernel)
    w = np.ones(problem.p) if weights is None else np.asarray(weights, dtype=float)
    b, resid, converged, sweeps, history = _solve(
        problem, lambda1, w, None, tol, max_sweeps, debug
    )
    return _finish(problem, kernel, b, resid, lambda1, w, converged, sweeps, history)


def group_lasso_path(
    blocks,
    y,
    kernel: GroupKernel,
    lambdas,
    weights=None,
    tol: float = _DEFAULT_TOL,
    max_sweeps: int = _DEFAULT_MAX_SWEEPS,
) -> list[GroupLassoFit]:
    """Solve a decreasing penalty path with warm starts between points."""
    problem = _Problem(blocks, y, kernel)
    w = np.ones(problem.p) if weights is None else np.asarray(weights, dtype=float)
    order = np.argsort(lambdas)[::-1]
    fits: list[GroupLassoFit | None] = [None] * len(lambdas)
    b_prev = None
    for idx in order:
        lam = float(lambdas[idx])
        b, resid, converged, sweeps, _ = _solve(
            problem, lam, w, b_prev, tol, max_sweeps, False
        )
        fits[idx] = _finish(problem, kernel, b, resid, lam, w, converged, sweeps, None)
        b_prev = b
    return fits


def adaptive_group_lasso(
    blocks,
    y,
    kernel: GroupKernel,
    lambda2: float,
    first_stage: GroupLassoFit,
    tol: float = _DEFAULT_TOL,
    max_sweeps: int = _DEFAULT_MAX_SWEEPS,
    debug: bool = False,
) -> GroupLassoFit:
    """Second-stage fit with weights ``1 / first-stage norm``.

    Groups whose first-stage norm is numerically zero get infinite weight and
    are excluded outright; they can never re-enter.
    """
    w = adaptive_weights(first_stage)
    return group_lasso(blocks, y, kernel, lambda2, w, tol, max_sweeps, debug)


def adaptive_weights(first_stage: GroupLassoFit) -> np.ndarray:
    norms = first_stage.group_norms
    return np.where(norms > ACTIVE_TOL, 1.0 / np.maximum(norms, ACTIVE_TOL), np.inf)


def lambda_max(blocks, y, kernel: GroupKernel, weights=None) -> float:
    """Smallest penalty at which the all-zero solution is stationary."""
    problem = _Problem(blocks, y, kernel)
    w = np.ones(problem.p) if weights is None else np.asarray(weights, dtype=float)
    grads = problem.block_gradients(np.asarray(y, dtype=float).ravel())
    vals = [
        float(np.linalg.norm(grads[j])) / w[j]
        for j in range(problem.p)
        if np.isfinite(w[j]) and w[j] > 0
    ]
    return max(vals) if vals else 0.0


def kkt_residuals(blocks, y, kernel: GroupKernel, fit: GroupLassoFit) -> tuple[float, float]:
    """KKT violation of a fit, in the transformed coordinates.

    Returns ``(stationarity, inactivity)``: the largest residual of the
    stationarity condition over active groups and the largest excess of the
    block-gradient norm over ``lam * w_j`` for zero groups. Both are absolute
    values on the gradient scale.
    """
    problem = _Problem(blocks, y, kernel)
    b = [problem.A[j] @ fit.coefficients[j] for j in range(problem.p)]
    resid = problem.y - problem.W @ np.concatenate(b)
    grads = problem.block_gradients(resid)
    stat = 0.0
    inact = 0.0
    for j in range(problem.p):
        w = fit.weights[j]
        if not np.isfinite(w):
            continue
        bn = math.sqrt(float(b[j] @ b[j]))
        if bn > ACTIVE_TOL:
            d, Q = problem.H_eig[j]
            # gradient of the smooth part minus g, plus the penalty subgradient
            res = -grads[j] + fit.lam * w * b[j] / bn
            stat = max(stat, float(np.abs(res).max()))
        else:
            inact = max(inact, float(np.linalg.norm(grads[j])) - fit.lam * w)
    return stat, max(inact, 0.0)


# ---------------------------------------------------------------------------
# Marginal knot selection and the full pipeline
# ---------------------------------------------------------------------------

def marginal_knots(
    dataset: Dataset,
    degree: int = 3,
    lambda0_grid=None,
    alpha: float = DEFAULT_ALPHA,
    candidate_grid=None,
) -> tuple[PredictorKnots, list[BSplineBasis]]:
    """One-step knot selection of each predictor against the response alone."""
    boundary = (float(dataset.u.min()), float(dataset.u.max()))
    per = []
    for j in range(dataset.p):
        fit = fit_one_step(
            dataset.single_predictor(j), degree, lambda0_grid, alpha, candidate_grid
        )
        per.append(fit.knots.per_predictor[0])
    knots = PredictorKnots(tuple(per))
    bases = [BSplineBasis(degree, k, boundary) for k in knots.per_predictor]
    return knots, bases


@dataclass(frozen=True)
class SelectionReport:
    """Outcome of the two-stage selection pipeline.

    ``active`` uses 1-based predictor numbers, matching the ``x1..xp`` column
    names of the CSV interfaces. ``group_norms`` are the coefficient-function
    norms on the original (unstandardized) predictor scale.
    """

    active: tuple[int, ...]
    group_norms: np.ndarray
    lambda1: float
    lambda2: float
    bic: float
    knots_per_predictor: tuple[np.ndarray, ...]
    degree: int
    first_stage: GroupLassoFit = field(repr=False, compare=False)
    second_stage: GroupLassoFit = field(repr=False, compare=False)

    def to_json(self) -> str:
        doc = {
            "active": list(self.active),
            "group_norms": [float(v) for v in self.group_norms],
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "bic": self.bic,
            "knots_per_predictor": [k.tolist() for k in self.knots_per_predictor],
        }
        return json.dumps(doc, indent=2)


def _selection_bic(rss: float, active_sizes, n: int) -> float:
    df = sum(active_sizes)
    return n * math.log(max(rss / n, _BIC_VAR_FLOOR)) + df * math.log(n)


def _refit_active(blocks, y, active, sizes, n):
    """Least-squares refit on the active groups: (bic, per-group coefficients).

    The penalized fit's own residuals are inflated by shrinkage, which biases
    the penalty search toward needlessly small penalties; scoring the refit
    measures what the selected groups explain. Over-parameterized active
    sets score +inf and return no coefficients.
    """
    if not active:
        return _selection_bic(float(y @ y), [], n), {}
    df = sum(sizes[j] for j in active)
    if df >= n:
        return math.inf, None
    D = np.hstack([blocks[j] for j in active])
    coef, _, _, _ = np.linalg.lstsq(D, y, rcond=1e-10)
    r = y - D @ coef
    bic = _selection_bic(float(r @ r), [sizes[j] for j in active], n)
    out = {}
    at = 0
    for j in active:
        out[j] = coef[at : at + sizes[j]]
        at += sizes[j]
    return bic, out


def _refit_bic(blocks, y, active, sizes, n) -> float:
    return _refit_active(blocks, y, active, sizes, n)[0]


# Stop descending the penalty path once the BIC has strictly worsened at
# this many grid points since the incumbent (the BIC profile is effectively
# unimodal in the penalty; this avoids solving the dense, never-selected
# small-penalty tail). Plateaus where the active set is unchanged do not
# count toward stopping.
_PATH_PATIENCE = 6


def _descend_path_best_bic(problem, kernel, blocks, y, sizes, lambdas, weights):
    """Warm-started descent of the penalty grid.

    Returns the best-BIC fit, its BIC, and the per-group least-squares refit
    coefficients of its active set.
    """
    n = problem.n
    order = np.argsort(lambdas)[::-1]
    b_prev = None
    best_fit = None
    best_bic = math.inf
    best_refit = {}
    worse = 0
    for idx in order:
        lam = float(lambdas[idx])
        b, resid, converged, sweeps, _ = _solve(problem, lam, weights, b_prev)
        b_prev = b
        fit = _finish(problem, kernel, b, resid, lam, weights, converged, sweeps, None)
        bic, refit = _refit_active(blocks, y, list(fit.active_set), sizes, n)
        tol = 1e-9 * max(1.0, abs(best_bic) if np.isfinite(best_bic) else 1.0)
        if bic < best_bic - tol:
            best_fit, best_bic, best_refit = fit, bic, refit
            worse = 0
        elif bic > best_bic + tol:
            worse += 1
            if worse >= _PATH_PATIENCE:
                break
    return best_fit, best_bic, best_refit


def _lambda_grid(lmax: float, n_points: int = 25) -> np.ndarray:
    return np.geomspace(1e-3 * lmax, lmax, n_points)


def _equidistant_knots(u: np.ndarray, n_knots: int) -> np.ndarray | None:
    """Interior knots at equally spaced quantiles, or None when they collide."""
    qs = np.quantile(u, np.arange(1, n_knots + 1) / (n_knots + 1))
    lo, hi = u.min(), u.max()
    if np.any(np.diff(qs) <= 0) or qs[0] <= lo or qs[-1] >= hi:
        return None
    return qs


def select_variables(
    dataset: Dataset,
    degree: int = 3,
    lambda0_grid=None,
    lambda1_grid=None,
    lambda2_grid=None,
    alpha: float = DEFAULT_ALPHA,
    candidate_grid=None,
    knot_mode: str = "adaptive",
    equidistant_max_knots: int = 10,
) -> SelectionReport:
    """Run the full pipeline: marginal knots, group lasso, adaptive group lasso.

    Predictors are rescaled to unit variance before penalization (so the
    group penalties are comparable) and the reported norms are mapped back to
    the original scale. ``knot_mode="equidistant"`` replaces the marginal
    knot selection by one shared equidistant-quantile knot vector whose count
    is chosen by the final BIC, as a baseline.
    """
    scale = dataset.X.std(axis=0)
    scale[scale == 0] = 1.0
    Xs = dataset.X / scale
    scaled = Dataset(Xs, dataset.u, dataset.y, dataset.individual_id)

    if knot_mode == "adaptive":
        knots, bases = marginal_knots(scaled, degree, lambda0_grid, alpha, candidate_grid)
        return _select_with_bases(
            scaled, scale, knots, bases, degree, lambda1_grid, lambda2_grid
        )
    if knot_mode == "equidistant":
        best = None
        boundary = (float(dataset.u.min()), float(dataset.u.max()))
        for L in range(1, equidistant_max_knots + 1):
            qs = _equidistant_knots(scaled.u, L)
            if qs is None:
                continue
            knots = PredictorKnots.shared(qs, scaled.p)
            bases = [BSplineBasis(degree, qs, boundary) for _ in range(scaled.p)]
            report = _select_with_bases(
                scaled, scale, knots, bases, degree, lambda1_grid, lambda2_grid
            )
            if best is None or report.bic < best.bic:
                best = report
        if best is None:
            raise ValueError("no admissible equidistant knot count")
        return best
    raise ValueError(f"unknown knot mode {knot_mode!r}")


def _select_with_bases(scaled, scale, knots, bases, degree, lambda1_grid, lambda2_grid):
    n = scaled.n
    u = scaled.u
    y = scaled.y
    blocks = [
        scaled.X[:, j : j + 1] * bspline_matrix(bases[j], u) for j in range(scaled.p)
    ]
    kernel = group_kernel(bases, u)
    sizes = [b.n_basis for b in bases]
    problem = _Problem(blocks, y, kernel)

    lmax1 = lambda_max(blocks, y, kernel)
    if lmax1 <= 0:
        empty = group_lasso(blocks, y, kernel, 1.0)
        return _report(empty, empty, scale, kernel, knots, degree, math.inf, 1.0, 1.0)
    grid1 = _lambda_grid(lmax1) if lambda1_grid is None else np.asarray(lambda1_grid, float)
    stage1, _, refit1 = _descend_path_best_bic(
        problem, kernel, blocks, y, sizes, grid1, np.ones(len(blocks))
    )

    # adaptive weights from the de-biased (least-squares refit) first stage:
    # shrunken norms would push weak groups' re-entry below the grid floor
    weights = np.full(len(blocks), np.inf)
    for j, c in (refit1 or {}).items():
        norm = math.sqrt(max(float(c @ (kernel.matrices[j] @ c)), 0.0))
        if norm > ACTIVE_TOL:
            weights[j] = 1.0 / norm
    if not np.isfinite(weights).any():
        bic = _refit_bic(blocks, y, [], sizes, n)
        return _report(stage1, stage1, scale, kernel, knots, degree, bic, stage1.lam, 0.0)

    lmax2 = lambda_max(blocks, y, kernel, weights)
    grid2 = _lambda_grid(lmax2) if lambda2_grid is None else np.asarray(lambda2_grid, float)
    stage2, bic2, _ = _descend_path_best_bic(problem, kernel, blocks, y, sizes, grid2, weights)
    return _report(stage1, stage2, scale, kernel, knots, degree, bic2, stage1.lam, stage2.lam)


def _report(stage1, stage2, scale, kernel, knots, degree, bic, lam1, lam2):
    # back to the original predictor scale: c_j_orig = c_j / s_j
    norms = stage2.group_norms / scale
    active = tuple(int(j) + 1 for j in stage2.active_set)
    return SelectionReport(
        active=active,
        group_norms=norms,
        lambda1=float(lam1),
        lambda2=float(lam2),
        bic=float(bic),
        knots_per_predictor=knots.per_predictor,
        degree=degree,
        first_stage=stage1,
        second_stage=stage2,
    )
