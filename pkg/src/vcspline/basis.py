"""B-spline bases with clamped (repeated) boundary knots.

A basis of degree ``D`` with ``L`` strictly increasing interior knots has
``D + L + 1`` member functions. Boundary knots are repeated ``D + 1`` times
at each end, so the basis interpolates at the boundary and sums to one
everywhere on the closed interval.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["BSplineBasis", "bspline_eval", "bspline_matrix", "bspline_design"]


@dataclass(frozen=True)
class BSplineBasis:
    """Clamped polynomial B-spline basis on a closed interval.

    Parameters
    ----------
    degree : int
        Polynomial degree ``D >= 0``.
    interior_knots : np.ndarray
        Strictly increasing knots, all strictly inside ``boundary``.
    boundary : tuple of float
        ``(u_min, u_max)`` with ``u_min < u_max``. Evaluation points outside
        this interval are clamped to it.
    """

    degree: int
    interior_knots: np.ndarray
    boundary: tuple[float, float]

    def __post_init__(self):
        knots = np.atleast_1d(np.asarray(self.interior_knots, dtype=float))
        object.__setattr__(self, "interior_knots", knots)
        lo, hi = self.boundary
        if self.degree < 0 or int(self.degree) != self.degree:
            raise ValueError(f"degree must be a non-negative integer, got {self.degree}")
        if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
            raise ValueError(f"invalid boundary {self.boundary}")
        if knots.size:
            if not np.all(np.isfinite(knots)):
                raise ValueError("interior knots must be finite")
            if np.any(np.diff(knots) <= 0):
                raise ValueError("interior knots must be strictly increasing")
            if knots[0] <= lo or knots[-1] >= hi:
                raise ValueError("interior knots must lie strictly inside the boundary")

    @property
    def n_basis(self) -> int:
        return self.degree + len(self.interior_knots) + 1

    def knot_vector(self) -> np.ndarray:
        """Full knot vector with each boundary knot repeated ``degree + 1`` times."""
        lo, hi = self.boundary
        return np.concatenate(
            [np.full(self.degree + 1, lo), self.interior_knots, np.full(self.degree + 1, hi)]
        )


def bspline_matrix(basis: BSplineBasis, u) -> np.ndarray:
    """Evaluate all basis functions at each point of ``u``.

    Points outside the boundary are clamped to it. Returns an array of shape
    ``(len(u), basis.n_basis)`` whose rows sum to one.
    """
    x = np.clip(np.asarray(u, dtype=float).ravel(), *basis.boundary)
    t = basis.knot_vector()
    deg = basis.degree
    m = basis.n_basis
    npts = x.shape[0]

    # Index of the knot span containing x; the rightmost point belongs to the
    # last non-empty span so the basis still sums to one there.
    span = np.searchsorted(t, x, side="right") - 1
    span = np.clip(span, deg, m - 1)

    # Triangular de Boor scheme over the deg+1 locally non-zero functions.
    vals = np.zeros((npts, deg + 1))
    vals[:, 0] = 1.0
    left = np.empty((npts, deg + 1))
    right = np.empty((npts, deg + 1))
    for j in range(1, deg + 1):
        left[:, j] = x - t[span + 1 - j]
        right[:, j] = t[span + j] - x
        saved = np.zeros(npts)
        for r in range(j):
            temp = vals[:, r] / (right[:, r + 1] + left[:, j - r])
            vals[:, r] = saved + right[:, r + 1] * temp
            saved = left[:, j - r] * temp
        vals[:, j] = saved

    out = np.zeros((npts, m))
    cols = span[:, None] - deg + np.arange(deg + 1)[None, :]
    out[np.arange(npts)[:, None], cols] = vals
    return out


def bspline_eval(basis: BSplineBasis, u: float) -> np.ndarray:
    """Evaluate all basis functions at a single point (clamped to the boundary)."""
    return bspline_matrix(basis, [u])[0]


def bspline_design(bases: list[BSplineBasis], X, u) -> np.ndarray:
    """Stack per-predictor blocks ``x_j * B_{j,k}(u)`` into one design matrix.

    Block ``j`` holds the ``bases[j].n_basis`` columns ``x[:, j] * B_{j,k}(u)``;
    the result has ``sum_j n_basis_j`` columns.
    """
    X = np.asarray(X, dtype=float)
    u = np.asarray(u, dtype=float).ravel()
    if X.ndim != 2:
        raise ValueError("X must be a 2-d array")
    n, p = X.shape
    if len(bases) != p:
        raise ValueError(f"got {len(bases)} bases for {p} predictors")
    if u.shape[0] != n:
        raise ValueError(f"length of u ({u.shape[0]}) does not match rows of X ({n})")
    blocks = [X[:, j : j + 1] * bspline_matrix(bases[j], u) for j in range(p)]
    return np.hstack(blocks)
