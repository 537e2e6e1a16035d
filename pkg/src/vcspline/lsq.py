"""Least-squares plumbing shared by every fitting routine.

All fits use the minimum-norm solution so that collinear designs (small
segments, duplicated predictors) degrade gracefully instead of erroring.
Residual variance follows the maximum-likelihood convention ``rss / n``.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["OlsResult", "ols_fit"]

# Singular values below RCOND * (largest singular value) are treated as zero.
RCOND = 1e-10


@dataclass(frozen=True)
class OlsResult:
    coefficients: np.ndarray
    rss: float
    residual_variance: float
    rank: int


def ols_fit(design, response) -> OlsResult:
    """Minimum-norm least squares of ``response`` on the columns of ``design``.

    Parameters
    ----------
    design : array of shape (n, q)
    response : array of shape (n,)

    Returns
    -------
    OlsResult
        Coefficients, residual sum of squares, ``rss / n`` and the numerical
        rank of the design.
    """
    A = np.asarray(design, dtype=float)
    y = np.asarray(response, dtype=float).ravel()
    if A.ndim != 2:
        raise ValueError("design must be a 2-d array")
    n, q = A.shape
    if n < 1 or q < 1:
        raise ValueError(f"design must be at least 1x1, got {A.shape}")
    if y.shape[0] != n:
        raise ValueError(f"response length {y.shape[0]} does not match {n} rows")
    if not np.all(np.isfinite(A)) or not np.all(np.isfinite(y)):
        raise ValueError("non-finite values in design or response")

    coef, _, rank, _ = np.linalg.lstsq(A, y, rcond=RCOND)
    resid = y - A @ coef
    rss = float(resid @ resid)
    return OlsResult(
        coefficients=coef,
        rss=rss,
        residual_variance=rss / n,
        rank=int(rank),
    )
