"""The observation container shared by the fitting and selection modules."""

from dataclasses import dataclass

import numpy as np

__all__ = ["Dataset"]


@dataclass(frozen=True)
class Dataset:
    """Observations ``(X_i, u_i, y_i)`` with an optional longitudinal grouping.

    ``X`` is ``(n, p)``, ``u`` and ``y`` are length ``n``. ``individual_id``
    groups repeated observations of the same unit; it is only consumed by the
    simulation metrics and never by the fitting code itself.
    """

    X: np.ndarray
    u: np.ndarray
    y: np.ndarray
    individual_id: np.ndarray | None = None

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        u = np.asarray(self.u, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        if X.shape[0] == 1 and u.shape[0] > 1 and X.shape[1] == u.shape[0]:
            X = X.T  # a 1-d predictor vector was passed
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "y", y)
        n, p = X.shape
        if p < 1 or n < 1:
            raise ValueError(f"need n >= 1 and p >= 1, got X of shape {X.shape}")
        if u.shape[0] != n or y.shape[0] != n:
            raise ValueError(
                f"inconsistent lengths: X has {n} rows, u has {u.shape[0]}, y has {y.shape[0]}"
            )
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(u)) and np.all(np.isfinite(y))):
            raise ValueError("non-finite values in dataset")
        if self.individual_id is not None:
            ids = np.asarray(self.individual_id)
            if ids.shape[0] != n:
                raise ValueError("individual_id length does not match observations")
            object.__setattr__(self, "individual_id", ids)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def single_predictor(self, j: int, response=None) -> "Dataset":
        """Marginal dataset of predictor ``j`` (0-based), optionally with a new response."""
        y = self.y if response is None else response
        return Dataset(self.X[:, [j]], self.u, y, self.individual_id)
