import numpy as np
import pytest

from vcspline.lsq import ols_fit


def test_mean_fit():
    res = ols_fit(np.ones((4, 1)), np.array([1.0, 2.0, 3.0, 4.0]))
    assert res.coefficients == pytest.approx([2.5])
    assert res.rss == pytest.approx(5.0)
    assert res.residual_variance == pytest.approx(1.25)


def test_exact_interpolation():
    rng = np.random.default_rng(1)
    y = rng.normal(size=5)
    res = ols_fit(np.eye(5), y)
    assert res.rss == pytest.approx(0.0, abs=1e-24)
    assert res.coefficients == pytest.approx(y)


def test_matches_normal_equations_oracle():
    rng = np.random.default_rng(2)
    A = rng.normal(size=(20, 3))
    y = A @ np.array([1.5, -2.0, 0.25]) + rng.normal(0, 0.1, 20)
    res = ols_fit(A, y)
    oracle = np.linalg.solve(A.T @ A, A.T @ y)
    assert res.coefficients == pytest.approx(oracle, rel=1e-8)
    assert res.rank == 3


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        ols_fit(np.array([[1.0], [np.nan]]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        ols_fit(np.ones((2, 1)), np.array([1.0, np.inf]))


def test_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        ols_fit(np.ones((3, 1)), np.ones(2))


def test_rank_deficient_minimum_norm():
    # duplicated column: the minimum-norm solution splits the weight evenly
    A = np.column_stack([np.ones(6), np.ones(6)])
    y = np.full(6, 3.0)
    res = ols_fit(A, y)
    assert res.rank == 1
    assert res.coefficients == pytest.approx([1.5, 1.5])
    assert res.rss == pytest.approx(0.0, abs=1e-20)


def test_exactly_linear_response_tiny_rss():
    rng = np.random.default_rng(3)
    A = rng.normal(size=(30, 4))
    y = A @ np.array([2.0, -1.0, 0.5, 3.0])
    res = ols_fit(A, y)
    assert res.rss <= 1e-18 * float(y @ y)


def test_first_order_optimality():
    # perturbing any coordinate of the solution never decreases the rss
    rng = np.random.default_rng(4)
    for _ in range(10):
        A = rng.normal(size=(15, 3))
        y = rng.normal(size=15)
        res = ols_fit(A, y)
        for k in range(3):
            for delta in (1e-4, -1e-4):
                c = res.coefficients.copy()
                c[k] += delta
                r = y - A @ c
                assert float(r @ r) >= res.rss - 1e-12
