import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vcspline.basis import BSplineBasis, bspline_design, bspline_eval, bspline_matrix


def naive_cox_de_boor(x, t, k, i):
    """Textbook recursion, half-open intervals, no vectorization."""
    if k == 0:
        return 1.0 if t[i] <= x < t[i + 1] else 0.0
    out = 0.0
    if t[i + k] != t[i]:
        out += (x - t[i]) / (t[i + k] - t[i]) * naive_cox_de_boor(x, t, k - 1, i)
    if t[i + k + 1] != t[i + 1]:
        out += (t[i + k + 1] - x) / (t[i + k + 1] - t[i + 1]) * naive_cox_de_boor(x, t, k - 1, i + 1)
    return out


def naive_basis_row(basis, x):
    t = basis.knot_vector()
    lo, hi = basis.boundary
    x = min(max(x, lo), hi)
    if x == hi:
        # the naive half-open recursion drops the right endpoint; take the
        # left limit instead, which the clamped basis attains continuously
        x = hi - 1e-9 * (hi - lo)
    return np.array([naive_cox_de_boor(x, t, basis.degree, i) for i in range(basis.n_basis)])


def random_basis(rng, degree=None, n_knots=None):
    degree = rng.integers(0, 4) if degree is None else degree
    n_knots = rng.integers(0, 9) if n_knots is None else n_knots
    lo, hi = sorted(rng.normal(0, 2, 2))
    hi = max(hi, lo + 0.5)
    interior = np.sort(rng.uniform(lo, hi, n_knots))
    # enforce strict interior spacing
    interior = lo + (hi - lo) * (np.arange(1, n_knots + 1) + rng.random(n_knots) * 0.5) / (n_knots + 2)
    return BSplineBasis(int(degree), interior, (float(lo), float(hi)))


class TestBasisValidation:
    def test_rejects_unsorted_knots(self):
        with pytest.raises(ValueError):
            BSplineBasis(3, np.array([0.5, 0.2]), (0.0, 1.0))

    def test_rejects_knot_on_boundary(self):
        with pytest.raises(ValueError):
            BSplineBasis(2, np.array([0.0]), (0.0, 1.0))

    def test_rejects_negative_degree(self):
        with pytest.raises(ValueError):
            BSplineBasis(-1, np.array([]), (0.0, 1.0))

    def test_n_basis_formula(self):
        b = BSplineBasis(3, np.array([0.3, 0.6]), (0.0, 1.0))
        assert b.n_basis == 3 + 2 + 1


class TestEval:
    def test_degree0_single_interval(self):
        b = BSplineBasis(0, np.array([]), (0.0, 1.0))
        assert bspline_eval(b, 0.4) == pytest.approx([1.0])

    def test_partition_of_unity_random_bases(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            b = random_basis(rng)
            u = rng.uniform(b.boundary[0], b.boundary[1], 200)
            u = np.concatenate([u, np.array(b.boundary)])
            M = bspline_matrix(b, u)
            assert np.all(np.abs(M.sum(axis=1) - 1) < 1e-12)
            assert np.all(M >= 0)
            assert np.all(M <= 1 + 1e-12)

    def test_matches_naive_recursion_cubic_one_knot(self):
        b = BSplineBasis(3, np.array([0.5]), (0.0, 1.0))
        got = bspline_eval(b, 0.25)
        want = naive_basis_row(b, 0.25)
        assert got == pytest.approx(want, abs=1e-12)

    def test_matches_naive_recursion_random(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            b = random_basis(rng)
            for x in rng.uniform(b.boundary[0], b.boundary[1], 4):
                assert bspline_eval(b, x) == pytest.approx(naive_basis_row(b, x), abs=1e-9)

    def test_matches_scipy_design_matrix(self):
        scipy_interp = pytest.importorskip("scipy.interpolate")
        rng = np.random.default_rng(3)
        for _ in range(20):
            b = random_basis(rng)
            u = rng.uniform(b.boundary[0], b.boundary[1], 50)
            ours = bspline_matrix(b, u)
            theirs = scipy_interp.BSpline.design_matrix(
                u, b.knot_vector(), b.degree
            ).toarray()
            assert ours == pytest.approx(theirs, abs=1e-12)

    def test_clamps_outside_boundary(self):
        b = BSplineBasis(2, np.array([0.5]), (0.0, 1.0))
        assert bspline_eval(b, -3.0) == pytest.approx(bspline_eval(b, 0.0))
        assert bspline_eval(b, 42.0) == pytest.approx(bspline_eval(b, 1.0))

    def test_local_support(self):
        # cubic with knot at 0.5: first basis function vanishes right of the knot
        b = BSplineBasis(3, np.array([0.5]), (0.0, 1.0))
        M = bspline_matrix(b, np.array([0.6, 0.9]))
        assert M[:, 0] == pytest.approx(0.0, abs=1e-15)

    @settings(max_examples=60, deadline=None)
    @given(
        degree=st.integers(0, 3),
        n_knots=st.integers(0, 8),
        points=st.lists(st.floats(0, 1), min_size=1, max_size=12),
    )
    def test_partition_of_unity_property(self, degree, n_knots, points):
        interior = np.linspace(0, 1, n_knots + 2)[1:-1]
        b = BSplineBasis(degree, interior, (0.0, 1.0))
        M = bspline_matrix(b, np.array(points))
        assert np.all(np.abs(M.sum(axis=1) - 1) < 1e-12)


class TestDesign:
    def test_constant_predictor_degree0(self):
        X = np.ones((4, 1))
        u = np.array([0.1, 0.3, 0.6, 0.9])
        b = BSplineBasis(0, np.array([]), (0.0, 1.0))
        D = bspline_design([b], X, u)
        assert D == pytest.approx(np.ones((4, 1)))

    def test_zero_predictor_zero_block(self):
        rng = np.random.default_rng(0)
        u = rng.random(6)
        X = np.column_stack([rng.normal(size=6), np.zeros(6)])
        b = BSplineBasis(2, np.array([0.5]), (0.0, 1.0))
        D = bspline_design([b, b], X, u)
        assert D[:, b.n_basis :] == pytest.approx(0.0)

    def test_degree1_hand_evaluated_hats(self):
        # degree 1, interior knot 0.5: hat functions at 0, 0.5, 1
        u = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
        x = np.array([2.0, -1.0, 3.0, 0.5, 4.0])
        b = BSplineBasis(1, np.array([0.5]), (0.0, 1.0))
        D = bspline_design([b], x[:, None], u)
        hats = np.array(
            [
                [1.0, 0.0, 0.0],
                [0.5, 0.5, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.5, 0.5],
                [0.0, 0.0, 1.0],
            ]
        )
        assert D == pytest.approx(x[:, None] * hats, abs=1e-14)

    def test_dimension_mismatch_rejected(self):
        b = BSplineBasis(1, np.array([0.5]), (0.0, 1.0))
        with pytest.raises(ValueError):
            bspline_design([b], np.ones((3, 1)), np.array([0.1, 0.2]))
        with pytest.raises(ValueError):
            bspline_design([b, b], np.ones((3, 1)), np.array([0.1, 0.2, 0.3]))
