import numpy as np
import pytest

from kfr.krein import (
    NEAR_SINGULAR,
    REGULAR,
    KernelError,
    build_gram,
    j_inner,
    j_norm,
    norm_equivalence_constants,
    w_inner,
)
from kfr.linalg import frobenius


def random_invertible_symmetric(seed, d):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((d, d))
    M = (A + A.T) / 2.0
    # push eigenvalues away from zero while keeping both signs
    vals, vecs = np.linalg.eigh(M)
    vals = np.where(vals >= 0, vals + 0.5, vals - 0.5)
    return vecs @ np.diag(vals) @ vecs.T


class TestBuildGram:
    def test_identity(self):
        g = build_gram(np.eye(3))
        assert np.allclose(g.symmetry, np.eye(3), atol=1e-12)
        assert np.allclose(g.abs_matrix, np.eye(3), atol=1e-12)
        assert g.classification == REGULAR

    def test_diagonal_polar_factors(self):
        g = build_gram(np.diag([2.0, -3.0]))
        assert np.allclose(g.symmetry, np.diag([1.0, -1.0]), atol=1e-12)
        assert np.allclose(g.abs_matrix, np.diag([2.0, 3.0]), atol=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_polar_identities(self, seed):
        W = random_invertible_symmetric(seed, 6)
        g = build_gram(W)
        J, absW = g.symmetry, g.abs_matrix
        d = g.dim
        assert frobenius(J @ J - np.eye(d)) <= 1e-10
        assert frobenius(J - J.T) <= 1e-10
        assert frobenius(J @ absW - g.matrix) <= 1e-10
        assert frobenius(absW @ J - g.matrix) <= 1e-10
        assert frobenius(J @ g.matrix - g.matrix @ J) <= 1e-10
        assert frobenius(g.sqrt_abs @ g.sqrt_abs - absW) <= 1e-9

    def test_sqrt_factors_are_mutual_inverses(self):
        g = build_gram(random_invertible_symmetric(3, 5))
        assert frobenius(g.sqrt_abs @ g.inv_sqrt_abs - np.eye(5)) <= 1e-9

    def test_kernel_violation(self):
        with pytest.raises(KernelError):
            build_gram(np.diag([1.0, 0.0]))
        with pytest.raises(KernelError):
            build_gram(np.diag([1.0, 1e-16]))

    def test_classification_threshold(self):
        assert build_gram(np.eye(2)).classification == REGULAR
        g = build_gram(np.diag([1.0, 1e-8]))
        assert g.classification == NEAR_SINGULAR
        assert g.regularity.epsilon == pytest.approx(1e-8)
        assert build_gram(np.diag([1.0, 1e-3])).classification == REGULAR

    def test_regularity_report(self):
        g = build_gram(np.diag([2.0, -3.0]))
        assert g.regularity.min_abs_eigenvalue == pytest.approx(2.0)
        assert g.regularity.max_abs_eigenvalue == pytest.approx(3.0)
        assert g.regularity.condition_number == pytest.approx(1.5)

    def test_matrix_is_read_only(self):
        g = build_gram(np.eye(2))
        with pytest.raises(ValueError):
            g.matrix[0, 0] = 5.0


class TestInnerProducts:
    def test_negative_direction(self):
        g = build_gram(np.diag([1.0, -1.0]))
        e2 = np.array([0.0, 1.0])
        assert w_inner(g, e2, e2) == pytest.approx(-1.0)
        assert j_inner(g, e2, e2) == pytest.approx(1.0)

    def test_zero_vector(self):
        g = build_gram(np.diag([2.0, -3.0]))
        assert w_inner(g, np.zeros(2), np.array([1.0, 2.0])) == 0.0

    def test_direct_evaluation(self):
        g = build_gram(np.diag([2.0, -3.0]))
        ones = np.ones(2)
        assert w_inner(g, ones, ones) == pytest.approx(-1.0)
        assert j_inner(g, ones, ones) == pytest.approx(5.0)

    def test_orthogonal_coordinates(self):
        g = build_gram(np.diag([2.0, -3.0]))
        assert j_inner(g, np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_dimension_mismatch(self):
        g = build_gram(np.eye(2))
        with pytest.raises(ValueError):
            w_inner(g, np.ones(3), np.ones(2))

    def test_symmetry_of_form(self):
        g = build_gram(random_invertible_symmetric(7, 5))
        rng = np.random.default_rng(70)
        x, y = rng.standard_normal(5), rng.standard_normal(5)
        assert w_inner(g, x, y) == pytest.approx(w_inner(g, y, x), rel=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_fundamental_symmetry_links_the_forms(self, seed):
        # [Jx, y] agrees with [x, y]_J
        g = build_gram(random_invertible_symmetric(seed, 6))
        rng = np.random.default_rng(100 + seed)
        for _ in range(20):
            x, y = rng.standard_normal(6), rng.standard_normal(6)
            assert w_inner(g, g.symmetry @ x, y) == pytest.approx(
                j_inner(g, x, y), abs=1e-9
            )

    @pytest.mark.parametrize("seed", range(5))
    def test_sqrt_abs_is_an_isometry_into_the_plain_norm(self, seed):
        g = build_gram(random_invertible_symmetric(seed, 6))
        rng = np.random.default_rng(200 + seed)
        for _ in range(20):
            x = rng.standard_normal(6)
            assert np.linalg.norm(g.sqrt_abs @ x) ** 2 == pytest.approx(
                j_inner(g, x, x), abs=1e-9
            )

    @pytest.mark.parametrize("seed", range(5))
    def test_inv_sqrt_abs_is_an_isometry_into_the_j_product(self, seed):
        g = build_gram(random_invertible_symmetric(seed, 6))
        rng = np.random.default_rng(300 + seed)
        for _ in range(20):
            x, y = rng.standard_normal(6), rng.standard_normal(6)
            assert j_inner(
                g, g.inv_sqrt_abs @ x, g.inv_sqrt_abs @ y
            ) == pytest.approx(float(x @ y), abs=1e-9)


class TestNormEquivalence:
    def test_identity(self):
        assert norm_equivalence_constants(build_gram(np.eye(3))) == (1.0, 1.0)

    def test_diagonal(self):
        lower, upper = norm_equivalence_constants(build_gram(np.diag([2.0, -3.0])))
        assert lower == pytest.approx(2.0)
        assert upper == pytest.approx(3.0)

    def test_sampled_inequality(self):
        g = build_gram(random_invertible_symmetric(11, 6))
        lower, upper = norm_equivalence_constants(g)
        rng = np.random.default_rng(111)
        for _ in range(500):
            x = rng.standard_normal(6)
            x /= np.linalg.norm(x)
            jn = j_norm(g, x) ** 2
            assert lower - 1e-9 <= jn <= upper + 1e-9
