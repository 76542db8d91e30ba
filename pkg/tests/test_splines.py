"""Tests for the univariate spline machinery."""

import numpy as np
import pytest

from coldwave.splines import (gauss_rule, derivative_matrix, make_basis,
                              make_knot_vector, interpolation_matrix,
                              histopolation_matrix)

from oracles import dense_basis_1d, fd_derivative


class TestKnotVector:

    def test_minimal_clamped(self):
        kv = make_knot_vector(1, 1, (0.0, 1.0))
        np.testing.assert_array_equal(kv.knots, [0.0, 0.0, 1.0, 1.0])
        assert kv.n_basis == 2

    def test_count_formula(self):
        # n_basis = len(knots) - degree - 1 for the clamped variant
        kv = make_knot_vector(4, 3, (0.0, 3 * np.pi))
        assert kv.n_basis == len(kv.knots) - kv.degree - 1 == 7

    def test_periodic_count(self):
        kv = make_knot_vector(4, 1, (0.0, 2 * np.pi), periodic=True)
        assert kv.n_basis == 4

    def test_nondecreasing(self):
        kv = make_knot_vector(7, 3, (0.0, 2.0))
        assert np.all(np.diff(kv.knots) >= 0)

    @pytest.mark.parametrize('bad', [
        dict(n_cells=0, degree=1, domain=(0, 1)),
        dict(n_cells=3, degree=-1, domain=(0, 1)),
        dict(n_cells=3, degree=1, domain=(1, 1)),
        dict(n_cells=3, degree=1, domain=(2, 1)),
    ])
    def test_invalid_arguments(self, bad):
        with pytest.raises(ValueError):
            make_knot_vector(**bad)


class TestEvaluation:

    def test_hat_midpoint(self):
        basis = make_basis(1, 1, (0.0, 1.0))
        first, vals = basis.eval_basis(np.array([0.5]))
        assert first[0] == 0
        np.testing.assert_allclose(vals[0, 0], [0.5, 0.5])

    @pytest.mark.parametrize('periodic', [False, True])
    @pytest.mark.parametrize('degree', [1, 2, 3])
    def test_partition_of_unity(self, periodic, degree):
        basis = make_basis(6, degree, (0.0, 2.0), periodic=periodic)
        rng = np.random.default_rng(11)
        x = rng.uniform(-2.0 if periodic else 0.0, 4.0 if periodic else 2.0, 200)
        dense = basis.eval_dense(x)[0]
        np.testing.assert_allclose(dense.sum(axis=1), 1.0, atol=1e-13)

    def test_out_of_domain(self):
        basis = make_basis(3, 2, (0.0, 1.0))
        with pytest.raises(ValueError, match='outside domain'):
            basis.eval_basis(np.array([1.2]))

    @pytest.mark.parametrize('periodic', [False, True])
    def test_matches_scipy_elements(self, periodic):
        basis = make_basis(5, 3, (0.0, 1.3), periodic=periodic)
        rng = np.random.default_rng(2)
        x = rng.uniform(0.0, 1.3, 80)
        np.testing.assert_allclose(basis.eval_dense(x)[0],
                                   dense_basis_1d(basis, x), atol=1e-13)

    def test_degenerate_periodic_single_cell(self):
        # one periodic cell collapses the space to constants, aliasing the
        # local functions onto one global index
        basis = make_basis(1, 1, (0.0, 2 * np.pi), periodic=True)
        assert basis.n_basis == 1
        x = np.linspace(-5.0, 9.0, 23)
        np.testing.assert_allclose(basis.eval_dense(x)[0][:, 0], 1.0,
                                   atol=1e-14)


class TestDerivativeIdentity:

    @pytest.mark.parametrize('periodic', [False, True])
    @pytest.mark.parametrize('degree', [1, 2, 3])
    def test_spline_derivative_equals_m_combination(self, periodic, degree):
        basis = make_basis(7, degree, (0.0, 2 * np.pi), periodic=periodic)
        D, mbasis = derivative_matrix(basis)
        rng = np.random.default_rng(4)
        coeffs = rng.standard_normal(basis.n_basis)
        x = rng.uniform(0.0, 2 * np.pi, 150)
        lhs = basis.eval_dense(x, nderiv=1)[1] @ coeffs
        rhs = mbasis.eval_dense(x)[0] @ (D @ coeffs)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_against_finite_differences(self):
        # sample away from breakpoints so the wide stencil stays inside one
        # polynomial piece, where the 4th-order formula is exact
        basis = make_basis(6, 3, (0.0, 3.0), periodic=False)
        rng = np.random.default_rng(9)
        h = 1e-3
        x = []
        while len(x) < 100:
            cand = rng.uniform(0.0, 3.0)
            if np.min(np.abs(cand - basis.breakpoints)) > 3 * h:
                x.append(cand)
        x = np.array(x)
        analytic = basis.eval_dense(x, nderiv=1)[1]
        fd = fd_derivative(lambda p: basis.eval_dense(p)[0], x, h=h)
        np.testing.assert_allclose(analytic, fd, atol=1e-12)

    def test_incidence_entries(self):
        for periodic in (False, True):
            D, _ = derivative_matrix(make_basis(5, 2, (0, 1), periodic=periodic))
            assert set(np.unique(D.data)) <= {-1, 1}

    def test_clamped_is_forward_difference(self):
        D, _ = derivative_matrix(make_basis(4, 2, (0, 1)))
        expected = np.zeros((5, 6))
        for i in range(5):
            expected[i, i] = -1
            expected[i, i + 1] = 1
        np.testing.assert_array_equal(D.toarray(), expected)


class TestUnitIntegralBasis:

    def test_degree_one_parent_gives_cell_indicators(self):
        basis = make_basis(4, 1, (0.0, 1.0))
        mbasis = basis.derivative_basis()
        h = 0.25
        x = np.array([0.1, 0.35, 0.6, 0.85])
        dense = mbasis.eval_dense(x)[0]
        np.testing.assert_allclose(dense, np.eye(4) / h, atol=1e-14)

    @pytest.mark.parametrize('periodic', [False, True])
    def test_unit_integrals(self, periodic):
        basis = make_basis(6, 3, (0.0, 1.5), periodic=periodic)
        mbasis = basis.derivative_basis()
        rule = gauss_rule(5, mbasis.breakpoints)
        integrals = rule.flat_weights @ mbasis.eval_dense(rule.flat_points)[0]
        np.testing.assert_allclose(integrals, 1.0, atol=1e-13)

    def test_degree_zero_parent_rejected(self):
        with pytest.raises(ValueError, match='degree >= 1'):
            make_basis(4, 0, (0.0, 1.0)).derivative_basis()


class TestGreville:

    def test_degree_one_two_cells(self):
        basis = make_basis(2, 1, (0.0, 1.0))
        np.testing.assert_allclose(basis.greville(), [0.0, 0.5, 1.0])

    def test_symmetry_and_count(self):
        basis = make_basis(6, 3, (0.0, 1.0))
        g = basis.greville()
        assert len(g) == basis.n_basis
        np.testing.assert_allclose(g + g[::-1], 1.0, atol=1e-14)

    def test_interpolation_histopolation_commute(self):
        # 1D backbone of the commuting projections:
        # integrating a spline derivative over consecutive Greville
        # intervals equals differencing its point values
        for periodic in (False, True):
            basis = make_basis(7, 3, (0.0, 1.0), periodic=periodic)
            D, mbasis = derivative_matrix(basis)
            V = interpolation_matrix(basis)
            H = histopolation_matrix(mbasis, basis.greville())
            n = basis.n_basis
            if periodic:
                delta = -np.eye(n)
                for i in range(n):
                    delta[i, (i + 1) % n] += 1
            else:
                delta = np.zeros((n - 1, n))
                for i in range(n - 1):
                    delta[i, i] = -1
                    delta[i, i + 1] = 1
            np.testing.assert_allclose(H @ D.toarray(), delta @ V, atol=1e-13)


class TestGaussRule:

    def test_single_point(self):
        rule = gauss_rule(1, [0.0, 1.0])
        np.testing.assert_allclose(rule.points, [[0.5]])
        np.testing.assert_allclose(rule.weights, [[1.0]])

    def test_cubic_exactness(self):
        rule = gauss_rule(2, [0.0, 1.0])
        np.testing.assert_allclose((rule.flat_weights * rule.flat_points ** 3).sum(),
                                   0.25, atol=1e-15)

    def test_weights_sum_to_measure(self):
        rule = gauss_rule(4, np.linspace(0.3, 2.1, 7))
        np.testing.assert_allclose(rule.weights.sum(axis=1), 1.8 / 6,
                                   atol=1e-14)

    @pytest.mark.parametrize('n_points', [1, 2, 3, 5])
    def test_polynomial_exactness_property(self, n_points):
        rng = np.random.default_rng(n_points)
        rule = gauss_rule(n_points, [0.0, 0.7, 1.1])
        for _ in range(5):
            coeff = rng.standard_normal(2 * n_points)  # degree 2n-1
            poly = np.polynomial.Polynomial(coeff)
            exact = (poly.integ()(1.1) - poly.integ()(0.0))
            approx = (rule.flat_weights * poly(rule.flat_points)).sum()
            np.testing.assert_allclose(approx, exact, rtol=1e-12, atol=1e-12)

    def test_invalid(self):
        with pytest.raises(ValueError):
            gauss_rule(0, [0, 1])
