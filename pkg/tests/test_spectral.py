import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from fracspectral.cases import get_case
from fracspectral.errors import AccuracyError, DomainError
from fracspectral.fracops import apply_L_to_weighted_polynomial
from fracspectral.jacobi import eval_G, eval_G_all, g_coefficients, gauss_jacobi_rule, norm_G_squared
from fracspectral.params import FractionalParams
from fracspectral.spectral import (
    PowerTerm,
    RhsFunction,
    SpectralProblem,
    SpectralSolution,
    eval_solution,
    graded_cells,
    power_moments,
    project_rhs,
    pseudo_eigenvalue,
    solve,
    truncated_rhs,
    weighted_error,
)


def _problem(case_id):
    return SpectralProblem(get_case(case_id).params)


def _monomial_coeffs(family, coeffs):
    """Monomial coefficients of sum_j coeffs[j] G_j."""
    out = np.zeros(len(coeffs))
    for j, c in enumerate(coeffs):
        out[: j + 1] += c * g_coefficients(family, j)
    return out


class TestEigenvalues:
    def test_example_value(self):
        lam = pseudo_eigenvalue(FractionalParams(1.4, 0.5), 0)
        assert lam == pytest.approx(-math.gamma(2.4) * math.cos(0.7 * math.pi), rel=1e-13)
        assert lam == pytest.approx(0.7302, abs=1e-4)

    @pytest.mark.parametrize("alpha,r", [(1.4, 0.5), (1.6, 0.2764), (1.2, 0.7236)])
    def test_positive_increasing(self, alpha, r):
        lam = pseudo_eigenvalue(FractionalParams(alpha, r), np.arange(151))
        assert np.all(lam > 0)
        assert np.all(np.diff(lam) > 0)

    def test_growth(self):
        alpha = 1.4
        lam = pseudo_eigenvalue(FractionalParams(alpha, 0.5), 100)
        lam0 = pseudo_eigenvalue(FractionalParams(alpha, 0.5), 0)
        assert lam / (lam0 / math.gamma(1 + alpha) * 100**alpha) == pytest.approx(1.0, rel=0.02)

    @given(st.floats(1.05, 1.95), st.floats(0.05, 0.95))
    def test_adjoint_swap(self, alpha, r):
        p = FractionalParams(alpha, r)
        n = np.arange(10)
        np.testing.assert_allclose(pseudo_eigenvalue(p.adjoint, n), pseudo_eigenvalue(p, n, adjoint=True), rtol=1e-10)

    def test_negative(self):
        with pytest.raises(DomainError):
            pseudo_eigenvalue(FractionalParams(1.4, 0.5), -1)


class TestProjection:
    def test_zero(self):
        out = project_rhs(_problem(1), RhsFunction.zero(), 10)
        np.testing.assert_array_equal(out, np.zeros(11))

    def test_constant(self):
        case = get_case(3)
        prob = SpectralProblem(case.params)
        lam0 = pseudo_eigenvalue(case.params, 0)
        out = project_rhs(prob, RhsFunction.constant(lam0), 20)
        assert out[0] == pytest.approx(lam0 * norm_G_squared(prob.test, 0), rel=1e-13)
        assert np.all(np.abs(out[1:]) <= 1e-13 * abs(out[0]))

    @pytest.mark.parametrize("case_id", [1, 2])
    def test_routes_agree(self, case_id):
        case = get_case(case_id)
        prob = SpectralProblem(case.params)
        exact = project_rhs(prob, case.rhs, 30)
        quad = project_rhs(prob, case.rhs, 30, method="quadrature")
        np.testing.assert_allclose(exact, quad, rtol=0, atol=1e-12 * np.abs(exact).max())

    @pytest.mark.parametrize("case_id", [1, 2])
    def test_against_adaptive_quadrature(self, case_id):
        case = get_case(case_id)
        prob = SpectralProblem(case.params)
        out = project_rhs(prob, case.rhs, 6)
        wa, wb = prob.omega_star_exponents
        for i in range(7):
            ref = 0.0
            for t in case.rhs.terms:
                val, _ = integrate.quad(lambda x: t.coeff * eval_G(prob.test, i, x), 0, 1, weight="alg",
                                        wvar=(wa + t.left_exp, wb + t.right_exp), epsabs=0, epsrel=1e-12, limit=200)
                ref += val
            assert out[i] == pytest.approx(ref, rel=1e-8, abs=1e-12)

    def test_smooth_part(self):
        prob = _problem(2)
        f = RhsFunction.from_callable(np.exp)
        out = project_rhs(prob, f, 5)
        wa, wb = prob.omega_star_exponents
        ref, _ = integrate.quad(lambda x: math.exp(x) * eval_G(prob.test, 2, x), 0, 1, weight="alg", wvar=(wa, wb))
        assert out[2] == pytest.approx(ref, rel=1e-9)

    def test_unresolved_raises(self):
        prob = _problem(1)
        f = RhsFunction.from_callable(lambda x: np.sin(400 * x))
        with pytest.raises(AccuracyError):
            project_rhs(prob, f, 5)

    def test_two_sided_term_uses_quadrature(self):
        prob = _problem(1)
        assert power_moments(0.7, 0.7, PowerTerm(1.0, -0.2, -0.2), 4, prob.test) is None


class TestSolve:
    def test_example3_exact(self):
        case = get_case(3)
        sol = solve(SpectralProblem(case.params), case.rhs, 20)
        assert sol.coeffs[0] == pytest.approx(1.0, abs=1e-12)
        assert np.max(np.abs(sol.coeffs[1:])) <= 1e-10
        assert eval_solution(sol, 0.5) == pytest.approx(0.5**1.6, rel=1e-12)

    @pytest.mark.parametrize("params", [FractionalParams(1.4, 0.5), FractionalParams.from_beta(1.6, 0.9)])
    def test_eigen_inversion(self, params):
        prob = SpectralProblem(params)
        lam3 = pseudo_eigenvalue(params, 3)
        g = g_coefficients(prob.test, 3)
        f = RhsFunction.from_callable(lambda x: lam3 * np.polynomial.Polynomial(g)(x))
        sol = solve(prob, f, 8)
        expected = np.zeros(9)
        expected[3] = 1.0
        np.testing.assert_allclose(sol.coeffs, expected, atol=1e-10)

    def test_basis_evaluation(self):
        prob = _problem(2)
        c = np.zeros(5)
        c[3] = 1.0
        lam = pseudo_eigenvalue(prob.params, np.arange(5))
        sol = SpectralSolution(4, c, lam, c * 0, prob)
        x = 0.3
        assert eval_solution(sol, x) == pytest.approx(prob.omega(x) * eval_G(prob.trial, 3, x), rel=1e-13)

    def test_endpoints(self):
        case = get_case(1)
        sol = solve(SpectralProblem(case.params), case.rhs, 12)
        assert eval_solution(sol, 0.0) == 0.0
        assert eval_solution(sol, 1.0) == 0.0
        with pytest.raises(DomainError):
            eval_solution(sol, 1.5)

    def test_immutable(self):
        case = get_case(3)
        sol = solve(SpectralProblem(case.params), case.rhs, 3)
        with pytest.raises(ValueError):
            sol.coeffs[0] = 2.0

    def test_degree_cap(self):
        with pytest.raises(DomainError):
            solve(_problem(3), get_case(3).rhs, 151)

    def test_zero_rhs(self):
        sol = solve(_problem(1), RhsFunction.zero(), 7)
        assert np.all(sol.coeffs == 0)

    @pytest.mark.parametrize("params", [FractionalParams(1.5, 0.5), FractionalParams.from_beta(1.4, 0.85), FractionalParams(1.7, 0.7236)])
    def test_galerkin_equivalence(self, params):
        # <L u_N, omega* G*_i> from the polynomial action equals <f, omega* G*_i> from quadrature
        prob = SpectralProblem(params)
        fpoly = np.polynomial.Polynomial([0.3, -1.0, 2.0, 0.5])
        f = RhsFunction.from_callable(fpoly)
        N = 6
        sol = solve(prob, f, N)
        image = apply_L_to_weighted_polynomial(params, _monomial_coeffs(prob.trial, sol.coeffs))
        rule = gauss_jacobi_rule(*prob.omega_star_exponents, 30)
        G = eval_G_all(prob.test, N, rule.nodes)
        lhs = G @ (rule.weights * image(rule.nodes))
        rhs = G @ (rule.weights * fpoly(rule.nodes))
        np.testing.assert_allclose(lhs, rhs, rtol=1e-8, atol=1e-8 * np.abs(rhs).max())

    def test_residual_identity(self):
        case = get_case(2)
        prob = SpectralProblem(case.params)
        sol = solve(prob, case.rhs, 10)
        image = apply_L_to_weighted_polynomial(case.params, _monomial_coeffs(prob.trial, sol.coeffs))
        x = np.linspace(0, 1, 9)
        np.testing.assert_allclose(image(x), truncated_rhs(sol)(x), rtol=1e-8, atol=1e-9)

    def test_truncated_rhs_converges(self):
        # for a polynomial f of degree 3, the truncated image equals f once N >= 3
        prob = _problem(4)
        fpoly = np.polynomial.Polynomial([1.0, 0.0, -2.0, 1.0])
        sol = solve(prob, RhsFunction.from_callable(fpoly), 5)
        x = np.linspace(0, 1, 7)
        np.testing.assert_allclose(truncated_rhs(sol)(x), fpoly(x), atol=1e-11)

    def test_adjoint_pairing(self):
        params = FractionalParams.from_beta(1.6, 0.9)
        prob = SpectralProblem(params)
        adj = prob.adjoint()
        assert adj.params.r == pytest.approx(1 - params.r)
        assert adj.trial == prob.test and adj.test == prob.trial
        assert adj.omega_exponents == pytest.approx(prob.omega_star_exponents)
        # L*(omega* G*_n) = lambda*_n G_n
        for n in range(8):
            image = apply_L_to_weighted_polynomial(adj.params, g_coefficients(prob.test, n)).coef
            target = pseudo_eigenvalue(params, n, adjoint=True) * g_coefficients(prob.trial, n)
            np.testing.assert_allclose(image, target, rtol=1e-10, atol=1e-12 * np.abs(target).max())
        lam2 = pseudo_eigenvalue(params, 2, adjoint=True)
        g = np.polynomial.Polynomial(g_coefficients(prob.trial, 2))
        sol = solve(adj, RhsFunction.from_callable(lambda x: lam2 * g(x)), 4)
        np.testing.assert_allclose(sol.coeffs, [0, 0, 1, 0, 0], atol=1e-10)


class TestErrors:
    def test_zero_error(self):
        case = get_case(3)
        prob = SpectralProblem(case.params)
        sol = solve(prob, case.rhs, 4)
        for which in ("L2", "L2_omega", "L2_omega_inv"):
            assert weighted_error(prob, sol, sol, which) <= 1e-14
            assert weighted_error(prob, sol, case.u_exact, which, case.u_over_omega) <= 1e-12

    def test_unknown_norm(self):
        case = get_case(3)
        prob = SpectralProblem(case.params)
        with pytest.raises(DomainError):
            weighted_error(prob, solve(prob, case.rhs, 2), case.u_exact, "H1")

    @pytest.mark.parametrize("N", [4, 10, 20, 40])
    def test_norm_ordering(self, N):
        case = get_case(1)
        prob = SpectralProblem(case.params)
        sol = solve(prob, case.rhs, N)
        e_omega = weighted_error(prob, sol, case.u_exact, "L2_omega")
        e = weighted_error(prob, sol, case.u_exact, "L2")
        e_inv = weighted_error(prob, sol, case.u_exact, "L2_omega_inv")
        assert e_omega <= e <= e_inv

    def test_against_adaptive_quadrature(self):
        case = get_case(2)
        prob = SpectralProblem(case.params)
        sol = solve(prob, case.rhs, 8)
        err = lambda x: case.u_exact(x) - eval_solution(sol, x)
        ref = sum(integrate.quad(lambda x: err(x) ** 2, a, b, epsabs=0, epsrel=1e-12, limit=400)[0]
                  for a, b in ((0, 0.5), (0.5, 1)))
        assert weighted_error(prob, sol, case.u_exact, "L2") == pytest.approx(math.sqrt(ref), rel=1e-7)

    def test_factored_matches_composite(self):
        case = get_case(4)
        prob = SpectralProblem(case.params)
        sol = solve(prob, RhsFunction.constant(1.0), 6)
        for which in ("L2", "L2_omega_inv"):
            a = weighted_error(prob, sol, case.u_exact, which, case.u_over_omega)
            b = weighted_error(prob, sol, case.u_exact, which)
            assert a == pytest.approx(b, rel=1e-8)

    def test_doubling_ratio(self):
        # N -> 2N reduces the omega^{-1} error at least as fast as (N + 2)^{-alpha} up to a factor 2
        case = get_case(1)
        prob = SpectralProblem(case.params)
        e = {N: weighted_error(prob, solve(prob, case.rhs, N), case.u_exact, "L2_omega_inv") for N in (10, 20)}
        bound = ((20 + 2) / (10 + 2)) ** (-case.alpha)
        assert e[20] / e[10] <= 2 * bound

    def test_spectral_solution_is_weighted_projection(self):
        # u_N / omega is the truncated omega-orthogonal expansion of u / omega
        case = get_case(1)
        prob = SpectralProblem(case.params)
        N = 6
        sol = solve(prob, case.rhs, N)
        for j in range(N + 1):
            num = sum(integrate.quad(lambda x: case.u_exact(x) * eval_G(prob.trial, j, x), a, b,
                                     epsabs=1e-14, epsrel=1e-10, limit=400)[0] for a, b in ((0, 0.5), (0.5, 1)))
            assert sol.coeffs[j] == pytest.approx(num / norm_G_squared(prob.trial, j), rel=1e-7, abs=1e-10)


def test_graded_cells():
    e = graded_cells()
    assert e[0] == 0.0 and e[-1] == 1.0
    assert np.all(np.diff(e) > 0)
    assert len(e) == 2 + 2 * 40 + 15
