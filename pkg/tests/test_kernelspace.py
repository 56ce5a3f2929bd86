import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from fracspectral.errors import DomainError, NumericError
from fracspectral.fem import Mesh, assemble
from fracspectral.kernelspace import (
    beta_from_r,
    boundary_shift,
    describe_kernel,
    kernel_K,
    kernel_annihilation_residual,
    kernel_exponents,
    kernel_flux_terms,
    kernel_k,
    r_from_beta,
)
from fracspectral.params import FractionalParams
from fracspectral.specfun import gamma, gauss_2f1

ALPHAS = (1.2, 1.4, 1.6, 1.8)
RS = (0.2764, 0.5, 0.7236)


class TestBetaFromR:
    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_half(self, alpha):
        assert beta_from_r(alpha, 0.5) == alpha / 2

    def test_example_values(self):
        assert beta_from_r(1.6, 0.2764) == pytest.approx(0.9, abs=1e-4)
        assert beta_from_r(1.4, 0.3149) == pytest.approx(0.85, abs=1e-4)

    @given(st.floats(1.01, 1.99), st.floats(0.01, 0.99))
    def test_residual(self, alpha, r):
        beta = beta_from_r(alpha, r)
        assert alpha - 1 < beta < 1
        assert abs(r_from_beta(alpha, beta) - r) <= 1e-10

    @pytest.mark.parametrize("alpha,r", [(0.9, 0.5), (2.0, 0.5), (1.5, 0.0), (1.5, 1.0), (1.5, 1.5)])
    def test_domain(self, alpha, r):
        with pytest.raises(DomainError):
            beta_from_r(alpha, r)

    def test_decreasing(self):
        alpha = 1.6
        betas = np.linspace(alpha - 1 + 1e-3, 1 - 1e-3, 200)
        rs = [r_from_beta(alpha, b) for b in betas]
        assert np.all(np.diff(rs) < 0)

    def test_multiple_roots_reported(self, monkeypatch):
        import fracspectral.params as prm

        monkeypatch.setattr(prm, "r_from_beta", lambda a, b: 0.5 + 0.1 * math.sin(40 * b))
        with pytest.raises(NumericError):
            prm.beta_from_r(1.5, 0.51)


class TestParams:
    def test_from_beta_roundtrip(self):
        p = FractionalParams.from_beta(1.4, 0.85)
        assert p.r == pytest.approx(0.3149, abs=1e-4)
        assert FractionalParams(1.4, p.r).beta == pytest.approx(0.85, abs=1e-10)

    def test_adjoint(self):
        p = FractionalParams(1.6, 0.2764)
        adj = p.adjoint
        assert adj.r == pytest.approx(1 - p.r, abs=1e-12)
        assert adj.beta == pytest.approx(p.alpha - p.beta)

    def test_frozen(self):
        p = FractionalParams(1.5, 0.5)
        with pytest.raises(Exception):
            p.alpha = 1.2

    def test_from_beta_domain(self):
        with pytest.raises(DomainError):
            FractionalParams.from_beta(1.5, 0.2)


class TestExponents:
    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_half(self, alpha):
        p, q = kernel_exponents(alpha, 0.5)
        assert p == pytest.approx(alpha / 2 - 1) and q == pytest.approx(alpha / 2 - 1)

    def test_figure_values(self):
        p, q = kernel_exponents(1.6, 0.2764)
        assert p == pytest.approx(-0.1, abs=1e-4)
        assert q == pytest.approx(-0.3, abs=1e-4)

    def test_r_to_one(self):
        alpha = 1.5
        p, q = kernel_exponents(alpha, 0.999)
        assert -0.01 < q < 0
        assert p == pytest.approx(alpha - 2, abs=0.01)

    @pytest.mark.parametrize("alpha", ALPHAS)
    @pytest.mark.parametrize("r", RS)
    def test_conditions(self, alpha, r):
        d = describe_kernel(alpha, r)
        assert abs(d.condition_i()) <= 1e-10
        assert abs(d.condition_ii()) <= 1e-10
        beta = d.beta
        assert abs(r * math.sin(math.pi * (alpha - beta)) - (1 - r) * math.sin(math.pi * beta)) <= 1e-10


class TestKernelFunction:
    def test_zero(self):
        assert kernel_K(1.6, 0.3, 0.0) == 0.0

    def test_half_form(self):
        alpha = 1.6
        x = np.linspace(0, 1, 11)
        ref = 2 / alpha * x ** (alpha / 2) * gauss_2f1(alpha / 2, 1 - alpha / 2, 1 + alpha / 2, x)
        np.testing.assert_allclose(kernel_K(alpha, 0.5, x), ref, rtol=1e-13)

    @pytest.mark.parametrize("alpha,r", [(1.6, 0.5), (1.6, 0.2764), (1.4, 0.3149), (1.8, 0.7236)])
    def test_derivative(self, alpha, r):
        h = 1e-5
        fd = (kernel_K(alpha, r, 0.5 + h) - kernel_K(alpha, r, 0.5 - h)) / (2 * h)
        assert fd == pytest.approx(kernel_k(alpha, r, 0.5), rel=1e-6)

    @pytest.mark.parametrize("alpha,r", [(1.6, 0.2764), (1.2, 0.5), (1.8, 0.7236)])
    def test_primitive_by_quadrature(self, alpha, r):
        p, q = kernel_exponents(alpha, r)
        for x in (0.2, 0.5, 0.93, 1.0):
            val, _ = integrate.quad(lambda s: (1 - s) ** q, 0, x, weight="alg", wvar=(p, 0.0)) if x < 1 else \
                integrate.quad(lambda s: 1.0, 0, 1, weight="alg", wvar=(p, q))
            assert kernel_K(alpha, r, x) == pytest.approx(val, rel=1e-10)

    def test_monotone(self):
        x = np.linspace(0, 1, 400)
        assert np.all(np.diff(kernel_K(1.4, 0.3149, x)) > 0)

    def test_domain(self):
        with pytest.raises(DomainError):
            kernel_K(1.5, 0.5, 1.2)


class TestAnnihilation:
    @pytest.mark.parametrize("alpha", ALPHAS)
    @pytest.mark.parametrize("r", RS)
    def test_grid(self, alpha, r):
        x = np.linspace(0.1, 0.9, 9)
        left, right = kernel_flux_terms(alpha, r, x)
        res = kernel_annihilation_residual(alpha, r, x)
        assert np.all(np.abs(res) <= 1e-6 * np.minimum(np.abs(left), np.abs(right)))

    def test_half_closed_form(self):
        alpha, x = 1.6, 0.5
        left, right = kernel_flux_terms(alpha, 0.5, x)
        one_side = gamma(alpha / 2) / gamma(1 - alpha / 2) * x ** (-alpha / 2) * (1 - x) ** (-alpha / 2)
        assert 2 * left == pytest.approx(one_side, rel=1e-12)
        assert 2 * right == pytest.approx(-one_side, rel=1e-12)

    @pytest.mark.parametrize("alpha,r,x", [(1.6, 0.2764, 0.25), (1.4, 0.3149, 0.75)])
    def test_examples(self, alpha, r, x):
        left, _ = kernel_flux_terms(alpha, r, x)
        assert abs(kernel_annihilation_residual(alpha, r, x)) <= 1e-10 * abs(left)

    @pytest.mark.parametrize("alpha,r", [(1.6, 0.2764), (1.4, 0.5), (1.4, 0.3149)])
    def test_discrete_kernel_membership(self, alpha, r):
        # the bilinear form applied to the interpolant of K nearly vanishes
        mesh = Mesh(256)
        B = assemble(alpha, r, mesh).stiffness
        K = kernel_K(alpha, r, mesh.nodes)
        res = B @ K[1:-1] + _boundary_column(alpha, r, mesh) * K[-1]
        scale = np.abs(np.diag(B)).max() * np.abs(K).max()
        assert np.max(np.abs(res)) <= 1e-2 * scale


def _boundary_column(alpha, r, mesh):
    """B(phi_n, phi_i) for the half hat at x = 1, in closed form."""
    sigma = 2.0 - alpha
    n, h = mesh.n_intervals, mesh.h
    c = h ** (sigma - 1.0) / math.gamma(sigma + 2.0)
    i = np.arange(1, n)
    g = lambda m: np.maximum(m, 0.0) ** (sigma + 1.0)
    right = sum(w * (g(n - k) - g(n - 1 - k)) for w, k in ((1.0, i - 1), (-2.0, i), (1.0, i + 1)))
    left = np.where(i == n - 1, -1.0, 0.0)
    return c * (r * left + (1.0 - r) * right)


def test_boundary_shift():
    alpha, r = 1.4, 0.3149
    c1, c2 = boundary_shift(alpha, r, 2.0, -1.0)
    assert c1 + c2 * kernel_K(alpha, r, 0.0) == pytest.approx(2.0)
    assert c1 + c2 * kernel_K(alpha, r, 1.0) == pytest.approx(-1.0)
