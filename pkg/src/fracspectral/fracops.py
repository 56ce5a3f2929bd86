r"""Fractional integrals and the two-sided diffusion operator.

The operator is

.. math::

    \mathcal{L}_r^\alpha u = -\bigl(r\, D\, \mathbf{D}^{-(2-\alpha)} D
        + (1 - r)\, D\, \mathbf{D}^{-(2-\alpha)*} D\bigr) u ,

with the integer derivatives placed on both sides of the fractional
integral. This is neither the Riemann-Liouville form
(:math:`D^2 \mathbf{D}^{-(2-\alpha)}`) nor the Caputo form
(:math:`\mathbf{D}^{-(2-\alpha)} D^2`); in particular constants are
annihilated. Only this interpretation is implemented here.

On weighted monomials :math:`x^\beta (1-x)^{\alpha-\beta} x^n`, with ``r``
and ``beta`` linked as in :mod:`fracspectral.params`, the operator returns a
polynomial of degree ``n`` whose coefficients are known in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.polynomial import Polynomial

from .errors import DomainError
from .params import FractionalParams
from .specfun import gauss_2f1, log_abs_gamma, log_gamma

__all__ = [
    "Polynomial",
    "WeightedPolynomial",
    "frac_integral_power",
    "frac_integral_beta_kernel",
    "flux_beta_kernel",
    "operator_coefficients",
    "operator_matrix",
    "apply_L_to_weighted_monomial",
    "apply_L_to_weighted_polynomial",
]

Side = Literal["left", "right"]

MAX_DEGREE = 150
R_RANGE = (0.01, 0.99)


@dataclass(frozen=True)
class WeightedPolynomial:
    """``x**beta_exp * (1 - x)**gamma_exp * poly(x)``."""

    beta_exp: float
    gamma_exp: float
    poly: Polynomial

    def __post_init__(self):
        if not (self.beta_exp > -1 and self.gamma_exp > -1):
            raise DomainError("weight exponents must exceed -1")

    @property
    def coeffs(self) -> np.ndarray:
        return self.poly.coef

    def weight(self, x):
        x = np.asarray(x, dtype=float)
        return x**self.beta_exp * (1.0 - x) ** self.gamma_exp

    def __call__(self, x):
        return self.weight(x) * self.poly(x)


def _check_side(side: str) -> None:
    if side not in ("left", "right"):
        raise DomainError(f"side must be 'left' or 'right', got {side!r}")


def frac_integral_power(sigma: float, gamma_exp: float, x, side: Side = "left"):
    r"""Fractional integral of order ``sigma`` of a pure power.

    ``left``:  :math:`\mathbf{D}^{-\sigma} x^\gamma`;
    ``right``: :math:`\mathbf{D}^{-\sigma *} (1-x)^\gamma`. Both equal
    :math:`\Gamma(\gamma+1)/\Gamma(\gamma+1+\sigma)\, t^{\gamma+\sigma}` with
    ``t`` the distance to the corresponding endpoint.
    """
    _check_side(side)
    if not (sigma > 0 and gamma_exp > -1):
        raise DomainError("need sigma > 0 and gamma_exp > -1")
    x = np.asarray(x, dtype=float)
    t = x if side == "left" else 1.0 - x
    c = math.exp(log_gamma(gamma_exp + 1.0) - log_gamma(gamma_exp + 1.0 + sigma))
    out = c * t ** (gamma_exp + sigma)
    return float(out) if out.ndim == 0 else out


def _check_kernel_args(alpha: float, p: float, q: float) -> None:
    if not 1.0 < alpha < 2.0:
        raise DomainError(f"alpha must lie in (1, 2), got {alpha}")
    if not (p > -1 and q > -1):
        raise DomainError(f"exponents p={p}, q={q} must exceed -1")
    if not 3.0 - alpha + p + q > 0:
        raise DomainError("need 3 - alpha + p > -q")


def frac_integral_beta_kernel(alpha: float, p: float, q: float, x, side: Side = "left"):
    r"""Order ``2 - alpha`` fractional integral of :math:`x^p (1-x)^q`.

    ``left``:

    .. math::

        \mathbf{D}^{-(2-\alpha)}[x^p(1-x)^q]
          = \frac{\Gamma(p+1)}{\Gamma(3-\alpha+p)} x^{2-\alpha+p}
            {}_2F_1(-q, p+1; 3-\alpha+p; x)

    ``right`` is the mirror image with ``p`` and ``q`` swapped and ``x``
    replaced by ``1 - x``.
    """
    _check_side(side)
    _check_kernel_args(alpha, p, q)
    x = np.asarray(x, dtype=float)
    a_, b_ = (p, q) if side == "left" else (q, p)
    t = x if side == "left" else 1.0 - x
    c = 3.0 - alpha + a_
    pref = math.exp(log_gamma(a_ + 1.0) - log_gamma(c))
    out = pref * t ** (c - 1.0) * gauss_2f1(-b_, a_ + 1.0, c, t)
    return float(out) if np.ndim(out) == 0 else out


def flux_beta_kernel(alpha: float, p: float, q: float, x, side: Side = "left"):
    r"""Derivative of :func:`frac_integral_beta_kernel`, :math:`D\mathbf{D}^{-(2-\alpha)}[x^p(1-x)^q]`.

    Uses :math:`\frac{d}{dt}[t^{c-1} F(a,b;c;t)] = (c-1) t^{c-2} F(a,b;c-1;t)`;
    the right-sided flux carries the extra sign from ``t = 1 - x``.
    Requires ``x`` strictly inside (0, 1).
    """
    _check_side(side)
    _check_kernel_args(alpha, p, q)
    x = np.asarray(x, dtype=float)
    if np.any((x <= 0) | (x >= 1)):
        raise DomainError("flux is evaluated at interior points only")
    a_, b_ = (p, q) if side == "left" else (q, p)
    t = x if side == "left" else 1.0 - x
    c1 = 2.0 - alpha + a_
    lg, sg = log_abs_gamma(c1)
    pref = sg * math.exp(log_gamma(a_ + 1.0) - lg)
    out = pref * t ** (c1 - 1.0) * gauss_2f1(-b_, a_ + 1.0, c1, t)
    if side == "right":
        out = -out
    return float(out) if np.ndim(out) == 0 else out


def _check_params(params: FractionalParams, n: int) -> None:
    if n < 0:
        raise DomainError("degree must be nonnegative")
    if n > MAX_DEGREE:
        raise DomainError(f"degree {n} exceeds the supported maximum {MAX_DEGREE}")
    lo, hi = R_RANGE
    if not lo <= params.r <= hi:
        raise DomainError(f"r = {params.r} outside the supported range [{lo}, {hi}]")


def operator_coefficients(params: FractionalParams, n: int) -> np.ndarray:
    r"""Coefficients ``a_{n,0..n}`` with :math:`\mathcal{L}_r^\alpha[\omega x^n] = \sum_j a_{n,j} x^j`.

    .. math::

        a_{n,j} = (-1)^{n+1}(1-r)\frac{\sin\pi\alpha}{\sin\pi(\alpha-\beta)}
            \Gamma(1+\alpha-\beta)
            \frac{(-1)^j\,\Gamma(1+\alpha+j)}
                 {\Gamma(1+\alpha-\beta-n+j)\,\Gamma(1+n-j)\,\Gamma(j+1)}

    Gamma ratios are formed in log space; a pole of
    :math:`\Gamma(1+\alpha-\beta-n+j)` makes the term vanish.
    """
    _check_params(params, n)
    al, be, r = params.alpha, params.beta, params.r
    j = np.arange(n + 1, dtype=float)

    ratio = math.sin(math.pi * al) / math.sin(math.pi * (al - be))
    pref = (1.0 - r) * ratio
    log_pref = math.log(abs(pref)) + log_gamma(1.0 + al - be)
    sign = (-1.0) ** (n + 1) * math.copysign(1.0, pref)

    den_arg = 1.0 + al - be - n + j
    pole = (den_arg <= 0) & (den_arg == np.floor(den_arg))
    safe = np.where(pole, 0.5, den_arg)
    lg_den, sg_den = log_abs_gamma(safe)

    log_mag = log_pref + log_gamma(1.0 + al + j) - log_gamma(1.0 + n - j) - log_gamma(j + 1.0) - lg_den
    out = sign * np.where(j % 2 == 0, 1.0, -1.0) * sg_den * np.exp(log_mag)
    out[pole] = 0.0
    return out


def operator_matrix(params: FractionalParams, n_max: int) -> np.ndarray:
    """Lower-triangular ``A`` with ``A[n, j] = a_{n,j}`` for ``n, j <= n_max``."""
    A = np.zeros((n_max + 1, n_max + 1))
    for n in range(n_max + 1):
        A[n, : n + 1] = operator_coefficients(params, n)
    return A


def apply_L_to_weighted_monomial(params: FractionalParams, n: int) -> Polynomial:
    """:math:`\\mathcal{L}_r^\\alpha[x^\\beta (1-x)^{\\alpha-\\beta} x^n]` as a polynomial of degree n."""
    return Polynomial(operator_coefficients(params, n))


def apply_L_to_weighted_polynomial(params: FractionalParams, poly) -> Polynomial:
    """Image of ``omega * poly`` under the operator, by linearity over monomials.

    ``poly`` is a :class:`numpy.polynomial.Polynomial` or a sequence of
    monomial coefficients in ascending degree.
    """
    coef = np.asarray(poly.coef if isinstance(poly, Polynomial) else poly, dtype=float)
    deg = len(coef) - 1
    if deg < 0:
        return Polynomial([0.0])
    out = coef @ operator_matrix(params, deg)
    return Polynomial(out)
