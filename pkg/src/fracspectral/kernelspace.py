r"""Kernel of the two-sided operator.

Besides constants, the kernel contains :math:`K(x) = \int_0^x k(s)\,ds` with
:math:`k(x) = x^p (1-x)^q`, where ``p`` and ``q`` satisfy

* ``3 - alpha + p + q = 1``, and
* ``r sin(-pi q) = (1 - r) sin(-pi p)``.

Equivalently ``p = beta - 1`` and ``q = alpha - beta - 1`` with ``beta``
from :func:`beta_from_r`. (The Riemann-Liouville operator has the different
kernel span{x^(alpha-2), x^(alpha-1)}; it is not modelled here.)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .fracops import flux_beta_kernel
from .params import beta_from_r, r_from_beta
from .specfun import beta_function, gauss_2f1

__all__ = [
    "KernelDescription",
    "beta_from_r",
    "r_from_beta",
    "kernel_exponents",
    "describe_kernel",
    "kernel_k",
    "kernel_K",
    "kernel_flux_terms",
    "kernel_annihilation_residual",
    "boundary_shift",
]


@dataclass(frozen=True)
class KernelDescription:
    """Exponents of ``k`` and the normalisation ``K(1) = B(p + 1, q + 1)``."""

    alpha: float
    r: float
    p: float
    q: float
    K_at_one: float

    @property
    def beta(self) -> float:
        return self.p + 1.0

    def condition_i(self) -> float:
        """Residual of ``3 - alpha + p + q = 1``."""
        return 3.0 - self.alpha + self.p + self.q - 1.0

    def condition_ii(self) -> float:
        """Residual of ``r sin(-pi q) = (1 - r) sin(-pi p)``."""
        return self.r * math.sin(-math.pi * self.q) - (1.0 - self.r) * math.sin(-math.pi * self.p)


def kernel_exponents(alpha: float, r: float) -> tuple[float, float]:
    """Exponents ``(p, q)`` of the kernel density ``x^p (1 - x)^q``."""
    beta = beta_from_r(alpha, r)
    return beta - 1.0, alpha - beta - 1.0


def describe_kernel(alpha: float, r: float) -> KernelDescription:
    p, q = kernel_exponents(alpha, r)
    return KernelDescription(alpha, r, p, q, beta_function(p + 1.0, q + 1.0))


def kernel_k(alpha: float, r: float, x):
    """Kernel density ``k(x) = x^p (1 - x)^q``."""
    p, q = kernel_exponents(alpha, r)
    x = np.asarray(x, dtype=float)
    out = x**p * (1.0 - x) ** q
    return float(out) if out.ndim == 0 else out


def kernel_K(alpha: float, r: float, x):
    r"""Kernel primitive :math:`K(x) = \frac{x^{p+1}}{p+1}\,{}_2F_1(-q, p+1; p+2; x)`."""
    p, q = kernel_exponents(alpha, r)
    return _K_from_exponents(p, q, x)


def _K_from_exponents(p: float, q: float, x):
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise DomainError("K is defined on [0, 1]")
    out = x ** (p + 1.0) / (p + 1.0) * gauss_2f1(-q, p + 1.0, p + 2.0, x)
    return float(out) if np.ndim(out) == 0 else out


def kernel_flux_terms(alpha: float, r: float, x) -> tuple:
    r"""One-sided terms :math:`r D\mathbf{D}^{-(2-\alpha)} k` and :math:`(1-r) D\mathbf{D}^{-(2-\alpha)*} k`."""
    p, q = kernel_exponents(alpha, r)
    left = r * flux_beta_kernel(alpha, p, q, x, "left")
    right = (1.0 - r) * flux_beta_kernel(alpha, p, q, x, "right")
    return left, right


def kernel_annihilation_residual(alpha: float, r: float, x):
    """Sum of the two one-sided fluxes of ``k``; zero up to rounding."""
    left, right = kernel_flux_terms(alpha, r, x)
    return left + right


def boundary_shift(alpha: float, r: float, left_value: float, right_value: float) -> tuple[float, float]:
    """Coefficients ``(c1, c2)`` so that ``c1 + c2 K`` takes the given endpoint values.

    Adding ``c1 + c2 K(x)`` to a solution with zero boundary values leaves
    the right-hand side unchanged, which is how nonhomogeneous boundary
    data are handled.
    """
    desc = describe_kernel(alpha, r)
    return left_value, (right_value - left_value) / desc.K_at_one
