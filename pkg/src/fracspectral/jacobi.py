r"""Jacobi polynomials on (0, 1) and Gauss-Jacobi quadrature.

:math:`G_n(p, q, x)` is the monic polynomial of degree ``n`` orthogonal on
(0, 1) for the weight :math:`x^{q-1}(1-x)^{p-q}`. It is related to the
classical :math:`P_n^{(a, b)}` on (-1, 1) by

.. math::

    G_n(p, q, x) = \frac{\Gamma(n+1)\Gamma(n+p)}{\Gamma(2n+p)}
        P_n^{(p-q,\, q-1)}(2x - 1).

Evaluation uses the three-term recurrence; the explicit monomial
coefficients :func:`g_coefficients` lose digits for n of about 15 and above
and are meant for low-degree algebra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .errors import DomainError, NumericError
from .specfun import beta_function, log_gamma

__all__ = [
    "JacobiFamily",
    "QuadratureRule",
    "recurrence_coefficients",
    "g_coefficients",
    "eval_G",
    "eval_G_all",
    "norm_G_squared",
    "gauss_jacobi_rule",
]


@dataclass(frozen=True)
class JacobiFamily:
    """Parameters ``(p, q)`` of :math:`G_n(p, q, \\cdot)`."""

    p: float
    q: float

    def __post_init__(self):
        if not (self.q > 0 and self.p - self.q > -1):
            raise DomainError(f"invalid Jacobi family p={self.p}, q={self.q}: need q > 0, p - q > -1")

    @property
    def weight_exponents(self) -> tuple[float, float]:
        """Exponents ``(a, b)`` of the weight x^a (1 - x)^b."""
        return self.q - 1.0, self.p - self.q


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss rule for the weight x^a_exp (1 - x)^b_exp on (0, 1)."""

    nodes: np.ndarray
    weights: np.ndarray
    a_exp: float
    b_exp: float

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    def __len__(self):
        return len(self.nodes)

    def integrate(self, values) -> float:
        """Weighted sum of function values at the nodes."""
        return float(np.dot(self.weights, values))


def recurrence_coefficients(a_exp: float, b_exp: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Monic recurrence ``P_{k+1} = (x - a_k) P_k - b_k P_{k-1}`` on (0, 1).

    Returns arrays ``a[0:n]`` and ``b[0:n]``; ``b[0]`` is the total mass of
    the weight x^a_exp (1 - x)^b_exp.
    """
    # classical parameters on (-1, 1): weight (1 - t)^ja (1 + t)^jb
    ja, jb = b_exp, a_exp
    k = np.arange(n, dtype=float)
    s = 2.0 * k + ja + jb
    with np.errstate(divide="ignore", invalid="ignore"):
        at = (jb**2 - ja**2) / (s * (s + 2.0))
        bt = 4.0 * k * (k + ja) * (k + jb) * (k + ja + jb) / (s**2 * (s + 1.0) * (s - 1.0))
    if n > 0:
        at[0] = (jb - ja) / (ja + jb + 2.0)
    if n > 1:
        bt[1] = 4.0 * (1.0 + ja) * (1.0 + jb) / ((2.0 + ja + jb) ** 2 * (3.0 + ja + jb))
    a = 0.5 * (1.0 + at)
    b = 0.25 * bt
    if n > 0:
        b[0] = beta_function(a_exp + 1.0, b_exp + 1.0)
    return a, b


def g_coefficients(family: JacobiFamily, n: int) -> np.ndarray:
    """Monomial coefficients ``g_{n,0..n}`` of :math:`G_n` (ascending powers)."""
    if n < 0:
        raise DomainError("degree must be nonnegative")
    if n == 0:
        return np.ones(1)
    p, q = family.p, family.q
    j = np.arange(n + 1)
    log_mag = (
        log_gamma(q + n)
        - log_gamma(p + 2.0 * n)
        + log_gamma(n + 1.0)
        - log_gamma(j + 1.0)
        - log_gamma(n - j + 1.0)
        + log_gamma(p + n + j)
        - log_gamma(q + j)
    )
    if np.max(log_mag) > math.log(1e300):
        raise NumericError(f"G_{n} coefficients overflow")
    coeffs = np.exp(log_mag) * np.where((n - j) % 2 == 0, 1.0, -1.0)
    coeffs[n] = 1.0
    return coeffs


def eval_G_all(family: JacobiFamily, n_max: int, x) -> np.ndarray:
    """Values of :math:`G_0, \\ldots, G_{n_{max}}` at ``x``; shape ``(n_max + 1,) + shape(x)``."""
    x = np.asarray(x, dtype=float)
    a, b = recurrence_coefficients(*family.weight_exponents, max(n_max, 1))
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = x - a[0]
    for k in range(1, n_max):
        out[k + 1] = (x - a[k]) * out[k] - b[k] * out[k - 1]
    return out


def eval_G(family: JacobiFamily, n: int, x):
    """Value of :math:`G_n(p, q, x)` by the three-term recurrence."""
    vals = eval_G_all(family, n, x)[n]
    return float(vals) if np.ndim(x) == 0 else vals


def norm_G_squared(family: JacobiFamily, n: int) -> float:
    r"""Squared weighted norm :math:`\int_0^1 x^{q-1}(1-x)^{p-q} G_n^2\,dx`."""
    p, q = family.p, family.q
    if n == 0:
        return beta_function(q, p - q + 1.0)
    lg = (
        log_gamma(n + 1.0)
        + log_gamma(n + q)
        + log_gamma(n + p)
        + log_gamma(n + p - q + 1.0)
        - 2.0 * log_gamma(2.0 * n + p)
    )
    return math.exp(lg) / (2.0 * n + p)


@lru_cache(maxsize=256)
def gauss_jacobi_rule(a_exp: float, b_exp: float, M: int) -> QuadratureRule:
    """M-point Gauss rule for x^a_exp (1 - x)^b_exp on (0, 1) via Golub-Welsch.

    Exact for polynomials of degree up to ``2M - 1``.
    """
    if M < 1:
        raise DomainError("a quadrature rule needs at least one node")
    if not (a_exp > -1 and b_exp > -1):
        raise DomainError(f"weight exponents must exceed -1, got ({a_exp}, {b_exp})")
    a, b = recurrence_coefficients(a_exp, b_exp, M)
    if M == 1:
        return QuadratureRule(np.array([a[0]]), np.array([b[0]]), a_exp, b_exp)
    try:
        nodes, vecs = eigh_tridiagonal(a, np.sqrt(b[1:]))
    except LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericError(f"Golub-Welsch eigen-solve failed: {exc}") from exc
    weights = b[0] * vecs[0, :] ** 2
    return QuadratureRule(nodes, weights, float(a_exp), float(b_exp))
