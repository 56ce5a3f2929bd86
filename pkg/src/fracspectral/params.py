r"""Problem parameters and the map between the mixing ratio ``r`` and ``beta``.

The weight exponent :math:`\beta \in (\alpha - 1, 1)` and the left/right
mixing ratio ``r`` are tied by

.. math::

    r = \frac{\sin(\pi\beta)}{\sin(\pi(\alpha - \beta)) + \sin(\pi\beta)} .
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericError

__all__ = ["FractionalParams", "r_from_beta", "beta_from_r"]

_EDGE = 1e-9
_SCAN_STEP = 1e-3
_BISECT_TOL = 1e-13


def _check_alpha(alpha: float) -> None:
    if not 1.0 < alpha < 2.0:
        raise DomainError(f"alpha must lie in (1, 2), got {alpha}")


def r_from_beta(alpha: float, beta: float) -> float:
    """Mixing ratio r belonging to the weight exponent ``beta``."""
    sb = math.sin(math.pi * beta)
    return sb / (math.sin(math.pi * (alpha - beta)) + sb)


def beta_from_r(alpha: float, r: float) -> float:
    """Invert :func:`r_from_beta` on ``(alpha - 1, 1)``.

    A sign-change scan at 1e-3 resolution precedes bisection, so that a
    second admissible root is reported instead of silently ignored.
    ``r = 1/2`` returns ``alpha / 2`` exactly.
    """
    _check_alpha(alpha)
    if not 0.0 < r < 1.0:
        raise DomainError(f"r must lie in (0, 1), got {r}")
    if r == 0.5:
        return alpha / 2.0

    lo, hi = alpha - 1.0 + _EDGE, 1.0 - _EDGE

    def resid(b):
        return r_from_beta(alpha, b) - r

    grid = np.linspace(lo, hi, max(3, int(math.ceil((hi - lo) / _SCAN_STEP)) + 1))
    vals = np.array([resid(b) for b in grid])
    flips = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)[0]
    if len(flips) == 0:
        raise NumericError(f"no beta in ({lo}, {hi}) reproduces r = {r} for alpha = {alpha}")
    if len(flips) > 1:
        raise NumericError(f"multiple beta branches for alpha = {alpha}, r = {r}")
    a, b = grid[flips[0]], grid[flips[0] + 1]
    fa = resid(a)
    while b - a > _BISECT_TOL:
        m = 0.5 * (a + b)
        fm = resid(m)
        if fm == 0.0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


@dataclass(frozen=True)
class FractionalParams:
    """Order ``alpha`` and mixing ratio ``r`` of the two-sided operator.

    ``beta`` (weight exponent) and the kernel exponents ``p = beta - 1`` and
    ``q = alpha - beta - 1`` are derived on construction.
    """

    alpha: float
    r: float
    beta: float = field(init=False)

    def __post_init__(self):
        _check_alpha(self.alpha)
        object.__setattr__(self, "beta", beta_from_r(self.alpha, self.r))

    @classmethod
    def from_beta(cls, alpha: float, beta: float) -> "FractionalParams":
        """Build from the weight exponent instead of ``r``."""
        _check_alpha(alpha)
        if not alpha - 1.0 < beta < 1.0:
            raise DomainError(f"beta must lie in (alpha - 1, 1), got {beta}")
        obj = cls.__new__(cls)
        object.__setattr__(obj, "alpha", float(alpha))
        object.__setattr__(obj, "r", r_from_beta(alpha, beta))
        object.__setattr__(obj, "beta", float(beta))
        return obj

    @property
    def p(self) -> float:
        return self.beta - 1.0

    @property
    def q(self) -> float:
        return self.alpha - self.beta - 1.0

    @property
    def adjoint(self) -> "FractionalParams":
        """Parameters of the adjoint operator (r -> 1 - r, beta -> alpha - beta)."""
        return FractionalParams.from_beta(self.alpha, self.alpha - self.beta)

    @property
    def omega_exponents(self) -> tuple[float, float]:
        return self.beta, self.alpha - self.beta

    @property
    def omega_star_exponents(self) -> tuple[float, float]:
        return self.alpha - self.beta, self.beta
