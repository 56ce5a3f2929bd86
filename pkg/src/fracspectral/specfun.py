r"""Scalar special functions: gamma, log-gamma, Pochhammer and Gauss :math:`{}_2F_1`.

Every function accepts Python floats; ``log_gamma``, ``log_abs_gamma``,
``rgamma`` and the ``x`` argument of ``gauss_2f1`` also accept numpy arrays
and broadcast elementwise.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import AccuracyError, DivergenceError, DomainError, PoleError

__all__ = [
    "log_gamma",
    "log_abs_gamma",
    "gamma",
    "rgamma",
    "beta_function",
    "pochhammer",
    "gauss_2f1",
]

# Lanczos approximation, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

_SERIES_RTOL = 1e-16
_SERIES_MAX_TERMS = 10_000
# Below this distance of c - a - b from an integer the 1 - x connection
# formula cancels catastrophically; c is then perturbed by +-_PERTURB,
# +-2*_PERTURB and the results Richardson-extrapolated (error O(_PERTURB**4)).
_INTEGER_GAP = 1e-4
_PERTURB = 1e-3
# Largest x for which the plain series converges inside the term cap.
_SERIES_XMAX = 0.99


def _lanczos_log_gamma(x):
    """ln Gamma(x) for x >= 0.5 (array-valued)."""
    z = x - 1.0
    acc = np.full_like(z, _LANCZOS_COEFFS[0])
    for i, c in enumerate(_LANCZOS_COEFFS[1:], start=1):
        acc = acc + c / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * np.log(t) - t + np.log(acc)


def _sinpi(x):
    """sin(pi x) with exact zeros at the integers."""
    x = np.asarray(x, dtype=float)
    r = np.remainder(x, 2.0)
    out = np.sin(np.pi * r)
    out = np.where(x == np.floor(x), 0.0, out)
    return out


def _is_nonpositive_integer(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return (x <= 0) & (x == np.floor(x))


def _scalar_or_array(value, like):
    if np.ndim(like) == 0:
        return float(value)
    return value


def log_gamma(x):
    """Natural logarithm of Gamma(x) for x > 0.

    Raises
    ------
    DomainError
        If any ``x <= 0``.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"log_gamma requires x > 0, got {x!r}")
    lg, _ = log_abs_gamma(arr)
    return _scalar_or_array(lg, x)


def log_abs_gamma(x):
    """Return ``(ln|Gamma(x)|, sign(Gamma(x)))`` for any non-pole real ``x``.

    Negative arguments go through the reflection formula
    ``Gamma(1 - z) Gamma(z) = pi / sin(pi z)``.
    """
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(_is_nonpositive_integer(arr)):
        raise PoleError(f"Gamma has a pole at {x!r}")
    out = np.empty_like(arr)
    sign = np.ones_like(arr)
    big = arr >= 0.5
    if np.any(big):
        out[big] = _lanczos_log_gamma(arr[big])
    small = ~big
    if np.any(small):
        xs = arr[small]
        s = _sinpi(xs)
        out[small] = math.log(math.pi) - np.log(np.abs(s)) - _lanczos_log_gamma(1.0 - xs)
        sign[small] = np.sign(s)
    if np.ndim(x) == 0:
        return float(out[0]), float(sign[0])
    return out.reshape(np.shape(x)), sign.reshape(np.shape(x))


def gamma(x):
    """Gamma function; negative non-integers via the reflection formula."""
    lg, sg = log_abs_gamma(x)
    return _scalar_or_array(sg * np.exp(lg), x)


def rgamma(x):
    """Reciprocal gamma 1/Gamma(x), equal to 0 at the poles of Gamma."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros_like(arr)
    ok = ~_is_nonpositive_integer(arr)
    if np.any(ok):
        lg, sg = log_abs_gamma(arr[ok])
        out[ok] = sg * np.exp(-lg)
    if np.ndim(x) == 0:
        return float(out[0])
    return out.reshape(np.shape(x))


def beta_function(a: float, b: float) -> float:
    """Euler beta B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b) for a, b > 0."""
    return math.exp(log_gamma(a) + log_gamma(b) - log_gamma(a + b))


def pochhammer(q: float, n: int) -> float:
    """Rising factorial (q)_n = q (q + 1) ... (q + n - 1); (q)_0 = 1."""
    if n < 0 or int(n) != n:
        raise DomainError(f"pochhammer needs a nonnegative integer n, got {n!r}")
    out = 1.0
    for k in range(int(n)):
        out *= q + k
    return out


def _series(a: float, b: float, c: float, x: np.ndarray) -> np.ndarray:
    """Hypergeometric power series, summed until every entry has converged."""
    total = np.ones_like(x)
    term = np.ones_like(x)
    active = np.ones(x.shape, dtype=bool)
    for n in range(_SERIES_MAX_TERMS):
        term = term * ((a + n) * (b + n) / ((c + n) * (n + 1.0))) * x
        total = total + term
        active = np.abs(term) >= _SERIES_RTOL * np.abs(total)
        if not np.any(active):
            return total
        if np.all(term == 0.0):
            return total
    raise AccuracyError(
        f"2F1({a}, {b}; {c}; x) series did not converge in {_SERIES_MAX_TERMS} terms"
    )


def _terminating(a: float, b: float, c: float, x: np.ndarray) -> np.ndarray:
    """Finite sum when a or b is a nonpositive integer."""
    m = int(round(-a)) if _is_nonpositive_integer(a) else int(round(-b))
    total = np.ones_like(x)
    term = np.ones_like(x)
    for n in range(m):
        term = term * ((a + n) * (b + n) / ((c + n) * (n + 1.0))) * x
        total = total + term
    return total


def _gauss_sum(a: float, b: float, c: float) -> float:
    lg_c, sg_c = log_abs_gamma(c)
    lg_s, sg_s = log_abs_gamma(c - (a + b))
    return sg_c * sg_s * math.exp(lg_c + lg_s) * rgamma(c - a) * rgamma(c - b)


def _connection(a: float, b: float, c: float, x: np.ndarray) -> np.ndarray:
    """Linear transformation to argument 1 - x (requires c - a - b non-integer)."""
    y = 1.0 - x
    s = c - (a + b)
    lg_c, sg_c = log_abs_gamma(c)
    lg_s, sg_s = log_abs_gamma(s)
    lg_ms, sg_ms = log_abs_gamma(-s)
    coef1 = sg_c * sg_s * math.exp(lg_c + lg_s) * rgamma(c - a) * rgamma(c - b)
    coef2 = sg_c * sg_ms * math.exp(lg_c + lg_ms) * rgamma(a) * rgamma(b)
    out = np.zeros_like(x)
    if coef1 != 0.0:
        out = out + coef1 * _series(a, b, 1.0 - s, y)
    if coef2 != 0.0:
        out = out + coef2 * y**s * _series(c - a, c - b, 1.0 + s, y)
    return out


def gauss_2f1(a: float, b: float, c: float, x):
    r"""Gauss hypergeometric function :math:`{}_2F_1(a, b; c; x)` for x in [0, 1].

    Power series for ``x <= 0.5``. On ``(0.5, 1)`` the connection formula in
    ``1 - x`` is used. When ``c - a - b`` is within 1e-4 of an integer that
    formula degenerates: the series is kept up to ``x = 0.99`` and beyond
    that ``c`` is perturbed symmetrically and the values Richardson-extrapolated
    back (relative accuracy about 1e-9 there). At ``x = 1`` Gauss' summation
    theorem applies.

    Raises
    ------
    PoleError
        ``c`` is a nonpositive integer.
    DomainError
        ``x`` outside [0, 1].
    DivergenceError
        ``x = 1`` with ``c - a - b <= 0`` (and the series does not terminate).
    AccuracyError
        The series did not reach relative 1e-16 within 10 000 terms.
    """
    a, b, c = float(a), float(b), float(c)
    if _is_nonpositive_integer(c):
        raise PoleError(f"2F1 undefined for c = {c}")
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(~((xa >= 0.0) & (xa <= 1.0))):
        raise DomainError(f"2F1 is implemented for x in [0, 1], got {x!r}")

    if _is_nonpositive_integer(a) or _is_nonpositive_integer(b):
        out = _terminating(a, b, c, xa)
        return _scalar_or_array(out[0], x) if np.ndim(x) == 0 else out.reshape(np.shape(x))

    out = np.empty_like(xa)
    at_one = xa == 1.0
    if np.any(at_one):
        if not c - (a + b) > 0:
            raise DivergenceError(f"2F1({a}, {b}; {c}; 1) diverges: c - a - b = {c - a - b}")
        out[at_one] = _gauss_sum(a, b, c)
    low = xa <= 0.5
    if np.any(low):
        out[low] = _series(a, b, c, xa[low])
    high = (~low) & (~at_one)
    if np.any(high):
        s = c - (a + b)  # symmetric in a, b, so both orders take the same path
        if abs(s - round(s)) > _INTEGER_GAP:
            out[high] = _connection(a, b, c, xa[high])
        else:
            xh = xa[high]
            res = np.empty_like(xh)
            near = xh <= _SERIES_XMAX
            if np.any(near):
                res[near] = _series(a, b, c, xh[near])
            if np.any(~near):
                xf = xh[~near]
                d = _PERTURB

                def sym(h):
                    return 0.5 * (_connection(a, b, c + h, xf) + _connection(a, b, c - h, xf))

                res[~near] = (4.0 * sym(d) - sym(2.0 * d)) / 3.0
            out[high] = res
    if np.ndim(x) == 0:
        return float(out[0])
    return out.reshape(np.shape(x))
