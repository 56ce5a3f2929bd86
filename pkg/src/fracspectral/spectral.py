r"""Spectral Petrov-Galerkin solver built on the pseudo-eigen relation.

With :math:`\omega = x^\beta(1-x)^{\alpha-\beta}`, trial family
:math:`\mathcal{G}_n = G_n(\alpha+1, \beta+1, \cdot)` and test family
:math:`\mathcal{G}_n^* = G_n(\alpha+1, \alpha-\beta+1, \cdot)`,

.. math::

    \mathcal{L}_r^\alpha[\omega \mathcal{G}_n] = \lambda_n \mathcal{G}_n^* ,

so the discrete solution :math:`u_N = \omega\sum_{i\le N} c_i \mathcal{G}_i`
has the diagonal coefficients
:math:`c_i = f_i^* / (\lambda_i \|\mathcal{G}_i^*\|^2_{\omega^*})` with
:math:`f_i^* = \int_0^1 \omega^* f \mathcal{G}_i^*\,dx`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional

import numpy as np

from .errors import AccuracyError, DomainError
from .fracops import MAX_DEGREE
from .jacobi import JacobiFamily, eval_G_all, gauss_jacobi_rule, norm_G_squared
from .params import FractionalParams
from .specfun import log_gamma

__all__ = [
    "PowerTerm",
    "RhsFunction",
    "SpectralProblem",
    "SpectralSolution",
    "pseudo_eigenvalue",
    "power_moments",
    "project_rhs",
    "solve",
    "eval_solution",
    "weighted_error",
    "truncated_rhs",
    "graded_cells",
]

Norm = Literal["L2", "L2_omega", "L2_omega_inv"]

PROJECTION_RTOL = 1e-8
ERROR_RTOL = 1e-6
EXTRA_NODES = 20


@dataclass(frozen=True)
class PowerTerm:
    """``coeff * x**left_exp * (1 - x)**right_exp``."""

    coeff: float
    left_exp: float = 0.0
    right_exp: float = 0.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.coeff * x**self.left_exp * (1.0 - x) ** self.right_exp


@dataclass(frozen=True)
class RhsFunction:
    """Right-hand side: a smooth callable plus endpoint-power terms.

    The power terms carry their singular exponents so quadrature can absorb
    them into the weight; ``smooth`` is evaluated at quadrature nodes only.
    """

    terms: tuple[PowerTerm, ...] = ()
    smooth: Optional[Callable] = None

    @classmethod
    def zero(cls) -> "RhsFunction":
        return cls()

    @classmethod
    def constant(cls, value: float) -> "RhsFunction":
        return cls(terms=(PowerTerm(float(value)),))

    @classmethod
    def from_callable(cls, f: Callable) -> "RhsFunction":
        return cls(smooth=f)

    @property
    def is_singular(self) -> bool:
        return any(t.left_exp < 0 or t.right_exp < 0 for t in self.terms)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for t in self.terms:
            out = out + t(x)
        if self.smooth is not None:
            out = out + np.asarray(self.smooth(x), dtype=float)
        return out


@dataclass(frozen=True)
class SpectralProblem:
    """Weights and polynomial families attached to ``params``."""

    params: FractionalParams
    trial: JacobiFamily = field(init=False)
    test: JacobiFamily = field(init=False)

    def __post_init__(self):
        al, be = self.params.alpha, self.params.beta
        object.__setattr__(self, "trial", JacobiFamily(al + 1.0, be + 1.0))
        object.__setattr__(self, "test", JacobiFamily(al + 1.0, al - be + 1.0))

    @classmethod
    def from_alpha_r(cls, alpha: float, r: float) -> "SpectralProblem":
        return cls(FractionalParams(alpha, r))

    @property
    def omega_exponents(self) -> tuple[float, float]:
        return self.params.omega_exponents

    @property
    def omega_star_exponents(self) -> tuple[float, float]:
        return self.params.omega_star_exponents

    def omega(self, x):
        a, b = self.omega_exponents
        x = np.asarray(x, dtype=float)
        return x**a * (1.0 - x) ** b

    def omega_star(self, x):
        a, b = self.omega_star_exponents
        x = np.asarray(x, dtype=float)
        return x**a * (1.0 - x) ** b

    def adjoint(self) -> "SpectralProblem":
        """Problem for ``1 - r``: trial and test families trade places."""
        return SpectralProblem(self.params.adjoint)


@dataclass(frozen=True)
class SpectralSolution:
    N: int
    coeffs: np.ndarray
    lambdas: np.ndarray
    rhs_coeffs: np.ndarray
    problem: SpectralProblem

    def __post_init__(self):
        for arr in (self.coeffs, self.lambdas, self.rhs_coeffs):
            arr.setflags(write=False)

    def __call__(self, x):
        return eval_solution(self, x)


def _check_degree(N: int) -> None:
    if N < 0:
        raise DomainError("degree must be nonnegative")
    if N > MAX_DEGREE:
        raise DomainError(f"degree {N} exceeds the supported maximum {MAX_DEGREE}")


def pseudo_eigenvalue(params: FractionalParams, n, adjoint: bool = False):
    r""":math:`\lambda_n` (or :math:`\lambda_n^*` when ``adjoint``), formed in log space.

    .. math::

        \lambda_n = -(1-r)\frac{\sin\pi\alpha}{\sin\pi(\alpha-\beta)}
                    \frac{\Gamma(n+1+\alpha)}{\Gamma(n+1)} ,

    and :math:`\lambda_n^*` has ``r`` in place of ``1 - r``.
    """
    al, be, r = params.alpha, params.beta, params.r
    n_arr = np.asarray(n, dtype=float)
    if np.any(n_arr < 0):
        raise DomainError("n must be nonnegative")
    weight = r if adjoint else 1.0 - r
    if adjoint:
        ratio = math.sin(math.pi * al) / math.sin(math.pi * be)
    else:
        ratio = math.sin(math.pi * al) / math.sin(math.pi * (al - be))
    pref = -weight * ratio
    out = pref * np.exp(log_gamma(n_arr + 1.0 + al) - log_gamma(n_arr + 1.0))
    return float(out) if out.ndim == 0 else out


def _test_weighted_moments(problem: SpectralProblem, f: RhsFunction, N: int, M: int) -> np.ndarray:
    """``int omega* f G*_i`` for i <= N with M-point rules per term."""
    wa, wb = problem.omega_star_exponents
    out = np.zeros(N + 1)
    for t in f.terms:
        rule = gauss_jacobi_rule(wa + t.left_exp, wb + t.right_exp, M)
        G = eval_G_all(problem.test, N, rule.nodes)
        out += t.coeff * (G @ rule.weights)
    if f.smooth is not None:
        rule = gauss_jacobi_rule(wa, wb, M)
        vals = np.asarray(f.smooth(rule.nodes), dtype=float)
        G = eval_G_all(problem.test, N, rule.nodes)
        out += G @ (rule.weights * vals)
    return out


def power_moments(a_exp: float, b_exp: float, term: PowerTerm, N: int, family: JacobiFamily) -> Optional[np.ndarray]:
    r"""Exact moments ``int x^a (1-x)^b term(x) G_n(x) dx`` for one-sided terms.

    ``family`` must be orthogonal for ``x^a (1-x)^b``. By Rodrigues' formula
    and ``n`` integrations by parts,

    .. math::

        \int_0^1 x^{a+l}(1-x)^b G_n = (-1)^n \frac{(-l)_n\, B(a+l+1, n+b+1)}{(n+a+b+1)_n},

    and the mirror formula holds for :math:`(1-x)^m`. Returns None when the
    term is singular at both ends. Unlike quadrature, the moments of a
    constant vanish exactly for ``n >= 1``.
    """
    if term.right_exp == 0.0:
        e, own, other, sign = term.left_exp, a_exp, b_exp, True
    elif term.left_exp == 0.0:
        e, own, other, sign = term.right_exp, b_exp, a_exp, False
    else:
        return None
    n = np.arange(N + 1, dtype=float)
    poch = np.concatenate(([1.0], np.cumprod(-e + n[:-1])))
    with np.errstate(divide="ignore"):
        log_poch = np.log(np.abs(poch))
    log_mag = (
        log_poch
        + log_gamma(own + e + 1.0)
        + log_gamma(n + other + 1.0)
        - log_gamma(own + e + other + n + 2.0)
        - log_gamma(2.0 * n + a_exp + b_exp + 1.0)
        + log_gamma(n + a_exp + b_exp + 1.0)
    )
    out = np.sign(poch) * np.exp(log_mag)
    if sign:
        out = out * np.where(n % 2 == 0, 1.0, -1.0)
    return term.coeff * out


def project_rhs(
    problem: SpectralProblem, f: RhsFunction, N: int, method: Literal["auto", "quadrature"] = "auto"
) -> np.ndarray:
    """Projections ``f*_i`` for ``i = 0..N``.

    With ``method="auto"`` one-sided power terms use :func:`power_moments`
    and everything else goes through Gauss-Jacobi quadrature, each power
    term with its exponents absorbed into the rule. ``"quadrature"`` forces
    the quadrature route for all terms.

    Raises
    ------
    AccuracyError
        Rules of ``N + 20`` and ``ceil(1.5 (N + 20))`` nodes disagree by more
        than 1e-8 relative to the largest projection.
    """
    _check_degree(N)
    wa, wb = problem.omega_star_exponents
    exact = np.zeros(N + 1)
    rest = []
    for t in f.terms:
        mom = power_moments(wa, wb, t, N, problem.test) if method == "auto" else None
        if mom is None:
            rest.append(t)
        else:
            exact += mom
    f_rest = RhsFunction(tuple(rest), f.smooth)
    if not rest and f.smooth is None:
        return exact
    M = N + EXTRA_NODES
    coarse = _test_weighted_moments(problem, f_rest, N, M)
    fine = _test_weighted_moments(problem, f_rest, N, math.ceil(1.5 * M))
    scale = np.max(np.abs(fine))
    if np.max(np.abs(fine - coarse)) > PROJECTION_RTOL * scale:
        raise AccuracyError(
            f"projection quadrature unconverged: rules disagree by {np.max(np.abs(fine - coarse)):.3e}"
        )
    return exact + fine


def solve(problem: SpectralProblem, f: RhsFunction, N: int) -> SpectralSolution:
    """Spectral solution of degree ``N`` with homogeneous boundary values."""
    fstar = project_rhs(problem, f, N)
    n = np.arange(N + 1)
    lam = np.atleast_1d(pseudo_eigenvalue(problem.params, n))
    norms = np.array([norm_G_squared(problem.test, i) for i in n])
    coeffs = fstar / (lam * norms)
    return SpectralSolution(N, coeffs, lam, fstar, problem)


def _eval_series(family: JacobiFamily, coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    G = eval_G_all(family, len(coeffs) - 1, x)
    return np.tensordot(coeffs, G, axes=1)


def eval_solution(sol: SpectralSolution, x):
    """``omega(x) * sum c_j G_j(x)``; exactly zero at both endpoints."""
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise DomainError("x must lie in [0, 1]")
    out = sol.problem.omega(x) * _eval_series(sol.problem.trial, np.asarray(sol.coeffs), x)
    out = np.where((x == 0.0) | (x == 1.0), 0.0, out)
    return float(out) if out.ndim == 0 else out


def truncated_rhs(sol: SpectralSolution) -> Callable:
    r"""The image :math:`\mathcal{L}_r^\alpha u_N = \sum_i f_i^*/\|\mathcal{G}_i^*\|^2 \mathcal{G}_i^*`."""
    problem = sol.problem
    norms = np.array([norm_G_squared(problem.test, i) for i in range(sol.N + 1)])
    c = np.asarray(sol.rhs_coeffs) / norms

    def image(x):
        x = np.asarray(x, dtype=float)
        return _eval_series(problem.test, c, x)

    return image


# --- error norms -----------------------------------------------------------

def graded_cells(n_uniform: int = 16, levels: int = 40, ratio: float = 0.5) -> np.ndarray:
    """Cell breakpoints on [0, 1], uniform inside and geometric toward both ends."""
    h = 1.0 / n_uniform
    left = h * ratio ** np.arange(levels, 0, -1)
    inner = np.linspace(h, 1.0 - h, n_uniform - 1)
    return np.concatenate(([0.0], left, inner, 1.0 - left[::-1], [1.0]))


def _density_exponents(problem: SpectralProblem, which: Norm) -> tuple[float, float]:
    a, b = problem.omega_exponents
    k = {"L2": 0.0, "L2_omega": 1.0, "L2_omega_inv": -1.0}[which]
    return k * a, k * b


def _composite_sq(problem, sol, u_exact, which, pts) -> float:
    """Squared norm of ``u_exact - u_N`` by composite Gauss on graded cells."""
    da, db = _density_exponents(problem, which)
    edges = graded_cells()
    gl_t, gl_w = np.polynomial.legendre.leggauss(pts)
    gl_t, gl_w = 0.5 * (gl_t + 1.0), 0.5 * gl_w
    lo_edges, hi_edges = edges[1:-2], edges[2:-1]
    width = hi_edges - lo_edges
    x_mid = (lo_edges[:, None] + width[:, None] * gl_t).ravel()
    w_mid = (width[:, None] * gl_w).ravel()
    dens = x_mid**da * (1.0 - x_mid) ** db
    err = np.asarray(u_exact(x_mid), dtype=float) - eval_solution(sol, x_mid)
    total = float(np.sum(w_mid * dens * err**2))

    # innermost cells: the density's endpoint power goes into the rule
    d0 = edges[1]
    rule = gauss_jacobi_rule(da, 0.0, pts)
    x = d0 * rule.nodes
    err = np.asarray(u_exact(x), dtype=float) - eval_solution(sol, x)
    total += d0 ** (1.0 + da) * float(np.sum(rule.weights * (1.0 - x) ** db * err**2))
    rule = gauss_jacobi_rule(0.0, db, pts)
    x = 1.0 - d0 + d0 * rule.nodes
    err = np.asarray(u_exact(x), dtype=float) - eval_solution(sol, x)
    total += d0 ** (1.0 + db) * float(np.sum(rule.weights * x**da * err**2))
    return total


def _factored_sq(problem, sol, u_over_omega, which, M) -> float:
    """Squared norm when ``u_exact = omega * g``: the weight enters the rule."""
    a, b = problem.omega_exponents
    k = {"L2": 2.0, "L2_omega": 3.0, "L2_omega_inv": 1.0}[which]
    rule = gauss_jacobi_rule(k * a, k * b, M)
    x = rule.nodes
    diff = np.asarray(u_over_omega(x), dtype=float) - _eval_series(problem.trial, np.asarray(sol.coeffs), x)
    return float(np.sum(rule.weights * diff**2))


def weighted_error(
    problem: SpectralProblem,
    sol: SpectralSolution,
    u_exact: Callable,
    which: Norm = "L2",
    u_exact_over_omega: Optional[Callable] = None,
) -> float:
    """``||u_exact - u_N||`` in L2, L2_omega or L2_omega_inv.

    When ``u_exact_over_omega`` (the function ``u_exact / omega``) is given,
    the weight is moved into a Gauss-Jacobi rule; otherwise a composite rule
    on a mesh graded toward both endpoints is used.

    Raises
    ------
    AccuracyError
        Two rule sizes disagree by more than 1e-6 relative.
    """
    if which not in ("L2", "L2_omega", "L2_omega_inv"):
        raise DomainError(f"unknown norm {which!r}")
    if u_exact_over_omega is not None:
        M = sol.N + EXTRA_NODES
        coarse = _factored_sq(problem, sol, u_exact_over_omega, which, M)
        fine = _factored_sq(problem, sol, u_exact_over_omega, which, math.ceil(1.5 * M))
    else:
        coarse = _composite_sq(problem, sol, u_exact, which, 32)
        fine = _composite_sq(problem, sol, u_exact, which, 48)
    coarse, fine = math.sqrt(max(coarse, 0.0)), math.sqrt(max(fine, 0.0))
    if abs(fine - coarse) > ERROR_RTOL * fine + 1e-14:
        raise AccuracyError(f"error quadrature unconverged: {coarse:.6e} vs {fine:.6e}")
    return fine
