r"""Piecewise-linear Galerkin finite elements for the two-sided operator.

Stiffness matrix
    The bilinear form is assembled in the unsplit form
    :math:`B(w, v) = r\,(\mathbf{D}^{-\sigma} w', v') + (1-r)\,(w', \mathbf{D}^{-\sigma} v')`
    with :math:`\sigma = 2 - \alpha`. The left fractional integral of a hat
    derivative is a sum of truncated powers, so on a uniform mesh

    .. math::

        A_{ij} = (\mathbf{D}^{-\sigma}\varphi_j', \varphi_i')
               = -\frac{h^{\sigma-1}}{\Gamma(\sigma+2)}\,\Delta^4 g(i - j),
        \qquad g(m) = \max(m, 0)^{\sigma+1},

    where :math:`\Delta^4` is the centred fourth difference. ``A`` is Toeplitz
    and ``B = r A + (1 - r) A^T``.

Error norms
    The L2 error uses composite Gauss rules with geometric grading inside
    the two end elements. The Slobodetskii seminorm
    :math:`|v|_s^2 = \iint_{I\times I} (v(x)-v(y))^2 |x-y|^{-1-2s}` is split
    over pairs of cells: Duffy-type transforms on the diagonal and on
    touching pairs, tensor Gauss rules elsewhere.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import LinAlgError, solve as dense_solve, toeplitz

from .cases import ManufacturedCase
from .errors import AccuracyError, DomainError, NumericError
from .jacobi import gauss_jacobi_rule
from .specfun import gamma
from .spectral import PowerTerm, RhsFunction

__all__ = [
    "Mesh",
    "FemSystem",
    "StudyRow",
    "ConvergenceTable",
    "assemble",
    "stiffness_matrix",
    "fourth_difference_power",
    "load_vector",
    "solve_fem",
    "l2_error",
    "slobodetskii_error",
    "slobodetskii_seminorm",
    "convergence_study",
]

L2_RTOL = 1e-4
SEMINORM_RTOL = 1e-2


@dataclass(frozen=True)
class Mesh:
    """Uniform mesh of [0, 1] with ``n_intervals`` elements."""

    n_intervals: int

    def __post_init__(self):
        if int(self.n_intervals) != self.n_intervals or self.n_intervals < 2:
            raise DomainError(f"need an integer n_intervals >= 2, got {self.n_intervals}")

    @classmethod
    def from_h(cls, h: float) -> "Mesh":
        n = round(1.0 / h)
        if abs(n * h - 1.0) > 1e-12:
            raise DomainError(f"1/h must be an integer, got h = {h}")
        return cls(int(n))

    @property
    def h(self) -> float:
        return 1.0 / self.n_intervals

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_intervals + 1)

    @property
    def interior(self) -> np.ndarray:
        return self.nodes[1:-1]


@dataclass
class FemSystem:
    """Stiffness, load and nodal solution on the interior nodes."""

    mesh: Mesh
    alpha: float
    r: float
    stiffness: np.ndarray
    load: Optional[np.ndarray] = None
    solution: Optional[np.ndarray] = None

    def nodal_values(self) -> np.ndarray:
        """Solution including the homogeneous boundary values."""
        if self.solution is None:
            raise DomainError("system has not been solved")
        return np.concatenate(([0.0], self.solution, [0.0]))

    def evaluate(self, x):
        """Piecewise-linear interpolant of the nodal values."""
        return np.interp(x, self.mesh.nodes, self.nodal_values())

    def bilinear(self, w: np.ndarray, v: np.ndarray) -> float:
        """``B(w_h, v_h)`` for interior nodal vectors."""
        return float(v @ self.stiffness @ w)


def _check_alpha_r(alpha: float, r: float) -> None:
    if not 1.0 < alpha < 2.0:
        raise DomainError(f"alpha must lie in (1, 2), got {alpha}")
    if not 0.0 <= r <= 1.0:
        raise DomainError(f"r must lie in [0, 1], got {r}")


_SERIES_LAG = 8
_SERIES_TERMS = 40


def fourth_difference_power(gam: float, m: np.ndarray) -> np.ndarray:
    """Centred fourth difference of ``g(k) = max(k, 0)**gam`` at integer lags ``m``.

    For ``m >= 8`` the direct formula cancels badly (the result is of
    size ``m**(gam - 4)``), so the binomial expansion

    ``m**gam * sum_{j >= 4, even} C(gam, j) * 2 * (2**j - 4) * m**(-j)``

    is summed instead.
    """
    m = np.asarray(m, dtype=float)
    out = np.empty_like(m)
    direct = m < _SERIES_LAG

    def g(k):
        return np.maximum(k, 0.0) ** gam

    md = m[direct]
    out[direct] = g(md + 2) - 4.0 * g(md + 1) + 6.0 * g(md) - 4.0 * g(md - 1) + g(md - 2)
    ms = m[~direct]
    if ms.size:
        acc = np.zeros_like(ms)
        binom = 1.0
        for j in range(1, _SERIES_TERMS + 1):
            binom *= (gam - j + 1.0) / j
            if j >= 4 and j % 2 == 0:
                acc += binom * 2.0 * (2.0**j - 4.0) * ms ** (-float(j))
        out[~direct] = ms**gam * acc
    return out


def stiffness_matrix(alpha: float, mesh: Mesh) -> np.ndarray:
    """Left-sided part ``A`` with ``A[i, j] = (D^{-sigma} phi_j', phi_i')``."""
    sigma = 2.0 - alpha
    n = mesh.n_intervals - 1
    lag = np.arange(-(n - 1), n, dtype=float)
    d4 = fourth_difference_power(sigma + 1.0, lag)
    vals = -(mesh.h ** (sigma - 1.0)) / gamma(sigma + 2.0) * d4
    col = vals[n - 1 :]  # lags 0, 1, ..., n - 1  (i >= j)
    row = vals[n - 1 :: -1]  # lags 0, -1, ..., -(n - 1)
    return toeplitz(col, row)


def assemble(alpha: float, r: float, mesh: Mesh) -> FemSystem:
    """Stiffness ``B = r A + (1 - r) A^T`` over the interior nodes."""
    _check_alpha_r(alpha, r)
    A = stiffness_matrix(alpha, mesh)
    return FemSystem(mesh, alpha, r, r * A + (1.0 - r) * A.T)


def _one_sided_power_load(gamma_exp: float, mesh: Mesh) -> np.ndarray:
    """``(x^gamma, phi_i)`` for the interior nodes, in closed form.

    Second differences of ``x^(gamma+2) / ((gamma+1)(gamma+2))`` divided by
    ``h``, written through ``expm1``/``log1p`` to avoid cancellation.
    """
    n = mesh.n_intervals
    a = gamma_exp + 2.0
    i = np.arange(1, n, dtype=float)
    t = 1.0 / i
    bracket = np.empty_like(i)
    bracket[0] = 2.0**a - 2.0
    bracket[1:] = np.expm1(a * np.log1p(t[1:])) + np.expm1(a * np.log1p(-t[1:]))
    xi = i * mesh.h
    return xi**a / ((gamma_exp + 1.0) * a * mesh.h) * bracket


def _quadrature_load(f: Callable, left_exp: float, right_exp: float, mesh: Mesh, pts: int = 16) -> np.ndarray:
    """``(f, phi_i)`` by per-element Gauss rules.

    ``f`` is regular up to the factors ``x^left_exp`` in the first element and
    ``(1-x)^right_exp`` in the last; those factors are taken into the end
    rules, so ``f`` must already include them.
    """
    n, h = mesh.n_intervals, mesh.h
    t, w = np.polynomial.legendre.leggauss(pts)
    t, w = 0.5 * (t + 1.0), 0.5 * w
    out = np.zeros(n + 1)
    for e in range(n):
        a = e * h
        if e == 0 and left_exp != 0.0:
            rule = gauss_jacobi_rule(left_exp, 0.0, pts)
            x = h * rule.nodes
            wx = rule.weights * h ** (1.0 + left_exp)
            vals = np.asarray(f(x), dtype=float) / x**left_exp
        elif e == n - 1 and right_exp != 0.0:
            rule = gauss_jacobi_rule(0.0, right_exp, pts)
            x = a + h * rule.nodes
            wx = rule.weights * h ** (1.0 + right_exp)
            vals = np.asarray(f(x), dtype=float) / (1.0 - x) ** right_exp
        else:
            x = a + h * t
            wx = h * w
            vals = np.asarray(f(x), dtype=float)
        lam = (x - a) / h
        out[e] += np.sum(wx * vals * (1.0 - lam))
        out[e + 1] += np.sum(wx * vals * lam)
    return out[1:-1]


def _term_load(term: PowerTerm, mesh: Mesh) -> np.ndarray:
    if term.left_exp == 0.0 and term.right_exp == 0.0:
        return np.full(mesh.n_intervals - 1, term.coeff * mesh.h)
    if term.right_exp == 0.0:
        return term.coeff * _one_sided_power_load(term.left_exp, mesh)
    if term.left_exp == 0.0:
        return term.coeff * _one_sided_power_load(term.right_exp, mesh)[::-1]
    return _quadrature_load(term, term.left_exp, term.right_exp, mesh)


def load_vector(f, mesh: Mesh) -> np.ndarray:
    """``(f, phi_i)`` for interior nodes.

    ``f`` is a :class:`ManufacturedCase`, a :class:`RhsFunction` or a
    callable. Constant and one-sided power terms are integrated in closed
    form; the remaining parts use per-element Gauss rules.
    """
    if isinstance(f, ManufacturedCase):
        f = f.rhs
    if not isinstance(f, RhsFunction):
        f = RhsFunction.from_callable(f)
    out = np.zeros(mesh.n_intervals - 1)
    for term in f.terms:
        out += _term_load(term, mesh)
    if f.smooth is not None:
        out += _quadrature_load(f.smooth, 0.0, 0.0, mesh)
    return out


def solve_fem(case, mesh: Mesh, alpha: Optional[float] = None, r: Optional[float] = None) -> FemSystem:
    """Assemble and solve; ``case`` is a :class:`ManufacturedCase` or any ``f`` for :func:`load_vector`.

    ``alpha`` and ``r`` are taken from the case unless given.
    """
    if isinstance(case, ManufacturedCase):
        alpha = case.alpha if alpha is None else alpha
        r = case.r if r is None else r
    if alpha is None or r is None:
        raise DomainError("alpha and r are required when no manufactured case is given")
    system = assemble(alpha, r, mesh)
    system.load = load_vector(case, mesh)
    try:
        system.solution = dense_solve(system.stiffness, system.load)
    except LinAlgError as exc:
        raise NumericError(f"singular stiffness matrix: {exc}") from exc
    return system


# --- L2 error ----------------------------------------------------------------

def _graded_pieces(a: float, b: float, toward_a: bool, levels: int, ratio: float = 0.5) -> np.ndarray:
    """Breakpoints of [a, b] graded geometrically toward ``a`` (or ``b``)."""
    L = b - a
    frac = ratio ** np.arange(levels, 0, -1)
    inner = np.concatenate(([0.0], frac, [1.0]))
    if toward_a:
        return a + L * inner
    return b - L * inner[::-1]


def _cells(mesh: Mesh, levels: int) -> np.ndarray:
    """Mesh nodes plus geometric refinement inside the two end elements."""
    nodes = mesh.nodes
    left = _graded_pieces(nodes[0], nodes[1], True, levels)
    right = _graded_pieces(nodes[-2], nodes[-1], False, levels)
    edges = np.concatenate((left, nodes[2:-2], right))
    # deep levels near x = 1 round onto each other; drop the empty cells
    return edges[np.concatenate(([True], np.diff(edges) > 0))]


def _l2_sq(u: Callable, system: FemSystem, levels: int, pts: int) -> float:
    edges = _cells(system.mesh, levels)
    t, w = np.polynomial.legendre.leggauss(pts)
    t, w = 0.5 * (t + 1.0), 0.5 * w
    L = np.diff(edges)
    x = (edges[:-1, None] + L[:, None] * t).ravel()
    wx = (L[:, None] * w).ravel()
    e = np.asarray(u(x), dtype=float) - system.evaluate(x)
    return float(np.sum(wx * e * e))


def l2_error(case: ManufacturedCase, system: FemSystem) -> float:
    """``||u - u_h||_{L2}`` with a two-rule consistency check (1e-4 relative)."""
    coarse = math.sqrt(_l2_sq(case.u_exact, system, 30, 8))
    fine = math.sqrt(_l2_sq(case.u_exact, system, 40, 12))
    if abs(fine - coarse) > L2_RTOL * fine + 1e-15:
        raise AccuracyError(f"L2 error quadrature unconverged: {coarse:.6e} vs {fine:.6e}")
    return fine


# --- Slobodetskii seminorm ------------------------------------------------------

@dataclass(frozen=True)
class _ErrorFunction:
    """``e = u - v_h`` with ``v_h`` piecewise linear on ``nodes``."""

    u: Callable
    du: Callable
    nodes: np.ndarray
    values: np.ndarray
    slopes: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "slopes", np.diff(self.values) / np.diff(self.nodes))

    def __call__(self, x):
        return np.asarray(self.u(x), dtype=float) - np.interp(x, self.nodes, self.values)

    def increment(self, start, length):
        """``e(start + length) - e(start)`` from ``int e'``, avoiding cancellation.

        The segment must lie inside one element; lengths are passed
        explicitly because ``start + length`` may round back to ``start``.
        """
        t, w = np.polynomial.legendre.leggauss(6)
        t, w = 0.5 * (t + 1.0), 0.5 * w
        xs = start[..., None] + length[..., None] * t
        mid = start + 0.5 * length
        elem = np.clip(np.searchsorted(self.nodes, mid, side="right") - 1, 0, len(self.slopes) - 1)
        du = np.asarray(self.du(xs), dtype=float) @ w
        return length * (du - self.slopes[elem])


def _seminorm_sq(e: _ErrorFunction, edges: np.ndarray, s: float, n_far: int, n_near: int) -> float:
    L = np.diff(edges)
    ncell = len(L)
    gj_xi = gauss_jacobi_rule(2.0 - 2.0 * s, 0.0, n_near)
    gj_eta = gauss_jacobi_rule(1.0 - 2.0 * s, 0.0, n_near)
    gl_t, gl_w = np.polynomial.legendre.leggauss(n_near)
    gl_t, gl_w = 0.5 * (gl_t + 1.0), 0.5 * gl_w

    # diagonal cells: x = a + L xi, y = x - L xi eta
    XI, ETA = np.meshgrid(gj_xi.nodes, gj_eta.nodes, indexing="ij")
    W = np.outer(gj_xi.weights, gj_eta.weights)
    a = edges[:-1, None, None]
    x = a + L[:, None, None] * XI
    sep = L[:, None, None] * XI * ETA
    dq = e.increment(x - sep, sep) / sep
    diag = 2.0 * np.sum(L ** (3.0 - 2.0 * s) * np.sum(W * dq**2, axis=(1, 2)))

    # touching cells sharing node b: x = b + L2 u, y = b - L1 v, Duffy on both triangles
    b = edges[1:-1]
    L1, L2 = L[:-1], L[1:]
    XI2, ETA2 = np.meshgrid(gj_xi.nodes, gl_t, indexing="ij")
    W2 = np.outer(gj_xi.weights, gl_w)
    touch = 0.0
    for u_of, v_of, dist in (
        (lambda xi, eta: xi, lambda xi, eta: xi * eta, lambda l1, l2, eta: l2 + l1 * eta),
        (lambda xi, eta: xi * eta, lambda xi, eta: xi, lambda l1, l2, eta: l2 * eta + l1),
    ):
        uu = u_of(XI2, ETA2)[None]
        vv = v_of(XI2, ETA2)[None]
        l1, l2 = L1[:, None, None], L2[:, None, None]
        right_len = l2 * uu
        left_len = l1 * vv
        bb = np.broadcast_to(b[:, None, None], right_len.shape)
        inc = e.increment(bb - left_len, left_len) + e.increment(bb, right_len)
        dq = inc / (right_len + left_len)
        fac = dist(l1, l2, ETA2[None]) ** (1.0 - 2.0 * s)
        touch += np.sum(L1 * L2 * np.sum(W2[None] * fac * dq**2, axis=(1, 2)))
    touch *= 2.0

    # separated cells: tensor Gauss over all pairs with |i - j| >= 2
    t, w = np.polynomial.legendre.leggauss(n_far)
    t, w = 0.5 * (t + 1.0), 0.5 * w
    X = (edges[:-1, None] + L[:, None] * t).ravel()
    WX = (L[:, None] * w).ravel()
    E = e(X)
    cell = np.repeat(np.arange(ncell), n_far)
    far = 0.0
    chunk = max(1, 4_000_000 // len(X))
    for start in range(0, len(X), chunk):
        sl = slice(start, start + chunk)
        mask = np.abs(cell[sl, None] - cell[None, :]) >= 2
        d = np.abs(X[sl, None] - X[None, :])
        d = np.where(mask, d, 1.0)
        kern = np.where(mask, (E[sl, None] - E[None, :]) ** 2 / d ** (1.0 + 2.0 * s), 0.0)
        far += float(WX[sl] @ kern @ WX)
    return diag + touch + far


def slobodetskii_seminorm(
    u: Callable,
    du: Callable,
    nodes: np.ndarray,
    values: np.ndarray,
    s: float,
    levels: int = 30,
    n_far: int = 6,
    n_near: int = 10,
) -> float:
    r"""Seminorm of ``u - v_h`` over (0, 1), with ``v_h`` the interpolant of ``values``.

    :math:`|v|_s^2 = \int_0^1\int_0^1 (v(x)-v(y))^2 |x-y|^{-1-2s}\,dx\,dy`.
    ``du`` is the derivative of ``u``; increments over short distances are
    integrated from it instead of differencing values.
    """
    if not 0.0 < s < 1.0:
        raise DomainError(f"s must lie in (0, 1), got {s}")
    mesh = Mesh(len(nodes) - 1)
    e = _ErrorFunction(u, du, np.asarray(nodes, float), np.asarray(values, float))
    return math.sqrt(max(_seminorm_sq(e, _cells(mesh, levels), s, n_far, n_near), 0.0))


def slobodetskii_error(case: ManufacturedCase, system: FemSystem, s: Optional[float] = None) -> float:
    """``|u - u_h|_{H^s}`` with ``s = alpha / 2`` by default.

    Computed twice (30 grading levels with 6-point far-field rules, 20 levels
    with 8-point rules); a disagreement above 1% raises :class:`AccuracyError`.
    """
    s = case.alpha / 2.0 if s is None else s
    nodes, vals = system.mesh.nodes, system.nodal_values()
    first = slobodetskii_seminorm(case.u_exact, case.u_prime, nodes, vals, s, 30, 6, 10)
    second = slobodetskii_seminorm(case.u_exact, case.u_prime, nodes, vals, s, 20, 8, 12)
    if abs(first - second) > SEMINORM_RTOL * first + 1e-15:
        raise AccuracyError(f"seminorm quadrature unconverged: {first:.4e} vs {second:.4e}")
    return first


# --- convergence study ------------------------------------------------------------

@dataclass(frozen=True)
class StudyRow:
    h: float
    seminorm: Optional[float]
    seminorm_rate: Optional[float]
    l2: float
    l2_rate: Optional[float]


@dataclass(frozen=True)
class ConvergenceTable:
    case_id: int
    rows: tuple[StudyRow, ...]
    predicted_seminorm: float
    predicted_l2: float


def _study_point(args) -> tuple[Optional[float], float]:
    case, n, with_seminorm = args
    system = solve_fem(case, Mesh(n))
    l2 = l2_error(case, system)
    semi = slobodetskii_error(case, system) if with_seminorm else None
    return semi, l2


def _rate(prev: Optional[float], cur: Optional[float]) -> Optional[float]:
    if prev is None or cur is None or prev <= 0 or cur <= 0:
        return None
    return math.log2(prev / cur)


def convergence_study(
    case: ManufacturedCase,
    h_list: Sequence[float],
    with_seminorm: bool = True,
    workers: Optional[int] = None,
) -> ConvergenceTable:
    """Errors and observed rates ``log2(e(2h) / e(h))`` for a dyadic ``h_list``.

    ``workers`` (default: ``FRACSPECTRAL_THREADS`` or 1) runs resolutions in
    separate processes; rows are returned in input order either way.
    """
    if len(h_list) == 0:
        raise DomainError("h_list is empty")
    ns = [Mesh.from_h(h).n_intervals for h in h_list]
    for n0, n1 in zip(ns, ns[1:]):
        if n1 != 2 * n0:
            raise DomainError("h_list must be dyadic and descending")
    if workers is None:
        workers = int(os.environ.get("FRACSPECTRAL_THREADS", "1") or 1)
    jobs = [(case, n, with_seminorm) for n in ns]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_study_point, jobs))
    else:
        results = [_study_point(j) for j in jobs]
    rows = []
    prev_s = prev_l2 = None
    for n, (semi, l2) in zip(ns, results):
        rows.append(StudyRow(1.0 / n, semi, _rate(prev_s, semi), l2, _rate(prev_l2, l2)))
        prev_s, prev_l2 = semi, l2
    ps, pl = case.predicted
    return ConvergenceTable(case.case_id, tuple(rows), ps, pl)
