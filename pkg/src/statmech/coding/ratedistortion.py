"""Parametric rate-distortion with a fixed random-coding distribution, its
MMSE integral representation, the parametric channel capacity of the BSC,
the high-resolution D(R) check and the tree-code (DPRM) distortion.

Gamma(beta) = sum_y q(y) ln sum_x p(x) exp(-beta d(x,y)) is the log-partition
function of the problem; R(D) = -min_{beta >= 0} [beta D + Gamma(beta)].
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from ..asymptotics import LN2, binary_entropy
from ..errors import ConvergenceError, DomainError, NormalizationError, ShapeError, SymmetryError


@dataclass
class RdProblem:
    """Source law q over Y, coding law p over X, distortion d[x, y] >= 0."""

    q: np.ndarray
    p: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        self.p = np.asarray(self.p, dtype=float)
        self.d = np.asarray(self.d, dtype=float)
        if self.d.shape != (self.p.size, self.q.size):
            raise ShapeError("distortion must have shape (|X|, |Y|)")
        for name, v in (("q", self.q), ("p", self.p)):
            if np.any(v < 0) or abs(v.sum() - 1.0) > 1e-12:
                raise NormalizationError(f"{name} must be a normalized distribution")
        if np.any(~np.isfinite(self.d)) or np.any(self.d < 0):
            raise DomainError("distortion must be finite and nonnegative")

    @classmethod
    def binary_hamming(cls) -> "RdProblem":
        return cls([0.5, 0.5], [0.5, 0.5], [[0.0, 1.0], [1.0, 0.0]])

    def to_json(self) -> str:
        return json.dumps({"q": self.q.tolist(), "p": self.p.tolist(), "d": self.d.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "RdProblem":
        o = json.loads(text)
        return cls(o["q"], o["p"], o["d"])

    @property
    def D_min(self) -> float:
        sup = self.p > 0
        return float(np.dot(self.q, self.d[sup].min(axis=0)))

    @property
    def D0(self) -> float:
        return float(self.p @ self.d @ self.q)

    # -- tilted quantities -------------------------------------------------
    def _tilt(self, beta):
        """Posterior weights P_beta(x|y) and ln Z_y(beta), with one exponential pass."""
        with np.errstate(divide="ignore"):
            lw = np.log(self.p)[:, None] - beta * self.d
        top = lw.max(axis=0)
        w = np.exp(lw - top[None, :])
        z = w.sum(axis=0)
        w /= z[None, :]
        return w, top + np.log(z)

    def gamma(self, beta: float) -> float:
        return float(np.dot(self.q, self._tilt(beta)[1]))

    def distortion(self, beta: float) -> float:
        """D_beta = -Gamma'(beta): mean distortion under P_beta(x|y) q(y)."""
        w, _ = self._tilt(beta)
        return float(np.dot(self.q, np.sum(w * self.d, axis=0)))

    def mmse(self, beta: float) -> float:
        """Average conditional variance of d(X, y) given y under P_beta."""
        w, _ = self._tilt(beta)
        m1 = np.sum(w * self.d, axis=0)
        m2 = np.sum(w * self.d**2, axis=0)
        return float(np.dot(self.q, np.maximum(m2 - m1**2, 0.0)))

    def rate(self, beta: float) -> float:
        """R(D_beta) = -(beta D_beta + Gamma(beta))."""
        w, lz = self._tilt(beta)
        d_beta = float(np.dot(self.q, np.sum(w * self.d, axis=0)))
        return -(beta * d_beta + float(np.dot(self.q, lz)))

    def rate_at_dmin(self) -> float:
        sup = self.p > 0
        dm = self.d[sup].min(axis=0)
        hit = np.isclose(self.d, dm[None, :], rtol=0, atol=1e-15) & sup[:, None]
        mass = (self.p[:, None] * hit).sum(axis=0)
        return float(-np.dot(self.q, np.log(mass)))


def _beta_for_distortion(problem: RdProblem, D: float) -> float:
    f = lambda b: problem.distortion(b) - D
    hi = 1.0
    while f(hi) > 0:
        hi *= 2.0
        if hi > 1e12:
            raise ConvergenceError("could not bracket beta for the requested distortion")
    return float(brentq(f, 0.0, hi, xtol=1e-14, rtol=1e-15, maxiter=500))


def rd_parametric(problem: RdProblem, D: float) -> tuple[float, float]:
    """(R(D), beta*) by solving the stationarity condition D_beta = D.

    Gamma is convex in beta, so its stationary point is the minimum.
    """
    dmin, d0 = problem.D_min, problem.D0
    tol = 1e-12 * max(1.0, d0)
    if D < dmin - tol or D > d0 + tol:
        raise DomainError(f"D={D} outside [D_min, D0] = [{dmin}, {d0}]")
    if D >= d0 - tol:
        return 0.0, 0.0
    if D <= dmin + tol:
        return problem.rate_at_dmin(), math.inf
    b = _beta_for_distortion(problem, D)
    return max(-(b * D + problem.gamma(b)), 0.0), b


def distortion_rate(problem: RdProblem, R: float) -> tuple[float, float]:
    """Inverse of rd_parametric: (D(R), beta*)."""
    if R <= 0:
        return problem.D0, 0.0
    if R >= problem.rate_at_dmin():
        return problem.D_min, math.inf
    hi = 1.0
    while problem.rate(hi) < R:
        hi *= 2.0
        if hi > 1e12:
            raise ConvergenceError("could not bracket beta for the requested rate")
    b = float(brentq(lambda x: problem.rate(x) - R, 0.0, hi, xtol=1e-14, rtol=1e-15, maxiter=500))
    return problem.distortion(b), b


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-12, max_depth: int = 50) -> float:
    """Adaptive Simpson quadrature with Richardson correction."""
    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4 * fm + fb)

    def rec(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        if depth <= 0:
            raise ConvergenceError("adaptive Simpson exceeded its recursion depth")
        if abs(left + right - whole) <= 15 * tol:
            return left + right + (left + right - whole) / 15.0
        return (rec(a, m, fa, flm, fm, left, tol / 2, depth - 1)
                + rec(m, b, fm, frm, fb, right, tol / 2, depth - 1))

    if a == b:
        return 0.0
    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return rec(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, max_depth)


def rd_mmse_representation(problem: RdProblem, beta: float) -> dict:
    """R(D_beta) = int_0^beta b mmse_b db and D_beta = D0 - int_0^beta mmse_b db,
    next to the direct values -(beta D_beta + Gamma(beta)) and -Gamma'(beta)."""
    if beta < 0:
        raise DomainError("beta must be nonnegative")
    r_int = adaptive_simpson(lambda b: b * problem.mmse(b), 0.0, beta)
    d_int = problem.D0 - adaptive_simpson(problem.mmse, 0.0, beta)
    return {"R_integral": r_int, "D_integral": d_int,
            "D_beta": problem.distortion(beta), "R_direct": problem.rate(beta)}


# ---------------------------------------------------------------------------
# Channel capacity in parametric form
# ---------------------------------------------------------------------------


def capacity_objective(beta: float, p: float) -> float:
    """beta H(Y|X) + sum_y q(y) ln sum_x p(x) W(y|x)^beta, BSC with uniform input."""
    return beta * binary_entropy(p) + float(np.logaddexp(beta * math.log(p), beta * math.log1p(-p))) - LN2


def capacity_parametric(p: float) -> tuple[float, float]:
    """(C, beta*) with C = -min_beta capacity_objective.

    The derivative h2(p) + p_beta ln p + (1 - p_beta) ln(1 - p) is increasing
    in beta; its root is located by Brent's method.
    """
    if not 0 < p < 0.5:
        raise DomainError("BSC crossover must lie in (0, 1/2)")
    lp, lq = math.log(p), math.log1p(-p)
    h = binary_entropy(p)

    def dF(b):
        pb = 1.0 / (1.0 + math.exp(b * (lq - lp)))
        return h + pb * lp + (1 - pb) * lq

    lo, hi = 0.0, 2.0
    while dF(hi) < 0:
        hi *= 2
    b = float(brentq(dF, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500))
    return -capacity_objective(b, p), b


# ---------------------------------------------------------------------------
# High-resolution regime
# ---------------------------------------------------------------------------


def lp_uniform_problem(theta: float, A: float = 1.0, n_points: int = 2001) -> RdProblem:
    """Uniform source and coding laws on a uniform grid of [-A, A], d = |x - y|^theta."""
    if n_points < 2001:
        raise DomainError("high-resolution checks need at least 2001 grid points")
    x = np.linspace(-A, A, n_points)
    u = np.full(n_points, 1.0 / n_points)
    return RdProblem(u, u, np.abs(x[:, None] - x[None, :]) ** theta)


def highres_check(theta: float, R_grid=None, A: float = 1.0, n_points: int = 2001) -> dict:
    """Fit the slope of ln D(R) against R on the discretised L^theta problem.

    Without ``R_grid`` the rates are taken where the tilted posterior width
    beta^{-1/theta} lies between 20 and 50 grid cells: wide enough to hide the
    discretisation, narrow enough to keep edge effects small.
    """
    pr = lp_uniform_problem(theta, A, n_points)
    cell = 2 * A / (n_points - 1)
    if R_grid is None:
        # parametric points (R_beta, D_beta) need no inversion
        betas = np.geomspace(50 * cell, 20 * cell, 8) ** (-theta)
        R_grid = np.array([pr.rate(b) for b in betas])
        D = np.array([pr.distortion(b) for b in betas])
    else:
        R_grid = np.asarray(R_grid, dtype=float)
        D = np.array([distortion_rate(pr, r)[0] for r in R_grid])
    slope, intercept = np.polyfit(R_grid, np.log(D), 1)
    return {"slope": float(slope), "target": -float(theta), "R": R_grid.tolist(), "D": D.tolist(),
            "relative_error": abs(slope + theta) / theta}


# ---------------------------------------------------------------------------
# Tree codes / directed polymer
# ---------------------------------------------------------------------------


def _check_row_symmetry(problem: RdProblem):
    rows = [i for i in range(problem.p.size) if problem.p[i] > 0]
    ref = None
    for i in rows:
        order = np.lexsort((problem.q, problem.d[i]))
        key = np.stack([problem.d[i][order], problem.q[order]])
        if ref is None:
            ref = key
        elif not np.allclose(key, ref, rtol=0, atol=1e-12):
            raise SymmetryError("distribution of rho(x, Y) differs between codeword letters")
    return rows[0]


def dprm_distortion(problem: RdProblem, R: float) -> tuple[float, float]:
    """D(R) = max_{beta >= 0} -(ln E exp(-beta rho(x, Y)) + R) / beta for tree codes.

    The stationarity condition L(beta) - beta L'(beta) + R = 0 (L the log
    moment function) has a single root, found by Brent's method; past the
    freezing point the value saturates at the minimal distortion.
    Returns (D, beta_c).
    """
    if R < 0:
        raise DomainError("rate must be nonnegative")
    x = _check_row_symmetry(problem)
    rho, q = problem.d[x], problem.q
    lq = np.log(np.where(q > 0, q, 1.0))
    m = q > 0

    def L(b):
        return float(logsumexp(lq[m] - b * rho[m]))

    def mean(b):
        w = lq[m] - b * rho[m]
        return float(np.sum(np.exp(w - logsumexp(w)) * rho[m]))

    if R == 0:
        return float(np.dot(q, rho)), 0.0
    g = lambda b: L(b) + b * mean(b) + R
    rmin = rho[m].min()
    floor = -float(np.log(q[m][np.isclose(rho[m], rmin, rtol=0, atol=1e-15)].sum()))
    if R >= floor:
        return float(rmin), math.inf
    hi = 1.0
    while g(hi) > 0:
        hi *= 2.0
        if hi > 1e12:
            raise ConvergenceError("freezing temperature not bracketed")
    b = float(brentq(g, 0.0, hi, xtol=1e-14, rtol=1e-15, maxiter=500))
    return -(L(b) + R) / b, b
