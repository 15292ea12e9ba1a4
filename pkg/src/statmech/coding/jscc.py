"""Joint source-channel coding of a binary source with bias q over a BSC(p)
at bandwidth expansion theta: the finite-temperature decoder behaves like a
REM in a magnetic field B = (1/2) ln(q / (1 - q))."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ..asymptotics import LN2, binary_entropy, gv_distance
from ..errors import ConvergenceError, DomainError
from .exponents import BscSpec, p_beta


@dataclass(frozen=True)
class JsccBoundaries:
    B: float
    q_star: float
    B0: float
    beta_c: float


def _check(p, theta):
    BscSpec(p)
    if theta <= 0:
        raise DomainError("theta must be positive")
    if theta * BscSpec(p).capacity > LN2 + 1e-15:
        raise DomainError("no solution: theta [ln2 - h2(p)] exceeds ln 2")


def jscc_beta_c(B: float, theta: float, p: float) -> float:
    """Root in beta of ln2 - h2(p_beta) = h2((1 + tanh(beta B))/2) / theta;
    inf when the two sides never meet."""
    _check(p, theta)
    f = lambda b: LN2 - binary_entropy(p_beta(p, b)) - binary_entropy((1 + math.tanh(b * B)) / 2) / theta
    hi = 1.0
    # f(0) = -ln2/theta < 0; scan outward for a sign change
    while f(hi) <= 0:
        hi *= 2
        if hi > 1e6:
            return math.inf
    return float(brentq(f, 0.0, hi, xtol=1e-15, rtol=1e-15, maxiter=500))


def jscc_boundaries(p: float, q: float, theta: float) -> JsccBoundaries:
    _check(p, theta)
    if not 0 < q < 1:
        raise DomainError("q must lie in (0, 1)")
    B = 0.5 * math.log(q / (1 - q))
    q_star = gv_distance(min(max(LN2 - theta * BscSpec(p).capacity, 0.0), LN2))
    B0 = 0.5 * math.log(q_star / (1 - q_star)) if q_star > 0 else -math.inf
    return JsccBoundaries(B, q_star, B0, jscc_beta_c(B, theta, p))


def jscc_psi(beta: float, m, theta: float, p: float):
    """Per-source-symbol exponent psi(beta, m) (vectorised over m), measured
    relative to (1-p)^{beta n}; returns (values, glassy mask)."""
    m = np.atleast_1d(np.asarray(m, dtype=float))
    J = BscSpec(p).J
    r = binary_entropy((1 + m) / 2) / theta
    dm = gv_distance(np.minimum(r, LN2))
    pb = p_beta(p, beta)
    para = r + binary_entropy(pb) - LN2 - beta * J * pb
    glassy = -beta * J * dm
    is_glassy = pb < dm
    return np.where(is_glassy, glassy, para), is_glassy


@dataclass(frozen=True)
class JsccState:
    phi: float
    m_star: float
    m_para: float
    phase: str


def jscc_phi(beta: float, B: float, theta: float, p: float, n_grid: int = 10_000) -> JsccState:
    """phi = max_m [theta psi(beta, m) + beta m B] by grid search plus a
    three-point parabolic refinement."""
    _check(p, theta)
    if beta < 0:
        raise DomainError("beta must be nonnegative")
    m = np.linspace(-1 + 1e-12, 1 - 1e-12, n_grid)
    psi, _ = jscc_psi(beta, m, theta, p)
    v = theta * psi + beta * m * B
    i = int(np.argmax(v))
    m_star, best = float(m[i]), float(v[i])
    if 0 < i < n_grid - 1:
        x0, x1, x2 = m[i - 1], m[i], m[i + 1]
        y0, y1, y2 = v[i - 1], v[i], v[i + 1]
        den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0)
        if den != 0:
            xv = x1 - 0.5 * ((x1 - x0) ** 2 * (y1 - y2) - (x1 - x2) ** 2 * (y1 - y0)) / den
            if x0 <= xv <= x2:
                pv, _ = jscc_psi(beta, xv, theta, p)
                val = float(theta * pv[0] + beta * xv * B)
                if val >= best:
                    m_star, best = float(xv), val
    _, g = jscc_psi(beta, m_star, theta, p)
    return JsccState(best, m_star, math.tanh(beta * B), "glassy" if bool(g[0]) else "paramagnetic")
