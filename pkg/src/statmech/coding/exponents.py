"""Finite-temperature decoding of random codes over the BSC: phase diagram,
correct-decoding exponent and the erasure-decoding exponents."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.special import expit

from ..asymptotics import LN2, binary_divergence, binary_entropy, gv_distance
from ..errors import DomainError


@dataclass(frozen=True)
class BscSpec:
    p: float

    def __post_init__(self):
        if not 0 < self.p < 0.5:
            raise DomainError("crossover probability must lie in (0, 1/2)")

    @property
    def J(self) -> float:
        return math.log((1 - self.p) / self.p)

    @property
    def capacity(self) -> float:
        return LN2 - binary_entropy(self.p)


@dataclass(frozen=True)
class ExponentResult:
    value: float
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class PhasePoint:
    beta: float
    R: float
    phase: str
    dominant_exponent: float
    exponents: dict = field(default_factory=dict)


def _check_rate(R: float, closed: bool = False):
    ok = (0 <= R <= LN2) if closed else (0 < R < LN2)
    if not ok:
        raise DomainError(f"rate {R} outside {'[0, ln2]' if closed else '(0, ln2)'}")


def p_beta(p: float, beta: float) -> float:
    """p^beta / (p^beta + (1-p)^beta), computed as a logistic in beta J."""
    if not 0 < p < 1 or beta < 0:
        raise DomainError("need 0 < p < 1 and beta >= 0")
    return float(expit(-beta * math.log((1 - p) / p)))


def ze_beta_c(R: float, p: float) -> float:
    """beta at which p_beta = delta_GV(R)."""
    _check_rate(R)
    d = gv_distance(R)
    return math.log((1 - d) / d) / BscSpec(p).J


def _para(beta, R, p):
    return R - LN2 + float(np.logaddexp(beta * math.log(p), beta * math.log1p(-p)))


def _glassy(beta, R, p):
    d = gv_distance(R)
    return beta * (d * math.log(p) + (1 - d) * math.log1p(-p))


def ze_phi(beta: float, R: float, p: float) -> tuple[float, str]:
    """Exponent of the incorrect-codeword part Z_e of the partition function."""
    BscSpec(p)
    _check_rate(R)
    if beta < 0:
        raise DomainError("beta must be nonnegative")
    if beta <= ze_beta_c(R, p):
        return _para(beta, R, p), "paramagnetic"
    return _glassy(beta, R, p), "glassy"


def ferro_exponent(beta: float, p: float) -> float:
    """Per-symbol exponent of the correct-codeword term: beta (ln(1-p) - J p)."""
    return beta * (math.log1p(-p) - BscSpec(p).J * p)


def decoder_phase(beta: float, R: float, p: float) -> PhasePoint:
    f = ferro_exponent(beta, p)
    z, branch = ze_phi(beta, R, p)
    ex = {"ferromagnetic": f, branch: z}
    if f > z:
        return PhasePoint(beta, R, "ferromagnetic", f, ex)
    return PhasePoint(beta, R, branch, z, ex)


def _gap_fn(R, p):
    """Vectorised ferro-minus-Z_e exponent gap at fixed R (delta_GV computed once)."""
    _check_rate(R)
    J = BscSpec(p).J
    d = gv_distance(R)
    bc = math.log((1 - d) / d) / J
    lp, lq = math.log(p), math.log1p(-p)

    def gap(beta):
        b = np.asarray(beta, dtype=float)
        ze = np.where(b <= bc, R - LN2 + np.logaddexp(b * lp, b * lq), b * (d * lp + (1 - d) * lq))
        return b * (lq - J * p) - ze

    return gap, bc


def decoder_boundaries(R: float, p: float, beta_max: float = 20.0, n_scan: int = 2000) -> list:
    """Inverse temperatures where the dominant phase changes at fixed R.

    Ferromagnetic boundaries are roots of the exponent gap (bisection); the
    paramagnetic-glassy boundary is beta_c(R) when it lies in a non-ferro region.
    """
    gap, bc = _gap_fn(R, p)
    betas = np.linspace(1e-9, beta_max, n_scan)
    gaps = gap(betas)
    out = []
    for i in range(n_scan - 1):
        if gaps[i] == 0.0 or gaps[i] * gaps[i + 1] < 0:
            b = brentq(lambda x: float(gap(x)), betas[i], betas[i + 1], xtol=1e-14)
            out.append((float(b), "ferromagnetic"))
    if bc <= beta_max and float(gap(bc)) < 0:
        out.append((float(bc), "paramagnetic-glassy"))
    return sorted(out)


def pc_exponent(R: float, p: float, clip: bool = True) -> float:
    """Exponent D(delta_GV(R) || p) of the average correct-decoding probability.

    Meaningful when delta_GV(R) <= p (R above capacity); with ``clip`` the
    exponent is 0 elsewhere, where correct decoding is not exponentially rare.
    """
    BscSpec(p)
    _check_rate(R, closed=True)
    d = gv_distance(R)
    if clip and d > p:
        return 0.0
    return binary_divergence(d, p)


def pc_exponent_chain(R: float, p: float) -> float:
    """Same quantity assembled as -(ln2 - R - F_g), with F_g the glassy free energy."""
    d = gv_distance(R)
    Fg = -(d * math.log(p) + (1 - d) * math.log1p(-p))
    return -(LN2 - R - Fg)


# ---------------------------------------------------------------------------
# Erasure / list decoding exponents
# ---------------------------------------------------------------------------


def _log_bhatt(p, a):
    """ln[p^a + (1-p)^a] (vectorised over a)."""
    return np.logaddexp(a * math.log(p), a * math.log1p(-p))


def erasure_exponent_jensen(R: float, T: float, p: float, beta: float,
                            grid_step: float = 0.005) -> ExponentResult:
    """max over 0 <= s <= rho <= 1 of
    (rho - [rho - beta s]_+) ln2 - (1 + beta s) ln[p^{1/(1+beta s)} + (1-p)^{1/(1+beta s)}]
    - rho R - s T, by exhaustive grid search."""
    if grid_step <= 0:
        raise DomainError("grid_step must be positive")
    BscSpec(p)
    k = int(round(1.0 / grid_step))
    g = np.linspace(0.0, 1.0, k + 1)
    s = g[:, None]
    rho = g[None, :]
    bs = beta * s
    val = ((rho - np.maximum(rho - bs, 0.0)) * LN2 - (1 + bs) * _log_bhatt(p, 1.0 / (1 + bs))
           - rho * R - s * T)
    val = np.where(s <= rho + 1e-12, val, -np.inf)
    i, j = np.unravel_index(int(np.argmax(val)), val.shape)
    return ExponentResult(float(val[i, j]), {"s": float(g[i]), "rho": float(g[j])})


def _direct_objective(s, R, T, p, beta):
    s = np.asarray(s, dtype=float)
    bs = beta * s
    phi = np.minimum((LN2 - R) * (1 - np.maximum(1 - bs, 0.0)),
                     s * (beta * (LN2 - R) - R * max(1 - beta, 0.0)))
    return phi - (1 + bs) * _log_bhatt(p, 1.0 / (1 + bs)) - s * T


def erasure_exponent_direct(R: float, T: float, p: float, beta: float,
                            grid_step: float = 0.005, s_max: float = 5.0,
                            refine: bool = False) -> ExponentResult:
    """Exponent from direct moment evaluation of the distance enumerators,
    maximised over s in [0, s_max] on a grid, with optional golden-section
    refinement around the best cell."""
    if grid_step <= 0 or s_max <= 0:
        raise DomainError("grid_step and s_max must be positive")
    BscSpec(p)
    k = int(round(s_max / grid_step))
    s = np.linspace(0.0, s_max, k + 1)
    val = _direct_objective(s, R, T, p, beta)
    i = int(np.argmax(val))
    best_s, best = float(s[i]), float(val[i])
    if refine and 0 < i < k:
        f = lambda x: -float(_direct_objective(x, R, T, p, beta))
        res = minimize_scalar(f, bracket=(s[i - 1], s[i], s[i + 1]), method="golden", tol=1e-10)
        if -res.fun > best and s[i - 1] <= res.x <= s[i + 1]:
            best_s, best = float(res.x), float(-res.fun)
    return ExponentResult(best, {"s": best_s})


TABLE1_RATES = tuple(round(0.01 * i, 2) for i in range(7))
TABLE1_JENSEN = (0.1390, 0.1290, 0.1190, 0.1090, 0.0990, 0.0890, 0.0790)
TABLE1_DIRECT = (0.2211, 0.2027, 0.1838, 0.1642, 0.1441, 0.1231, 0.1015)


def table1(p: float = 0.1, beta: float = 0.5, T: float = 0.001, rates=TABLE1_RATES,
           grid_step: float = 0.005) -> list[dict]:
    rows = []
    for R in rates:
        a = erasure_exponent_jensen(R, T, p, beta, grid_step)
        b = erasure_exponent_direct(R, T, p, beta, grid_step)
        rows.append({"R": R, "E1_jensen": a.value, "E1_direct": b.value,
                     "s_star": b.params["s"], "rho_star": a.params["rho"]})
    return rows
