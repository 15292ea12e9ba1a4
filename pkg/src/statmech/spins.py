"""Solvable spin models: the 1-D Ising chain (transfer matrix and brute-force
enumeration) and the Curie-Weiss mean-field magnet.

Energy of the chain: E(s) = -B sum_i s_i - J sum_i s_i s_{i+1}, periodic.
Curie-Weiss: E(s) = -B sum_i s_i - (J / 2n) (sum_i s_i)^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.special import gammaln, logsumexp

from .asymptotics import binary_entropy
from .errors import DomainError, SizeError

# Onsager's critical temperature of the square lattice, quoted for reference.
ONSAGER_TC_OVER_J = 2.0 / math.log(1.0 + math.sqrt(2.0))

M_EDGE = 1.0 - 1e-12


@dataclass(frozen=True)
class IsingParams:
    beta: float
    B: float = 0.0
    J: float = 1.0

    def __post_init__(self):
        if self.beta < 0:
            raise DomainError("beta must be nonnegative")

    @property
    def h(self) -> float:
        return self.beta * self.B

    @property
    def K(self) -> float:
        return self.beta * self.J


def _log_eigs(p: IsingParams) -> tuple[float, float, float]:
    """(ln lambda1, ln|lambda2|, sign lambda2) with e^K factored out."""
    h, K = p.h, p.K
    root = math.sqrt(math.exp(-4 * K) + math.sinh(h) ** 2)
    ch = math.cosh(h)
    l1 = K + math.log(ch + root)
    # lambda2 / e^K = cosh h - root; lambda1 * lambda2 = 2 sinh 2K
    diff = ch - root
    if diff == 0.0:
        return l1, -math.inf, 0.0
    if abs(diff) < 1e-8 * ch:
        # cancellation: use the product identity instead
        prod = math.exp(2 * K) - math.exp(-2 * K)
        if prod == 0.0:
            return l1, -math.inf, 0.0
        l2 = math.log(abs(prod)) - l1
        return l1, l2, math.copysign(1.0, prod)
    return l1, K + math.log(abs(diff)), math.copysign(1.0, diff)


def ising1d_phi(p: IsingParams) -> float:
    """Free-energy density ln lambda1 of the infinite chain."""
    return _log_eigs(p)[0]


def ising1d_transfer_log_z(n: int, p: IsingParams) -> float:
    """ln(lambda1^n + lambda2^n) for the periodic n-chain."""
    l1, l2, sgn = _log_eigs(p)
    ratio = (sgn ** n) * math.exp(n * (l2 - l1)) if math.isfinite(l2) else 0.0
    return n * l1 + math.log1p(ratio)


def ising1d_magnetization(p: IsingParams) -> float:
    """sinh h / sqrt(e^{-4K} + sinh^2 h)."""
    sh = math.sinh(p.h)
    if sh == 0.0:
        return 0.0
    return sh / math.sqrt(math.exp(-4 * p.K) + sh * sh)


def spin_configurations(n: int) -> np.ndarray:
    """All 2^n configurations as rows of +-1 (bit i of the row index set means s_i = -1)."""
    idx = np.arange(2**n)[:, None]
    bits = (idx >> np.arange(n)[None, :]) & 1
    return (1 - 2 * bits).astype(np.int8)


def ising1d_energies(n: int, B: float, J: float) -> np.ndarray:
    s = spin_configurations(n).astype(float)
    return -B * s.sum(axis=1) - J * np.sum(s * np.roll(s, -1, axis=1), axis=1)


def ising1d_exact(n: int, p: IsingParams) -> float:
    """ln Z of the periodic n-chain by summing over all 2^n configurations."""
    if n > 20:
        raise SizeError("exact enumeration is limited to n <= 20")
    if n < 2:
        raise DomainError("need n >= 2")
    return float(logsumexp(-p.beta * ising1d_energies(n, p.B, p.J)))


def ising1d_couplings(n: int, J: float) -> np.ndarray:
    """Pairwise coupling matrix of the periodic chain (J_ij summed over bonds)."""
    C = np.zeros((n, n))
    for i in range(n):
        j = (i + 1) % n
        C[i, j] += J
        C[j, i] += J
    return C


# ---------------------------------------------------------------------------
# Curie-Weiss
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CWSolution:
    fixed_points: list
    kinds: list
    global_maximizer: float
    maximizers: list
    phi: float
    phase: str


def cw_psi(m, p: IsingParams):
    """h2((1+m)/2) + beta B m + beta J m^2 / 2."""
    m = np.asarray(m, dtype=float)
    out = binary_entropy((1 + m) / 2) + p.h * m + 0.5 * p.K * m * m
    return float(out) if out.ndim == 0 else out


def curie_weiss_solve(p: IsingParams, n_grid: int = 10_000) -> CWSolution:
    """All solutions of m = tanh(beta B + beta J m) and the dominant one."""
    if p.J < 0:
        raise DomainError("J must be nonnegative")
    g = lambda m: math.tanh(p.h + p.K * m) - m
    grid = np.linspace(-M_EDGE, M_EDGE, n_grid)
    vals = np.tanh(p.h + p.K * grid) - grid
    roots = []
    for i in range(n_grid - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            roots.append(float(grid[i]))
        elif a * b < 0:
            roots.append(float(brentq(g, grid[i], grid[i + 1], xtol=1e-14, maxiter=200)))
    if vals[-1] == 0.0:
        roots.append(float(grid[-1]))
    # the symmetric root m = 0 at B = 0 sits between grid points; snap tiny values
    roots = sorted(0.0 if abs(r) < 1e-13 else r for r in roots)
    kinds = []
    for r in roots:
        d2 = -1.0 / (1.0 - r * r) + p.K
        kinds.append("maximum" if d2 < 0 else ("minimum" if d2 > 0 else "flat"))
    psis = [cw_psi(r, p) for r in roots]
    best = max(psis)
    maximizers = [r for r, v in zip(roots, psis) if v >= best - 1e-13]
    m_star = max(maximizers, key=lambda r: (r >= 0, abs(r)))
    if p.B == 0.0:
        ordered = abs(m_star) > 1e-6
    else:
        ordered = p.K > 1.0
    return CWSolution(roots, kinds, m_star, maximizers, best, "ordered" if ordered else "paramagnetic")


def _grid_then_refine(f, df, lo, hi, n=10_001):
    """Grid argmax of f, refined by a root of df inside the neighbouring cells
    (the argmax itself is only resolved to ~sqrt(machine eps) from f alone)."""
    xs = np.linspace(lo, hi, n)
    vals = np.array([f(x) for x in xs])
    i = int(np.argmax(vals))
    a, b = xs[max(i - 1, 0)], xs[min(i + 1, n - 1)]
    if df(a) * df(b) < 0:
        x = float(brentq(df, a, b, xtol=1e-15, maxiter=200))
    else:
        res = minimize_scalar(lambda x: -f(x), bounds=(a, b), method="bounded",
                              options={"xatol": 1e-14 * max(1.0, abs(a), abs(b))})
        x = float(res.x)
    return (x, f(x)) if f(x) >= vals[i] else (float(xs[i]), float(vals[i]))


def curie_weiss_landau_check(p: IsingParams) -> dict:
    """Compare max_m psi(m) with ln 2 + max_z [ln cosh(h + z) - z^2 / (2K)]."""
    if p.K <= 0:
        raise DomainError("need K = beta J > 0")
    m_star, psi_max = _grid_then_refine(lambda m: cw_psi(m, p),
                                        lambda m: -math.atanh(m) + p.h + p.K * m, -M_EDGE, M_EDGE)
    # ln cosh(x) computed stably
    lncosh = lambda x: abs(x) + math.log1p(math.exp(-2 * abs(x))) - math.log(2.0)
    land = lambda z: lncosh(p.h + z) - z * z / (2 * p.K)
    span = p.K + abs(p.h) + 1.0
    z_star, land_max = _grid_then_refine(land, lambda z: math.tanh(p.h + z) - z / p.K,
                                         -span, span)
    return {"psi_max": psi_max, "landau_max": math.log(2.0) + land_max,
            "m_star": m_star, "z_star": z_star}


def curie_weiss_exact(n: int, p: IsingParams) -> tuple[float, float]:
    """(ln Z, <m>) of the n-spin Curie-Weiss model by summing over magnetization classes."""
    if n < 1:
        raise DomainError("need n >= 1")
    k = np.arange(n + 1)  # number of down spins
    M = n - 2 * k
    logw = (gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
            + p.beta * p.B * M + p.beta * p.J * M.astype(float) ** 2 / (2 * n))
    lz = logsumexp(logw)
    return float(lz), float(np.sum(np.exp(logw - lz) * M) / n)
