"""Fisher information of gridded densities, the de Bruijn identity under
arbitrary symmetric perturbations, the Fisher-information temperature, and
a log-sum-inequality upper bound on the entropy rate of a hidden Markov
process (with a Monte Carlo forward-algorithm estimate to compare against).
"""
from __future__ import annotations

import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import xlogy

from . import _kernels
from .errors import (ConvergenceWarning, DomainError, GridOverflowError, NormalizationError,
                     ShapeError)

TAIL = 1e-12


@dataclass
class GriddedDensity:
    """Density sampled on a uniform grid, trapezoid-normalized."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.grid, dtype=float)
        q = np.asarray(self.values, dtype=float)
        if x.ndim != 1 or x.shape != q.shape or x.size < 5:
            raise ShapeError("grid and values must be equal-length 1-D arrays (>= 5 points)")
        d = np.diff(x)
        if np.any(d <= 0) or np.ptp(d) > 1e-9 * d.mean():
            raise ShapeError("grid must be uniform and increasing")
        if np.any(q < 0):
            raise DomainError("density values must be nonnegative")
        mass = np.trapezoid(q, x)
        if abs(mass - 1.0) > 1e-8:
            raise NormalizationError(f"density integrates to {mass!r}, not 1")
        if q[0] >= TAIL or q[-1] >= TAIL:
            raise DomainError("support must lie strictly inside the grid (edge values >= 1e-12)")
        self.grid, self.values = x, q

    @property
    def spacing(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @classmethod
    def from_callable(cls, pdf: Callable, lo: float, hi: float, n: int) -> "GriddedDensity":
        x = np.linspace(lo, hi, n)
        q = np.asarray(pdf(x), dtype=float)
        return cls(x, q / np.trapezoid(q, x))

    @classmethod
    def gaussian(cls, var: float = 1.0, mean: float = 0.0, n: int = 4001, width: float = 10.0):
        if var <= 0:
            raise DomainError("variance must be positive")
        sd = math.sqrt(var)
        return cls.from_callable(lambda x: np.exp(-0.5 * (x - mean) ** 2 / var),
                                 mean - width * sd, mean + width * sd, n)

    @classmethod
    def laplace(cls, b: float = 1.0, mean: float = 0.0, n: int = 120_001, width: float = 30.0):
        # the cusp at the mean needs a fine grid for the central difference
        if b <= 0:
            raise DomainError("scale must be positive")
        return cls.from_callable(lambda x: np.exp(-np.abs(x - mean) / b),
                                 mean - width * b, mean + width * b, n)

    def shifted(self, c: float) -> "GriddedDensity":
        return GriddedDensity(self.grid + c, self.values)

    def differential_entropy(self) -> float:
        return float(-np.trapezoid(xlogy(self.values, self.values), self.grid))

    def to_csv_rows(self):
        yield ("x", "q")
        for a, b in zip(self.grid, self.values):
            yield (float(a), float(b))


def fisher_information(density: GriddedDensity) -> float:
    """J(Q) = int Q'(x)^2 / Q(x) dx for a location parameter."""
    q = density.values
    dq = np.gradient(q, density.spacing)
    keep = q > TAIL
    integrand = np.zeros_like(q)
    integrand[keep] = dq[keep] ** 2 / q[keep]
    return float(np.trapezoid(integrand, density.grid))


def generalized_temperature(density: GriddedDensity, alpha: float) -> float:
    """T = alpha / J(Q) (k = 1), the temperature of the quadratic Hamiltonian
    (alpha/2) x^2 whose Boltzmann density has the same Fisher information."""
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    return alpha / fisher_information(density)


# ---------------------------------------------------------------------------
# de Bruijn
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Perturbation:
    """Symmetric unit-variance density on [-half_width, half_width]; ``breaks``
    lists interior kinks so quadrature panels avoid them."""

    name: str
    pdf: Callable
    half_width: float
    breaks: tuple = ()

    def panels(self):
        pts = [-self.half_width, *sorted(self.breaks), self.half_width]
        return list(zip(pts[:-1], pts[1:]))

    def validate(self, n_nodes: int = 200) -> None:
        m0 = m2 = asym = 0.0
        for z, w in _nodes(self, n_nodes):
            p = self.pdf(z)
            m0 += np.sum(w * p)
            m2 += np.sum(w * p * z * z)
            asym = max(asym, float(np.max(np.abs(p - self.pdf(-z)))))
        if abs(m0 - 1) > 1e-6 or abs(m2 - 1) > 1e-6 or asym > 1e-12:
            raise DomainError(f"perturbation {self.name!r} must be symmetric with unit mass "
                              f"and variance (mass {m0:.8g}, variance {m2:.8g})")

    @classmethod
    def gaussian(cls):
        return cls("gaussian", lambda z: np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi), 12.0)

    @classmethod
    def uniform(cls):
        a = math.sqrt(3.0)
        return cls("uniform", lambda z: np.where(np.abs(z) <= a, 0.5 / a, 0.0), a)

    @classmethod
    def triangular(cls):
        a = math.sqrt(6.0)
        return cls("triangular", lambda z: np.clip(a - np.abs(z), 0.0, None) / (a * a), a, (0.0,))


def _nodes(pert: Perturbation, n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    for lo, hi in pert.panels():
        half = 0.5 * (hi - lo)
        yield lo + half * (x + 1.0), half * w


def perturbed_entropy(density: GriddedDensity, pert: Perturbation, delta: float,
                      n_nodes: int = 200) -> float:
    """h(X + sqrt(delta) Z) by spline convolution on the density's own grid."""
    if delta < 0:
        raise DomainError("delta must be nonnegative")
    if delta == 0:
        return density.differential_entropy()
    x = density.grid
    spline = CubicSpline(x, density.values, bc_type="natural", extrapolate=False)
    sd = math.sqrt(delta)
    if sd * pert.half_width > 0.5 * (x[-1] - x[0]):
        raise GridOverflowError("perturbation is wider than the grid")
    q = np.zeros_like(x)
    for z, w in _nodes(pert, n_nodes):
        for zi, wi in zip(z, w):
            pz = float(pert.pdf(np.array(zi)))
            if pz == 0.0:
                continue
            v = spline(x - sd * zi)
            q += wi * pz * np.nan_to_num(v, nan=0.0)
    np.maximum(q, 0.0, out=q)
    if q[0] >= TAIL or q[-1] >= TAIL:
        raise GridOverflowError("convolved density reaches the grid boundary; widen the grid")
    return float(-np.trapezoid(xlogy(q, q), x))


@dataclass(frozen=True)
class DeBruijnResult:
    slope: float
    half_fisher: float
    entropies: dict
    perturbation: str

    @property
    def error(self) -> float:
        return abs(self.slope - self.half_fisher)


def richardson_slope(h0: float, hs: Sequence[float], deltas: Sequence[float]) -> float:
    """Slope at 0 from forward quotients on a halving sequence of deltas."""
    d = np.asarray(deltas, dtype=float)
    if np.any(np.abs(d[1:] / d[:-1] - 0.5) > 1e-12):
        raise DomainError("deltas must halve successively")
    table = [(h - h0) / dl for h, dl in zip(hs, d)]
    k = 1
    while len(table) > 1:
        f = 2.0 ** k
        table = [(f * b - a) / (f - 1.0) for a, b in zip(table, table[1:])]
        k += 1
    return float(table[0])


def de_bruijn_check(density: GriddedDensity, perturbation: Perturbation,
                    deltas: Sequence[float] = (1e-2, 5e-3, 2.5e-3), n_nodes: int = 200) -> DeBruijnResult:
    """Compare d h(X + sqrt(delta) Z)/d delta at 0 with J(Q)/2."""
    perturbation.validate()
    ents = {0.0: density.differential_entropy()}
    for d in deltas:
        ents[float(d)] = perturbed_entropy(density, perturbation, d, n_nodes)
    slope = richardson_slope(ents[0.0], [ents[float(d)] for d in deltas], deltas)
    return DeBruijnResult(slope, 0.5 * fisher_information(density), ents, perturbation.name)


def vector_de_bruijn_check(densities: Sequence[GriddedDensity], perturbation: Perturbation,
                           deltas=(1e-2, 5e-3, 2.5e-3)) -> tuple[float, float]:
    """Product density: (sum of coordinate slopes, trace of the Fisher matrix / 2)."""
    res = [de_bruijn_check(d, perturbation, deltas) for d in densities]
    return sum(r.slope for r in res), sum(r.half_fisher for r in res)


# ---------------------------------------------------------------------------
# Hidden Markov entropy-rate bound
# ---------------------------------------------------------------------------


def _stationary(Q: np.ndarray) -> np.ndarray:
    k = Q.shape[0]
    A = np.vstack([Q.T - np.eye(k), np.ones(k)])
    b = np.zeros(k + 1)
    b[-1] = 1.0
    return np.linalg.lstsq(A, b, rcond=None)[0]


@dataclass
class HmmSpec:
    """Hidden state chain Q[x, x'] with emissions W[x, y]."""

    Q: np.ndarray
    W: np.ndarray
    pi: np.ndarray | None = None

    def __post_init__(self):
        self.Q = np.asarray(self.Q, dtype=float)
        self.W = np.asarray(self.W, dtype=float)
        kx = self.Q.shape[0]
        if self.Q.shape != (kx, kx) or self.W.ndim != 2 or self.W.shape[0] != kx:
            raise ShapeError("Q must be square and W must have one row per hidden state")
        for M, name in ((self.Q, "Q"), (self.W, "W")):
            if np.any(M < 0) or np.any(np.abs(M.sum(axis=1) - 1) > 1e-12):
                raise NormalizationError(f"rows of {name} must be probability vectors")
        if self.pi is None:
            self.pi = _stationary(self.Q)
        self.pi = np.asarray(self.pi, dtype=float)
        if np.any(self.pi < -1e-15) or abs(self.pi.sum() - 1) > 1e-10:
            raise NormalizationError("pi must be a probability vector")
        if np.max(np.abs(self.pi @ self.Q - self.pi)) > 1e-10:
            raise DomainError("pi is not stationary for Q")
        self.pi = np.clip(self.pi, 0.0, None)

    @property
    def kx(self) -> int:
        return self.Q.shape[0]

    @property
    def ky(self) -> int:
        return self.W.shape[1]

    def pair_law(self) -> np.ndarray:
        """P(y0, y1) = sum pi(x0) Q(x1|x0) W(y0|x0) W(y1|x1)."""
        return np.einsum("a,ab,ai,bj->ij", self.pi, self.Q, self.W, self.W)

    def to_json(self) -> str:
        return json.dumps({"Q": self.Q.tolist(), "W": self.W.tolist(), "pi": self.pi.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "HmmSpec":
        d = json.loads(text)
        return cls(d["Q"], d["W"], d.get("pi"))

    @classmethod
    def binary_symmetric(cls, flip: float, noise: float) -> "HmmSpec":
        return cls([[1 - flip, flip], [flip, 1 - flip]], [[1 - noise, noise], [noise, 1 - noise]])

    @classmethod
    def random(cls, rng: np.random.Generator, kx: int = 2, ky: int = 2) -> "HmmSpec":
        return cls(rng.dirichlet(np.ones(kx), size=kx), rng.dirichlet(np.ones(ky), size=kx))


def _safe_log(a: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(a)


def delta_objective(hmm: HmmSpec, A: np.ndarray) -> float:
    """E{Delta(Y0, Y1; P0)} under the true pair law, where P0 enters only
    through its conditional A[y, x] = P0(x | y):

        Delta = sum_{x0,x1} A(x0|y0) A(x1|y1) ln[Q(x1|x0) W(y1|x1) / A(x1|y1)].
    """
    P2 = hmm.pair_law()
    lq = _safe_log(hmm.Q)
    lw = _safe_log(hmm.W)
    total = 0.0
    for y0 in range(hmm.ky):
        for y1 in range(hmm.ky):
            if P2[y0, y1] == 0:
                continue
            w = np.outer(A[y0], A[y1])
            with np.errstate(invalid="ignore"):
                lr = lq + lw[:, y1][None, :] - _safe_log(A[y1])[None, :]
            mask = w > 0
            with np.errstate(invalid="ignore"):
                lr = np.where(mask, lr, 0.0)
            total += P2[y0, y1] * float(np.sum(w[mask] * lr[mask]))
    return total


@dataclass(frozen=True)
class HmmBound:
    bound: float
    P0: np.ndarray
    conditional: np.ndarray
    objective: float
    converged: bool
    starts: list = field(default_factory=list)


# stand-in for ln 0 inside the ascent; large enough that exp() underflows to exactly 0
_LOG_FLOOR = -1e6


def _ascend(hmm: HmmSpec, A: np.ndarray, max_iter: int, tol: float):
    """Block coordinate ascent on the rows A[y, :]; each block proposal is the
    mean-field stationary point exp(grad/p(y)), accepted only if the objective
    rises (otherwise damped geometrically toward the current row)."""
    P2 = hmm.pair_law()
    py = P2.sum(axis=0)
    L = np.maximum(_safe_log(hmm.Q)[:, :, None] + _safe_log(hmm.W)[None, :, :], _LOG_FLOOR)
    A = A.copy()
    G = delta_objective(hmm, A)
    for it in range(max_iter):
        G_start = G
        for y in range(hmm.ky):
            if py[y] == 0:
                continue
            # d/dA[y, x] of the bilinear part
            g_out = np.einsum("j,jb,abj->a", P2[y], A, L)
            g_in = np.einsum("i,ia,ab->b", P2[:, y], A, L[:, :, y])
            z = (g_out + g_in) / py[y]
            prop = np.exp(z - z.max())
            prop /= prop.sum()
            t = 1.0
            old = A[y].copy()
            for _ in range(30):
                if t == 1.0:
                    cand = prop
                else:
                    cand = np.exp((1 - t) * np.maximum(_safe_log(old), _LOG_FLOOR) + t * np.maximum(_safe_log(prop), _LOG_FLOOR))
                    cand /= cand.sum()
                A[y] = cand
                Gn = delta_objective(hmm, A)
                if Gn >= G:
                    G = Gn
                    break
                t *= 0.5
            else:
                A[y] = old
        if math.isfinite(G) and abs(G - G_start) <= tol * max(1.0, abs(G)):
            return A, G, True
    return A, G, False


def hmm_entropy_upper_bound(hmm: HmmSpec, n_starts: int = 5, max_iter: int = 500,
                            tol: float = 1e-13, seed: int = 0, jobs: int = 1) -> HmmBound:
    """Upper bound -max_{P0} E{Delta(Y0, Y1; P0)} on the entropy rate (nats/symbol).

    Starts: the product initialization P0(x, y) = pi(x) W(y|x) and ``n_starts``
    Dirichlet draws. Any P0 gives a valid bound; the best one is returned.
    The returned joint P0 pairs the optimal conditional with the true
    marginal of Y (only the conditional affects the bound).
    """
    rng = np.random.default_rng(seed)
    joint = hmm.pi[:, None] * hmm.W
    py = joint.sum(axis=0)
    prod = np.where(py[:, None] > 0, (joint / np.where(py > 0, py, 1.0)).T, 1.0 / hmm.kx)
    inits = [prod] + [rng.dirichlet(np.ones(hmm.kx), size=hmm.ky) for _ in range(n_starts)]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            runs = list(ex.map(lambda A0: _ascend(hmm, A0, max_iter, tol), inits))
    else:
        runs = [_ascend(hmm, A0, max_iter, tol) for A0 in inits]
    best = max(range(len(runs)), key=lambda i: runs[i][1])
    A, G, ok = runs[best]
    if not ok:
        warnings.warn(f"coordinate ascent hit the iteration cap ({max_iter})", ConvergenceWarning)
    P0 = (A * py[:, None]).T
    return HmmBound(-G, P0, A, G, ok, [-r[1] for r in runs])


def hmm_entropy_rate_mc(hmm: HmmSpec, n: int = 1_000_000, seed: int = 0,
                        n_batches: int = 100) -> tuple[float, float]:
    """Monte Carlo entropy rate -(1/n) ln P(Y^n) from one stationary path,
    with a batch-means standard error."""
    rng = np.random.default_rng(seed)
    ux = rng.random(n)
    uy = rng.random(n)
    _, ys = _kernels.hmm_sample(hmm.Q, hmm.W, hmm.pi, ux, uy)
    inc = _kernels.hmm_forward_increments(hmm.Q, hmm.W, hmm.pi, ys)
    k = n // n_batches
    b = -inc[: k * n_batches].reshape(n_batches, k).mean(axis=1)
    return float(-inc.mean()), float(b.std(ddof=1) / math.sqrt(n_batches))


def markov_entropy_rate(Q: np.ndarray, pi: np.ndarray) -> float:
    """-sum pi(x) Q(x'|x) ln Q(x'|x)."""
    Q = np.asarray(Q, dtype=float)
    return float(-np.sum(np.asarray(pi)[:, None] * xlogy(Q, Q)))


def single_letter_entropy(hmm: HmmSpec) -> float:
    p = hmm.pi @ hmm.W
    return float(-np.sum(xlogy(p, p)))
