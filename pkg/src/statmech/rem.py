"""Random Energy Model (quenched, annealed, in a field), the two-level GREM,
finite-n Monte Carlo for the REM, and the SK metastable-state capacity.

Energies of the REM are i.i.d. N(0, n J^2 / 2) over the 2^n configurations.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq
from scipy.special import log_ndtr, logsumexp, ndtr

from .asymptotics import LN2, UNATTAINABLE, binary_entropy
from .errors import ConvergenceError, DomainError, SizeError

SQRT_LN2 = math.sqrt(LN2)


@dataclass
class Segment:
    lo: float
    hi: float
    tag: str
    form: str
    evaluate: Callable[[float], float] = field(repr=False)


@dataclass
class PiecewisePhi:
    """phi(beta) on [0, inf) as contiguous closed-form segments."""

    segments: list

    def __post_init__(self):
        if not self.segments or self.segments[0].lo != 0.0 or self.segments[-1].hi != math.inf:
            raise DomainError("segments must cover [0, inf)")
        for a, b in zip(self.segments, self.segments[1:]):
            if a.hi != b.lo:
                raise DomainError("segments must be contiguous")

    @property
    def transition_points(self) -> list:
        return [(a.hi, a.tag, b.tag) for a, b in zip(self.segments, self.segments[1:])]

    def segment(self, beta: float) -> Segment:
        if beta < 0:
            raise DomainError("beta must be nonnegative")
        for s in self.segments:
            if beta <= s.hi:
                return s
        return self.segments[-1]

    def __call__(self, beta: float) -> float:
        return self.segment(beta).evaluate(beta)

    def phase(self, beta: float) -> str:
        return self.segment(beta).tag

    def continuity_residuals(self) -> list:
        return [abs(a.evaluate(a.hi) - b.evaluate(a.hi)) for a, b in zip(self.segments, self.segments[1:])]

    def to_json(self, samples_per_segment: int = 5) -> str:
        segs = []
        for s in self.segments:
            hi = s.hi if math.isfinite(s.hi) else s.lo + 1.0 + s.lo
            xs = np.linspace(s.lo, hi, samples_per_segment)
            segs.append({"lo": s.lo, "hi": s.hi if math.isfinite(s.hi) else "inf",
                         "phase": s.tag, "form": s.form,
                         "samples": [[float(x), float(s.evaluate(x))] for x in xs]})
        return json.dumps({"segments": segs,
                           "transitions": [{"beta": b, "left": l, "right": r}
                                           for b, l, r in self.transition_points]})


# ---------------------------------------------------------------------------
# REM
# ---------------------------------------------------------------------------


def rem_beta_c(J: float) -> float:
    return 2.0 * SQRT_LN2 / J


def rem_curve(J: float) -> PiecewisePhi:
    if J <= 0:
        raise DomainError("J must be positive")
    bc = rem_beta_c(J)
    return PiecewisePhi([
        Segment(0.0, bc, "paramagnetic", "ln2 + beta^2 J^2 / 4", lambda b: LN2 + b * b * J * J / 4),
        Segment(bc, math.inf, "glassy", "beta J sqrt(ln2)", lambda b: b * J * SQRT_LN2),
    ])


def rem_phi(beta: float, J: float = 1.0) -> tuple[float, str]:
    """Quenched free-energy density and phase label."""
    c = rem_curve(J)
    return c(beta), c.phase(beta)


def rem_entropy(epsilon: float, J: float = 1.0):
    """ln2 - (eps/J)^2 inside |eps| <= J sqrt(ln2); UNATTAINABLE outside."""
    if J <= 0:
        raise DomainError("J must be positive")
    eps0 = J * SQRT_LN2
    if abs(epsilon) > eps0 * (1 + 1e-15):
        return UNATTAINABLE
    return max(LN2 - (epsilon / J) ** 2, 0.0)


def rem_annealed_phi(beta: float, J: float = 1.0) -> float:
    if beta < 0:
        raise DomainError("beta must be nonnegative")
    return LN2 + beta * beta * J * J / 4


def rem_monte_carlo(n: int, J: float, beta: float, seed: int, batch: int = 1 << 20) -> float:
    """(ln Z)/n for one realization of the REM with 2^n energies, drawn in batches."""
    if n > 24:
        raise SizeError("rem_monte_carlo is limited to n <= 24")
    if n < 1:
        raise DomainError("need n >= 1")
    if beta == 0:
        return LN2
    rng = np.random.default_rng(seed)
    sd = J * math.sqrt(n / 2.0)
    total = 1 << n
    acc = -math.inf
    done = 0
    while done < total:
        k = min(batch, total - done)
        e = rng.normal(0.0, sd, size=k)
        acc = float(np.logaddexp(acc, logsumexp(-beta * e)))
        done += k
    return acc / n


# ---------------------------------------------------------------------------
# REM in a magnetic field
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RemFieldState:
    beta: float
    B: float
    J: float
    m_star: float
    phase: str
    phi: float
    beta_c: float


def _h2m(m: float) -> float:
    return binary_entropy((1.0 + m) / 2.0)


def rem_field_beta_c(B: float, J: float = 1.0) -> float:
    """Root of beta^2 J^2 / 4 = h2((1 + tanh(beta B)) / 2)."""
    if J <= 0:
        raise DomainError("J must be positive")
    if B == 0:
        return rem_beta_c(J)
    f = lambda b: b * b * J * J / 4 - _h2m(math.tanh(b * B))
    hi = rem_beta_c(J) + 10 * abs(B)
    if not f(0.0) < 0 < f(hi):
        raise ConvergenceError(f"beta_c(B) not bracketed on [0, {hi}] for B={B}, J={J}")
    return float(brentq(f, 0.0, hi, xtol=1e-15, maxiter=500))


def rem_field_phi(beta: float, B: float, J: float = 1.0) -> RemFieldState:
    if beta < 0:
        raise DomainError("beta must be nonnegative")
    bc = rem_field_beta_c(B, J)
    if beta <= bc:
        m = math.tanh(beta * B)
        # max_m [h2((1+m)/2) + beta B m] = ln(2 cosh(beta B))
        phi = _h2m(m) + beta * B * m + beta * beta * J * J / 4
        return RemFieldState(beta, B, J, m, "paramagnetic", phi, bc)
    m = math.tanh(B * bc)
    phi = beta * J * math.sqrt(_h2m(m)) + beta * B * m
    return RemFieldState(beta, B, J, m, "glassy", phi, bc)


def rem_susceptibility(T: float, J: float = 1.0) -> float:
    """Zero-field susceptibility: 1/T above T_c(0), 1/T_c(0) below."""
    if T <= 0:
        raise DomainError("T must be positive")
    tc = 1.0 / rem_beta_c(J)
    return 1.0 / max(T, tc)


# ---------------------------------------------------------------------------
# GREM, two levels
# ---------------------------------------------------------------------------


def grem_curve(J: float, R1: float, a1: float) -> PiecewisePhi:
    """Two-level tree: rates R1, R2 = ln2 - R1 and variance shares a1, a2 = 1 - a1."""
    if not (0 < R1 < LN2 and 0 < a1 < 1 and J > 0):
        raise DomainError("need 0 < R1 < ln2, 0 < a1 < 1, J > 0")
    R2, a2 = LN2 - R1, 1.0 - a1
    if R1 / a1 < LN2:
        b1 = 2.0 / J * math.sqrt(R1 / a1)
        b2 = 2.0 / J * math.sqrt(R2 / a2)
        s1 = math.sqrt(a1 * R1)
        s2 = math.sqrt(a2 * R2)
        return PiecewisePhi([
            Segment(0.0, b1, "paramagnetic", "ln2 + beta^2 J^2 / 4",
                    lambda b: LN2 + b * b * J * J / 4),
            Segment(b1, b2, "first level frozen", "beta J sqrt(a1 R1) + R2 + a2 beta^2 J^2 / 4",
                    lambda b: b * J * s1 + R2 + a2 * b * b * J * J / 4),
            Segment(b2, math.inf, "glassy", "beta J (sqrt(a1 R1) + sqrt(a2 R2))",
                    lambda b: b * J * (s1 + s2)),
        ])
    return rem_curve(J)


def grem_phi(beta: float, J: float, R1: float, a1: float) -> tuple[float, str, int]:
    """(phi, phase label, number of phase transitions)."""
    c = grem_curve(J, R1, a1)
    return c(beta), c.phase(beta), len(c.segments) - 1


# ---------------------------------------------------------------------------
# SK metastable states
# ---------------------------------------------------------------------------


_LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)


def gaussian_tail(t: float) -> float:
    """Q(t) = P(N(0,1) > t) = erfc(t / sqrt 2) / 2."""
    return float(ndtr(-t))


def _mills_inverse(t: float) -> float:
    """phi(t) / Phi(t) = exp(-t^2/2) / (sqrt(2 pi) (1 - Q(t)))."""
    return math.exp(-0.5 * t * t - _LOG_SQRT_2PI - float(log_ndtr(t)))


def sk_exponent(t: float, k: float) -> float:
    """ln[2 (1 - Q(t))] - (t + k)^2 / 2 with k = K/J."""
    return LN2 + float(log_ndtr(t)) - 0.5 * (t + k) ** 2


@dataclass(frozen=True)
class SKCapacity:
    C: float
    t_star: float
    residual: float


def sk_capacity(K: float, J: float = 1.0) -> SKCapacity:
    """Exponential growth rate of the number of metastable states with stability
    threshold K: solve phi(t)/Phi(t) = t + K/J, the stationarity condition of
    sk_exponent, which is strictly decreasing in t."""
    if J <= 0:
        raise DomainError("J must be positive")
    k = K / J
    g = lambda t: _mills_inverse(t) - t - k
    lo, hi = -1.0, 1.0
    for _ in range(200):
        if g(lo) > 0:
            break
        lo *= 2
    for _ in range(200):
        if g(hi) < 0:
            break
        hi *= 2
    if not (g(lo) > 0 > g(hi)):
        raise ConvergenceError(f"SK stationarity root not bracketed: g({lo})={g(lo)}, g({hi})={g(hi)}")
    t = float(brentq(g, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500))
    return SKCapacity(sk_exponent(t, k), t, abs(g(t)))
