"""Canonical-ensemble computations on finite systems and 1-D power-law
Hamiltonians, Gibbs-inequality bounds, grand partition functions and the
variational bounds for the quartic oscillator.

k = 1 throughout, so temperatures are energies and beta = 1/T.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from scipy import integrate
from scipy.special import gamma, logsumexp

from .errors import ConvergenceError, DomainError, NormalizationError, ShapeError


@dataclass
class DiscreteSystem:
    """Finite list of energy levels with integer-like degeneracies."""

    energies: np.ndarray
    degeneracies: np.ndarray | None = None
    label: str = ""

    def __post_init__(self):
        self.energies = np.atleast_1d(np.asarray(self.energies, dtype=float))
        if self.degeneracies is None:
            self.degeneracies = np.ones_like(self.energies)
        self.degeneracies = np.atleast_1d(np.asarray(self.degeneracies, dtype=float))
        if self.energies.ndim != 1 or self.energies.size == 0:
            raise ShapeError("energies must be a nonempty 1-D list")
        if self.degeneracies.shape != self.energies.shape:
            raise ShapeError("energies and degeneracies differ in length")
        if np.any(self.degeneracies < 1):
            raise DomainError("degeneracies must be >= 1")
        if not np.all(np.isfinite(self.energies)):
            raise DomainError("energies must be finite")

    @property
    def n_states(self) -> float:
        return float(self.degeneracies.sum())

    def to_json(self) -> str:
        return json.dumps({"label": self.label, "energies": self.energies.tolist(),
                           "degeneracies": self.degeneracies.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "DiscreteSystem":
        d = json.loads(text)
        return cls(d["energies"], d.get("degeneracies"), d.get("label", ""))

    @classmethod
    def two_level(cls, eps0: float = 1.0) -> "DiscreteSystem":
        return cls([0.0, eps0], label=f"two-level eps0={eps0}")

    @classmethod
    def spin_in_field(cls, B: float) -> "DiscreteSystem":
        # states s = +1, -1 with E = -B s
        return cls([-B, B], label=f"spin B={B}")


@dataclass(frozen=True)
class ThermoState:
    beta: float
    log_z: float
    mean_energy: float
    var_energy: float
    entropy: float
    free_energy: float


def _log_weights(system: DiscreteSystem, beta: float) -> np.ndarray:
    return np.log(system.degeneracies) - beta * system.energies


def partition_function(system: DiscreteSystem, beta: float) -> float:
    """ln Z(beta) by log-sum-exp."""
    if beta < 0:
        raise DomainError("beta must be nonnegative")
    return float(logsumexp(_log_weights(system, beta)))


def boltzmann(system: DiscreteSystem, beta: float) -> np.ndarray:
    """Probability of each listed level (degeneracy included)."""
    lw = _log_weights(system, beta)
    return np.exp(lw - logsumexp(lw))


def thermo_state(system: DiscreteSystem, beta: float) -> ThermoState:
    """Exact moments by reweighting; entropy as -sum P ln P over microstates."""
    if beta <= 0:
        raise DomainError("beta must be positive")
    log_z = partition_function(system, beta)
    w = boltzmann(system, beta)
    e = system.energies
    mean = float(np.dot(w, e))
    var = float(max(np.dot(w, (e - mean) ** 2), 0.0))
    # microstate probabilities p = w/g, each repeated g times
    g = system.degeneracies
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(w > 0, -w * np.log(w / g), 0.0)
    entropy = float(terms.sum())
    return ThermoState(beta, log_z, mean, var, entropy, -log_z / beta)


def gibbs_bound(system0: DiscreteSystem, system1: DiscreteSystem, beta: float) -> tuple[float, float]:
    """ln Z1 >= ln Z0 + beta <E0 - E1>_0.  Returns (bound, gap); gap = D(P0||P1)."""
    if system0.energies.shape != system1.energies.shape or not np.array_equal(
            system0.degeneracies, system1.degeneracies):
        raise ShapeError("systems must share the same state list")
    if beta <= 0:
        raise DomainError("beta must be positive")
    p0 = boltzmann(system0, beta)
    bound = partition_function(system0, beta) + beta * float(np.dot(p0, system0.energies - system1.energies))
    return bound, partition_function(system1, beta) - bound


def kl_divergence(p, q) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    m = p > 0
    if np.any(q[m] <= 0):
        return math.inf
    return float(np.sum(p[m] * np.log(p[m] / q[m])))


def free_energy_divergence(Q: Sequence[float], beta: float, system: DiscreteSystem) -> float:
    """F_Q - F_P for a distribution Q over the listed microstates.

    Requires unit degeneracies (Q is a law over individual microstates).
    """
    Q = np.asarray(Q, dtype=float)
    if Q.shape != system.energies.shape:
        raise ShapeError("Q must have one entry per state")
    if np.any(Q < 0) or abs(Q.sum() - 1.0) > 1e-12:
        raise NormalizationError("Q must be a normalized distribution")
    if np.any(system.degeneracies != 1):
        raise DomainError("free_energy_divergence needs unit degeneracies")
    if beta <= 0:
        raise DomainError("beta must be positive")
    m = Q > 0
    h_q = -float(np.sum(Q[m] * np.log(Q[m])))
    f_q = float(np.dot(Q, system.energies)) - h_q / beta
    f_p = -partition_function(system, beta) / beta
    return f_q - f_p


@dataclass(frozen=True)
class EquipartitionResult:
    mean_energy: float
    target: float
    virial: float
    virial_target: float


def equipartition(theta: float, alpha: float, beta: float) -> EquipartitionResult:
    """<alpha |X|^theta> and <X E'(X)> under the density prop. to exp(-beta alpha |x|^theta).

    The range is cut at beta alpha x_max^theta = 700, where the weight underflows.
    """
    if theta <= 0 or alpha <= 0 or beta <= 0:
        raise DomainError("theta, alpha, beta must be positive")
    x_max = (700.0 / (beta * alpha)) ** (1.0 / theta)
    weight = lambda x: math.exp(-beta * alpha * x**theta)

    def quad(fn):
        # the integrand is even: integrate on [0, x_max] with a break at the bulk scale
        scale = (1.0 / (beta * alpha)) ** (1.0 / theta)
        pts = [p for p in (scale, 5 * scale) if p < x_max]
        val, err = integrate.quad(fn, 0.0, x_max, epsabs=0.0, epsrel=1e-11, limit=400, points=pts)
        if not math.isfinite(val) or err > 1e-9 * abs(val) + 1e-300:
            raise ConvergenceError(f"quadrature did not converge (estimate {val}, error {err})")
        return val

    z = quad(weight)
    e = quad(lambda x: alpha * x**theta * weight(x)) / z
    # x E'(x) = theta alpha |x|^theta
    v = theta * e
    return EquipartitionResult(e, 1.0 / (beta * theta), v, 1.0 / beta)


def grand_partition(levels: Sequence[float], beta: float, z: float,
                    statistics: Literal["boson", "fermion"]) -> tuple[float, float]:
    """(ln Xi, mean particle number) for independent single-particle levels."""
    lv = np.asarray(levels, dtype=float)
    if z <= 0 or beta < 0:
        raise DomainError("need z > 0 and beta >= 0")
    x = z * np.exp(-beta * lv)
    if statistics == "boson":
        if np.any(x >= 1.0):
            raise ConvergenceError("boson series diverges: z exp(-beta eps_min) >= 1")
        log_xi = float(-np.sum(np.log1p(-x)))
        n = float(np.sum(x / (1.0 - x)))
    elif statistics == "fermion":
        log_xi = float(np.sum(np.log1p(x)))
        n = float(np.sum(x / (1.0 + x)))
    else:
        raise DomainError(f"unknown statistics {statistics!r}")
    return log_xi, n


# ---------------------------------------------------------------------------
# Quartic oscillator E = p^2/2m + A z^4, variational lower bounds on ln Z
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OscillatorProblem:
    A: float
    m: float
    kT: float
    planck_h: float = 1.0

    def __post_init__(self):
        if min(self.A, self.m, self.kT, self.planck_h) <= 0:
            raise DomainError("oscillator parameters must be positive")


@dataclass(frozen=True)
class VariationalResult:
    log_z_bound: float
    log_z_exact: float
    ratio: float
    optimal_parameter: float


def oscillator_log_z_exact(pr: OscillatorProblem) -> float:
    """ln of (sqrt(2 pi m kT)/h) * int exp(-A z^4/kT) dz, by quadrature."""
    c = (pr.kT / pr.A) ** 0.25
    val, err = integrate.quad(lambda u: math.exp(-u**4), 0.0, 700 ** 0.25, epsabs=0.0, epsrel=1e-12)
    if err > 1e-10 * val:
        raise ConvergenceError("quartic quadrature did not converge")
    return math.log(math.sqrt(2 * math.pi * pr.m * pr.kT) / pr.planck_h) + math.log(2 * c * val)


def square_well_bound(pr: OscillatorProblem, L: float) -> float:
    """Gibbs bound with a box of width L: ln Z0 + <E0 - E>_0."""
    return math.log(L * math.sqrt(2 * math.pi * pr.m * pr.kT) / pr.planck_h) - pr.A * L**4 / (80 * pr.kT)


def harmonic_bound(pr: OscillatorProblem, omega: float) -> float:
    """Gibbs bound with a harmonic reference of frequency omega (hbar = h / 2 pi)."""
    hbar = pr.planck_h / (2 * math.pi)
    return (math.log(pr.kT / (hbar * omega)) + 0.5
            - 3 * pr.A * pr.kT / (pr.m**2 * omega**4))


def variational_bound_oscillator(pr: OscillatorProblem,
                                 trial: Literal["square well", "harmonic"]) -> VariationalResult:
    """Closed-form optimum of the Gibbs lower bound for the given trial family."""
    if trial == "square well":
        par = (20 * pr.kT / pr.A) ** 0.25
        bound = square_well_bound(pr, par)
    elif trial == "harmonic":
        par = (12 * pr.A * pr.kT) ** 0.25 / math.sqrt(pr.m)
        bound = harmonic_bound(pr, par)
    else:
        raise DomainError(f"unknown trial family {trial!r}")
    exact = oscillator_log_z_exact(pr)
    return VariationalResult(bound, exact, math.exp(bound - exact), par)


SQUARE_WELL_RATIO = 20 ** 0.25 * math.exp(-0.25) / (2 * gamma(1.25))
HARMONIC_RATIO = math.sqrt(2 * math.pi) * math.exp(0.25) / (12 ** 0.25 * 2 * gamma(1.25))
