"""Metropolis and heat-bath samplers for Boltzmann-Gibbs targets.

Random numbers come from numpy's PCG64 generator (``default_rng(seed)``).
Site choices and uniforms are drawn up front and handed to the kernels, so
a given seed yields the same path with either kernel backend.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np
from scipy.special import logsumexp

from . import _kernels
from .ensembles import DiscreteSystem
from .errors import DomainError, SizeError
from .spins import ising1d_couplings, spin_configurations

Kernel = Literal["metropolis", "heat-bath"]


@dataclass(frozen=True)
class SamplerConfig:
    beta: float
    steps: int
    seed: int = 20240607
    kernel: Kernel = "metropolis"
    burn_in: float = 0.1

    def __post_init__(self):
        if self.beta < 0:
            raise DomainError("beta must be nonnegative")
        if self.steps < 1:
            raise DomainError("steps must be >= 1")
        if self.kernel not in ("metropolis", "heat-bath"):
            raise DomainError(f"unknown kernel {self.kernel!r}")
        if not 0 <= self.burn_in < 1:
            raise DomainError("burn_in must be a fraction in [0, 1)")


@dataclass
class SpinTarget:
    """E(s) = offset - sum_i h_i s_i - sum_{i<j} J_ij s_i s_j over s in {-1, +1}^n."""

    J: np.ndarray
    h: np.ndarray
    offset: float = 0.0
    label: str = ""

    def __post_init__(self):
        self.J = np.asarray(self.J, dtype=float)
        self.h = np.asarray(self.h, dtype=float)
        n = self.h.size
        if self.J.shape != (n, n) or not np.allclose(self.J, self.J.T) or np.any(np.diag(self.J) != 0):
            raise DomainError("J must be symmetric with zero diagonal")

    @property
    def n(self) -> int:
        return self.h.size

    @property
    def n_states(self) -> int:
        return 2 ** self.n

    def energies(self) -> np.ndarray:
        """Energy of every configuration, indexed like the samplers' state index."""
        if self.n > 20:
            raise SizeError("enumeration limited to 20 spins")
        s = spin_configurations(self.n).astype(float)
        pair = 0.5 * np.einsum("ki,ij,kj->k", s, self.J, s)
        return self.offset - s @ self.h - pair

    def magnetizations(self) -> np.ndarray:
        return spin_configurations(self.n).mean(axis=1)

    @classmethod
    def ising1d(cls, n: int, J: float = 1.0, B: float = 0.0) -> "SpinTarget":
        return cls(ising1d_couplings(n, J), np.full(n, B), label=f"ising1d n={n}")

    @classmethod
    def curie_weiss(cls, n: int, J: float = 1.0, B: float = 0.0) -> "SpinTarget":
        # -(J/2n)(sum s)^2 = -(J/n) sum_{i<j} s_i s_j - J/2
        C = np.full((n, n), J / n)
        np.fill_diagonal(C, 0.0)
        return cls(C, np.full(n, B), offset=-J / 2, label=f"curie-weiss n={n}")


@dataclass
class TableTarget:
    """Energy tabulated over X^n with |X| = q; index = sum_i x_i q^i."""

    q: int
    n: int
    table: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.table = np.asarray(self.table, dtype=float)
        if self.q < 2 or self.n < 1 or self.table.shape != (self.q ** self.n,):
            raise DomainError("table must have q^n entries with q >= 2")

    @property
    def n_states(self) -> int:
        return self.q ** self.n

    def energies(self) -> np.ndarray:
        return self.table

    @classmethod
    def from_system(cls, system: DiscreteSystem) -> "TableTarget":
        """One coordinate whose values are the listed states (unit degeneracies)."""
        if np.any(system.degeneracies != 1):
            raise DomainError("expand degenerate levels into separate states first")
        return cls(system.energies.size, 1, system.energies, system.label)


@dataclass
class SamplerResult:
    states: np.ndarray
    energies: np.ndarray
    magnetizations: np.ndarray | None
    empirical: np.ndarray
    acceptance_rate: float
    backend: str
    kernel: str

    def total_variation(self, target_probs: np.ndarray) -> float:
        return 0.5 * float(np.abs(self.empirical - target_probs).sum())


def boltzmann_probs(target, beta: float) -> np.ndarray:
    lw = -beta * target.energies()
    return np.exp(lw - logsumexp(lw))


def _finish(cfg, states, energies, mags, accepted, n_states):
    start = int(cfg.burn_in * cfg.steps)
    st = states[start:]
    emp = np.bincount(st, minlength=n_states) / len(st)
    return SamplerResult(st, energies[start:], None if mags is None else mags[start:], emp,
                         accepted / cfg.steps, _kernels.BACKEND, cfg.kernel)


def run(config: SamplerConfig, target, initial=None) -> SamplerResult:
    """Single-site Metropolis or heat-bath chain on a spin or table target."""
    rng = np.random.default_rng(config.seed)
    steps = int(config.steps)
    if isinstance(target, SpinTarget):
        s0 = np.ones(target.n, dtype=np.int64) if initial is None else np.asarray(initial, dtype=np.int64)
        sites = rng.integers(0, target.n, steps)
        u = rng.random(steps)
        fn = _kernels.metropolis_spins if config.kernel == "metropolis" else _kernels.heat_bath_spins
        _, e, m, st, acc = fn(s0, target.J, target.h, config.beta, sites, u)
        return _finish(config, st, e + target.offset, m, acc, target.n_states if target.n <= 24 else 0)
    if isinstance(target, TableTarget):
        x0 = np.zeros(target.n, dtype=np.int64) if initial is None else np.asarray(initial, dtype=np.int64)
        sites = rng.integers(0, target.n, steps)
        if config.kernel == "metropolis":
            offsets = rng.integers(1, target.q, steps)
            u = rng.random(steps)
            _, e, st, acc = _kernels.metropolis_table(x0, target.q, target.table, config.beta, sites, offsets, u)
        else:
            u = rng.random(steps)
            _, e, st, acc = _kernels.heat_bath_table(x0, target.q, target.table, config.beta, sites, u)
        return _finish(config, st, e, None, acc, target.n_states)
    raise DomainError("target must be a SpinTarget or TableTarget")


def metropolis_run(config: SamplerConfig, target, initial=None) -> SamplerResult:
    return run(SamplerConfig(config.beta, config.steps, config.seed, "metropolis", config.burn_in), target, initial)


def heat_bath_run(config: SamplerConfig, target, initial=None) -> SamplerResult:
    return run(SamplerConfig(config.beta, config.steps, config.seed, "heat-bath", config.burn_in), target, initial)


def run_oracle(config: SamplerConfig, energy: Callable, neighbors: Callable, x0) -> tuple[list, np.ndarray, float]:
    """Metropolis with user-supplied energy and (symmetric) neighbourhood
    oracles; candidates are chosen uniformly from ``neighbors(x)``.

    Correct only when every neighbourhood has the same size (or C_rs = C_sr
    holds otherwise); this pure-Python path is meant for small problems.
    """
    rng = np.random.default_rng(config.seed)
    x, e = x0, float(energy(x0))
    states, energies, acc = [], np.empty(config.steps), 0
    for t in range(config.steps):
        nb = list(neighbors(x))
        y = nb[int(rng.integers(0, len(nb)))]
        ey = float(energy(y))
        d = ey - e
        if d <= 0 or rng.random() < math.exp(-config.beta * d):
            x, e = y, ey
            acc += 1
        states.append(x)
        energies[t] = e
    return states, energies, acc / config.steps


# ---------------------------------------------------------------------------
# Exact kernels for small systems
# ---------------------------------------------------------------------------


def _acceptance(kernel: str, beta: float, dE: float) -> float:
    if kernel == "metropolis":
        return 1.0 if dE <= 0 else math.exp(-beta * dE)
    # 1/2 [1 - tanh(beta dE / 2)] = 1 / (1 + e^{beta dE})
    return 0.5 * (1.0 - math.tanh(0.5 * beta * dE))


def kernel_matrix(target, beta: float, kernel: Kernel) -> np.ndarray:
    """Exact one-step transition matrix of the single-site sampler."""
    E = target.energies()
    N = E.size
    W = np.zeros((N, N))
    if isinstance(target, SpinTarget):
        n = target.n
        for r in range(N):
            for i in range(n):
                s = r ^ (1 << i)
                W[r, s] = _acceptance(kernel, beta, E[s] - E[r]) / n
    else:
        q, n = target.q, target.n
        for r in range(N):
            for i in range(n):
                pw = q ** i
                xi = (r // pw) % q
                base = r - xi * pw
                if kernel == "metropolis":
                    for a in range(q):
                        if a != xi:
                            s = base + a * pw
                            W[r, s] += min(1.0, math.exp(-beta * (E[s] - E[r]))) / (n * (q - 1))
                else:
                    cand = [base + a * pw for a in range(q)]
                    lw = -beta * E[cand]
                    p = np.exp(lw - logsumexp(lw))
                    for a, s in enumerate(cand):
                        if s != r:
                            W[r, s] += p[a] / n
    W[np.arange(N), np.arange(N)] = 1.0 - W.sum(axis=1)
    return W


def log_ratio_residual(target, beta: float, kernel: Kernel) -> float:
    """max |ln A_rs - ln A_sr + beta (E_s - E_r)| over single-site moves,
    with acceptances evaluated in the log domain."""
    E = target.energies()
    worst = 0.0
    if isinstance(target, SpinTarget):
        moves = [(r, r ^ (1 << i)) for r in range(E.size) for i in range(target.n)]
    else:
        q, n = target.q, target.n
        moves = []
        for r in range(E.size):
            for i in range(n):
                pw = q ** i
                xi = (r // pw) % q
                moves += [(r, r + (a - xi) * pw) for a in range(q) if a != xi]
    for r, s in moves:
        d = E[s] - E[r]
        if kernel == "metropolis":
            la, lb = min(0.0, -beta * d), min(0.0, beta * d)
        else:
            la, lb = -np.logaddexp(0.0, beta * d), -np.logaddexp(0.0, -beta * d)
        worst = max(worst, abs((la - lb) + beta * d))
    return float(worst)


def batch_means_se(x: np.ndarray, n_batches: int = 50) -> float:
    """Standard error of the mean of a correlated trace by batch means."""
    x = np.asarray(x, dtype=float)
    k = len(x) // n_batches
    if k < 1:
        raise DomainError("trace too short for batch means")
    b = x[: k * n_batches].reshape(n_batches, k).mean(axis=1)
    return float(b.std(ddof=1) / math.sqrt(n_batches))
