"""Finite-state Markov dynamics: master-equation evolution, detailed balance
and Kolmogorov cycle tests, and monitors of monotone functionals
(entropy, divergences, generalized s-moments, Ziv-Zakai functionals)."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .errors import ConvergenceError, DomainError, NormalizationError, ShapeError, SizeError

SLACK = 1e-9


@dataclass
class ChainSpec:
    """Discrete-time stochastic matrix or continuous-time rate matrix.

    In continuous mode ``matrix[r, s]`` (r != s) is the jump rate r -> s; the
    diagonal is ignored.
    """

    mode: Literal["discrete", "continuous"]
    matrix: np.ndarray
    states: list = field(default_factory=list)
    stationary: np.ndarray | None = None

    def __post_init__(self):
        W = np.asarray(self.matrix, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ShapeError("transition matrix must be square")
        k = W.shape[0]
        if self.mode == "discrete":
            if np.any(W < 0) or np.max(np.abs(W.sum(axis=1) - 1)) > 1e-12:
                raise NormalizationError("rows of a stochastic matrix must be nonnegative and sum to 1")
        elif self.mode == "continuous":
            off = W - np.diag(np.diag(W))
            if np.any(off < 0):
                raise DomainError("off-diagonal rates must be nonnegative")
            W = off
        else:
            raise DomainError(f"unknown mode {self.mode!r}")
        self.matrix = W
        if not self.states:
            self.states = list(range(k))
        if len(self.states) != k:
            raise ShapeError("one label per state required")
        if self.stationary is not None:
            P = np.asarray(self.stationary, dtype=float)
            if np.max(np.abs(P @ self.generator())) > 1e-10:
                raise DomainError("supplied stationary distribution violates global balance")
            self.stationary = P

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def generator(self) -> np.ndarray:
        """dP/dt = P G (continuous) or P_{t+1} - P_t = P G (discrete)."""
        if self.mode == "continuous":
            return self.matrix - np.diag(self.matrix.sum(axis=1))
        return self.matrix - np.eye(self.n)

    def transition(self, t: float) -> np.ndarray:
        """Kernel from time 0 to time t: expm(G t) or W^t."""
        if self.mode == "continuous":
            return expm(self.generator() * t)
        if t != int(t) or t < 0:
            raise DomainError("discrete chains evolve in nonnegative integer steps")
        return np.linalg.matrix_power(self.matrix, int(t))

    def to_json(self) -> str:
        return json.dumps({"mode": self.mode, "states": [str(s) for s in self.states],
                           "matrix": self.matrix.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "ChainSpec":
        o = json.loads(text)
        return cls(o["mode"], o["matrix"], o.get("states") or [])


@dataclass
class Trajectory:
    times: np.ndarray
    distributions: np.ndarray

    def to_csv_rows(self):
        for t, p in zip(self.times, self.distributions):
            yield [float(t), *map(float, p)]


def _check_dist(P, k):
    P = np.asarray(P, dtype=float)
    if P.shape != (k,):
        raise ShapeError("distribution length does not match the chain")
    if np.any(P < -1e-15) or abs(P.sum() - 1) > 1e-10:
        raise NormalizationError("initial distribution must be normalized")
    return P


def stationary_distribution(chain: ChainSpec) -> np.ndarray:
    """Solve P G = 0, sum P = 1 (least squares on the stacked system)."""
    G = chain.generator()
    A = np.vstack([G.T, np.ones(chain.n)])
    b = np.zeros(chain.n + 1)
    b[-1] = 1.0
    P, *_ = np.linalg.lstsq(A, b, rcond=None)
    P = np.maximum(P, 0.0)
    return P / P.sum()


def evolve(chain: ChainSpec, P0: Sequence[float], horizon: float,
           sample_times: Sequence[float] | None = None) -> Trajectory:
    """Integrate the master equation from P0 up to ``horizon``."""
    P0 = _check_dist(P0, chain.n)
    if sample_times is None:
        sample_times = np.linspace(0, horizon, 101) if chain.mode == "continuous" else np.arange(int(horizon) + 1)
    ts = np.asarray(sample_times, dtype=float)
    if np.any(np.diff(ts) < 0) or ts[0] < 0 or ts[-1] > horizon + 1e-12:
        raise DomainError("sample times must be increasing within [0, horizon]")
    if chain.mode == "discrete":
        steps = ts.astype(int)
        if np.any(steps != ts):
            raise DomainError("discrete sample times must be integers")
        out = np.empty((len(ts), chain.n))
        P = P0.copy()
        t = 0
        for i, s in enumerate(steps):
            while t < s:
                P = P @ chain.matrix
                t += 1
            out[i] = P
        return Trajectory(ts, out)
    G = chain.generator()
    sol = solve_ivp(lambda t, p: p @ G, (0.0, float(horizon)), P0, method="RK45",
                    t_eval=ts, rtol=1e-10, atol=1e-12)
    if not sol.success:
        raise ConvergenceError(f"master-equation integration failed: {sol.message}")
    dists = sol.y.T
    dists = np.maximum(dists, 0.0)
    dists /= dists.sum(axis=1, keepdims=True)
    return Trajectory(sol.t, dists)


def detailed_balance_check(chain: ChainSpec, P: Sequence[float], tol: float = 1e-10) -> tuple[bool, float]:
    P = _check_dist(P, chain.n)
    flow = P[:, None] * chain.matrix
    off = ~np.eye(chain.n, dtype=bool)
    viol = float(np.max(np.abs(flow - flow.T)[off])) if chain.n > 1 else 0.0
    return viol < tol, viol


def _simple_cycles(adj: list[set], max_len: int):
    """Undirected simple cycles of length 3..max_len, each reported once."""
    k = len(adj)
    for start in range(k):
        stack = [(start, [start])]
        while stack:
            v, path = stack.pop()
            for w in adj[v]:
                if w == start and len(path) >= 3 and path[1] < path[-1]:
                    yield list(path)
                elif w > start and w not in path and len(path) < max_len:
                    stack.append((w, path + [w]))


def kolmogorov_cycle_check(chain: ChainSpec, max_cycle_len: int = 12,
                           tol: float = 1e-9) -> tuple[bool, list | None]:
    """Forward and backward rate products agree on every cycle up to the cap.

    Edges used in one direction only are reported as violating 2-cycles.
    """
    if chain.n > 12:
        raise SizeError("cycle enumeration is limited to 12 states")
    if max_cycle_len < 3:
        raise DomainError("max_cycle_len must be at least 3")
    W = chain.matrix
    k = chain.n
    pos = (W > 0) & ~np.eye(k, dtype=bool)
    for r in range(k):
        for s in range(r + 1, k):
            if pos[r, s] != pos[s, r]:
                return False, [r, s]
    with np.errstate(divide="ignore"):
        L = np.log(W)
    adj = [set(np.nonzero(pos[r])[0].tolist()) for r in range(k)]
    worst, worst_gap = None, 0.0
    for cyc in _simple_cycles(adj, min(max_cycle_len, k)):
        nxt = cyc[1:] + cyc[:1]
        fwd = sum(L[a, b] for a, b in zip(cyc, nxt))
        bwd = sum(L[b, a] for a, b in zip(cyc, nxt))
        gap = abs(fwd - bwd)
        if gap > worst_gap:
            worst, worst_gap = cyc, gap
    if worst_gap > tol:
        return False, worst
    return True, None


# ---------------------------------------------------------------------------
# Monotone functionals
# ---------------------------------------------------------------------------


def entropy(P) -> float:
    P = np.asarray(P)
    m = P > 0
    return float(-np.sum(P[m] * np.log(P[m])))


def divergence(P, Q) -> float:
    P, Q = np.asarray(P), np.asarray(Q)
    m = P > 0
    if np.any(Q[m] <= 0):
        return math.inf
    return float(np.sum(P[m] * np.log(P[m] / Q[m])))


Functional = Literal["entropy", "divergence", "reverse-divergence", "s-moment", "custom"]


def _is_monotone(values, increasing: bool, slack: float = SLACK) -> bool:
    d = np.diff(np.asarray(values, dtype=float))
    return bool(np.all(d >= -slack)) if increasing else bool(np.all(d <= slack))


def monotone_monitor(traj: Trajectory, functional: Functional, stationary=None,
                     s: float = 0.5, V: Callable | None = None,
                     slack: float = SLACK) -> tuple[np.ndarray, bool]:
    """Evaluate a functional along a trajectory and test its monotonicity.

    entropy             H(P(t)), non-decreasing when the stationary law is uniform
    divergence          D(P(t) || P), non-increasing
    reverse-divergence  D(P || P(t)), non-increasing
    s-moment            sum_r P_r^{1-s} P_r(t)^s (0 < s < 1), non-decreasing
    custom              sum_r P_r V(P_r(t) / P_r) for concave V, non-decreasing
    """
    dists = traj.distributions
    if functional == "entropy":
        if stationary is not None and np.max(np.abs(np.asarray(stationary) - 1.0 / dists.shape[1])) > 1e-10:
            raise DomainError("the entropy monitor needs a uniform stationary law")
        vals = np.array([entropy(p) for p in dists])
        return vals, _is_monotone(vals, True, slack)
    if stationary is None:
        raise DomainError(f"the {functional} monitor needs the stationary distribution")
    P = np.asarray(stationary, dtype=float)
    if P.shape != (dists.shape[1],):
        raise ShapeError("stationary law does not match the trajectory")
    if functional == "divergence":
        vals = np.array([divergence(p, P) for p in dists])
        return vals, _is_monotone(vals, False, slack)
    if functional == "reverse-divergence":
        vals = np.array([divergence(P, p) for p in dists])
        return vals, _is_monotone(vals, False, slack)
    if functional == "s-moment":
        if not 0 < s < 1:
            raise DomainError("s-moment needs 0 < s < 1")
        vals = np.array([float(np.sum(P ** (1 - s) * p ** s)) for p in dists])
        return vals, _is_monotone(vals, True, slack)
    if functional == "custom":
        if V is None:
            raise DomainError("custom monitor needs a concave function V")
        vals = np.array([float(np.sum(P * V(p / P))) for p in dists])
        return vals, _is_monotone(vals, True, slack)
    raise DomainError(f"unknown functional {functional!r}")


def divergence_pair_monitor(chain: ChainSpec, P0, P0p, times=None,
                            slack: float = SLACK) -> tuple[np.ndarray, bool]:
    """D(P(t) || P'(t)) for two initial laws under the same dynamics."""
    P0 = _check_dist(P0, chain.n)
    P0p = _check_dist(P0p, chain.n)
    if times is None:
        times = np.linspace(0, 5, 101) if chain.mode == "continuous" else np.arange(101)
    times = np.asarray(times, dtype=float)
    a = evolve(chain, P0, times[-1], times).distributions
    b = evolve(chain, P0p, times[-1], times).distributions
    vals = np.array([divergence(x, y) for x, y in zip(a, b)])
    return vals, _is_monotone(vals, False, slack)


def ziv_zakai_monitor(chain: ChainSpec, P0, V: Callable, times,
                      slack: float = SLACK) -> tuple[np.ndarray, bool]:
    """J(t) = sum P(x0, xt) V(P(x0) P(xt) / P(x0, xt)) from exact joint laws."""
    P0 = _check_dist(P0, chain.n)
    # cells with zero joint mass contribute c * lim_{u->inf} V(u)/u
    with np.errstate(all="ignore"):
        s1 = float(V(np.array([1e100]))[0]) / 1e100
        s2 = float(V(np.array([1e200]))[0]) / 1e200
    slope = -math.inf if s2 < s1 - 1.0 else s2
    vals = []
    for t in np.asarray(times, dtype=float):
        joint = P0[:, None] * chain.transition(t)
        prod = P0[:, None] * joint.sum(axis=0)[None, :]
        m = joint > 0
        total = float(np.sum(joint[m] * V(prod[m] / joint[m])))
        c = float(prod[~m].sum())
        if c > 0:
            total += c * slope if slope != 0 else 0.0
        vals.append(total)
    vals = np.array(vals)
    return vals, _is_monotone(vals, True, slack)


def mutual_information(chain: ChainSpec, P0, t: float) -> float:
    P0 = _check_dist(P0, chain.n)
    joint = P0[:, None] * chain.transition(t)
    marg = joint.sum(axis=0)
    return divergence(joint.ravel(), (P0[:, None] * marg[None, :]).ravel())


# ---------------------------------------------------------------------------
# Example chains
# ---------------------------------------------------------------------------


def mm1_chain(lam: float, mu: float, n_max: int = 50) -> ChainSpec:
    """M/M/1 queue truncated at n_max customers (arrivals blocked at the cap)."""
    if lam <= 0 or mu <= 0 or n_max < 1:
        raise DomainError("need lam, mu > 0 and n_max >= 1")
    W = np.zeros((n_max + 1, n_max + 1))
    for r in range(n_max):
        W[r, r + 1] = lam
        W[r + 1, r] = mu
    return ChainSpec("continuous", W)


def mm1_geometric(lam: float, mu: float, n_max: int = 50) -> np.ndarray:
    rho = lam / mu
    P = (1 - rho) * rho ** np.arange(n_max + 1)
    return P / P.sum()


def random_chain(k: int, rng: np.random.Generator, mode: str = "continuous",
                 reversible: bool = False) -> ChainSpec:
    """Random chain with strictly positive off-diagonal rates/probabilities.

    ``reversible`` builds W_rs = S_rs / P_r-style rates (symmetric S and a
    random target P), which satisfy detailed balance by construction.
    """
    if reversible:
        P = rng.dirichlet(np.ones(k))
        S = rng.uniform(0.1, 1.0, (k, k))
        S = (S + S.T) / 2
        W = S * np.sqrt(P)[None, :] / np.sqrt(P)[:, None]
    else:
        W = rng.uniform(0.1, 1.0, (k, k))
    np.fill_diagonal(W, 0.0)
    if mode == "discrete":
        W = W / (W.sum(axis=1, keepdims=True) * 1.5)
        np.fill_diagonal(W, 1.0 - W.sum(axis=1))
    return ChainSpec(mode, W)


def random_doubly_stochastic(k: int, rng: np.random.Generator, n_perm: int = 6) -> ChainSpec:
    """Convex combination of random permutation matrices (Birkhoff)."""
    w = rng.dirichlet(np.ones(n_perm))
    W = np.zeros((k, k))
    for a in w:
        W[np.arange(k), rng.permutation(k)] += a
    W /= W.sum(axis=1, keepdims=True)
    return ChainSpec("discrete", W)
