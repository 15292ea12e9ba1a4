"""Binary-entropy utilities, Laplace / saddle-point asymptotics and a
numerical Legendre-transform engine.

All quantities are in nats, with Boltzmann's constant set to one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import gammaln

from .errors import ConvergenceError, DomainError, ShapeError

LN2 = math.log(2.0)

FD_STEP = 1e-5


def binary_entropy(x):
    """h2(x) = -x ln x - (1-x) ln(1-x) in nats, with 0 ln 0 = 0.

    Accepts scalars or arrays; raises DomainError outside [0, 1].
    """
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError(f"binary_entropy: argument outside [0, 1]: {x!r}")
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(arr > 0.0, -arr * np.log(np.where(arr > 0.0, arr, 1.0)), 0.0)
        b = np.where(arr < 1.0, -(1.0 - arr) * np.log(np.where(arr < 1.0, 1.0 - arr, 1.0)), 0.0)
    out = a + b
    return float(out) if out.ndim == 0 else out


def binary_divergence(a: float, b: float) -> float:
    """D(a||b) between Bernoulli(a) and Bernoulli(b), in nats."""
    if not (0.0 <= a <= 1.0 and 0.0 < b < 1.0):
        raise DomainError(f"binary_divergence: need a in [0,1], b in (0,1); got {a}, {b}")
    out = 0.0
    if a > 0.0:
        out += a * math.log(a / b)
    if a < 1.0:
        out += (1.0 - a) * math.log((1.0 - a) / (1.0 - b))
    return out


def gv_distance(R, tol: float = 1e-12):
    """Gilbert-Varshamov distance: the root delta in [0, 1/2] of
    h2(delta) = ln 2 - R, found by bisection (vectorised over R)."""
    arr = np.asarray(R, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > LN2 + 1e-15):
        raise DomainError(f"gv_distance: rate outside [0, ln 2]: {R!r}")
    target = LN2 - np.minimum(arr, LN2)
    lo = np.zeros_like(target)
    hi = np.full_like(target, 0.5)
    # h2 is increasing on [0, 1/2]; stop once the bracket is below tol.
    n_iter = int(math.ceil(math.log2(0.5 / tol))) + 1
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        below = binary_entropy(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out = 0.5 * (lo + hi)
    out = np.where(target <= 0.0, 0.0, np.where(target >= LN2, 0.5, out))
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Laplace and saddle-point integration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LaplaceEstimate:
    """Leading-order asymptotics of an integral ``prefactor * exp(n * exponent_rate)``."""

    exponent_rate: float
    prefactor: float
    maximizer: float
    boundary_case: bool
    n: int
    second_derivative: float = float("nan")

    def log_value(self) -> float:
        return self.n * self.exponent_rate + math.log(self.prefactor)

    def value(self) -> float:
        return math.exp(self.log_value())


def _derivatives(h, x, dh, d2h, step=FD_STEP):
    d1 = dh(x) if dh is not None else (h(x + step) - h(x - step)) / (2 * step)
    d2 = d2h(x) if d2h is not None else (h(x + step) - 2 * h(x) + h(x - step)) / step**2
    return float(d1), float(d2)


def _safe_eval(f, xs):
    vals = np.empty(len(xs))
    with np.errstate(all="ignore"):
        for i, x in enumerate(xs):
            try:
                v = float(f(x))
            except (ValueError, ZeroDivisionError, OverflowError):
                v = float("nan")
            vals[i] = v
    return vals


def _locate_extremum(f, domain, sign, n_scan=2001, max_doublings=60):
    """Return (x*, at_left_edge, at_right_edge) for the max of sign*f on domain."""
    a, b = float(domain[0]), float(domain[1])
    if not a < b:
        raise DomainError(f"empty domain {domain!r}")
    finite_a, finite_b = math.isfinite(a), math.isfinite(b)
    width = 1.0
    for _ in range(max_doublings):
        lo = a if finite_a else (-width if finite_b is False or b > 0 else b - width)
        hi = b if finite_b else (width if not finite_a or a < 0 else a + width)
        if not finite_a and finite_b:
            lo = min(b, 0.0) - width
        if finite_a and not finite_b:
            hi = max(a, 0.0) + width
        xs = np.linspace(lo, hi, n_scan)
        # open ends of half/full lines are probed just inside
        probe = xs.copy()
        if finite_a:
            probe[0] = a
        vals = sign * _safe_eval(f, probe)
        vals[~np.isfinite(vals)] = -np.inf
        if not np.any(np.isfinite(vals)):
            raise ConvergenceError("integrand exponent is not finite anywhere on the scan grid")
        i = int(np.argmax(vals))
        touches_open_left = (not finite_a) and i == 0
        touches_open_right = (not finite_b) and i == n_scan - 1
        if touches_open_left or touches_open_right:
            width *= 2.0
            continue
        break
    else:
        raise ConvergenceError("no interior or edge maximum could be bracketed")

    if i == 0 and finite_a:
        # maximum sits at (or within one cell of) the left edge
        x_lo, x_hi = xs[0], xs[1]
    elif i == n_scan - 1 and finite_b:
        x_lo, x_hi = xs[-2], xs[-1]
    else:
        x_lo, x_hi = xs[max(i - 1, 0)], xs[min(i + 1, n_scan - 1)]

    def neg(x):
        with np.errstate(all="ignore"):
            v = sign * float(f(x))
        return -v if math.isfinite(v) else np.inf

    res = minimize_scalar(neg, bounds=(x_lo, x_hi), method="bounded",
                          options={"xatol": 1e-13 * max(1.0, abs(x_lo), abs(x_hi))})
    x_star = float(res.x)
    cell = xs[1] - xs[0]
    # compare against edge values: the bounded search never lands exactly on them
    cands = [(neg(x_star), x_star)]
    if finite_a and x_lo == a:
        cands.append((neg(a), a))
    if finite_b and x_hi == b:
        cands.append((neg(b), b))
    best_val, x_star = min(cands)
    if not math.isfinite(best_val):
        raise ConvergenceError("optimiser returned a non-finite exponent")
    at_left = finite_a and abs(x_star - a) <= 1e-9 * max(1.0, cell)
    at_right = finite_b and abs(x_star - b) <= 1e-9 * max(1.0, cell)
    return x_star, at_left, at_right


def laplace_integral(h: Callable[[float], float], g: Callable[[float], float],
                     domain: Sequence[float], n: int,
                     dh: Callable | None = None,
                     d2h: Callable | None = None) -> LaplaceEstimate:
    """Laplace estimate of  int_domain g(x) exp(n h(x)) dx  for large n.

    Interior maximum x0:  g(x0) exp(n h(x0)) sqrt(2 pi / (n |h''(x0)|)).
    Maximum at a domain edge with h'(x0) != 0:  g(x0) exp(n h(x0)) / (n |h'(x0)|)
    (leading term of Watson's lemma), flagged with ``boundary_case``.

    Derivatives default to central differences with step 1e-5.
    """
    if n < 1:
        raise DomainError("n must be a positive integer")
    x0, at_left, at_right = _locate_extremum(h, domain, sign=+1.0)
    h0 = float(h(x0))
    g0 = float(g(x0))
    if at_left or at_right:
        step = FD_STEP
        if dh is not None:
            d1 = float(dh(x0))
        elif at_left:
            d1 = (h(x0 + step) - h0) / step
        else:
            d1 = (h0 - h(x0 - step)) / step
        if abs(d1) > 1e-6:
            return LaplaceEstimate(h0, g0 / (n * abs(d1)), x0, True, n)
        # stationary point sitting on the edge: half of the Gaussian mass
        _, d2 = _derivatives(h, x0 + (step if at_left else -step), None, d2h)
        return LaplaceEstimate(h0, 0.5 * g0 * math.sqrt(2 * math.pi / (n * abs(d2))), x0, True, n, d2)
    _, d2 = _derivatives(h, x0, dh, d2h)
    if not d2 < 0:
        raise ConvergenceError(f"h''(x0) = {d2} is not negative at the located maximum")
    pref = g0 * math.sqrt(2 * math.pi / (n * abs(d2)))
    return LaplaceEstimate(h0, pref, x0, False, n, d2)


def saddle_point_integral(h: Callable[[float], float], g: Callable[[float], float],
                          domain: Sequence[float], n: int,
                          d2h: Callable | None = None) -> LaplaceEstimate:
    """Saddle-point estimate of  (1/2 pi j) int g(z) exp(n h(z)) dz  along a
    vertical line through a real saddle point.

    The saddle z0 is the minimum of h on the real axis (the path crosses it
    vertically, where it is a maximum).  Along z = z0 + j w the integrand is
    Gaussian in w, which gives the prefactor g(z0) / sqrt(2 pi n h''(z0)).
    """
    if n < 1:
        raise DomainError("n must be a positive integer")
    z0, at_left, at_right = _locate_extremum(h, domain, sign=-1.0)
    if at_left or at_right:
        raise ConvergenceError("saddle point located on the domain edge")
    _, d2 = _derivatives(h, z0, None, d2h)
    if not d2 > 0:
        raise ConvergenceError(f"h''(z0) = {d2} is not positive at the real saddle")
    pref = float(g(z0)) / math.sqrt(2 * math.pi * n * d2)
    return LaplaceEstimate(float(h(z0)), pref, z0, False, n, d2)


def sphere_surface_rate(R: float) -> float:
    """Exponential growth rate of the surface measure of {x in R^n: |x|^2 = nR}.

    Real-line reduction of the contour integral: the exponent is
    (1/2) ln pi + min_z [zR - (1/2) ln z], which equals (1/2) ln(2 pi e R).
    """
    if R <= 0:
        raise DomainError("R must be positive")
    est = saddle_point_integral(lambda z: z * R - 0.5 * math.log(z), lambda z: 1.0,
                                (0.0, math.inf), n=1)
    return 0.5 * math.log(math.pi) + est.exponent_rate


def type_class_size_estimate(N: int, n: int) -> tuple[float | None, float]:
    """Saddle-point estimate and exact value of ln C(N, n).

    Returns ``(estimate, exact)``; the estimate is ``None`` for n in {0, N},
    where the saddle point runs off to infinity.
    """
    if N < 1 or not 0 <= n <= N:
        raise DomainError(f"need N >= 1 and 0 <= n <= N, got N={N}, n={n}")
    exact = float(gammaln(N + 1) - gammaln(n + 1) - gammaln(N - n + 1))
    if n == 0 or n == N:
        return None, 0.0
    a = n / N
    est = N * binary_entropy(a) - 0.5 * math.log(2 * math.pi * N * a * (1 - a))
    return float(est), exact


# ---------------------------------------------------------------------------
# Sampled functions and Legendre transforms
# ---------------------------------------------------------------------------


class _Unattainable:
    """Marker for Sigma = -inf (no configurations at this energy)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNATTAINABLE"

    def __reduce__(self):
        return (_Unattainable, ())


UNATTAINABLE = _Unattainable()

DomainKind = Literal["closed interval", "half line", "full line"]


@dataclass
class SampledFunction:
    """A function sampled on a strictly increasing grid.

    ``attainable`` marks the samples that carry a finite value; the others
    stand for an empty support (``UNATTAINABLE``) and never enter extrema.
    """

    grid: np.ndarray
    values: np.ndarray
    attainable: np.ndarray | None = None
    domain_kind: DomainKind = "closed interval"

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        raw = list(self.values) if not isinstance(self.values, np.ndarray) else self.values
        if isinstance(raw, list):
            mask = np.array([v is not UNATTAINABLE for v in raw], dtype=bool)
            vals = np.array([float(v) if v is not UNATTAINABLE else 0.0 for v in raw])
        else:
            vals = np.asarray(raw, dtype=float)
            mask = np.ones(len(vals), dtype=bool)
        if self.attainable is not None:
            mask = mask & np.asarray(self.attainable, dtype=bool)
        self.values = np.where(mask, vals, 0.0)
        self.attainable = mask
        if self.grid.ndim != 1 or len(self.grid) != len(self.values):
            raise ShapeError("grid and values must be 1-D of equal length")
        if len(self.grid) < 3:
            raise ShapeError("a sampled function needs at least 3 points")
        if np.any(np.diff(self.grid) <= 0):
            raise ShapeError("grid must be strictly increasing")
        if np.any(~np.isfinite(self.values[mask])):
            raise ShapeError("attainable values must be finite")

    @classmethod
    def from_callable(cls, func, grid, domain_kind: DomainKind = "closed interval"):
        return cls(np.asarray(grid, dtype=float), [func(x) for x in grid], None, domain_kind)

    def __call__(self, x):
        """Linear interpolation on the attainable samples."""
        m = self.attainable
        return np.interp(x, self.grid[m], self.values[m])

    def second_differences(self) -> np.ndarray:
        """Second differences y[i-1] - 2 y[i] + y[i+1] over runs of attainable
        samples (scaled to the local mean spacing on non-uniform grids)."""
        x, y, m = self.grid, self.values, self.attainable
        slopes = np.diff(y) / np.diff(x)
        ok = m[:-1] & m[1:]
        d2 = np.diff(slopes) * (0.5 * (x[2:] - x[:-2]))
        return d2[ok[:-1] & ok[1:]]


Direction = Literal["max", "inf", "sup"]


@dataclass
class LegendrePair:
    """A sampled function together with its numerical Legendre transform.

    direction:
      ``max``  T(y) = max_x [f(x) - x y]    (entropy -> log-partition)
      ``inf``  T(y) = min_x [x y + f(x)]    (log-partition -> entropy)
      ``sup``  T(y) = sup_x [x y - f(x)]    (convex conjugate)

    ``achievers[j]`` is the refined extremising abscissa for output point j.
    """

    source: SampledFunction
    transform: SampledFunction
    direction: Direction
    achievers: np.ndarray = field(default_factory=lambda: np.empty(0))

    def is_shape_consistent(self, tol: float = 1e-6) -> bool:
        d2 = self.transform.second_differences()
        if self.direction == "inf":
            return bool(np.all(d2 <= tol))
        return bool(np.all(d2 >= -tol))


def _parabolic_vertex(x0, x1, x2, y0, y1, y2):
    d0 = (y1 - y0) / (x1 - x0)
    d1 = (y2 - y1) / (x2 - x1)
    a = (d1 - d0) / (x2 - x0)
    with np.errstate(divide="ignore", invalid="ignore"):
        xv = 0.5 * (x0 + x1) - d0 / (2 * a)
        yv = y1 + d0 * (xv - x1) + a * (xv - x0) * (xv - x1)
    return xv, yv, a


def legendre_transform(f: SampledFunction, out_grid, direction: Direction = "max",
                       shape_tol: float = 1e-8) -> LegendrePair:
    """Numerical Legendre transform of a sampled concave/convex function.

    For each output abscissa the extremum is taken over the input grid and
    refined by a three-point parabola; ties go to the smallest abscissa.
    """
    if direction not in ("max", "inf", "sup"):
        raise DomainError(f"unknown direction {direction!r}")
    d2 = f.second_differences()
    if direction == "max":
        if np.any(d2 > shape_tol):
            raise ShapeError("input must be concave for the 'max' transform")
    elif np.any(d2 < -shape_tol):
        raise ShapeError(f"input must be convex for the '{direction}' transform")

    y = np.asarray(out_grid, dtype=float)
    x, fx, m = f.grid, f.values, f.attainable
    out = np.empty(len(y))
    arg = np.empty(len(y))
    chunk = max(1, 4_000_000 // len(x))
    for start in range(0, len(y), chunk):
        yy = y[start:start + chunk, None]
        if direction == "max":
            v = fx[None, :] - x[None, :] * yy
        elif direction == "sup":
            v = x[None, :] * yy - fx[None, :]
        else:
            v = -(x[None, :] * yy + fx[None, :])
        v = np.where(m[None, :], v, -np.inf)
        idx = np.argmax(v, axis=1)
        rows = np.arange(len(idx))
        best = v[rows, idx]
        xa = x[idx].copy()
        inner = (idx > 0) & (idx < len(x) - 1)
        il, ir = np.clip(idx - 1, 0, len(x) - 1), np.clip(idx + 1, 0, len(x) - 1)
        inner &= m[il] & m[ir]
        if np.any(inner):
            r = rows[inner]
            xv, yv, a = _parabolic_vertex(x[il[r]], x[idx[r]], x[ir[r]],
                                          v[r, il[r]], v[r, idx[r]], v[r, ir[r]])
            good = (a < 0) & (xv >= x[il[r]]) & (xv <= x[ir[r]]) & (yv >= best[r])
            best[r[good]] = yv[good]
            xa[r[good]] = xv[good]
        out[start:start + len(idx)] = best
        arg[start:start + len(idx)] = xa
    if direction == "inf":
        out = -out
    kind: DomainKind = "full line"
    transform = SampledFunction(y, out, None, kind)
    return LegendrePair(f, transform, direction, arg)
