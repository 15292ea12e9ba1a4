"""Exponents of the characteristic function E exp(-s n D) of the distortion of
random (single-stage and two-stage) codes, for the binary symmetric source
with Hamming distortion."""
from __future__ import annotations

import math
from dataclasses import dataclass

from ..asymptotics import LN2, gv_distance
from ..errors import DomainError


def s_threshold(R: float) -> float:
    """s_R = ln[(1 - delta_GV(R)) / delta_GV(R)]."""
    d = gv_distance(R)
    return math.log((1 - d) / d)


def hierarchical_u(s: float, R: float) -> float:
    """u(s, R) = ln2 - R - max_{delta <= delta_GV(R)} [h2(delta) - s delta]."""
    if s < 0:
        raise DomainError("s must be nonnegative")
    if not 0 < R < LN2:
        raise DomainError("R must lie in (0, ln 2)")
    if s <= s_threshold(R):
        return s * gv_distance(R)
    # ln(1 + e^s) computed stably
    return LN2 - R + s - (s + math.log1p(math.exp(-s)))


@dataclass(frozen=True)
class TwoStageResult:
    value: float
    case: str
    valid: bool
    s0: float | None


def hierarchical_two_stage(s: float, R1: float, R2: float, lam: float) -> TwoStageResult:
    """Two-stage tree code with rate R1 on a fraction lam of the block, R2 after.

    R1 < R2 behaves like two decoupled codes.  For R1 >= R2 the exponent
    equals u(s, R) only for s below an unspecified threshold s0; that
    threshold is not computed (``s0 = None``), and ``valid`` reports the
    conservative range s <= s_R.  For R1 = R2 the range is unlimited.
    """
    if not 0 < lam < 1:
        raise DomainError("lambda must lie in (0, 1)")
    R = lam * R1 + (1 - lam) * R2
    if not 0 < R < LN2:
        raise DomainError("overall rate must lie in (0, ln 2)")
    if R1 < R2:
        v = lam * hierarchical_u(s, R1) + (1 - lam) * hierarchical_u(s, R2)
        return TwoStageResult(v, "decoupled", True, math.inf)
    v = hierarchical_u(s, R)
    if R1 == R2:
        return TwoStageResult(v, "single rate", True, math.inf)
    return TwoStageResult(v, "higher rate first", s <= s_threshold(R), None)
