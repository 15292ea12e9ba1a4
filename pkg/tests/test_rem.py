import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from statmech.asymptotics import LN2, UNATTAINABLE, SampledFunction, binary_entropy, legendre_transform
from statmech.errors import DomainError, SizeError
from statmech.rem import (gaussian_tail, grem_curve, grem_phi, rem_annealed_phi, rem_beta_c,
                          rem_curve, rem_entropy, rem_field_beta_c, rem_field_phi, rem_monte_carlo,
                          rem_phi, rem_susceptibility, sk_capacity, sk_exponent)

SQ = math.sqrt(LN2)


def test_rem_phi_values():
    assert rem_phi(0.0) == (LN2, "paramagnetic")
    bc = rem_beta_c(1.0)
    assert bc == pytest.approx(2 * SQ)
    c = rem_curve(1.0)
    assert c.segments[0].evaluate(bc) == pytest.approx(2 * LN2, abs=1e-14)
    assert c.segments[1].evaluate(bc) == pytest.approx(2 * LN2, abs=1e-14)
    assert rem_phi(3.0) == (pytest.approx(3 * SQ), "glassy")
    assert max(c.continuity_residuals()) < 1e-10


def test_rem_phi_derivatives_at_transition():
    bc, d = rem_beta_c(1.0), 1e-6
    c = rem_curve(1.0)
    left = (c(bc) - c(bc - d)) / d
    right = (c(bc + d) - c(bc)) / d
    assert left == pytest.approx(right, abs=1e-5)
    d2l = (c(bc - 2 * d) - 2 * c(bc - d) + c(bc)) / d**2
    d2r = (c(bc + 2 * d) - 2 * c(bc + d) + c(bc)) / d**2
    assert d2l == pytest.approx(0.5, abs=1e-2) and abs(d2r) < 1e-2


def test_rem_entropy():
    assert rem_entropy(0.0) == LN2
    assert rem_entropy(SQ) == pytest.approx(0.0, abs=1e-15)
    assert rem_entropy(1.1 * SQ) is UNATTAINABLE


def test_annealed():
    bc = rem_beta_c(1.0)
    assert rem_annealed_phi(0.0) == LN2
    assert rem_annealed_phi(bc) == pytest.approx(rem_phi(bc)[0], abs=1e-14)
    b = 2 * bc
    assert rem_annealed_phi(b) - rem_phi(b)[0] == pytest.approx((b / 2 - SQ) ** 2, abs=1e-12)


@given(st.floats(min_value=0, max_value=20), st.floats(min_value=0.1, max_value=5))
def test_annealed_dominates(beta, J):
    assert rem_annealed_phi(beta, J) - rem_phi(beta, J)[0] >= -1e-12


def test_monte_carlo_small_cases():
    assert rem_monte_carlo(12, 1.0, 0.0, seed=3) == LN2
    a = rem_monte_carlo(12, 1.0, 1.0, seed=3)
    assert a == rem_monte_carlo(12, 1.0, 1.0, seed=3)
    assert a == pytest.approx(rem_monte_carlo(12, 1.0, 1.0, seed=3, batch=1000), abs=1e-12)
    with pytest.raises(SizeError):
        rem_monte_carlo(25, 1.0, 1.0, 0)


@pytest.mark.slow
def test_monte_carlo_paramagnetic_n20():
    for seed in range(5):
        assert abs(rem_monte_carlo(20, 1.0, 1.0, seed) - (LN2 + 0.25)) < 0.05


def test_rem_field_reduces_at_zero_field():
    assert rem_field_beta_c(0.0) == rem_beta_c(1.0)
    for b in (0.5, 1.0, 3.0):
        st_ = rem_field_phi(b, 0.0)
        assert st_.phi == pytest.approx(rem_phi(b)[0], abs=1e-14) and st_.m_star == 0.0


def test_rem_field_states():
    B = 0.7
    bc = rem_field_beta_c(B)
    lo = rem_field_phi(0.5 * bc, B)
    assert lo.phase == "paramagnetic" and lo.m_star == pytest.approx(math.tanh(0.5 * bc * B), abs=1e-10)
    hi = rem_field_phi(2 * bc, B)
    assert hi.phase == "glassy" and hi.m_star == pytest.approx(math.tanh(B * bc), abs=1e-8)
    # continuity at the transition
    assert rem_field_phi(bc * (1 - 1e-12), B).phi == pytest.approx(rem_field_phi(bc * (1 + 1e-12), B).phi, abs=1e-9)
    for small in (1e-6, -1e-6):
        assert abs(rem_field_phi(0.5, small).m_star) < 1e-5
        assert abs(rem_field_phi(5.0, small).m_star) < 1e-5


def test_tc_increases_with_field():
    tc = [1 / rem_field_beta_c(B) for B in (0, 0.5, 1, 2)]
    assert all(a < b for a, b in zip(tc, tc[1:]))
    assert rem_field_beta_c(1.0) < rem_field_beta_c(0.0)


def test_susceptibility():
    tc = 1 / rem_beta_c(1.0)
    assert rem_susceptibility(2 * tc) == pytest.approx(1 / (2 * tc))
    assert rem_susceptibility(tc / 2) == pytest.approx(1 / tc)
    assert rem_susceptibility(tc) == pytest.approx(1 / tc)
    with pytest.raises(DomainError):
        rem_susceptibility(0.0)


def test_grem_cases():
    v, phase, k = grem_phi(1.0, 1.0, 0.5 * LN2, 0.5)
    assert k == 1 and v == pytest.approx(rem_phi(1.0)[0])
    c = grem_curve(1.0, 0.2, 0.5)
    assert len(c.segments) == 3
    b1, b2 = c.segments[0].hi, c.segments[1].hi
    assert b1 < b2
    assert max(c.continuity_residuals()) < 1e-12
    slope = c(101.0) - c(100.0)
    assert slope == pytest.approx(math.sqrt(0.5 * 0.2) + math.sqrt(0.5 * (LN2 - 0.2)), abs=1e-12)
    assert slope < SQ
    with pytest.raises(DomainError):
        grem_curve(1.0, 0.8, 0.5)


def test_grem_dichotomy_random():
    rng = np.random.default_rng(9)
    for _ in range(1000):
        R1, a1 = rng.uniform(1e-3, LN2 - 1e-3), rng.uniform(1e-3, 1 - 1e-3)
        assert (R1 / a1 < LN2) == (R1 / a1 < (LN2 - R1) / (1 - a1))


@pytest.mark.parametrize("curve", [rem_curve(1.0), rem_curve(2.5), grem_curve(1.0, 0.2, 0.5),
                                   grem_curve(1.3, 0.1, 0.4)])
def test_convexity_and_entropy(curve):
    b = np.linspace(0, 8, 4001)
    phi = np.array([curve(x) for x in b])
    assert np.all(np.diff(phi, 2) >= -1e-9)
    d = 1e-6
    sig = np.array([curve(x) - x * (curve(x + d) - curve(max(x - d, 0))) / (x + d - max(x - d, 0)) for x in b])
    assert np.all(sig >= -1e-6)
    glassy = [i for i, x in enumerate(b) if curve.phase(x) == "glassy" and x > curve.segments[-1].lo + 1e-3]
    assert np.max(np.abs(sig[glassy])) < 1e-6


def test_field_phi_convex():
    b = np.linspace(0, 6, 1201)
    phi = np.array([rem_field_phi(x, 0.6).phi for x in b])
    assert np.all(np.diff(phi, 2) >= -1e-9)


def test_legendre_of_rem_entropy():
    eps = np.linspace(-SQ, SQ, 40001)
    sig = SampledFunction(eps, [rem_entropy(e) for e in eps])
    beta = np.linspace(0, 3 * rem_beta_c(1.0), 200)
    phi = legendre_transform(sig, beta, "max").transform.values
    assert np.max(np.abs(phi - [rem_phi(b)[0] for b in beta])) < 1e-4


def test_piecewise_json():
    doc = json.loads(grem_curve(1.0, 0.2, 0.5).to_json())
    assert [s["phase"] for s in doc["segments"]] == ["paramagnetic", "first level frozen", "glassy"]
    assert doc["segments"][-1]["hi"] == "inf"
    assert len(doc["transitions"]) == 2


def test_gaussian_tail():
    assert gaussian_tail(0.0) == 0.5
    assert gaussian_tail(1.0) == pytest.approx(0.15865525393145707, rel=1e-14)


def _grid_oracle(k):
    t = np.linspace(-12, 12, 2_400_001)
    from scipy.special import log_ndtr
    v = LN2 + log_ndtr(t) - 0.5 * (t + k) ** 2
    i = int(np.argmax(v))
    # three-point parabolic refinement of the grid maximum
    y0, y1, y2 = v[i - 1], v[i], v[i + 1]
    return y1 + (y0 - y2) ** 2 / (8 * (2 * y1 - y0 - y2))


def test_sk_capacity():
    r = sk_capacity(0.0)
    assert r.residual < 1e-12
    assert r.C == pytest.approx(_grid_oracle(0.0), abs=1e-8)
    assert r.C == pytest.approx(sk_exponent(r.t_star, 0.0))
    assert abs(sk_capacity(-10.0).C - LN2) < 1e-3
    assert sk_capacity(6.0).C < 1e-3
    assert sk_capacity(2.0, J=2.0).C == pytest.approx(sk_capacity(1.0).C, abs=1e-13)


@given(st.floats(min_value=-8, max_value=5))
def test_sk_stationary_is_max(k):
    r = sk_capacity(k)
    for dt in (-1e-3, 1e-3):
        assert sk_exponent(r.t_star + dt, k) <= r.C + 1e-15
