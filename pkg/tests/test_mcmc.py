import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from statmech import _kernels
from statmech.ensembles import DiscreteSystem, thermo_state
from statmech.errors import DomainError
from statmech.mcmc import (SamplerConfig, SpinTarget, TableTarget, batch_means_se, boltzmann_probs,
                           heat_bath_run, kernel_matrix, log_ratio_residual, metropolis_run, run,
                           run_oracle)


def _ising_energy(s, J, B):
    n = len(s)
    return -J * sum(s[i] * s[(i + 1) % n] for i in range(n)) - B * sum(s)


def test_config_validation():
    for kw in ({"beta": -1, "steps": 10}, {"beta": 1, "steps": 0},
               {"beta": 1, "steps": 10, "kernel": "gibbs"}, {"beta": 1, "steps": 10, "burn_in": 1.0}):
        with pytest.raises(DomainError):
            SamplerConfig(**kw)


def test_spin_target_energies_match_direct_sum():
    tg = SpinTarget.ising1d(6, 0.8, 0.3)
    s = 1 - 2 * ((np.arange(64)[:, None] >> np.arange(6)) & 1)
    direct = [_ising_energy(row, 0.8, 0.3) for row in s]
    assert np.allclose(tg.energies(), direct, atol=1e-12)


def test_curie_weiss_target_energy():
    n, J, B = 5, 1.3, 0.2
    tg = SpinTarget.curie_weiss(n, J, B)
    s = 1 - 2 * ((np.arange(2**n)[:, None] >> np.arange(n)) & 1)
    M = s.sum(axis=1)
    assert np.allclose(tg.energies(), -J * M**2 / (2 * n) - B * M, atol=1e-12)


def test_beta_zero_uniform():
    tg = SpinTarget.ising1d(3, 1.0, 0.0)
    r = metropolis_run(SamplerConfig(0.0, 10**6, seed=1), tg)
    assert r.acceptance_rate == 1.0
    assert r.total_variation(np.full(8, 1 / 8)) < 0.02


@pytest.mark.parametrize("kernel", ["metropolis", "heat-bath"])
def test_tv_eight_states(kernel):
    tg = SpinTarget(np.array([[0, 0.5, -0.3], [0.5, 0, 0.8], [-0.3, 0.8, 0]]), np.array([0.2, -0.1, 0.4]))
    r = run(SamplerConfig(1.0, 10**6, seed=2, kernel=kernel), tg)
    assert r.total_variation(boltzmann_probs(tg, 1.0)) < 0.02


def test_curie_weiss_magnetization():
    tg = SpinTarget.curie_weiss(4, 1.0, 0.1)
    r = metropolis_run(SamplerConfig(0.5, 400_000, seed=3), tg)
    exact = float(boltzmann_probs(tg, 0.5) @ tg.magnetizations())
    se = batch_means_se(r.magnetizations)
    assert abs(r.magnetizations.mean() - exact) < 3 * se


def test_ising_mean_energy():
    tg = SpinTarget.ising1d(8, 1.0, 0.0)
    sys_ = DiscreteSystem(tg.energies(), np.ones(256))
    exact = thermo_state(sys_, 0.7).mean_energy
    r = metropolis_run(SamplerConfig(0.7, 400_000, seed=4), tg)
    assert abs(r.energies.mean() - exact) < 3 * batch_means_se(r.energies)


def test_heat_bath_binary_site():
    for d in (-1.0, 0.0, 0.5, 2.0):
        tg = TableTarget(2, 1, [0.0, d])
        W = kernel_matrix(tg, 1.3, "heat-bath")
        assert W[0, 1] == pytest.approx(math.exp(-1.3 * d) / (1 + math.exp(-1.3 * d)), abs=1e-15)
    assert kernel_matrix(TableTarget(2, 1, [0.0, 0.0]), 1.0, "heat-bath")[0, 1] == 0.5


def test_heat_bath_table_tv():
    sys_ = DiscreteSystem([0.0, 0.3, 1.0, -0.4, 0.8, 0.1, 0.2, 0.9], np.ones(8))
    tg = TableTarget.from_system(sys_)
    r = heat_bath_run(SamplerConfig(1.0, 10**6, seed=5), tg)
    assert r.total_variation(boltzmann_probs(tg, 1.0)) < 0.02


def test_from_system_rejects_degenerate():
    with pytest.raises(DomainError):
        TableTarget.from_system(DiscreteSystem([0, 1], [1, 2]))


@pytest.mark.parametrize("target", [SpinTarget.ising1d(4, 1.0, 0.3), SpinTarget.curie_weiss(3, 1.0, -0.2),
                                    TableTarget(3, 2, np.linspace(-1, 1, 9) ** 2)], ids=["ising", "cw", "table"])
@pytest.mark.parametrize("kernel", ["metropolis", "heat-bath"])
def test_detailed_balance_exact(target, kernel):
    beta = 0.9
    W = kernel_matrix(target, beta, kernel)
    P = boltzmann_probs(target, beta)
    assert np.allclose(W.sum(axis=1), 1, atol=1e-14)
    flow = P[:, None] * W
    assert np.max(np.abs(flow - flow.T)) < 1e-15
    assert log_ratio_residual(target, beta, kernel) < 1e-14


def test_determinism_and_seeds():
    tg = SpinTarget.ising1d(6, 1.0, 0.1)
    cfg = SamplerConfig(0.8, 5000, seed=11, kernel="heat-bath")
    a, b = run(cfg, tg), run(cfg, tg)
    assert np.array_equal(a.states, b.states)
    c = run(SamplerConfig(0.8, 5000, seed=12, kernel="heat-bath"), tg)
    assert not np.array_equal(a.states, c.states)


def _spin_case(rng, n, steps):
    J = np.triu(rng.normal(size=(n, n)), 1)
    tg = SpinTarget(J + J.T, rng.normal(size=n))
    s0 = rng.choice([-1, 1], n).astype(np.int64)
    return tg, s0, rng.integers(0, n, steps), rng.random(steps)


@settings(max_examples=25)
@given(st.integers(0, 2**32 - 1), st.integers(2, 10), st.floats(0, 3))
def test_backends_identical(seed, n, beta):
    mods = _kernels.backends()
    if len(mods) < 2:
        pytest.skip("compiled backend not built")
    rng = np.random.default_rng(seed)
    tg, s0, sites, u = _spin_case(rng, n, 500)
    q = int(rng.integers(2, 4))
    table = rng.normal(size=q**3)
    tsites, offs, tu = rng.integers(0, 3, 500), rng.integers(1, q, 500), rng.random(500)
    x0 = np.zeros(3, dtype=np.int64)
    for name in ("metropolis_spins", "heat_bath_spins"):
        a = getattr(mods["python"], name)(s0.copy(), tg.J, tg.h, beta, sites, u)
        b = getattr(mods["cython"], name)(s0.copy(), tg.J, tg.h, beta, sites, u)
        for x, y in zip(a, b):
            assert np.array_equal(np.asarray(x), np.asarray(y))
    a = mods["python"].metropolis_table(x0.copy(), q, table, beta, tsites, offs, tu)
    b = mods["cython"].metropolis_table(x0.copy(), q, table, beta, tsites, offs, tu)
    assert all(np.array_equal(np.asarray(x), np.asarray(y)) for x, y in zip(a, b))
    a = mods["python"].heat_bath_table(x0.copy(), q, table, beta, tsites, tu)
    b = mods["cython"].heat_bath_table(x0.copy(), q, table, beta, tsites, tu)
    assert all(np.array_equal(np.asarray(x), np.asarray(y)) for x, y in zip(a, b))


def test_pure_fallback_selected_by_env():
    code = "from statmech import _kernels; print(_kernels.BACKEND)"
    env = dict(os.environ, STATMECH_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_run_oracle_matches_boltzmann():
    E = {0: 0.0, 1: 0.5, 2: 1.0, 3: -0.3}
    nb = lambda x: [(x + 1) % 4, (x - 1) % 4]
    states, energies, acc = run_oracle(SamplerConfig(1.0, 200_000, seed=6), E.get, nb, 0)
    emp = np.bincount(states[20_000:], minlength=4) / 180_000
    w = np.exp(-np.array(list(E.values())))
    assert 0.5 * np.abs(emp - w / w.sum()).sum() < 0.02
    assert 0 < acc < 1


def test_batch_means():
    x = np.random.default_rng(0).normal(size=100_000)
    assert batch_means_se(x) == pytest.approx(1 / math.sqrt(100_000), rel=0.3)
    with pytest.raises(DomainError):
        batch_means_se(np.ones(10))
