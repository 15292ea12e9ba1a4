"""Command-line front end: ``statmech <subcommand> [flags]``.

Every run writes a table (CSV by default, ``--format json`` otherwise) to
stdout or ``--out``. CSV output starts with a ``# {json}`` line holding the
resolved configuration. Exit codes: 0 success, 2 domain error, 3 numerical
non-convergence, 64 malformed flags.

Sweep flags accept ``start:stop:step`` (endpoints included within half a
step), a comma list, or a single number. The seed defaults to DEFAULT_SEED
unless the STATMECH_SEED environment variable is set.
"""
from __future__ import annotations

import argparse
import itertools
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import io as sio
from .errors import ConvergenceError, ConvergenceWarning, DomainError

DEFAULT_SEED = 20240607

EXIT_OK, EXIT_DOMAIN, EXIT_CONVERGENCE, EXIT_USAGE = 0, 2, 3, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_sweep(text: str) -> list[float]:
    """'a:b:h' -> a, a+h, ... up to b (inclusive within less than h/2); 'x,y,z'; or 'x'."""
    text = str(text).strip()
    try:
        if ":" in text:
            parts = [float(t) for t in text.split(":")]
            if len(parts) != 3:
                raise ValueError
            a, b, h = parts
            if h <= 0 or b < a:
                raise UsageError(f"sweep {text!r} needs step > 0 and stop >= start")
            # nearest grid count; an exact half step rounds down
            n = int(math.floor((b - a) / h + 0.5 - 1e-9))
            return [float(np.round(a + i * h, 12)) for i in range(n + 1)]
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"malformed sweep {text!r}") from None


def _int(text: str) -> int:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if v != int(v):
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(v)


def _tol_pairs(items, allowed: set) -> dict:
    out = {}
    for it in items or []:
        if "=" not in it:
            raise UsageError(f"--tol expects key=value, got {it!r}")
        k, v = it.split("=", 1)
        if k not in allowed:
            raise UsageError(f"unknown tolerance key {k!r}; allowed: {sorted(allowed) or 'none'}")
        try:
            out[k] = float(v)
        except ValueError:
            raise UsageError(f"tolerance {k} must be a number") from None
    return out


def _grid(args, names):
    vals = [parse_sweep(getattr(args, n)) for n in names]
    return [dict(zip(names, combo)) for combo in itertools.product(*vals)]


def _pmap(fn, items, jobs):
    if jobs > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, items))
    return [fn(it) for it in items]


# ---------------------------------------------------------------------------
# Subcommands. Each returns (rows, columns).
# ---------------------------------------------------------------------------


def cmd_thermo(args, tol):
    from .ensembles import (DiscreteSystem, OscillatorProblem, equipartition, thermo_state,
                            variational_bound_oscillator)
    if args.oscillator:
        pr = OscillatorProblem(args.A, args.m, args.kT)
        rows = []
        for trial in ("square well", "harmonic"):
            r = variational_bound_oscillator(pr, trial)
            rows.append({"trial": trial, "log_z_bound": r.log_z_bound, "log_z_exact": r.log_z_exact,
                         "ratio": r.ratio, "parameter": r.optimal_parameter})
        return rows, ["trial", "log_z_bound", "log_z_exact", "ratio", "parameter"]
    if args.equipartition is not None:
        theta, alpha = args.equipartition
        rows = []
        for g in _grid(args, ["beta"]):
            r = equipartition(theta, alpha, g["beta"])
            rows.append({"beta": g["beta"], "mean_energy": r.mean_energy, "target": r.target,
                         "virial": r.virial, "virial_target": r.virial_target})
        return rows, ["beta", "mean_energy", "target", "virial", "virial_target"]
    if args.system:
        system = sio.load_system(args.system)
    elif args.spin_field is not None:
        system = DiscreteSystem.spin_in_field(args.spin_field)
    else:
        system = DiscreteSystem.two_level(args.two_level)
    cols = ["beta", "log_z", "mean_energy", "var_energy", "entropy", "free_energy"]

    def one(g):
        s = thermo_state(system, g["beta"])
        return {"beta": g["beta"], "log_z": s.log_z, "mean_energy": s.mean_energy,
                "var_energy": s.var_energy, "entropy": s.entropy, "free_energy": s.free_energy}
    return _pmap(one, _grid(args, ["beta"]), args.jobs), cols


def cmd_ising(args, tol):
    from .spins import (IsingParams, ising1d_exact, ising1d_magnetization, ising1d_phi,
                        ising1d_transfer_log_z)
    cols = ["beta", "B", "phi", "magnetization"]
    if args.n:
        cols += ["log_z_transfer", "log_z_exact"]

    def one(g):
        p = IsingParams(g["beta"], g["B"], args.J)
        row = {"beta": g["beta"], "B": g["B"], "phi": ising1d_phi(p), "magnetization": ising1d_magnetization(p)}
        if args.n:
            row["log_z_transfer"] = ising1d_transfer_log_z(args.n, p)
            row["log_z_exact"] = ising1d_exact(args.n, p) if args.n <= 20 else None
        return row
    return _pmap(one, _grid(args, ["beta", "B"]), args.jobs), cols


def cmd_cw(args, tol):
    from .spins import IsingParams, curie_weiss_solve

    def one(g):
        s = curie_weiss_solve(IsingParams(g["beta"], g["B"], args.J))
        return {"beta": g["beta"], "B": g["B"], "m_star": s.global_maximizer, "phi": s.phi,
                "phase": s.phase, "n_fixed_points": len(s.fixed_points)}
    return (_pmap(one, _grid(args, ["beta", "B"]), args.jobs),
            ["beta", "B", "m_star", "phi", "phase", "n_fixed_points"])


def cmd_rem(args, tol):
    from .rem import rem_annealed_phi, rem_field_phi, rem_monte_carlo, rem_phi
    cols = ["beta", "B", "phi", "phase", "m_star", "annealed_phi"]
    if args.mc_n:
        cols.append("monte_carlo")

    def one(g):
        st = rem_field_phi(g["beta"], g["B"], args.J)
        row = {"beta": g["beta"], "B": g["B"], "phi": st.phi, "phase": st.phase, "m_star": st.m_star,
               "annealed_phi": rem_annealed_phi(g["beta"], args.J) if g["B"] == 0 else None}
        if g["B"] == 0:
            row["phi"], row["phase"] = rem_phi(g["beta"], args.J)
        if args.mc_n:
            if g["B"] != 0:
                raise DomainError("Monte Carlo is available for the zero-field REM only")
            row["monte_carlo"] = rem_monte_carlo(args.mc_n, args.J, g["beta"], args.seed)
        return row
    return _pmap(one, _grid(args, ["beta", "B"]), args.jobs), cols


def cmd_grem(args, tol):
    from .rem import grem_phi

    def one(g):
        v, ph, k = grem_phi(g["beta"], args.J, args.R1, args.a1)
        return {"beta": g["beta"], "phi": v, "phase": ph, "n_transitions": k}
    return _pmap(one, _grid(args, ["beta"]), args.jobs), ["beta", "phi", "phase", "n_transitions"]


def cmd_coding(args, tol):
    from .coding.exponents import decoder_phase, pc_exponent

    def one(g):
        pt = decoder_phase(g["beta"], g["R"], args.p)
        return {"beta": g["beta"], "R": g["R"], "phase": pt.phase,
                "dominant_exponent": pt.dominant_exponent, "pc_exponent": pc_exponent(g["R"], args.p)}
    return (_pmap(one, _grid(args, ["beta", "R"]), args.jobs),
            ["beta", "R", "phase", "dominant_exponent", "pc_exponent"])


def cmd_rd(args, tol):
    from pathlib import Path

    from .coding.ratedistortion import RdProblem, capacity_parametric, rd_parametric
    if args.capacity:
        def cap(g):
            C, b = capacity_parametric(g["p"])
            return {"p": g["p"], "capacity": C, "beta_star": b}
        return _pmap(cap, _grid(args, ["p"]), args.jobs), ["p", "capacity", "beta_star"]
    prob = RdProblem.from_json(Path(args.problem).read_text()) if args.problem else RdProblem.binary_hamming()

    def one(g):
        R, b = rd_parametric(prob, g["D"])
        return {"D": g["D"], "R": R, "beta_star": b}
    return _pmap(one, _grid(args, ["D"]), args.jobs), ["D", "R", "beta_star"]


def cmd_jscc(args, tol):
    from .coding.jscc import jscc_phi

    def one(g):
        s = jscc_phi(g["beta"], g["B"], args.theta, args.p)
        return {"beta": g["beta"], "B": g["B"], "phi": s.phi, "m_star": s.m_star,
                "m_para": s.m_para, "phase": s.phase}
    return (_pmap(one, _grid(args, ["beta", "B"]), args.jobs),
            ["beta", "B", "phi", "m_star", "m_para", "phase"])


def cmd_dynamics(args, tol):
    from .dynamics import (detailed_balance_check, entropy, evolve, kolmogorov_cycle_check,
                           mm1_chain, stationary_distribution)
    chain = mm1_chain(*args.mm1, n_max=args.n_max) if args.mm1 else sio.load_chain(args.chain)
    if args.check:
        P = stationary_distribution(chain)
        db, viol = detailed_balance_check(chain, P, tol.get("balance", 1e-10))
        kc, cyc = (kolmogorov_cycle_check(chain, tol=tol.get("cycle", 1e-9)) if chain.n <= 12
                   else (None, None))
        row = {"n_states": chain.n, "detailed_balance": db, "balance_violation": viol,
               "kolmogorov": kc, "violating_cycle": "-".join(map(str, cyc)) if cyc else ""}
        row.update({f"P_{i + 1}": v for i, v in enumerate(P)})
        return [row], list(row)
    if args.p0:
        P0 = [float(x) for x in args.p0.split(",")]
    else:
        P0 = np.zeros(chain.n)
        P0[0] = 1.0
    times = (np.linspace(0, args.horizon, args.samples) if chain.mode == "continuous"
             else np.arange(int(args.horizon) + 1))
    tr = evolve(chain, P0, args.horizon, times)
    rows, cols = sio.trajectory_rows(tr.times, tr.distributions)
    for r, p in zip(rows, tr.distributions):
        r["entropy"] = entropy(p)
    return rows, cols + ["entropy"]


def cmd_sample(args, tol):
    from .ensembles import DiscreteSystem
    from .mcmc import SamplerConfig, SpinTarget, TableTarget, batch_means_se, boltzmann_probs, run
    if args.model == "ising1d":
        target = SpinTarget.ising1d(args.n, args.J, args.B)
    elif args.model == "cw":
        target = SpinTarget.curie_weiss(args.n, args.J, args.B)
    else:
        if not args.system:
            raise UsageError("--model table needs --system PATH")
        target = TableTarget.from_system(sio.load_system(args.system))
    cfg = SamplerConfig(args.beta, args.steps, args.seed, args.kernel)
    res = run(cfg, target)
    if args.trace:
        start = args.steps - len(res.states)
        rows = [{"step": start + i, "state": int(s), "energy": e,
                 "magnetization": None if res.magnetizations is None else res.magnetizations[i]}
                for i, (s, e) in enumerate(zip(res.states, res.energies))]
        return rows, ["step", "state", "energy", "magnetization"]
    P = boltzmann_probs(target, args.beta)
    E = target.energies()
    row = {"model": args.model, "kernel": args.kernel, "steps": args.steps, "seed": args.seed,
           "mean_energy": float(res.energies.mean()), "se_energy": batch_means_se(res.energies),
           "exact_mean_energy": float(P @ E), "acceptance_rate": res.acceptance_rate,
           "tv_distance": res.total_variation(P)}
    cols = list(row)
    if res.magnetizations is not None:
        row["mean_magnetization"] = float(res.magnetizations.mean())
        row["exact_mean_magnetization"] = float(P @ target.magnetizations())
        cols += ["mean_magnetization", "exact_mean_magnetization"]
    return [row], cols


def cmd_estimate(args, tol):
    from .estimation import (GriddedDensity, HmmSpec, Perturbation, de_bruijn_check,
                             fisher_information, generalized_temperature, hmm_entropy_rate_mc,
                             hmm_entropy_upper_bound)
    if args.what == "hmm":
        hmm = sio.load_hmm(args.hmm) if args.hmm else HmmSpec.binary_symmetric(*args.bsc)
        with warnings.catch_warnings():
            warnings.simplefilter("error", ConvergenceWarning)
            try:
                b = hmm_entropy_upper_bound(hmm, seed=args.seed, tol=tol.get("ascent", 1e-13), jobs=args.jobs)
            except ConvergenceWarning as w:
                raise ConvergenceError(str(w)) from None
        row = {"bound": b.bound}
        cols = ["bound"]
        if args.mc:
            e, se = hmm_entropy_rate_mc(hmm, args.mc, args.seed)
            row.update({"mc_entropy_rate": e, "mc_se": se})
            cols += ["mc_entropy_rate", "mc_se"]
        return [row], cols
    if args.density:
        dens = sio.read_density_csv(args.density)
    elif args.laplace is not None:
        dens = GriddedDensity.laplace(args.laplace)
    else:
        dens = GriddedDensity.gaussian(args.gaussian)
    if args.what == "fisher":
        return [{"fisher_information": fisher_information(dens)}], ["fisher_information"]
    if args.what == "temperature":
        return [{"alpha": args.alpha, "temperature": generalized_temperature(dens, args.alpha)}], ["alpha", "temperature"]
    rows = []
    for name in args.perturbation.split(","):
        if name not in ("gaussian", "uniform", "triangular"):
            raise UsageError(f"unknown perturbation {name!r}")
        r = de_bruijn_check(dens, getattr(Perturbation, name)())
        rows.append({"perturbation": name, "slope": r.slope, "half_fisher": r.half_fisher,
                     "entropy_0": r.entropies[0.0]})
    return rows, ["perturbation", "slope", "half_fisher", "entropy_0"]


def cmd_table1(args, tol):
    from .coding.exponents import table1
    rows = table1(args.p, args.beta, args.T, parse_sweep(args.R), tol.get("grid_step", args.grid_step))
    return rows, ["R", "E1_jensen", "E1_direct", "s_star", "rho_star"]


def cmd_phase_diagram(args, tol):
    if args.model == "rem-field":
        from .rem import rem_field_beta_c

        def one(g):
            bc = rem_field_beta_c(g["B"], args.J)
            return {"B": g["B"], "beta_c": bc, "T_c": 1.0 / bc}
        return _pmap(one, _grid(args, ["B"]), args.jobs), ["B", "beta_c", "T_c"]
    if args.model == "decoder":
        from .coding.exponents import decoder_boundaries, ze_beta_c

        def one(g):
            bs = decoder_boundaries(g["R"], args.p)
            ferro = [b for b, kind in bs if kind == "ferromagnetic"]
            return {"R": g["R"], "beta_c_glassy": ze_beta_c(g["R"], args.p),
                    "ferro_boundaries": ";".join("%.10g" % b for b in ferro)}
        return _pmap(one, _grid(args, ["R"]), args.jobs), ["R", "beta_c_glassy", "ferro_boundaries"]
    if args.model == "jscc":
        from .coding.jscc import jscc_beta_c

        def one(g):
            bc = jscc_beta_c(g["B"], args.theta, args.p)
            return {"B": g["B"], "beta_c": bc, "T_c": 0.0 if math.isinf(bc) else 1.0 / bc}
        return _pmap(one, _grid(args, ["B"]), args.jobs), ["B", "beta_c", "T_c"]
    from .spins import IsingParams, curie_weiss_solve

    def one(g):
        s = curie_weiss_solve(IsingParams(g["beta"], g["B"], args.J))
        return {"beta": g["beta"], "B": g["B"], "m_star": s.global_maximizer, "phase": s.phase}
    return _pmap(one, _grid(args, ["beta", "B"]), args.jobs), ["beta", "B", "m_star", "phase"]


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

# (name, handler, help text naming the topic, accepted --tol keys)
_COMMANDS = {
    "thermo": (cmd_thermo, "canonical ensemble of a discrete system; equipartition; variational "
                           "bounds for the quartic oscillator", set()),
    "ising": (cmd_ising, "one-dimensional Ising chain: transfer-matrix free energy, magnetization, "
                         "and exact enumeration", set()),
    "cw": (cmd_cw, "Curie-Weiss mean-field magnet: fixed points of m = tanh(beta B + beta J m)", set()),
    "rem": (cmd_rem, "random energy model, with or without a magnetic field; optional finite-n "
                     "Monte Carlo", set()),
    "grem": (cmd_grem, "two-level generalized random energy model", set()),
    "coding": (cmd_coding, "finite-temperature decoding of random codes on the BSC: phase and "
                           "correct-decoding exponent", set()),
    "rd": (cmd_rd, "rate-distortion function in parametric form; BSC capacity by the "
                   "same variational route", set()),
    "jscc": (cmd_jscc, "joint source-channel coding ensemble: free energy and magnetization", set()),
    "dynamics": (cmd_dynamics, "Markov master equation: trajectories, detailed balance and "
                               "Kolmogorov cycle checks", {"balance", "cycle"}),
    "sample": (cmd_sample, "Metropolis and heat-bath sampling of Boltzmann-Gibbs distributions", set()),
    "estimate": (cmd_estimate, "Fisher information, de Bruijn identity, Fisher temperature, and "
                               "hidden-Markov entropy-rate bound", {"ascent"}),
    "table1": (cmd_table1, "erasure/list decoding exponents of the BSC random-coding ensemble "
                           "(Jensen bound and direct evaluation)", {"grid_step"}),
    "phase-diagram": (cmd_phase_diagram, "sweeps of phase boundaries: REM in a field, decoder, "
                                         "JSCC, Curie-Weiss", set()),
}


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="statmech", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--out", help="write to this path instead of stdout")
    common.add_argument("--seed", type=_int, default=None,
                        help=f"64-bit seed (default: $STATMECH_SEED or {DEFAULT_SEED})")
    common.add_argument("--jobs", type=_int, default=1, help="worker threads for sweeps")
    common.add_argument("--tol", action="append", metavar="KEY=VALUE", help="tolerance override")

    def add(name):
        _, text, keys = _COMMANDS[name]
        extra = f" Tolerance keys: {', '.join(sorted(keys))}." if keys else ""
        return sub.add_parser(name, parents=[common], help=text, description=text.capitalize() + "." + extra)

    p = add("thermo")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--system", help="DiscreteSystem JSON {label, energies, degeneracies}")
    g.add_argument("--two-level", type=float, default=1.0, help="level spacing eps0")
    g.add_argument("--spin-field", type=float, help="single spin in field B")
    g.add_argument("--oscillator", action="store_true", help="quartic oscillator bounds")
    g.add_argument("--equipartition", type=float, nargs=2, metavar=("THETA", "ALPHA"))
    p.add_argument("--beta", default="1")
    p.add_argument("--A", type=float, default=1.0)
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--kT", type=float, default=1.0)

    p = add("ising")
    p.add_argument("--beta", default="1")
    p.add_argument("--B", default="0")
    p.add_argument("--J", type=float, default=1.0)
    p.add_argument("--n", type=_int, help="also report ln Z of the periodic n-chain")

    p = add("cw")
    p.add_argument("--beta", default="1")
    p.add_argument("--B", default="0")
    p.add_argument("--J", type=float, default=1.0)

    p = add("rem")
    p.add_argument("--beta", default="1")
    p.add_argument("--B", default="0")
    p.add_argument("--J", type=float, default=1.0)
    p.add_argument("--mc-n", type=_int, help="Monte Carlo sample with 2^n energies")

    p = add("grem")
    p.add_argument("--beta", default="1")
    p.add_argument("--J", type=float, default=1.0)
    p.add_argument("--R1", type=float, required=True)
    p.add_argument("--a1", type=float, required=True)

    p = add("coding")
    p.add_argument("--p", type=float, default=0.1)
    p.add_argument("--R", default="0.3")
    p.add_argument("--beta", default="1")

    p = add("rd")
    p.add_argument("--problem", help="RdProblem JSON {q, p, d}; default binary Hamming")
    p.add_argument("--D", default="0.1")
    p.add_argument("--capacity", action="store_true", help="BSC capacity instead of R(D)")
    p.add_argument("--p", default="0.1", help="crossover sweep for --capacity")

    p = add("jscc")
    p.add_argument("--beta", default="1")
    p.add_argument("--B", default="0.5")
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--p", type=float, default=0.1)

    p = add("dynamics")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--chain", help="ChainSpec JSON {mode, states, matrix}")
    g.add_argument("--mm1", type=float, nargs=2, metavar=("LAMBDA", "MU"))
    p.add_argument("--n-max", type=_int, default=50)
    p.add_argument("--p0", help="comma-separated initial distribution (default: point mass on state 1)")
    p.add_argument("--horizon", type=float, default=10.0)
    p.add_argument("--samples", type=_int, default=101)
    p.add_argument("--check", action="store_true", help="stationary law and reversibility checks")

    p = add("sample")
    p.add_argument("--model", choices=["ising1d", "cw", "table"], default="ising1d")
    p.add_argument("--kernel", choices=["metropolis", "heat-bath"], default="metropolis")
    p.add_argument("--n", type=_int, default=8)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--J", type=float, default=1.0)
    p.add_argument("--B", type=float, default=0.0)
    p.add_argument("--steps", type=_int, default=100_000)
    p.add_argument("--system", help="DiscreteSystem JSON for --model table")
    p.add_argument("--trace", action="store_true", help="emit the post-burn-in path")

    p = add("estimate")
    p.add_argument("what", choices=["fisher", "debruijn", "temperature", "hmm"])
    g = p.add_mutually_exclusive_group()
    g.add_argument("--density", help="CSV with columns x, q")
    g.add_argument("--gaussian", type=float, default=1.0, help="variance of a gridded Gaussian")
    g.add_argument("--laplace", type=float, help="scale of a gridded Laplace density")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--perturbation", default="gaussian,uniform,triangular")
    g2 = p.add_mutually_exclusive_group()
    g2.add_argument("--hmm", help="HmmSpec JSON {Q, W, pi}")
    g2.add_argument("--bsc", type=float, nargs=2, default=(0.1, 0.2), metavar=("FLIP", "NOISE"))
    p.add_argument("--mc", type=_int, default=0, help="Monte Carlo path length (0: skip)")

    p = add("table1")
    p.add_argument("--p", type=float, default=0.1)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--T", type=float, default=0.001)
    p.add_argument("--R", default="0:0.06:0.01")
    p.add_argument("--grid-step", type=float, default=0.005)

    p = add("phase-diagram")
    p.add_argument("--model", choices=["rem-field", "decoder", "jscc", "cw"], required=True)
    p.add_argument("--B", default="0:2:0.1")
    p.add_argument("--R", default="0.05:0.65:0.05")
    p.add_argument("--beta", default="0.5:2:0.1")
    p.add_argument("--J", type=float, default=1.0)
    p.add_argument("--p", type=float, default=0.1)
    p.add_argument("--theta", type=float, default=1.0)
    return ap


def _resolve_seed(seed):
    if seed is not None:
        return seed
    env = os.environ.get("STATMECH_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"STATMECH_SEED must be an integer, got {env!r}") from None
    return DEFAULT_SEED


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        args.seed = _resolve_seed(args.seed)
        if not 0 <= args.seed < 2**64:
            raise UsageError("seed must be a 64-bit unsigned integer")
        if args.jobs < 1:
            raise UsageError("--jobs must be >= 1")
        handler, _, keys = _COMMANDS[args.command]
        tol = _tol_pairs(args.tol, keys)
        rows, cols = handler(args, tol)
        config = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "jobs")}
        config["tol"] = tol
        render = sio.render_json if args.format == "json" else sio.render_csv
        sio.emit(render(rows, cols, config), args.out)
        return EXIT_OK
    except UsageError as exc:
        print(f"statmech: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"statmech: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ConvergenceError as exc:
        print(f"statmech: convergence error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except OSError as exc:
        print(f"statmech: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
