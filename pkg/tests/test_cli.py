import csv
import io
import json
import math

import numpy as np
import pytest

from statmech import cli
from statmech.cli import DEFAULT_SEED, parse_sweep, run
from statmech.coding.exponents import TABLE1_DIRECT, TABLE1_JENSEN

SUBCOMMANDS = ["thermo", "ising", "cw", "rem", "grem", "coding", "rd", "jscc", "dynamics", "sample",
               "estimate", "table1", "phase-diagram"]


def _run(capsys, argv):
    code = run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def _table(text):
    lines = text.splitlines()
    assert lines[0].startswith("# ")
    header = json.loads(lines[0][2:])
    return header, list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def test_parse_sweep():
    assert parse_sweep("0:0.06:0.01") == [0.0, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06]
    assert parse_sweep("0:1:0.3") == [0.0, 0.3, 0.6, 0.9]
    assert parse_sweep("0:1:0.4") == [0.0, 0.4, 0.8]
    assert parse_sweep("0:0.95:0.1")[-1] == 0.9
    assert parse_sweep("0:0.96:0.1")[-1] == 1.0
    assert parse_sweep("0:1.0000000001:0.1")[-1] == 1.0
    assert parse_sweep("1,2.5,3") == [1.0, 2.5, 3.0]
    assert parse_sweep("0.7") == [0.7]
    for bad in ("1:2", "a:b:c", "1:0:0.1", "0:1:0", "x"):
        with pytest.raises(cli.UsageError):
            parse_sweep(bad)


def test_table1_command(capsys):
    code, out, _ = _run(capsys, ["table1", "--p", "0.1", "--beta", "0.5", "--T", "0.001", "--R", "0:0.06:0.01"])
    assert code == 0
    header, rows = _table(out)
    assert header["p"] == 0.1 and header["seed"] == DEFAULT_SEED
    assert list(rows[0]) == ["R", "E1_jensen", "E1_direct", "s_star", "rho_star"]
    assert len(rows) == 7
    for r, a, b in zip(rows, TABLE1_JENSEN, TABLE1_DIRECT):
        assert abs(float(r["E1_jensen"]) - a) <= 5e-4 and abs(float(r["E1_direct"]) - b) <= 5e-4


def test_phase_diagram_rem_field(tmp_path, capsys):
    out = tmp_path / "pd.csv"
    code, stdout, _ = _run(capsys, ["phase-diagram", "--model", "rem-field", "--B", "0:2:0.05", "--out", str(out)])
    assert code == 0 and stdout == ""
    _, rows = _table(out.read_text())
    assert len(rows) == 41
    assert float(rows[0]["T_c"]) == pytest.approx(1 / (2 * math.sqrt(math.log(2))), rel=1e-9)
    tc = [float(r["T_c"]) for r in rows]
    assert all(a < b for a, b in zip(tc, tc[1:]))


def test_sample_command_reproducible(capsys):
    argv = ["sample", "--kernel", "heat-bath", "--model", "ising1d", "--n", "8", "--beta", "0.7",
            "--steps", "1e5", "--seed", "7"]
    code, a, _ = _run(capsys, argv)
    _, b, _ = _run(capsys, argv)
    assert code == 0 and a == b
    _, rows = _table(a)
    assert rows


@pytest.mark.parametrize("argv", [
    ["thermo", "--two-level", "1.0", "--beta", "0.5:2:0.5"],
    ["ising", "--beta", "0.5", "--B", "0,0.1", "--n", "6"],
    ["cw", "--beta", "0.5:1.5:0.5", "--B", "0"],
    ["rem", "--beta", "0.5,3", "--B", "0.2"],
    ["grem", "--R1", "0.2", "--a1", "0.5", "--beta", "0:4:1"],
    ["coding", "--R", "0.2,0.5", "--beta", "1,5"],
    ["rd", "--D", "0.05:0.45:0.1"],
    ["rd", "--capacity", "--p", "0.01,0.1"],
    ["jscc", "--beta", "0.5,3", "--B", "0.3"],
    ["dynamics", "--mm1", "0.3", "0.5", "--n-max", "20", "--check"],
    ["estimate", "fisher", "--gaussian", "2"],
    ["estimate", "temperature", "--gaussian", "0.5", "--alpha", "2"],
    ["phase-diagram", "--model", "decoder", "--R", "0.1,0.4"],
    ["phase-diagram", "--model", "cw", "--beta", "0.5,2", "--B", "0"],
], ids=lambda a: " ".join(a[:2]))
def test_subcommands_byte_identical(capsys, argv):
    code, a, err = _run(capsys, argv)
    assert code == 0, err
    _, b, _ = _run(capsys, argv)
    assert a == b
    code, j, _ = _run(capsys, argv + ["--format", "json"])
    doc = json.loads(j)
    assert code == 0 and set(doc) == {"config", "columns", "rows"} and doc["rows"]


def test_jobs_do_not_change_output(capsys):
    argv = ["phase-diagram", "--model", "jscc", "--B", "0:1:0.25"]
    _, a, _ = _run(capsys, argv)
    _, b, _ = _run(capsys, argv + ["--jobs", "4"])
    assert a == b


def test_seed_env_override(capsys, monkeypatch):
    monkeypatch.setenv("STATMECH_SEED", "99")
    _, out, _ = _run(capsys, ["rem", "--beta", "1", "--mc-n", "10"])
    assert _table(out)[0]["seed"] == 99
    _, out2, _ = _run(capsys, ["rem", "--beta", "1", "--mc-n", "10", "--seed", "5"])
    assert _table(out2)[0]["seed"] == 5
    monkeypatch.setenv("STATMECH_SEED", "abc")
    assert run(["rem"]) == 64


def test_exit_codes(capsys):
    assert run(["nosuch"]) == 64
    assert run(["table1", "--grid-step"]) == 64
    assert run(["sample", "--steps", "1.5"]) == 64
    assert run(["table1", "--tol", "bogus=1"]) == 64
    assert run(["coding", "--p", "0.7"]) == 2
    assert run(["rd", "--D", "0.9"]) == 2
    # a negative ascent tolerance can never be met, so the optimizer hits its cap
    assert run(["estimate", "hmm", "--bsc", "0.1", "0.2", "--tol", "ascent=-1"]) == 3
    assert run(["estimate", "hmm", "--bsc", "0.1", "0.2"]) == 0
    capsys.readouterr()


def test_convergence_exit_code(capsys, monkeypatch):
    from statmech.errors import ConvergenceError

    def boom(args, tol):
        raise ConvergenceError("forced")
    monkeypatch.setitem(cli._COMMANDS, "rem", (boom,) + cli._COMMANDS["rem"][1:])
    assert run(["rem"]) == 3


@pytest.mark.parametrize("name", SUBCOMMANDS)
def test_help_names_topic(capsys, name):
    with pytest.raises(SystemExit) as e:
        run([name, "--help"])
    assert e.value.code == 0
    text = capsys.readouterr().out
    assert len(text.splitlines()) > 3 and "usage:" in text


def test_dynamics_chain_file(tmp_path, capsys):
    path = tmp_path / "chain.json"
    path.write_text(json.dumps({"mode": "continuous", "states": ["a", "b"], "matrix": [[0, 0.7], [0.7, 0]]}))
    code, out, _ = _run(capsys, ["dynamics", "--chain", str(path), "--p0", "1,0", "--horizon", "1",
                                 "--samples", "11"])
    assert code == 0
    _, rows = _table(out)
    assert list(rows[0])[:3] == ["time", "P_1", "P_2"]
    t, p1 = float(rows[-1]["time"]), float(rows[-1]["P_1"])
    assert p1 == pytest.approx(0.5 * (1 + math.exp(-1.4 * t)), abs=1e-8)


def test_estimate_density_file(tmp_path, capsys):
    x = np.linspace(-10, 10, 4001)
    q = np.exp(-x**2 / 2) / math.sqrt(2 * math.pi)
    path = tmp_path / "q.csv"
    path.write_text("x,q\n" + "\n".join(f"{float(a)!r},{float(b)!r}" for a, b in zip(x, q)) + "\n")
    code, out, _ = _run(capsys, ["estimate", "fisher", "--density", str(path)])
    assert code == 0
    _, rows = _table(out)
    assert float(rows[0]["fisher_information"]) == pytest.approx(1.0, abs=1e-4)


def test_missing_file_is_domain_error(capsys):
    assert run(["dynamics", "--chain", "/nonexistent/chain.json"]) == 2
