import json
import math

import numpy as np
import pytest

from statmech import io as sio
from statmech.dynamics import ChainSpec
from statmech.ensembles import DiscreteSystem
from statmech.errors import DomainError
from statmech.estimation import GriddedDensity, HmmSpec


def test_fmt():
    assert sio.fmt(0.1 + 0.2) == "0.3"
    assert sio.fmt(-0.0) == "0"
    assert sio.fmt(math.inf) == "inf" and sio.fmt(-math.inf) == "-inf" and sio.fmt(math.nan) == "nan"
    assert sio.fmt(True) == "true" and sio.fmt(np.int64(3)) == "3" and sio.fmt(None) == ""
    assert sio.fmt(1.23456789012345e-20) == "1.23456789e-20"


def test_render_csv_and_json():
    rows = [{"a": 1.0, "b": "x"}, {"a": math.inf, "b": None}]
    text = sio.render_csv(rows, ["a", "b"], {"z": 1, "y": np.float64(0.5)})
    lines = text.splitlines()
    assert lines[0] == '# {"y": 0.5, "z": 1}'
    assert lines[1:] == ["a,b", "1,x", "inf,"]
    doc = json.loads(sio.render_json(rows, ["a", "b"], {"k": [1, 2]}))
    assert doc["rows"][1]["a"] == "inf" and doc["config"] == {"k": [1, 2]}


def test_density_roundtrip(tmp_path):
    d = GriddedDensity.gaussian(1.0, n=2001)
    p = tmp_path / "d.csv"
    sio.write_density_csv(d, str(p))
    back = sio.read_density_csv(str(p))
    assert np.allclose(back.values, d.values, rtol=1e-9, atol=1e-300)


def test_density_malformed(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("x,q\n1,abc\n")
    with pytest.raises(DomainError):
        sio.read_density_csv(str(p))


def test_loaders(tmp_path):
    s = tmp_path / "s.json"
    s.write_text(DiscreteSystem([0.0, 1.0], [1, 3], "toy").to_json())
    assert sio.load_system(str(s)).degeneracies.tolist() == [1, 3]
    c = tmp_path / "c.json"
    c.write_text(ChainSpec("discrete", [[0.9, 0.1], [0.2, 0.8]]).to_json())
    assert sio.load_chain(str(c)).mode == "discrete"
    h = tmp_path / "h.json"
    h.write_text(HmmSpec.binary_symmetric(0.1, 0.2).to_json())
    assert sio.load_hmm(str(h)).kx == 2


def test_trajectory_rows():
    rows, cols = sio.trajectory_rows([0.0, 1.0], np.array([[1.0, 0.0], [0.5, 0.5]]))
    assert cols == ["time", "P_1", "P_2"] and rows[1]["P_2"] == 0.5
