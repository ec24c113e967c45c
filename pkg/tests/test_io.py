import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp

from hede import io
from hede.simulation import SimConfig


@given(hnp.arrays(float, st.tuples(st.integers(1, 6), st.integers(1, 6)),
                  elements=st.floats(allow_nan=False, allow_infinity=False)))
def test_matrix_round_trip_is_exact(tmp_path_factory, X):
    path = tmp_path_factory.mktemp("m") / "X.csv"
    io.write_matrix(path, X)
    back = io.read_matrix(path)
    assert back.shape == X.shape
    assert np.array_equal(back, X)


def test_vector_round_trip(tmp_path):
    v = np.random.default_rng(0).standard_normal(50) * 1e-7
    io.write_vector(tmp_path / "y.csv", v)
    assert np.array_equal(io.read_vector(tmp_path / "y.csv"), v)


def test_missing_cells_read_as_nan(tmp_path):
    f = tmp_path / "X.csv"
    f.write_text("1,,2\nNA,0,1\n")
    X = io.read_matrix(f)
    assert np.isnan(X[0, 1]) and np.isnan(X[1, 0]) and X[1, 2] == 1


def test_malformed_files_name_their_path(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("1,2\n3\n")
    with pytest.raises(ValueError, match="bad.csv"):
        io.read_matrix(f)
    f.write_text("1\nabc\n")
    with pytest.raises(ValueError, match="bad.csv:2"):
        io.read_vector(f)
    f.write_text("")
    with pytest.raises(ValueError):
        io.read_vector(f)


def test_config_parsing(tmp_path):
    f = tmp_path / "sim.cfg"
    f.write_text("# comment\nn = 40\np=30  # trailing\nkappa = 0.5\nresample_empty = yes\n")
    raw = io.read_config(f)
    assert raw == {"n": "40", "p": "30", "kappa": "0.5", "resample_empty": "yes"}
    cfg = io.config_to_dataclass(SimConfig, raw, seed=9)
    assert (cfg.n, cfg.p, cfg.kappa, cfg.seed, cfg.resample_empty) == (40, 30, 0.5, 9, True)
    with pytest.raises(ValueError):
        io.config_to_dataclass(SimConfig, {"bogus": "1"})


def test_json_is_deterministic():
    doc = {"b": 1.0, "a": [0.1, 0.2]}
    assert io.dump_json(doc) == io.dump_json(dict(doc))
    assert io.dump_json(doc).index('"b"') < io.dump_json(doc).index('"a"')
    with pytest.raises(ValueError):
        io.dump_json({"x": float("nan")})
