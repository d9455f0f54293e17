import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from helins.errors import ConfigError, SnapshotError
from helins.initial_data import random_solenoidal
from helins.io import (
    SNAPSHOT_MAGIC,
    config_hash,
    parse_config,
    read_snapshot,
    serialize_config,
    snapshot_info,
    write_csv,
    write_snapshot,
)
from helins.solver import SimState
from helins.spectral import Grid

MINIMAL = "grid: {n: 16}\ndata: {kind: abc}\n"


def test_defaults_are_materialized():
    doc = parse_config(MINIMAL)
    assert doc.grid["box_length"] == pytest.approx(2 * math.pi)
    assert doc.physics["nu"] == 1.0
    assert doc.time == {"dt": 1e-3, "t_end": 1.0, "record_every": 1, "cfl": 0.5}
    assert doc.data == {"kind": "abc", "A": 1.0, "B": 1.0, "C": 1.0, "periods": 1}
    assert doc.experiment["kind"] == "none"
    assert doc.output["snapshot_every"] == 0


@pytest.mark.parametrize("text, value", [("2*pi", 2 * math.pi), ("pi*8", 8 * math.pi), ("pi", math.pi), ("12.5", 12.5)])
def test_pi_expressions(text, value):
    doc = parse_config(f"grid: {{n: 16, box_length: '{text}'}}\ndata: {{kind: abc}}\n")
    assert doc.grid["box_length"] == pytest.approx(value, rel=1e-15)


def test_round_trip_is_identity():
    text = """
grid: {n: 32, box_length: 2*pi*8}
physics: {nu: 0.5}
time: {dt: 2.0e-3, t_end: 2.0, record_every: 50}
data:
  kind: curlcurl
  M: 6.2831853
  inner: {kind: shell, k0: 1.0, delta: 0.005, seed: 3}
experiment: {kind: perturbation, M: 6.2831853}
checks:
  names: [perturbation, leray_hopf]
  tolerances: {perturbation: 4.0}
"""
    doc = parse_config(text)
    again = parse_config(serialize_config(doc))
    assert again == doc
    assert config_hash(again) == config_hash(doc)
    assert again.data["inner"]["amplitude"] == 1.0


@given(
    n=st.sampled_from([8, 16, 32]),
    nu=st.floats(1e-4, 10, allow_nan=False),
    dt=st.floats(1e-5, 1e-1),
    seed=st.integers(0, 2**31 - 1),
    frac=st.floats(0, 1),
)
def test_round_trip_property(n, nu, dt, seed, frac):
    text = (
        f"grid: {{n: {n}}}\nphysics: {{nu: {nu!r}}}\ntime: {{dt: {dt!r}}}\n"
        f"data: {{kind: random, seed: {seed}, plus_fraction: {frac!r}}}\n"
    )
    doc = parse_config(text)
    assert parse_config(serialize_config(doc)) == doc
    assert doc.physics["nu"] == nu and doc.data["seed"] == seed


@pytest.mark.parametrize(
    "text, line, field",
    [
        ("grid: {n: 16}\ntime:\n  dt: fast\ndata: {kind: abc}\n", 3, "time.dt"),
        ("grid: {n: 16}\ndata: {kind: abc, D: 1}\n", 2, "data.D"),
        ("grid: {n: 16.5}\ndata: {kind: abc}\n", 1, "grid.n"),
        ("grid: {box_length: 1}\ndata: {kind: abc}\n", 1, "grid.n"),
        ("grid: {n: 16}\n", None, "data"),
        ("grid: {n: 16}\ndata: {kind: vortex}\n", 2, "data.kind"),
        ("grid: {n: 16}\ndata: {kind: shell}\n", 2, "data.k0"),
        ("grid: {n: 16}\ndata: {kind: abc}\nchecks: {names: [abc, bogus]}\n", 3, "checks.names.0"),
        ("grid: {n: 16}\ndata: {kind: abc}\nexperiment: {kind: perturbation}\n", 3, "experiment.M"),
        ("grid: {n: 16}\ndata: {kind: abc}\nsolver: {}\n", 3, "solver"),
    ],
)
def test_parse_errors_name_line_and_field(text, line, field):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.field == field
    assert info.value.line == line
    assert f"field '{field}'" in str(info.value)


def test_malformed_yaml_reports_line():
    with pytest.raises(ConfigError, match="malformed") as info:
        parse_config("grid: {n: 16\ndata: [\n")
    assert info.value.line is not None


def test_csv_uses_17_significant_digits(tmp_path):
    p = tmp_path / "x.csv"
    write_csv(p, ("a", "b"), [(1 / 3, 2.0), (math.pi, 1e-300)])
    lines = p.read_text().splitlines()
    assert lines[0] == "a,b"
    assert lines[1] == "0.33333333333333331,2"
    assert float(lines[2].split(",")[0]) == math.pi


@pytest.fixture
def state():
    g = Grid(8)
    return SimState(t=0.25, u=random_solenoidal(g, seed=1), diss_total=0.1, diss_half_plus=0.07, diss_half_minus=0.03)


def test_snapshot_round_trip_is_exact(tmp_path, state):
    p = tmp_path / "s.hnsf"
    write_snapshot(state, p)
    back = read_snapshot(p, grid=state.u.grid)
    assert np.array_equal(back.u.coeffs, state.u.coeffs)
    assert (back.t, back.diss_total, back.diss_half_plus, back.diss_half_minus) == (0.25, 0.1, 0.07, 0.03)
    raw = p.read_bytes()
    assert raw[:5] == SNAPSHOT_MAGIC
    assert len(raw) == 5 + 4 + 8 + 3 * 8 * 8 * 5 * 16 + 32
    info = snapshot_info(p)
    assert info["n"] == 8 and info["t"] == 0.25


def test_snapshot_lattice_order_is_documented(tmp_path, state):
    p = tmp_path / "s.hnsf"
    write_snapshot(state, p)
    raw = np.frombuffer(p.read_bytes()[17:-32], dtype="<f8")
    c = state.u.coeffs
    # (re, im) pairs, C order over (component, ix, iy, iz)
    assert raw[0] == c[0, 0, 0, 0].real and raw[1] == c[0, 0, 0, 0].imag
    assert raw[2] == c[0, 0, 0, 1].real
    assert raw[2 * 5] == c[0, 0, 1, 0].real


def test_snapshot_truncation(tmp_path, state):
    p = tmp_path / "s.hnsf"
    write_snapshot(state, p)
    data = p.read_bytes()
    p.write_bytes(data[:-10])
    with pytest.raises(SnapshotError, match=f"expected {len(data)} bytes.*got {len(data) - 10}"):
        read_snapshot(p)


@pytest.mark.parametrize("magic, match", [(b"HNSF2", "version"), (b"XXXXX", "not a snapshot")])
def test_snapshot_magic(tmp_path, state, magic, match):
    p = tmp_path / "s.hnsf"
    write_snapshot(state, p)
    p.write_bytes(magic + p.read_bytes()[5:])
    with pytest.raises(SnapshotError, match=match):
        read_snapshot(p)


def test_snapshot_grid_mismatch(tmp_path, state):
    p = tmp_path / "s.hnsf"
    write_snapshot(state, p)
    with pytest.raises(SnapshotError, match="grid mismatch"):
        read_snapshot(p, grid=Grid(16))
