"""Configuration documents, CSV/JSON sinks and binary field snapshots.

Configuration is YAML. Every field except ``grid.n`` and ``data.kind`` has a
default, and :func:`parse_config` materializes all of them so that
``parse_config(serialize_config(doc))`` reproduces ``doc``. Units: lengths
in box units (``box_length`` defaults to 2*pi), times in the same units as
``1/nu``; numbers may be written as ``pi``, ``2*pi`` or ``pi*8``.

Snapshot layout (all little-endian)::

    5 bytes   magic b"HNSF1"
    uint32    n
    float64   box_length
    float64   coefficient pairs (re, im), C order over
              (component, ix, iy, iz) with iz in 0..n/2 (half spectrum)
    float64   diss_total, diss_half_plus, diss_half_minus, t
"""
import csv
import copy
import hashlib
import json
import math
import re
import struct
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import __version__
from .errors import ConfigError, SnapshotError, ValidationError
from .experiment import DATA_KINDS, DataSpec
from .initial_data import DataG
from .solver import Perturbation, RunConfig, SimState
from .spectral import Grid, SpectralVectorField
from .verify import CHECK_NAMES

__all__ = [
    "ConfigDocument",
    "parse_config",
    "load_config",
    "serialize_config",
    "config_hash",
    "write_csv",
    "CsvSink",
    "write_report",
    "write_snapshot",
    "read_snapshot",
    "snapshot_info",
    "SNAPSHOT_MAGIC",
]

TWO_PI = 2 * math.pi

# section -> field -> default; REQUIRED marks fields without a default
REQUIRED = object()
SCHEMA = {
    "grid": {"n": REQUIRED, "box_length": TWO_PI},
    "physics": {"nu": 1.0},
    "time": {"dt": 1e-3, "t_end": 1.0, "record_every": 1, "cfl": 0.5},
    "experiment": {"kind": "none", "M": None, "h0_h1": None},
    "checks": {"names": [], "tolerances": {}},
    "quadrature": {
        "delta": 0.1,
        "amplitude": 1.0,
        "polar_margin": math.pi / 8,
        "n_radial": 64,
        "n_polar": 128,
        "n_azimuth": 128,
    },
    "decay": {
        "r_max": 50.0,
        "samples": 41,
        "rays": [[1.0, 0.0, 0.0], [1.0, 1.0, 1.0], [0.3, -0.5, 0.8]],
        "heat_nu": 1.0,
        "heat_t": 2.0,
    },
    "output": {"directory": "out", "snapshot_every": 0, "restart": None},
}

DATA_PARAMS = {
    "abc": {"A": 1.0, "B": 1.0, "C": 1.0, "periods": 1},
    "shell": {"k0": REQUIRED, "delta": 0.1, "sign": 1, "seed": 0, "amplitude": 1.0},
    "random": {"seed": 0, "k_peak": 3.0, "amplitude": 1.0, "plus_fraction": 0.5},
    "curlcurl": {"inner": REQUIRED, "M": None, "h0_h1": None},
    "zero": {},
}

INT_FIELDS = {"n", "record_every", "periods", "sign", "seed", "n_radial", "n_polar", "n_azimuth", "samples", "snapshot_every"}
STR_FIELDS = {"kind", "directory", "restart"}
LIST_FIELDS = {"rays"}  # validated separately

_PI_EXPR = re.compile(r"^\s*(?:([-+]?[0-9.]+(?:[eE][-+]?\d+)?)\s*\*\s*)?pi(?:\s*\*\s*([-+]?[0-9.]+(?:[eE][-+]?\d+)?))?\s*$")


# -- parsing ----------------------------------------------------------------

def _line_index(node, path=(), out=None):
    """Map dotted field paths to 1-based source lines from a composed YAML node."""
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            p = path + (str(k.value),)
            out[".".join(p)] = k.start_mark.line + 1
            _line_index(v, p, out)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            p = path + (str(i),)
            out[".".join(p)] = v.start_mark.line + 1
            _line_index(v, p, out)
    return out


class _Ctx:
    def __init__(self, lines):
        self.lines = lines

    def fail(self, path, msg):
        line = None
        parts = path.split(".")
        while parts and line is None:
            line = self.lines.get(".".join(parts))
            parts.pop()
        raise ConfigError(msg, line=line, field=path)

    def number(self, path, v, allow_none=False):
        if v is None and allow_none:
            return None
        if isinstance(v, bool):
            self.fail(path, f"expected a number, got {v!r}")
        if isinstance(v, (int, float)):
            return float(v)
        if isinstance(v, str):
            m = _PI_EXPR.match(v)
            if m:
                a = float(m.group(1)) if m.group(1) else 1.0
                b = float(m.group(2)) if m.group(2) else 1.0
                return a * math.pi * b
            try:
                return float(v)
            except ValueError:
                pass
        self.fail(path, f"expected a number, got {v!r}")

    def integer(self, path, v):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v:
            self.fail(path, f"expected an integer, got {v!r}")
        return int(v)

    def string(self, path, v, allow_none=False):
        if v is None and allow_none:
            return None
        if not isinstance(v, str):
            self.fail(path, f"expected a string, got {v!r}")
        return v

    def mapping(self, path, v):
        if v is None:
            return {}
        if not isinstance(v, dict):
            self.fail(path, f"expected a mapping, got {type(v).__name__}")
        return v

    def coerce(self, path, name, v, default):
        if name in LIST_FIELDS:
            return v
        if name in INT_FIELDS:
            return self.integer(path, v)
        if name in STR_FIELDS:
            return self.string(path, v, allow_none=default is None)
        return self.number(path, v, allow_none=default is None)

    def fill(self, path, raw, schema):
        raw = self.mapping(path, raw)
        for key in raw:
            if key not in schema:
                self.fail(f"{path}.{key}", f"unknown field; expected one of {sorted(schema)}")
        out = {}
        for name, default in schema.items():
            p = f"{path}.{name}"
            if name not in raw:
                if default is REQUIRED:
                    self.fail(p, "required field is missing")
                out[name] = copy.deepcopy(default)
            elif raw[name] is None and default is None:
                out[name] = None
            else:
                out[name] = self.coerce(p, name, raw[name], default)
        return out

    def data(self, path, raw):
        raw = dict(self.mapping(path, raw))
        if "kind" not in raw:
            self.fail(f"{path}.kind", "required field is missing")
        kind = self.string(f"{path}.kind", raw.pop("kind"))
        if kind not in DATA_KINDS:
            self.fail(f"{path}.kind", f"unknown data kind '{kind}'; expected one of {list(DATA_KINDS)}")
        schema = DATA_PARAMS[kind]
        if kind == "curlcurl":
            inner_raw = raw.pop("inner", REQUIRED)
            if inner_raw is REQUIRED:
                self.fail(f"{path}.inner", "required field is missing")
            inner = self.data(f"{path}.inner", inner_raw)
            if inner["kind"] == "curlcurl":
                self.fail(f"{path}.inner.kind", "curlcurl data cannot be nested")
            rest = self.fill(path, raw, {k: v for k, v in schema.items() if k != "inner"})
            return {"kind": kind, "inner": inner, **rest}
        return {"kind": kind, **self.fill(path, raw, schema)}


@dataclass
class ConfigDocument:
    """A fully materialized run description (plain nested dicts)."""

    grid: dict
    physics: dict
    time: dict
    data: dict
    experiment: dict
    checks: dict
    quadrature: dict
    decay: dict
    output: dict
    source: str = field(default=None, compare=False, repr=False)

    SECTIONS = ("grid", "physics", "time", "data", "experiment", "checks", "quadrature", "decay", "output")

    def to_dict(self):
        return {s: copy.deepcopy(getattr(self, s)) for s in self.SECTIONS}

    # -- builders for the numerical objects --

    def make_grid(self):
        try:
            return Grid(self.grid["n"], self.grid["box_length"])
        except ValueError as exc:
            raise ValidationError(str(exc)) from exc

    def data_spec(self):
        return _data_spec(self.data)

    def perturbation(self):
        if self.experiment["kind"] == "none":
            return None
        return Perturbation(self.experiment["M"], self.experiment["h0_h1"])

    def run_config(self):
        t = self.time
        return RunConfig(
            grid=self.make_grid(),
            nu=self.physics["nu"],
            dt=t["dt"],
            t_end=t["t_end"],
            record_every=t["record_every"],
            data=self.data_spec(),
            experiment=self.perturbation(),
            cfl=t["cfl"],
        )

    def data_g(self):
        try:
            return DataG(**self.quadrature)
        except ValueError as exc:
            raise ValidationError(f"quadrature: {exc}") from exc

    def tolerance(self, name, default):
        return self.checks["tolerances"].get(name, default)


def _data_spec(d):
    params = {k: v for k, v in d.items() if k != "kind"}
    if d["kind"] == "curlcurl":
        params["inner"] = _data_spec(d["inner"])
    return DataSpec(d["kind"], params)


def parse_config(text):
    """Parse YAML text into a :class:`ConfigDocument`, materializing defaults.

    Raises
    ------
    ConfigError
        On malformed YAML, unknown or mistyped fields, missing required
        fields, or an unknown check name; the message names the line and
        field.
    """
    try:
        node = yaml.compose(text)
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"malformed YAML: {getattr(exc, 'problem', exc)}", line=mark.line + 1 if mark else None) from exc
    ctx = _Ctx(_line_index(node) if node is not None else {})
    raw = ctx.mapping("<root>", raw)
    known = set(ConfigDocument.SECTIONS)
    for key in raw:
        if key not in known:
            ctx.fail(key, f"unknown section; expected one of {sorted(known)}")
    if "data" not in raw:
        ctx.fail("data", "required section is missing")
    sections = {}
    for name, schema in SCHEMA.items():
        if name == "checks":
            continue
        sections[name] = ctx.fill(name, raw.get(name), schema)
    sections["data"] = ctx.data("data", raw["data"])
    sections["checks"] = _checks(ctx, raw.get("checks"))
    sections["decay"]["rays"] = _rays(ctx, sections["decay"]["rays"])
    kind = sections["experiment"]["kind"]
    if kind not in ("none", "perturbation"):
        ctx.fail("experiment.kind", f"unknown experiment '{kind}'; expected 'none' or 'perturbation'")
    if kind == "perturbation" and sections["experiment"]["M"] is None:
        ctx.fail("experiment.M", "perturbation experiment needs a cut-off radius M")
    return ConfigDocument(**sections, source=text)


def _checks(ctx, raw):
    raw = ctx.mapping("checks", raw)
    for key in raw:
        if key not in SCHEMA["checks"]:
            ctx.fail(f"checks.{key}", "unknown field; expected 'names' or 'tolerances'")
    names = raw.get("names", [])
    if not isinstance(names, list):
        ctx.fail("checks.names", "expected a list of check names")
    out_names = []
    for i, n in enumerate(names):
        if n not in CHECK_NAMES:
            ctx.fail(f"checks.names.{i}", f"unknown check name '{n}'; expected one of {list(CHECK_NAMES)}")
        out_names.append(n)
    tols = ctx.mapping("checks.tolerances", raw.get("tolerances"))
    out_tols = {}
    for k, v in tols.items():
        if k not in CHECK_NAMES:
            ctx.fail(f"checks.tolerances.{k}", f"unknown check name '{k}'")
        out_tols[k] = ctx.number(f"checks.tolerances.{k}", v)
    return {"names": out_names, "tolerances": out_tols}


def _rays(ctx, rays):
    if not isinstance(rays, list) or not rays:
        ctx.fail("decay.rays", "expected a nonempty list of 3-vectors")
    out = []
    for i, r in enumerate(rays):
        p = f"decay.rays.{i}"
        if not isinstance(r, list) or len(r) != 3:
            ctx.fail(p, "expected a 3-vector")
        v = [ctx.number(f"{p}.{j}", c) for j, c in enumerate(r)]
        if not any(v):
            ctx.fail(p, "ray direction must be nonzero")
        out.append(v)
    return out


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def serialize_config(doc):
    """YAML text with every field present; floats written in round-trip form."""
    return yaml.safe_dump(doc.to_dict(), sort_keys=False, default_flow_style=None)


def config_hash(doc):
    canon = json.dumps(doc.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


# -- tabular and report sinks -----------------------------------------------

def _fmt(v):
    return format(float(v), ".17g")


class CsvSink:
    """Streaming CSV writer with fixed 17-significant-digit formatting."""

    def __init__(self, path, columns):
        self.columns = tuple(columns)
        self._fh = open(path, "w", newline="", encoding="utf-8")
        self._w = csv.writer(self._fh, lineterminator="\n")
        self._w.writerow(self.columns)

    def write(self, values):
        self._w.writerow([_fmt(v) for v in values])

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_csv(path, columns, rows):
    with CsvSink(path, columns) as sink:
        for r in rows:
            sink.write(r)


def write_report(path, results, meta):
    """JSON verdict report; ``all_pass`` is the conjunction of the check verdicts."""
    records = [r.as_record() for r in results]
    doc = {
        "all_pass": all(r["pass"] for r in records),
        "checks": records,
        "meta": {"code_version": __version__, **meta},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, allow_nan=True)
        fh.write("\n")
    return doc


# -- snapshots ----------------------------------------------------------------

SNAPSHOT_MAGIC = b"HNSF1"
_HEAD = struct.Struct("<5sId")
_TAIL = struct.Struct("<4d")


def _expected_size(n):
    return _HEAD.size + 3 * n * n * (n // 2 + 1) * 16 + _TAIL.size


def write_snapshot(state, path):
    g = state.u.grid
    body = np.ascontiguousarray(state.u.coeffs, dtype="<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(_HEAD.pack(SNAPSHOT_MAGIC, g.n, g.box_length))
        fh.write(body)
        fh.write(_TAIL.pack(state.diss_total, state.diss_half_plus, state.diss_half_minus, state.t))


def _read_header(buf, path):
    if len(buf) < _HEAD.size:
        raise SnapshotError(f"{path}: truncated snapshot: expected at least {_HEAD.size} bytes, got {len(buf)}")
    magic, n, L = _HEAD.unpack_from(buf)
    if magic != SNAPSHOT_MAGIC:
        if magic[:4] == SNAPSHOT_MAGIC[:4]:
            raise SnapshotError(f"{path}: unsupported snapshot version {magic[4:]!r}; this reader handles {SNAPSHOT_MAGIC[4:]!r}")
        raise SnapshotError(f"{path}: not a snapshot (magic {magic!r}, expected {SNAPSHOT_MAGIC!r})")
    expected = _expected_size(n)
    if len(buf) != expected:
        kind = "truncated" if len(buf) < expected else "oversized"
        raise SnapshotError(f"{path}: {kind} snapshot: expected {expected} bytes for n={n}, got {len(buf)}")
    return n, L


def read_snapshot(path, grid=None):
    """Load a :class:`SimState`; with ``grid`` given, refuse a mismatched lattice."""
    with open(path, "rb") as fh:
        buf = fh.read()
    n, L = _read_header(buf, path)
    snap_grid = Grid(n, L)
    if grid is not None and grid != snap_grid:
        raise SnapshotError(
            f"{path}: grid mismatch: snapshot has n={n}, box_length={L!r}; "
            f"configuration has n={grid.n}, box_length={grid.box_length!r}"
        )
    count = 3 * n * n * (n // 2 + 1)
    coeffs = np.frombuffer(buf, dtype="<c16", count=count, offset=_HEAD.size).reshape((3,) + snap_grid.spectral_shape)
    dt_, dp, dm, t = _TAIL.unpack_from(buf, _HEAD.size + count * 16)
    u = SpectralVectorField(snap_grid, coeffs.astype(np.complex128))
    return SimState(t=t, u=u, diss_total=dt_, diss_half_plus=dp, diss_half_minus=dm)


def snapshot_info(path):
    with open(path, "rb") as fh:
        buf = fh.read()
    n, L = _read_header(buf, path)
    state = read_snapshot(path)
    return {
        "path": str(path),
        "n": n,
        "box_length": L,
        "t": state.t,
        "diss_total": state.diss_total,
        "diss_half_plus": state.diss_half_plus,
        "diss_half_minus": state.diss_half_minus,
        "bytes": len(buf),
    }
