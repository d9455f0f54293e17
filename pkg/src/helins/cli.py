"""Command-line entry point: ``helins run|verify|decay|snapshot-info``.

Exit codes: 0 success, 1 a selected check failed, 2 configuration parse
error (including unknown check names), 3 validation error, 4 blow-up guard.
``HELINS_OUTPUT_ROOT`` relocates relative output directories.
"""
import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import __version__
from .diagnostics import CSV_COLUMNS, PERTURBATION_COLUMNS
from .errors import (
    BlowUpError,
    ConfigError,
    CutoffWrapError,
    EmptyShellError,
    FieldError,
    InsufficientSamplesError,
    NotBeltramiError,
    SnapshotError,
    ValidationError,
)
from .experiment import build_initial
from .io import (
    CsvSink,
    config_hash,
    load_config,
    read_snapshot,
    serialize_config,
    snapshot_info,
    write_csv,
    write_report,
    write_snapshot,
)
from .solver import run
from . import verify as V

log = logging.getLogger("helins")

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_VALIDATION, EXIT_BLOWUP = 0, 1, 2, 3, 4
OUTPUT_ROOT_ENV = "HELINS_OUTPUT_ROOT"

VALIDATION_ERRORS = (
    ValidationError,
    CutoffWrapError,
    FieldError,
    EmptyShellError,
    NotBeltramiError,
    SnapshotError,
    InsufficientSamplesError,
)

FIELD_CHECKS = {"prop1", "prop2", "helicity_split"}
SERIES_CHECKS = {"theorem1", "helicity_ode", "leray_hopf", "helicity_bound", "beltrami", "perturbation"}
QUADRATURE_CHECKS = {"decay", "heat_decay", "sup_bound"}


def output_dir(doc):
    d = Path(doc.output["directory"])
    root = os.environ.get(OUTPUT_ROOT_ENV)
    if root and not d.is_absolute():
        d = Path(root) / d
    d.mkdir(parents=True, exist_ok=True)
    return d


def _simulate(doc, out, keep_states=False):
    """Run the configured simulation, streaming diagnostics.csv and snapshots into ``out``."""
    cfg = doc.run_config()
    every = doc.output["snapshot_every"]
    if every < 0 or (every and every % cfg.record_every):
        raise ValidationError(
            f"output.snapshot_every = {every} must be 0 or a multiple of time.record_every = {cfg.record_every}"
        )
    state = None
    if doc.output["restart"]:
        state = read_snapshot(doc.output["restart"], grid=cfg.grid)
    with_pert = cfg.experiment is not None
    columns = CSV_COLUMNS + (PERTURBATION_COLUMNS if with_pert else ())
    (out / "config.resolved.yaml").write_text(serialize_config(doc), encoding="utf-8")

    with CsvSink(out / "diagnostics.csv", columns) as sink:

        def on_record(s, row):
            sink.write(row.csv_values(with_pert))
            if every and s.steps % every == 0:
                write_snapshot(s, out / f"snapshot_{s.steps:08d}.hnsf")

        return cfg, run(cfg, state=state, keep_states=keep_states, on_record=on_record)


def cmd_run(args):
    doc = load_config(args.config)
    out = output_dir(doc)
    t0 = time.perf_counter()
    _, result = _simulate(doc, out)
    log.info("run complete: %d rows in %.2fs -> %s", len(result.rows), time.perf_counter() - t0, out)
    return EXIT_OK


def _decay_results(doc, out, names):
    g = doc.data_g()
    d = doc.decay
    results = []
    prof = None
    if "decay" in names or "heat_decay" in names:
        prof = V.decay_profile(g, d["rays"], d["r_max"], d["samples"])
        write_csv(out / "decay.csv", V.DECAY_CSV_COLUMNS, V.decay_csv_rows(prof))
    if "decay" in names:
        results.append(V.check_decay(g, d["rays"], d["r_max"], d["samples"], doc.tolerance("decay", 1.5), prof=prof))
    if "heat_decay" in names:
        results.append(V.check_heat_decay(g, d["heat_nu"], d["heat_t"], d["rays"], d["r_max"], d["samples"], prof0=prof))
    if "sup_bound" in names:
        results.append(V.check_sup_bound(g, rtol=doc.tolerance("sup_bound", 1e-3)))
    return results


def cmd_verify(args):
    doc = load_config(args.config)
    names = list(doc.checks["names"])
    if not names:
        raise ConfigError("verify needs at least one entry in checks.names", field="checks.names")
    out = output_dir(doc)
    t0 = time.perf_counter()
    tol = {n: doc.tolerance(n, V.CHECK_TOLERANCES[n]) for n in names}
    cfg = doc.run_config()
    results = []

    if FIELD_CHECKS & set(names):
        u0, _ = build_initial(cfg)
        if "prop1" in names:
            results.append(V.check_prop1(u0, tol["prop1"]))
        if "prop2" in names:
            results.append(V.check_orthogonality(u0, cfg.nu, tol=tol["prop2"]))
        if "helicity_split" in names:
            results.append(V.check_helicity_split(u0, tol["helicity_split"]))

    if SERIES_CHECKS & set(names):
        cfg, res = _simulate(doc, out, keep_states="beltrami" in names)
        rows = res.rows
        for n in names:
            if n == "theorem1":
                results.append(V.check_theorem1(rows, tol[n]))
            elif n == "helicity_ode":
                results.append(V.check_helicity_ode(rows, cfg.nu, tol[n]))
            elif n == "leray_hopf":
                results.append(V.check_leray_hopf(rows, tol[n]))
            elif n == "helicity_bound":
                results.append(V.check_helicity_bound(rows))
            elif n == "beltrami":
                if doc.data["kind"] != "abc" or cfg.experiment is not None:
                    raise ValidationError("check 'beltrami' needs plain abc data")
                results.append(V.check_beltrami_decay(res.states, res.states[0].u, cfg.nu, tol[n]))
            elif n == "perturbation":
                if cfg.experiment is None:
                    raise ValidationError("check 'perturbation' needs experiment.kind = perturbation")
                results.append(V.perturbation_report(rows, cfg.experiment.M, envelope=tol[n]))

    if "scaling" in names:
        u0, _ = build_initial(cfg)
        results.append(V.check_scaling(cfg, u0, tol=tol["scaling"]))

    results += _decay_results(doc, out, [n for n in names if n in QUADRATURE_CHECKS])
    order = {n: i for i, n in enumerate(names)}
    results.sort(key=lambda r: order.get(r.name, len(order)))
    for r in results:
        print(r.line())
        for w in r.warnings:
            print(f"  warning: {w}")
    report = write_report(out / "report.json", results, _meta(doc, t0))
    return EXIT_OK if report["all_pass"] else EXIT_FAIL


def _meta(doc, t0):
    seeds = {}
    for path, d in (("data", doc.data), ("data.inner", doc.data.get("inner") or {})):
        if "seed" in d:
            seeds[path] = d["seed"]
    return {"config_hash": config_hash(doc), "wall_time_s": time.perf_counter() - t0, "seeds": seeds}


def cmd_decay(args):
    doc = load_config(args.config)
    out = output_dir(doc)
    t0 = time.perf_counter()
    names = [n for n in doc.checks["names"] if n in QUADRATURE_CHECKS] or ["decay"]
    results = _decay_results(doc, out, names)
    for r in results:
        print(r.line())
        for w in r.warnings:
            print(f"  warning: {w}")
    report = write_report(out / "report.json", results, _meta(doc, t0))
    return EXIT_OK if report["all_pass"] else EXIT_FAIL


def cmd_snapshot_info(args):
    print(json.dumps(snapshot_info(args.file), indent=2))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="helins", description="Helical-split Navier-Stokes verification toolkit")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn, helptext in (
        ("run", cmd_run, "integrate a configured run and write diagnostics.csv"),
        ("verify", cmd_verify, "run the configured checks and write report.json"),
        ("decay", cmd_decay, "sweep the quadrature profile along rays and write decay.csv"),
    ):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("config", help="YAML configuration file")
        s.set_defaults(func=fn)
    s = sub.add_parser("snapshot-info", help="print the header of a snapshot file")
    s.add_argument("file")
    s.set_defaults(func=cmd_snapshot_info)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except VALIDATION_ERRORS as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
