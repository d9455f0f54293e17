"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as they
are produced; they are also repeated in the terminal summary, and
``python tests/test_acceptance.py`` runs the gate without pytest.
"""
import math
import time

import numpy as np
import pytest

from helins import verify as V
from helins.experiment import DataSpec
from helins.initial_data import DataG, ShellSpec, compute_A, make_shell_helical, random_solenoidal
from helins.solver import Perturbation, RunConfig, run
from helins.spectral import (
    Grid,
    curl,
    helical_split,
    helicity,
    inner,
    l2_norm,
    laplacian,
    sobolev_seminorm_sq,
)

pytestmark = pytest.mark.slow

REPORT = []
N_FIELDS = 20


def report(criterion, passed, text):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion:>2}: {text}"
    REPORT.append(line)
    print(line, flush=True)
    return passed


@pytest.fixture(scope="module")
def fields():
    g = Grid(32)
    fracs = np.linspace(0.05, 0.95, N_FIELDS)
    return [
        random_solenoidal(g, seed=100 + i, k_peak=4.0, amplitude=1.0 + i, plus_fraction=float(f))
        for i, f in enumerate(fracs)
    ]


# shared runs -------------------------------------------------------------

@pytest.fixture(scope="module")
def mixed_runs():
    """Mixed-helicity random data, n=32, nu=0.05, T=1 at dt and dt/2."""
    g = Grid(32)
    u0 = random_solenoidal(g, seed=2024, amplitude=20.0, plus_fraction=0.7)
    out = {}
    for dt, every in ((1e-3, 5), (5e-4, 10)):
        t0 = time.perf_counter()
        out[dt] = run(RunConfig(g, 0.05, dt, 1.0, every), u0=u0)
        out[dt].wall = time.perf_counter() - t0
    return out


@pytest.fixture(scope="module")
def abc_run():
    g = Grid(16)
    cfg = RunConfig(g, 0.1, 2e-4, 1.0, 5, DataSpec("abc", {"A": 1.0, "B": 1.0, "C": 1.0}))
    return run(cfg, keep_states=True)


@pytest.fixture(scope="module")
def perturbation_run():
    L = 2 * math.pi * 8
    M = L / 8
    cfg = RunConfig(
        Grid(64, L),
        1.0,
        1e-3,
        2.0,
        100,
        DataSpec("shell", {"k0": 1.0, "delta": 0.005, "seed": 3}),
        Perturbation(M, M**-0.5),
    )
    t0 = time.perf_counter()
    res = run(cfg)
    res.wall = time.perf_counter() - t0
    res.M = M
    return res


# criteria ----------------------------------------------------------------

def test_criterion_01_curl_eigen_relations(fields):
    worst = max(V.check_prop1(u).metric for u in fields)
    ok = report(1, worst <= 1e-12, f"max curl-eigen residual over {len(fields)} fields = {worst:.2e} (tol 1e-12)")
    assert ok


def test_criterion_02_helical_orthogonality(fields):
    worst = max(V.check_orthogonality(u, nu=0.05, with_time_derivative=True).metric for u in fields)
    ok = report(2, worst <= 1e-11, f"max normalized cross inner product, m1+m2<=4 incl. du/dt = {worst:.2e} (tol 1e-11)")
    assert ok


def test_criterion_03_helicity_split(fields):
    e_h = e_l = 0.0
    for u in fields:
        p, m = helical_split(u)
        h = helicity(u)
        e_h = max(e_h, abs(h - (sobolev_seminorm_sq(p, 0.5) - sobolev_seminorm_sq(m, 0.5))) / abs(h))
        lw = inner(laplacian(u), curl(u))
        e_l = max(e_l, abs(lw + (sobolev_seminorm_sq(p, 1.5) - sobolev_seminorm_sq(m, 1.5))) / abs(lw))
    ok = report(3, max(e_h, e_l) <= 1e-11, f"relative error helicity {e_h:.2e}, <Lap u, curl u> {e_l:.2e} (tol 1e-11)")
    assert ok


def test_criterion_04_critical_energy_drift(mixed_runs):
    coarse = V.check_theorem1(mixed_runs[1e-3].rows)
    fine = V.check_theorem1(mixed_runs[5e-4].rows)
    ratio = coarse.details["max_abs_drift"] / fine.details["max_abs_drift"]
    ok = coarse.metric <= 1e-5 and 3 <= ratio <= 5
    wall = mixed_runs[1e-3].wall + mixed_runs[5e-4].wall
    report(4, ok, f"normalized drift {coarse.metric:.2e} (tol 1e-5), dt-halving ratio {ratio:.3f} (in [3,5]), {wall:.0f}s")
    assert ok


def test_criterion_05_beltrami_closed_form(abc_run):
    nu = 0.1
    H0 = 3 * (2 * math.pi) ** 3
    res = V.check_beltrami_decay(abc_run.states, abc_run.states[0].u, nu)
    e_h = max(abs(r.H - math.exp(-2 * nu * r.t) * H0) / (math.exp(-2 * nu * r.t) * H0) for r in abc_run.rows)
    drift = V.check_theorem1(abc_run.rows, tol=1e-10)
    ok = res.metric <= 1e-10 and e_h <= 1e-9 and drift.passed
    report(5, ok, f"field error {res.metric:.2e} (1e-10), helicity error {e_h:.2e} (1e-9), drift {drift.metric:.2e} (1e-10)")
    assert ok


def test_criterion_06_helicity_rate(mixed_runs, abc_run):
    generic = V.check_helicity_ode(mixed_runs[1e-3].rows, 0.05, tol=1e-3)
    beltrami = V.check_helicity_ode(abc_run.rows, 0.1, tol=1e-8)
    ok = generic.passed and beltrami.passed
    report(6, ok, f"dH/dt vs 2 nu <Lap u, curl u>: generic {generic.metric:.2e} (1e-3), Beltrami {beltrami.metric:.2e} (1e-8)")
    assert ok


def test_criterion_07_energy_balance(mixed_runs, abc_run, perturbation_run):
    runs = {
        "mixed dt": mixed_runs[1e-3].rows,
        "mixed dt/2": mixed_runs[5e-4].rows,
        "abc": abc_run.rows,
        "perturbation": perturbation_run.rows,
    }
    results = {k: V.check_leray_hopf(v) for k, v in runs.items()}
    ok = all(r.passed for r in results.values())
    text = ", ".join(f"{k} {r.metric:.1e}{'' if r.passed else '!'}" for k, r in results.items())
    report(7, ok, f"|E + dissipation - E0|/E0 (tol 1e-6, E nonincreasing): {text}")
    assert ok


def test_criterion_08_scaling_symmetry():
    g = Grid(32)
    u0 = random_solenoidal(g, seed=77, amplitude=10.0, plus_fraction=0.6)
    t0 = time.perf_counter()
    res = V.check_scaling(RunConfig(g, 0.05, 1e-3, 0.5, 50), u0, lam=2.0)
    ok = report(
        8, res.passed, f"lambda=2 pair, max relative mismatch over {res.details['samples']} times = {res.metric:.2e} "
        f"(tol 1e-8), {time.perf_counter() - t0:.0f}s"
    )
    assert ok


def test_criterion_09_data_properties():
    t0 = time.perf_counter()
    g32 = Grid(32)
    pol = 0.0
    for seed in range(5):
        for sign in (1, -1):
            u = make_shell_helical(ShellSpec(k0=5, delta=0.1, sign=sign, seed=seed), g32)
            p, m = helical_split(u)
            good, bad = (p, m) if sign == 1 else (m, p)
            pol = max(pol, l2_norm(bad) / l2_norm(good))
    g = DataG()
    prof = V.decay_profile(g, r_max=50.0, samples=41)
    decay = V.check_decay(g, r_max=50.0, samples=41, prof=prof)
    heat = V.check_heat_decay(g, 1.0, 2.0, r_max=50.0, samples=41, prof0=prof)
    ok = pol <= 1e-12 and decay.passed and not decay.warnings and heat.passed
    report(
        9, ok,
        f"wrong-polarity ratio {pol:.1e} (1e-12); profile outer/inner max {decay.metric:.3f} (<=1.5, "
        f"A={compute_A(g):.4f}, max {decay.details['max_profile']:.3f}); heat sup ratio {heat.metric:.4f} "
        f"<= exp(-nu(1-delta)^2 t) = {heat.tolerance:.4f}; {time.perf_counter() - t0:.0f}s",
    )
    assert ok


def test_criterion_10_perturbation(perturbation_run):
    rep = V.perturbation_report(perturbation_run.rows, perturbation_run.M)
    ok = rep.passed and perturbation_run.state.t == pytest.approx(2.0)
    report(
        10, ok, f"max ||h||_H1 M^0.5 = {rep.metric:.3f} (<=5), constraint {rep.details['constraint_residual']:.1e} "
        f"(1e-8), reached t={perturbation_run.state.t:g} without blow-up, {perturbation_run.wall:.0f}s"
    )
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s"]))
