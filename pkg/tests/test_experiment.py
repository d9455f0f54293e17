import math

import numpy as np
import pytest

from helins.errors import CutoffWrapError, ValidationError
from helins.experiment import DataSpec, PerturbationMonitor, build_initial, make_field
from helins.initial_data import CutoffSpec, cutoff_product, make_cutoff_field, make_curlcurl_data, padded_grid, scalar_spectrum
from helins.solver import Perturbation, RunConfig, SimState
from helins.spectral import Grid, h1_norm

L = 2 * math.pi * 8
SHELL = DataSpec("shell", {"k0": 1.0, "delta": 0.005, "seed": 3})


def test_unknown_kind_rejected():
    with pytest.raises(ValidationError, match="unknown data kind"):
        DataSpec("vortex")


def test_make_field_kinds(grid16):
    assert np.all(make_field(DataSpec("zero"), grid16).coeffs == 0)
    with pytest.raises(ValidationError):
        make_field(DataSpec("curlcurl", {"inner": SHELL}), grid16)


def test_perturbation_h0_has_requested_norm():
    g = Grid(32, L)
    M = L / 8
    cfg = RunConfig(g, 1.0, 1e-3, 0.0, data=SHELL, experiment=Perturbation(M, M**-0.5))
    u0, mon = build_initial(cfg)
    row = mon(SimState.initial(u0, 1.0))
    assert row["h_h1"] == pytest.approx(M**-0.5, rel=1e-12)
    assert row["constraint_res"] < 1e-12 * row["h_h1"]
    assert u0.divergence_residual() < 1e-14


def test_curlcurl_data_kind_agrees_with_experiment_M():
    g = Grid(32, L)
    data = DataSpec("curlcurl", {"inner": SHELL, "M": L / 8})
    with pytest.raises(ValidationError, match="disagrees"):
        build_initial(RunConfig(g, 1.0, 1e-3, 0.0, data=data, experiment=Perturbation(L / 16)))
    u0, mon = build_initial(RunConfig(g, 1.0, 1e-3, 0.0, data=data))
    assert mon is None and u0.divergence_residual() < 1e-14


def test_wrapping_cutoff_rejected():
    cfg = RunConfig(Grid(32, L), 1.0, 1e-3, 0.0, data=SHELL, experiment=Perturbation(L / 3))
    with pytest.raises(CutoffWrapError):
        build_initial(cfg)


def test_relative_perturbation_shrinks_with_M():
    # for periodic g the cut-off mass grows with M, so compare h0 against chi_M g
    g = Grid(64, L)
    base = make_field(SHELL, g)
    ratios = []
    for M in (L / 16, L / 8):
        chi = make_cutoff_field(CutoffSpec(M), g)
        _, h0 = make_curlcurl_data(base, chi)
        chi_g = cutoff_product(scalar_spectrum(chi, g), base, padded_grid(g))
        ratios.append(h1_norm(h0) / h1_norm(chi_g))
    assert ratios[1] < ratios[0]
    # h0 mixes terms in grad chi (~1/M) and its second derivatives (~1/M^2),
    # so doubling M shrinks the ratio by a factor between 1/4 and 1/2
    assert 0.25 <= ratios[1] / ratios[0] <= 0.5
