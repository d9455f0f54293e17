"""Initial-data descriptors and the cut-off/perturbation experiment.

In perturbation mode the run starts from ``u0 = curl curl(chi_M g)/k0**2`` and
tracks ``h = u - chi_M v`` with ``v`` the heat flow of the uncut ``g``.
Products with ``chi_M`` are formed on the doubled lattice, where they are
exact, so ``div h = -v . grad chi_M`` holds to roundoff.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .initial_data import (
    CutoffSpec,
    ShellSpec,
    cutoff_product,
    make_abc,
    make_curlcurl_data,
    make_cutoff_field,
    make_shell_helical,
    padded_grid,
    random_solenoidal,
    scalar_spectrum,
)
from .spectral import (
    SpectralVectorField,
    curl,
    fft_scalar,
    h1_norm,
    ifft_scalar,
    ifft_vector,
    l2_norm,
    resample,
)

__all__ = ["DataSpec", "DATA_KINDS", "make_field", "PerturbationMonitor", "build_initial"]

DATA_KINDS = ("abc", "shell", "random", "curlcurl", "zero")


@dataclass(frozen=True)
class DataSpec:
    """Initial-data variant tag plus its parameters."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in DATA_KINDS:
            raise ValidationError(f"unknown data kind '{self.kind}'; expected one of {DATA_KINDS}")


def make_field(spec, grid):
    """Torus field described by a non-curlcurl :class:`DataSpec`."""
    p = spec.params
    if spec.kind == "abc":
        return make_abc(p.get("A", 1.0), p.get("B", 1.0), p.get("C", 1.0), grid, periods=p.get("periods", 1))
    if spec.kind == "shell":
        return make_shell_helical(
            ShellSpec(
                k0=p["k0"],
                delta=p.get("delta", 0.1),
                sign=p.get("sign", 1),
                seed=p.get("seed", 0),
                amplitude=p.get("amplitude", 1.0),
            ),
            grid,
        )
    if spec.kind == "random":
        return random_solenoidal(
            grid,
            seed=p.get("seed", 0),
            k_peak=p.get("k_peak", 3.0),
            amplitude=p.get("amplitude", 1.0),
            plus_fraction=p.get("plus_fraction", 0.5),
        )
    if spec.kind == "zero":
        return SpectralVectorField.zeros(grid)
    raise ValidationError(f"data kind '{spec.kind}' does not describe a plain field")


def _curlcurl(g, M, h0_h1):
    grid = g.grid
    chi = make_cutoff_field(CutoffSpec(M), grid)
    u0, h0 = make_curlcurl_data(g, chi)
    if h0_h1 is not None:
        norm = h1_norm(h0)
        if norm == 0.0:
            raise ValidationError("h0 vanishes; cannot rescale to the requested H1 norm")
        scale = h0_h1 / norm
        g = g * scale
        u0 = u0 * scale
    return g, u0, chi


class PerturbationMonitor:
    """Measures ``h = u - chi_M v`` and the constraint ``div h + v . grad chi_M``."""

    def __init__(self, g, chi, nu):
        self.g = g
        self.nu = nu
        self.grid = g.grid
        self.padded = padded_grid(self.grid)
        self.chi_hat = scalar_spectrum(chi, self.grid)
        chi_p = resample(self.chi_hat, self.grid, self.padded)
        k0, k1, k2 = self.padded.k_vectors
        self.grad_chi = ifft_scalar(np.stack([1j * k0 * chi_p, 1j * k1 * chi_p, 1j * k2 * chi_p]), self.padded)

    def perturbation(self, u, t):
        v = SpectralVectorField(self.grid, self.g.coeffs * np.exp(-self.nu * self.grid.k2 * t))
        chi_v = cutoff_product(self.chi_hat, v, self.padded)
        h = SpectralVectorField(self.padded, resample(u.coeffs, self.grid, self.padded)) - chi_v
        return h, v

    def __call__(self, state):
        h, v = self.perturbation(state.u, state.t)
        P = self.padded
        k0, k1, k2 = P.k_vectors
        div_h = 1j * (k0 * h.coeffs[0] + k1 * h.coeffs[1] + k2 * h.coeffs[2])
        v_p = ifft_vector(resample(v.coeffs, self.grid, P), P)
        v_dot = fft_scalar(np.sum(v_p * self.grad_chi, axis=0))
        res = div_h + v_dot
        res_norm = np.sqrt(P.weight * np.sum(P.half_weights * np.abs(res) ** 2))
        return {
            "h_l2": l2_norm(h),
            "h_curl_l2": l2_norm(curl(h)),
            "h_h1": h1_norm(h),
            "constraint_res": float(res_norm),
        }


def build_initial(cfg):
    """Return ``(u0, monitor)`` for a run configuration; ``monitor`` is None outside perturbation mode."""
    spec = cfg.data
    if spec is None:
        raise ValidationError("run configuration has no initial data")
    grid = cfg.grid
    exp = cfg.experiment
    if spec.kind == "curlcurl":
        inner = spec.params["inner"]
        inner = inner if isinstance(inner, DataSpec) else DataSpec(inner["kind"], dict(inner.get("params", {})))
        M = spec.params.get("M")
        if exp is not None and M is not None and exp.M != M:
            raise ValidationError(f"data M = {M} disagrees with experiment M = {exp.M}")
        M = M if M is not None else (exp.M if exp is not None else None)
        if M is None:
            raise ValidationError("curlcurl data needs a cut-off radius M")
        h0_h1 = spec.params.get("h0_h1", exp.h0_h1 if exp is not None else None)
        g, u0, chi = _curlcurl(make_field(inner, grid), M, h0_h1)
    elif exp is not None:
        g, u0, chi = _curlcurl(make_field(spec, grid), exp.M, exp.h0_h1)
    else:
        return make_field(spec, grid), None
    monitor = PerturbationMonitor(g, chi, cfg.nu) if exp is not None else None
    return u0, monitor
