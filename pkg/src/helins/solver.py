"""Dealiased pseudo-spectral Navier-Stokes with integrating-factor RK4 stepping.

The viscous semigroup ``exp(-nu |k|**2 dt)`` is applied exactly; the
projected advection term is explicit. Alongside the field the state carries
three dissipation integrals (total, plus, minus), accumulated with the
trapezoidal rule from the integrands at the step endpoints.
"""
from dataclasses import dataclass, field, replace
from functools import lru_cache
import logging

import numpy as np

from . import kernels
from .diagnostics import DiagnosticsRow, dissipation_rates, make_row
from .errors import BlowUpError, ValidationError
from .spectral import (
    SpectralVectorField,
    curl,
    fft_vector,
    h1_norm,
    ifft_vector,
)

__all__ = [
    "SimState",
    "Perturbation",
    "RunConfig",
    "RunResult",
    "nonlinear_rhs",
    "step",
    "heat_flow",
    "cfl_dt",
    "run",
    "BLOWUP_FACTOR",
]

log = logging.getLogger(__name__)

BLOWUP_FACTOR = 1e6


@dataclass(frozen=True)
class SimState:
    """Field, time and dissipation integrals ``nu int ||grad u||**2`` etc.

    ``rates`` caches the three dissipation integrands at ``t`` and ``h1_ref``
    is the H1 norm the blow-up guard compares against.
    """

    t: float
    u: SpectralVectorField
    diss_total: float = 0.0
    diss_half_plus: float = 0.0
    diss_half_minus: float = 0.0
    steps: int = 0
    rates: tuple = None
    h1_ref: float = None

    @classmethod
    def initial(cls, u, nu, t=0.0):
        return cls(t=t, u=u, rates=dissipation_rates(u, nu), h1_ref=h1_norm(u))


@dataclass(frozen=True)
class Perturbation:
    """Cut-off experiment: ``u0 = curl curl(chi_M g)/k0**2`` with g the configured data.

    ``h0_h1`` rescales g so that the initial perturbation has that H1 norm.
    """

    M: float
    h0_h1: float = None


@dataclass(frozen=True)
class RunConfig:
    grid: object
    nu: float
    dt: float
    t_end: float
    record_every: int = 1
    data: object = None
    experiment: Perturbation = None
    cfl: float = 0.5

    def __post_init__(self):
        if not self.nu > 0:
            raise ValidationError(f"viscosity nu must be positive, got {self.nu}")
        if not self.dt > 0:
            raise ValidationError(f"time step dt must be positive, got {self.dt}")
        if self.t_end < 0:
            raise ValidationError(f"t_end must be nonnegative, got {self.t_end}")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ValidationError(f"record_every must be a positive integer, got {self.record_every}")
        ratio = self.t_end / self.dt
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ValidationError(f"t_end = {self.t_end} is not a whole number of steps dt = {self.dt}")

    @property
    def n_steps(self):
        return int(round(self.t_end / self.dt))


@dataclass
class RunResult:
    rows: list
    state: SimState
    states: list = field(default_factory=list)
    c0: float = 0.0


def nonlinear_rhs(u):
    """Projected advection ``-P(u . grad u)`` with the 2/3 rule.

    Evaluated in rotational form ``P(u x curl u)``, which differs from
    ``-u . grad u`` by the gradient ``grad |u|**2/2`` that the projection
    removes. Inputs and output are restricted to the dealiased modes.
    """
    g = u.grid
    ud = u.coeffs * g.dealias_mask
    w = curl(SpectralVectorField(g, ud)).coeffs
    phys = ifft_vector(np.concatenate([ud, w]), g)
    prod = np.empty((3,) + g.real_shape)
    kernels.cross(phys[:3], phys[3:], prod)
    ph = fft_vector(prod)
    out = np.empty_like(ph)
    mx, my, mz = g.dealias_axis
    kernels.project_masked(ph, g.kx, g.ky, g.kz, mx, my, mz, out)
    return SpectralVectorField(g, out)


def heat_flow(u0, nu, t):
    """Exact heat semigroup ``c -> exp(-nu |k|**2 t) c``."""
    if t < 0:
        raise ValueError("heat flow runs forward in time only")
    return SpectralVectorField(u0.grid, u0.coeffs * np.exp(-nu * u0.grid.k2 * t))


def cfl_dt(u, cfl=0.5):
    """Advective stability bound ``cfl * dx / max|u|`` (inf for a zero field)."""
    vmax = float(np.max(np.sqrt(np.sum(u.to_real() ** 2, axis=0))))
    if vmax == 0.0:
        return np.inf
    return cfl * u.grid.dx / vmax


@lru_cache(maxsize=8)
def _factors(grid, nu, dt):
    e_half = np.exp(-0.5 * nu * grid.k2 * dt)
    return e_half, e_half * e_half


def _ifrk4(c, nu, dt, grid):
    e_half, e_full = _factors(grid, nu, dt)

    def rhs(coeffs):
        return nonlinear_rhs(SpectralVectorField(grid, coeffs)).coeffs

    k1 = rhs(c)
    k2 = rhs(e_half * (c + 0.5 * dt * k1))
    k3 = rhs(e_half * c + 0.5 * dt * k2)
    k4 = rhs(e_full * c + dt * e_half * k3)
    return e_full * c + (dt / 6.0) * (e_full * k1 + 2.0 * e_half * (k2 + k3) + k4)


def step(state, cfg):
    """Advance one integrating-factor RK4 step and the dissipation integrals.

    Raises
    ------
    BlowUpError
        When the H1 norm exceeds ``BLOWUP_FACTOR`` times ``state.h1_ref``.
    """
    grid = state.u.grid
    nu, dt = cfg.nu, cfg.dt
    rates0 = state.rates if state.rates is not None else dissipation_rates(state.u, nu)
    u_new = SpectralVectorField(grid, _ifrk4(state.u.coeffs, nu, dt, grid))
    rates1 = dissipation_rates(u_new, nu)
    steps = state.steps + 1
    h1_ref = state.h1_ref if state.h1_ref is not None else h1_norm(state.u)
    new = SimState(
        t=steps * dt,
        u=u_new,
        diss_total=state.diss_total + 0.5 * dt * (rates0[0] + rates1[0]),
        diss_half_plus=state.diss_half_plus + 0.5 * dt * (rates0[1] + rates1[1]),
        diss_half_minus=state.diss_half_minus + 0.5 * dt * (rates0[2] + rates1[2]),
        steps=steps,
        rates=rates1,
        h1_ref=h1_ref,
    )
    h1 = h1_norm(u_new)
    if not np.isfinite(h1) or (h1_ref > 0 and h1 > BLOWUP_FACTOR * h1_ref):
        raise BlowUpError(new.t, h1, h1_ref, BLOWUP_FACTOR)
    return new


def run(cfg, u0=None, state=None, monitor=None, keep_states=False, on_record=None):
    """Integrate to ``cfg.t_end`` and collect a diagnostics row every ``record_every`` steps.

    Parameters
    ----------
    cfg : RunConfig
    u0 : SpectralVectorField, optional
        Initial field; built from ``cfg.data`` when omitted.
    state : SimState, optional
        Resume from this state instead of ``u0`` (e.g. a snapshot).
    monitor : callable, optional
        ``monitor(state) -> dict`` of extra row entries (perturbation block).
        Built automatically in perturbation mode.
    keep_states : bool
        Keep every recorded state in ``RunResult.states``.
    on_record : callable, optional
        Called as ``on_record(state, row)`` after each recorded row.
    """
    from .experiment import build_initial

    if state is None:
        if u0 is None:
            u0, auto_monitor = build_initial(cfg)
            monitor = monitor or auto_monitor
        state = SimState.initial(u0, cfg.nu)
    else:
        state = replace(state, steps=int(round(state.t / cfg.dt)))
        if state.rates is None or state.h1_ref is None:
            state = replace(state, rates=dissipation_rates(state.u, cfg.nu), h1_ref=h1_norm(state.u))
        if monitor is None and cfg.experiment is not None:
            _, monitor = build_initial(cfg)
    grid = state.u.grid
    if grid != cfg.grid:
        raise ValidationError(f"initial field grid {grid} does not match configured grid {cfg.grid}")
    bound = cfl_dt(state.u, cfg.cfl)
    if cfg.dt > bound:
        raise ValidationError(
            f"dt = {cfg.dt:.6g} exceeds the advective CFL bound {cfg.cfl} * dx / max|u| = {bound:.6g}"
        )

    c0 = _c0(state, cfg)
    result = RunResult(rows=[], state=state, c0=c0)

    def record(s):
        extra = monitor(s) if monitor is not None else None
        row = make_row(s, cfg.nu, c0, extra)
        result.rows.append(row)
        if keep_states:
            result.states.append(s)
        if on_record is not None:
            on_record(s, row)

    total = cfg.n_steps
    if state.steps % cfg.record_every == 0:
        record(state)
    while state.steps < total:
        state = step(state, cfg)
        if state.steps % cfg.record_every == 0 or state.steps == total:
            record(state)
    result.state = state
    log.debug("run finished at t=%g after %d steps", state.t, state.steps)
    return result


def _c0(state, cfg):
    """Initial helicity constant; on resume it is recovered from the stored integrals."""
    from .diagnostics import half_norms

    hp, hm = half_norms(state.u)
    # Ec_plus - Ec_minus is conserved, so c0 follows from any state
    return 0.5 * (hp - hm) + state.diss_half_plus - state.diss_half_minus


def with_dt(cfg, dt):
    return replace(cfg, dt=dt)
