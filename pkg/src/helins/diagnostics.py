"""Per-sample functionals of a simulation state."""
from dataclasses import asdict, dataclass, fields

import numpy as np

from .spectral import (
    curl,
    helical_split,
    helicity,
    inner,
    laplacian,
    sobolev_seminorm_sq,
)

__all__ = ["DiagnosticsRow", "CSV_COLUMNS", "PERTURBATION_COLUMNS", "dissipation_rates", "half_norms", "make_row"]

CSV_COLUMNS = ("t", "E", "H", "Ec_plus", "Ec_minus", "c0_drift", "Hhalf_plus", "Hhalf_minus", "div_residual")
PERTURBATION_COLUMNS = ("h_l2", "h_curl_l2", "h_h1", "constraint_res")


@dataclass(frozen=True)
class DiagnosticsRow:
    """One time sample of the monitored functionals.

    ``diss_total`` and ``lap_omega`` (``<Laplacian u, curl u>``) are kept for
    the energy-balance and helicity-rate checks but are not CSV columns.
    """

    t: float
    E: float
    H: float
    Ec_plus: float
    Ec_minus: float
    c0_drift: float
    Hhalf_plus: float
    Hhalf_minus: float
    div_residual: float
    diss_total: float = 0.0
    lap_omega: float = 0.0
    h_l2: float = None
    h_curl_l2: float = None
    h_h1: float = None
    constraint_res: float = None

    @property
    def has_perturbation(self):
        return self.h_h1 is not None

    def csv_values(self, with_perturbation=False):
        cols = CSV_COLUMNS + (PERTURBATION_COLUMNS if with_perturbation else ())
        return [getattr(self, c) for c in cols]

    def as_dict(self):
        return asdict(self)

    def is_finite(self):
        vals = [getattr(self, f.name) for f in fields(self)]
        return all(np.isfinite(v) for v in vals if v is not None)


def half_norms(u):
    """``(||D**0.5 u_plus||**2, ||D**0.5 u_minus||**2)``."""
    p, m = helical_split(u, tol=None)
    return sobolev_seminorm_sq(p, 0.5), sobolev_seminorm_sq(m, 0.5)


def dissipation_rates(u, nu):
    """Integrands ``nu ||grad u||**2``, ``nu ||D**0.5 grad u_plus||**2``, same for minus."""
    p, m = helical_split(u, tol=None)
    return (
        nu * sobolev_seminorm_sq(u, 1.0),
        nu * sobolev_seminorm_sq(p, 1.5),
        nu * sobolev_seminorm_sq(m, 1.5),
    )


def make_row(state, nu, c0, extra=None):
    u = state.u
    hp, hm = half_norms(u)
    ec_p = 0.5 * hp + state.diss_half_plus
    ec_m = 0.5 * hm + state.diss_half_minus
    return DiagnosticsRow(
        t=state.t,
        E=0.5 * sobolev_seminorm_sq(u, 0.0),
        H=helicity(u),
        Ec_plus=ec_p,
        Ec_minus=ec_m,
        c0_drift=(ec_p - ec_m) - c0,
        Hhalf_plus=hp,
        Hhalf_minus=hm,
        div_residual=u.divergence_residual(),
        diss_total=state.diss_total,
        lap_omega=inner(laplacian(u), curl(u)),
        **(extra or {}),
    )
