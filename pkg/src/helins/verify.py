"""Named checks of the helicity structure, energy balance, data decay and the cut-off experiment.

Every check returns a :class:`CheckResult` with the measured metric, the
tolerance it was held to and the verdict; ``details`` carries secondary
measurements and ``warnings`` flags conditions (e.g. under-resolved
quadrature) that do not by themselves fail the check.
"""
from dataclasses import dataclass, field, replace
import math

import numpy as np

from .errors import InsufficientSamplesError
from .initial_data import (
    compute_A,
    eval_g_gradient,
    eval_g_quadrature,
    max_resolved_radius,
    quadrature_nodes,
)
from .solver import RunConfig, SimState, heat_flow, nonlinear_rhs, run
from .spectral import (
    SpectralVectorField,
    apply_D_power,
    curl,
    helical_split,
    helicity,
    inner,
    l2_norm,
    laplacian,
    sobolev_seminorm_sq,
)

__all__ = [
    "CheckResult",
    "check_prop1",
    "check_orthogonality",
    "check_helicity_split",
    "check_theorem1",
    "check_helicity_ode",
    "check_leray_hopf",
    "check_helicity_bound",
    "check_beltrami_decay",
    "check_scaling",
    "check_rk4_order",
    "decay_profile",
    "check_decay",
    "check_heat_decay",
    "check_sup_bound",
    "perturbation_report",
    "DECAY_CSV_COLUMNS",
    "CHECK_NAMES",
    "CHECK_TOLERANCES",
]

DECAY_CSV_COLUMNS = ("r", "g_norm", "grad_g_norm", "decay_ratio")

# checks selectable from a configuration, with their default tolerances
CHECK_TOLERANCES = {
    "prop1": 1e-12,
    "prop2": 1e-11,
    "helicity_split": 1e-11,
    "theorem1": 1e-5,
    "helicity_ode": 1e-3,
    "leray_hopf": 1e-6,
    "helicity_bound": 0.0,
    "beltrami": 1e-10,
    "scaling": 1e-8,
    "decay": 1.5,
    "heat_decay": 1.0,
    "sup_bound": 1e-3,
    "perturbation": 5.0,
}
CHECK_NAMES = tuple(CHECK_TOLERANCES)


@dataclass
class CheckResult:
    name: str
    metric: float
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def as_record(self):
        return {
            "name": self.name,
            "metric": float(self.metric),
            "tolerance": float(self.tolerance),
            "pass": bool(self.passed),
            "details": {k: _plain(v) for k, v in self.details.items()},
            "warnings": list(self.warnings),
        }

    def line(self):
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.name}: metric={self.metric:.3e} tol={self.tolerance:.1e}"


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def _ratio(num, den):
    return 0.0 if den == 0.0 else num / den


# -- spectral identities ----------------------------------------------------

def check_prop1(u, tol=1e-12):
    """``curl plus = D plus`` and ``curl minus = -D minus`` relative to each component's norm."""
    p, m = helical_split(u)
    rp = _ratio(l2_norm(curl(p) - apply_D_power(p, 1)), l2_norm(p))
    rm = _ratio(l2_norm(curl(m) + apply_D_power(m, 1)), l2_norm(m))
    metric = max(rp, rm)
    return CheckResult("prop1", metric, tol, metric <= tol, {"plus": rp, "minus": rm})


def time_derivative(u, nu):
    """``du/dt = nu Laplacian u + N(u)`` of the semi-discrete system."""
    return laplacian(u) * nu + nonlinear_rhs(u)


def _orders(max_sum):
    return [(a, b) for a in range(max_sum + 1) for b in range(max_sum + 1 - a)]


def check_orthogonality(u, nu=1.0, orders=None, with_time_derivative=True, tol=1e-11):
    """Normalized ``|<D^m1 a, D^m2 b>|`` for plus-parts ``a`` and minus-parts ``b``.

    ``(a, b)`` ranges over ``(u+, u-)`` and, with the time-derivative flag, over
    the pairs formed with the split of ``du/dt``. A vanishing component gives
    quotient 0.
    """
    orders = _orders(4) if orders is None else list(orders)
    up, um = helical_split(u)
    plus = {"u": up}
    minus = {"u": um}
    if with_time_derivative:
        dp, dm = helical_split(time_derivative(u, nu))
        plus["dt_u"] = dp
        minus["dt_u"] = dm
    worst = 0.0
    per_pair = {}
    for m1, m2 in orders:
        for na, a in plus.items():
            for nb, b in minus.items():
                da = apply_D_power(a, m1)
                db = apply_D_power(b, m2)
                den = l2_norm(da) * l2_norm(db)
                q = 0.0 if den == 0.0 else abs(inner(da, db)) / den
                key = f"D{m1}{na}+.D{m2}{nb}-"
                per_pair[key] = q
                worst = max(worst, q)
    return CheckResult("prop2", worst, tol, worst <= tol, {"max_by_pair": max(per_pair.items(), key=lambda kv: kv[1])[0]})


def check_helicity_split(u, tol=1e-11):
    """Helicity and ``<Laplacian u, curl u>`` against their helical-split forms (prefactor 1)."""
    p, m = helical_split(u)
    h = helicity(u)
    h_split = sobolev_seminorm_sq(p, 0.5) - sobolev_seminorm_sq(m, 0.5)
    lw = inner(laplacian(u), curl(u))
    lw_split = -(sobolev_seminorm_sq(p, 1.5) - sobolev_seminorm_sq(m, 1.5))
    # scale by the triangle bound so mixed fields with small net helicity stay well posed
    e1 = abs(h - h_split) / max(sobolev_seminorm_sq(u, 0.5), 1e-300)
    e2 = abs(lw - lw_split) / max(sobolev_seminorm_sq(u, 1.5), 1e-300)
    metric = max(e1, e2)
    return CheckResult(
        "helicity_split",
        metric,
        tol,
        metric <= tol,
        {"helicity": h, "split": h_split, "lap_omega": lw, "lap_omega_split": lw_split, "err_43": e1, "err_44": e2},
    )


# -- time-series checks -----------------------------------------------------

def _need(rows, k, what):
    if len(rows) < k:
        raise InsufficientSamplesError(f"{what} needs at least {k} recorded rows, got {len(rows)}")


def check_theorem1(rows, tol=1e-5):
    """``max |Ec_plus - Ec_minus - c0| / (1 + Ec_plus + Ec_minus)`` over the series."""
    _need(rows, 1, "theorem1")
    vals = [abs(r.c0_drift) / (1 + r.Ec_plus + r.Ec_minus) for r in rows]
    i = int(np.argmax(vals))
    return CheckResult(
        "theorem1", vals[i], tol, vals[i] <= tol, {"t_worst": rows[i].t, "max_abs_drift": max(abs(r.c0_drift) for r in rows)}
    )


def check_helicity_ode(rows, nu, tol=1e-3, states=None, abs_floor=1e-10):
    """Centered ``dH/dt`` against ``2 nu <Laplacian u, curl u>`` at interior rows.

    Rows must be equally spaced in time. The error at a row is relative to
    ``|2 nu <Laplacian u, curl u>|``; rows where both sides are below
    ``abs_floor * E(0)`` pass on the absolute floor.
    """
    _need(rows, 3, "helicity_ode")
    t = np.array([r.t for r in rows])
    H = np.array([r.H for r in rows])
    if states is not None:
        lw = np.array([inner(laplacian(s.u), curl(s.u)) for s in states])
    else:
        lw = np.array([r.lap_omega for r in rows])
    tau = np.diff(t)
    if np.max(np.abs(tau - tau[0])) > 1e-9 * tau[0]:
        raise InsufficientSamplesError("helicity_ode needs equally spaced rows")
    lhs = (H[2:] - H[:-2]) / (t[2:] - t[:-2])
    rhs = 2 * nu * lw[1:-1]
    err = np.abs(lhs - rhs)
    floor = abs_floor * rows[0].E
    rel = np.where(np.abs(rhs) > floor, err / np.maximum(np.abs(rhs), 1e-300), 0.0)
    ok = (rel <= tol) | (err <= floor)
    metric = float(np.max(rel))
    return CheckResult(
        "helicity_ode", metric, tol, bool(np.all(ok)), {"max_abs_error": float(np.max(err)), "abs_floor": floor}
    )


def check_leray_hopf(rows, tol=1e-6):
    """``E(t) + diss_total(t) = E(0)`` relative to ``E(0)`` and ``E`` nonincreasing."""
    _need(rows, 1, "leray_hopf")
    E0 = rows[0].E
    bal = max(abs(r.E + r.diss_total - E0) for r in rows) / E0 if E0 > 0 else 0.0
    E = np.array([r.E for r in rows])
    increases = float(np.max(np.diff(E), initial=0.0))
    monotone = increases <= 1e-14 * max(E0, 1e-300)
    return CheckResult(
        "leray_hopf", bal, tol, bal <= tol and monotone, {"max_energy_increase": increases, "sup_E_le_E0": bool(E.max() <= E0 * (1 + 1e-14))}
    )


def check_helicity_bound(rows, rtol=1e-12):
    """``|H| <= ||u||^2_{H^1/2}`` at every row."""
    _need(rows, 1, "helicity_bound")
    excess = max(abs(r.H) - (r.Hhalf_plus + r.Hhalf_minus) * (1 + rtol) for r in rows)
    return CheckResult("helicity_bound", max(excess, 0.0), 0.0, excess <= 0.0)


def check_beltrami_decay(states, u0, nu, tol_field=1e-10, tol_helicity=1e-9):
    """Recorded fields against the exact Beltrami solution ``exp(-nu k0**2 t) u0`` (k0 = 1)."""
    n0 = l2_norm(u0)
    H0 = helicity(u0)
    ef = max(l2_norm(s.u - u0 * math.exp(-nu * s.t)) for s in states) / n0
    eh = max(abs(helicity(s.u) - math.exp(-2 * nu * s.t) * H0) / abs(H0) for s in states)
    return CheckResult(
        "beltrami",
        ef,
        tol_field,
        ef <= tol_field and eh <= tol_helicity,
        {"helicity_error": eh, "helicity_tolerance": tol_helicity},
    )


def check_scaling(cfg, u0, lam=2.0, tol=1e-8):
    """Run ``(u0, nu, L, T)`` and ``(lam u0(lam x), nu, L/lam, T/lam**2)`` and compare.

    On the same lattice count ``u0(lam x)`` on the shrunk box has the same
    samples, so the scaled run starts from ``lam`` times the coefficients.
    Matched rows must satisfy ``u_lam(t) = lam u(lam**2 t)``.
    """
    small = cfg.grid.scaled(lam)
    cfg_l = RunConfig(
        small, cfg.nu, cfg.dt / lam**2, cfg.t_end / lam**2, cfg.record_every, cfg.data, None, cfg.cfl
    )
    a = run(cfg, u0=u0, keep_states=True)
    b = run(cfg_l, u0=SpectralVectorField(small, u0.coeffs * lam), keep_states=True)
    worst = 0.0
    for sa, sb in zip(a.states, b.states):
        ref = np.linalg.norm(sa.u.coeffs) * lam
        worst = max(worst, float(np.linalg.norm(sb.u.coeffs - lam * sa.u.coeffs) / ref) if ref else 0.0)
    return CheckResult("scaling", worst, tol, worst <= tol, {"lambda": lam, "samples": len(a.states)})


def check_rk4_order(cfg, u0, lo=3.7, hi=4.3):
    """Observed order ``log2(|u_dt - u_dt/2| / |u_dt/2 - u_dt/4|)`` at ``t_end``."""
    finals = []
    for f in (1, 2, 4):
        c = replace(cfg, dt=cfg.dt / f, record_every=cfg.n_steps * f or 1)
        finals.append(run(c, u0=u0).state.u)
    e1 = l2_norm(finals[0] - finals[1])
    e2 = l2_norm(finals[1] - finals[2])
    order = math.log2(e1 / e2) if e2 > 0 else float("inf")
    return CheckResult("rk4_order", order, lo, lo <= order <= hi, {"upper": hi, "diff_dt": e1, "diff_dt2": e2})


# -- data decay -------------------------------------------------------------

def _unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


DEFAULT_RAYS = (
    (1.0, 0.0, 0.0),
    (1.0, 1.0, 1.0),
    (0.3, -0.5, 0.8),
)


def decay_profile(g, rays=DEFAULT_RAYS, r_max=50.0, samples=41, A=None, nodes=None, step=1e-3):
    """Sample ``|g|``, ``|grad g|`` along rays from the origin.

    Returns a dict of arrays ``r``, ``g_norm``, ``grad_g_norm``, ``decay_ratio``
    (``(1+r)|g|/A``) and ``profile`` (``(1+r)(|g|+|grad g|)/A``), each of shape
    ``(len(rays), samples)``.
    """
    A = compute_A(g) if A is None else A
    nodes = quadrature_nodes(g) if nodes is None else nodes
    r = np.linspace(0.0, r_max, samples)
    dirs = np.array([_unit(d) for d in rays])
    pts = (dirs[:, None, :] * r[None, :, None]).reshape(-1, 3)
    val = eval_g_quadrature(g, pts, nodes)
    jac = eval_g_gradient(g, pts, step=step, nodes=nodes)
    gn = np.linalg.norm(val, axis=1).reshape(len(dirs), samples)
    dn = np.linalg.norm(jac, axis=(1, 2)).reshape(len(dirs), samples)
    R = np.broadcast_to(r, gn.shape)
    return {
        "r": R,
        "g_norm": gn,
        "grad_g_norm": dn,
        "decay_ratio": (1 + R) * gn / A,
        "profile": (1 + R) * (gn + dn) / A,
        "A": A,
    }


def decay_csv_rows(prof):
    """Rows ``(r, |g|, |grad g|, (1+r)|g|/A)``, ray-major."""
    cols = [prof[c].ravel() for c in DECAY_CSV_COLUMNS]
    return list(zip(*cols))


def check_decay(g, rays=DEFAULT_RAYS, r_max=50.0, samples=41, growth=1.5, prof=None):
    """Boundedness of ``(1+|x|)(|g|+|grad g|)/A``: no growth from the inner to the outer half."""
    prof = decay_profile(g, rays, r_max, samples) if prof is None else prof
    P = prof["profile"]
    r = prof["r"][0]
    inner_half = P[:, r <= r_max / 2].max()
    outer_half = P[:, r > r_max / 2].max()
    metric = outer_half / inner_half
    flat = int(np.argmax(P))
    warnings = []
    limit = max_resolved_radius(g)
    if r_max > limit:
        warnings.append(
            f"quadrature under-resolved: r_max={r_max:g} exceeds {limit:.4g} for "
            f"n_polar={g.n_polar}, n_azimuth={g.n_azimuth}"
        )
    return CheckResult(
        "decay",
        metric,
        growth,
        metric <= growth,
        {
            "A": prof["A"],
            "max_profile": float(P.max()),
            "argmax_r": float(prof["r"].ravel()[flat]),
            "argmax_ray": flat // P.shape[1],
            "inner_max": float(inner_half),
            "outer_max": float(outer_half),
        },
        warnings,
    )


def check_heat_decay(g, nu, t, rays=DEFAULT_RAYS, r_max=50.0, samples=41, prof0=None):
    """Heat-evolved profile against the annulus semigroup factor ``exp(-nu (1-delta)**2 t)``.

    The metric is ``sup P_t / sup P_0`` with ``P`` the decay profile normalized
    by the same ``A``. The looser envelope ``exp(-nu t/2)`` is reported too.
    """
    A = compute_A(g)
    prof0 = decay_profile(g, rays, r_max, samples, A=A) if prof0 is None else prof0
    prof_t = decay_profile(g.heat_evolved(nu, t), rays, r_max, samples, A=A)
    factor = math.exp(-nu * (1 - g.delta) ** 2 * t)
    ratio = float(prof_t["profile"].max() / prof0["profile"].max())
    pointwise = float(np.max(prof_t["profile"] / np.maximum(prof0["profile"].max(), 1e-300)))
    return CheckResult(
        "heat_decay",
        ratio,
        factor,
        ratio <= factor,
        {"envelope_half_rate": math.exp(-nu * t / 2), "tight_factor": factor, "sup_ratio_against_sup0": pointwise},
    )


def check_sup_bound(g, points=None, rtol=1e-3):
    """Measured ``C = max(|g| + |grad g|)/A`` is stable under doubling the quadrature."""
    if points is None:
        r = np.linspace(0, 10, 6)
        points = np.concatenate([np.outer(r, _unit(d)) for d in DEFAULT_RAYS])
    consts = []
    for q in (g, g.refined()):
        A = compute_A(q)
        val = eval_g_quadrature(q, points)
        jac = eval_g_gradient(q, points)
        consts.append(float(np.max(np.linalg.norm(val, axis=1) + np.linalg.norm(jac, axis=(1, 2))) / A))
    change = abs(consts[1] - consts[0]) / consts[0]
    return CheckResult("sup_bound", change, rtol, change <= rtol and np.isfinite(consts[0]), {"C": consts[0], "C_refined": consts[1]})


# -- cut-off experiment -----------------------------------------------------

def perturbation_report(rows, M, envelope=5.0, tol=1e-8):
    """``max ||h||_{H1} M**0.5`` against ``envelope`` and the normalized constraint residual against ``tol``."""
    _need(rows, 1, "perturbation_report")
    if any(not r.has_perturbation for r in rows):
        raise InsufficientSamplesError("perturbation_report needs rows from a perturbation-mode run")
    scaled = max(r.h_h1 for r in rows) * math.sqrt(M)
    cons = max(_ratio(r.constraint_res, r.h_h1) for r in rows)
    return CheckResult(
        "perturbation",
        scaled,
        envelope,
        scaled <= envelope and cons <= tol,
        {"constraint_residual": cons, "constraint_tolerance": tol, "h_h1_initial": rows[0].h_h1},
    )
