"""Initial data: torus Beltrami fields, helical shells, the whole-space profile g, cut-offs.

Fields that drive simulations live on the torus. The whole-space profile
``g`` built from an annulus-supported amplitude is only ever evaluated
pointwise by quadrature (:func:`eval_g_quadrature`) for decay and sup-bound
measurements.
"""
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .errors import CutoffWrapError, EmptyShellError, NotBeltramiError
from .spectral import (
    Grid,
    SpectralVectorField,
    curl,
    fft_scalar,
    helical_split,
    ifft_scalar,
    ifft_vector,
    inner,
    fft_vector,
    l2_norm,
    leray_project,
    resample,
)

__all__ = [
    "make_abc",
    "random_solenoidal",
    "ShellSpec",
    "make_shell_helical",
    "helical_basis",
    "DataG",
    "QuadratureNodes",
    "quadrature_nodes",
    "eval_g_quadrature",
    "eval_g_gradient",
    "compute_A",
    "max_resolved_radius",
    "CutoffSpec",
    "cutoff_profile",
    "make_cutoff_field",
    "cutoff_gradient",
    "beltrami_eigenvalue",
    "cutoff_product",
    "make_curlcurl_data",
]


# -- torus Beltrami and random fields ---------------------------------------

def make_abc(A, B, C, grid, periods=1):
    """Arnold-Beltrami-Childress field, ``curl u = u``.

    ``u = (A sin z + C cos y, B sin x + A cos z, C sin y + B cos x)`` sampled on
    the grid. Unit wavenumber must be a lattice frequency, so the box must be
    ``2*pi*periods`` long.
    """
    expected = 2 * np.pi * periods
    if abs(grid.box_length - expected) > 1e-12 * expected:
        raise ValueError(
            f"ABC flow needs box_length = 2*pi*{periods} = {expected!r}, got {grid.box_length!r}"
        )
    if periods >= grid.n // 2:
        raise ValueError(f"{periods} periods are not resolved on n={grid.n}")
    x, y, z = grid.mesh()
    u = np.stack(
        [
            A * np.sin(z) + C * np.cos(y),
            B * np.sin(x) + A * np.cos(z),
            C * np.sin(y) + B * np.cos(x),
        ]
    )
    return SpectralVectorField.from_real(grid, u)


def random_solenoidal(grid, seed, k_peak=3.0, amplitude=1.0, plus_fraction=0.5, band_limit=True):
    """Smooth random divergence-free field with a prescribed L2 norm.

    White noise is shaped by ``(k/k_peak)**2 exp(-(k/k_peak)**2)`` and
    projected. ``plus_fraction`` is the share of the L2 energy carried by the
    ``plus`` component (1 gives a pure ``plus`` field). With ``band_limit``
    the field is confined to the 2/3-rule dealiased modes.
    """
    if not 0.0 <= plus_fraction <= 1.0:
        raise ValueError(f"plus_fraction must lie in [0, 1], got {plus_fraction}")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((3,) + grid.real_shape)
    f = SpectralVectorField.from_real(grid, noise)
    s = grid.kmag / k_peak
    shaped = f.coeffs * (s**2 * np.exp(-(s**2)))
    if band_limit:
        shaped = shaped * grid.dealias_mask
    u = leray_project(SpectralVectorField(grid, shaped))
    if l2_norm(u) == 0.0:
        return u
    p, m = helical_split(u)
    # the two parts are L2-orthogonal, so their energies add
    u = p * (np.sqrt(plus_fraction) / l2_norm(p)) + m * (np.sqrt(1 - plus_fraction) / l2_norm(m))
    return u * amplitude


@dataclass(frozen=True)
class ShellSpec:
    """Random single-polarity field on the shell ``k0(1-delta) < |k| < k0(1+delta)``."""

    k0: float
    delta: float = 0.1
    sign: int = 1
    seed: int = 0
    amplitude: float = 1.0

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError(f"shell delta must lie in (0, 1), got {self.delta}")
        if self.sign not in (1, -1):
            raise ValueError(f"shell sign must be +1 or -1, got {self.sign}")
        if not self.k0 > 0:
            raise ValueError(f"shell k0 must be positive, got {self.k0}")


def helical_basis(kx, ky, kz, sign):
    """Unit eigenvectors of ``i khat x`` with eigenvalue ``sign``.

    Built from a right-handed orthonormal triple ``(e1, e2, khat)`` as
    ``(e1 + sign*i*e2)/sqrt(2)``. Arrays broadcast; ``k = 0`` gives zeros.
    """
    k = np.stack(np.broadcast_arrays(kx, ky, kz)).astype(float)
    kmag = np.sqrt(np.sum(k * k, axis=0))
    safe = np.where(kmag > 0, kmag, 1.0)
    khat = k / safe
    # reference axis: z unless khat is nearly parallel to it
    ref = np.zeros_like(khat)
    near_z = np.abs(khat[2]) > 0.9
    ref[2] = np.where(near_z, 0.0, 1.0)
    ref[0] = np.where(near_z, 1.0, 0.0)
    e1 = np.cross(ref, khat, axis=0)
    e1 /= np.where(kmag > 0, np.sqrt(np.sum(e1 * e1, axis=0)), 1.0)
    e2 = np.cross(khat, e1, axis=0)
    h = (e1 + sign * 1j * e2) / np.sqrt(2.0)
    return np.where(kmag > 0, h, 0.0)


def make_shell_helical(spec, grid):
    """Pure-polarity random field supported on one spectral shell.

    Each lattice wavevector in the shell receives a complex Gaussian amplitude
    times the unit helical eigenvector of polarity ``spec.sign``; conjugate
    symmetry is imposed and the L2 norm set to ``spec.amplitude``.
    """
    lo = spec.k0 * (1 - spec.delta)
    hi = spec.k0 * (1 + spec.delta)
    km = grid.kmag
    shell = (km > lo) & (km < hi) & grid.resolved_mask
    if not np.any(shell):
        raise EmptyShellError(
            f"shell {lo:.6g} < |k| < {hi:.6g} holds no lattice wavevector of n={grid.n}, "
            f"L={grid.box_length:.6g} (spacing {grid.dk:.6g})"
        )
    rng = np.random.default_rng(spec.seed)
    amp = rng.standard_normal(grid.spectral_shape) + 1j * rng.standard_normal(grid.spectral_shape)
    k0, k1, k2 = grid.k_vectors
    h = helical_basis(k0, k1, k2, spec.sign)
    coeffs = np.where(shell, amp, 0.0) * h
    # the shell is symmetric under k -> -k, so re-masking keeps conjugate symmetry
    c = SpectralVectorField(grid, coeffs).enforce_reality().coeffs * shell
    u = SpectralVectorField(grid, c)
    return u * (spec.amplitude / l2_norm(u))


# -- whole-space profile g --------------------------------------------------

def _bump(s):
    """``exp(1 - 1/(1 - s**2))`` on ``|s| < 1``, zero outside; peak value 1."""
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1
    q = np.where(inside, 1 - s * s, 1.0)
    return np.where(inside, np.exp(1 - 1 / q), 0.0)


def _bump_prime(s):
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1
    q = np.where(inside, 1 - s * s, 1.0)
    return np.where(inside, _bump(s) * (-2 * s / q**2), 0.0)


@dataclass(frozen=True)
class DataG:
    """Annulus amplitude ``alpha`` and tangent field ``n`` defining g.

    ``alpha(xi) = amplitude * b((|xi| - 1)/delta) * b((theta - pi/2)/(pi/2 - polar_margin))``
    with ``b`` the standard smooth bump, so alpha vanishes outside the annulus
    and within ``polar_margin`` of the xi_3 axis where
    ``n(xi) = xi x e3 / |xi x e3|`` is singular.
    """

    delta: float = 0.1
    amplitude: float = 1.0
    polar_margin: float = np.pi / 8
    n_radial: int = 64
    n_polar: int = 128
    n_azimuth: int = 128
    heat_time: float = 0.0
    nu: float = 1.0

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if not 0 < self.polar_margin < np.pi / 2:
            raise ValueError("polar_margin must lie in (0, pi/2)")
        for name in ("n_radial", "n_polar", "n_azimuth"):
            if getattr(self, name) < 2:
                raise ValueError(f"{name} must be at least 2")

    def refined(self, factor=2):
        """Same profile at ``factor`` times the quadrature resolution."""
        return replace(
            self,
            n_radial=self.n_radial * factor,
            n_polar=self.n_polar * factor,
            n_azimuth=self.n_azimuth * factor,
        )

    def heat_evolved(self, nu, t):
        """Profile of the heat flow at time ``t``: alpha gains ``exp(-nu |xi|**2 t)``."""
        return replace(self, nu=float(nu), heat_time=float(t))

    def alpha(self, lam, theta):
        half = np.pi / 2 - self.polar_margin
        return self.amplitude * _bump((lam - 1) / self.delta) * _bump((theta - np.pi / 2) / half)

    def alpha_grad_norm(self, lam, theta):
        """``|grad alpha|`` in spherical coordinates (alpha has no azimuthal dependence)."""
        half = np.pi / 2 - self.polar_margin
        sr = (lam - 1) / self.delta
        st = (theta - np.pi / 2) / half
        d_lam = self.amplitude * _bump_prime(sr) / self.delta * _bump(st)
        d_theta = self.amplitude * _bump(sr) * _bump_prime(st) / half / lam
        return np.hypot(d_lam, d_theta)


@dataclass(frozen=True)
class QuadratureNodes:
    """Flattened nodes ``xi`` with weighted sine and cosine amplitudes."""

    xi: np.ndarray
    sin_amp: np.ndarray
    cos_amp: np.ndarray


def _gauss(n, a, b):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def quadrature_nodes(g):
    """Product rule in ``(|xi|, cos(theta), phi)``.

    Gauss-Legendre in radius over the annulus and in ``cos(theta)`` over the
    support of the polar bump; the periodic trapezoid rule in azimuth.
    Nodes where alpha vanishes are dropped.
    """
    lam, wl = _gauss(g.n_radial, 1 - g.delta, 1 + g.delta)
    cmax = np.cos(g.polar_margin)
    mu, wm = _gauss(g.n_polar, -cmax, cmax)
    phi = 2 * np.pi * np.arange(g.n_azimuth) / g.n_azimuth
    wp = np.full(g.n_azimuth, 2 * np.pi / g.n_azimuth)

    L, MU, PHI = np.meshgrid(lam, mu, phi, indexing="ij")
    W = (wl[:, None, None] * L[:, :1, :1] ** 2) * wm[None, :, None] * wp[None, None, :]
    theta = np.arccos(MU)
    alpha = g.alpha(L, theta)
    if g.heat_time:
        alpha = alpha * np.exp(-g.nu * L**2 * g.heat_time)
    st = np.sqrt(1 - MU**2)
    omega = np.stack([st * np.cos(PHI), st * np.sin(PHI), MU])
    # n = omega x e3 / |omega x e3| = (sin phi, -cos phi, 0)
    nvec = np.stack([np.sin(PHI), -np.cos(PHI), np.zeros_like(PHI)])
    bvec = np.cross(omega, nvec, axis=0)
    keep = alpha.ravel() != 0.0
    wa = (W * alpha).ravel()[keep]
    xi = (L * omega).reshape(3, -1)[:, keep].T.copy()
    sin_amp = (nvec.reshape(3, -1)[:, keep] * wa).T.copy()
    cos_amp = (bvec.reshape(3, -1)[:, keep] * wa).T.copy()
    return QuadratureNodes(xi, sin_amp, cos_amp)


def _as_points(x):
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    if pts.shape[-1] != 3:
        raise ValueError("points must have a trailing dimension of 3")
    return np.ascontiguousarray(pts)


def eval_g_quadrature(g, x, nodes=None):
    """Quadrature value of g at one point ``(3,)`` or many points ``(P, 3)``.

    ``g(x) = integral over the annulus of [n sin(x.xi) + xi x n/|xi| cos(x.xi)] alpha dxi``.
    """
    if nodes is None:
        nodes = quadrature_nodes(g)
    pts = _as_points(x)
    out = np.empty_like(pts)
    kernels.oscillatory_sum(pts, nodes.xi, nodes.sin_amp, nodes.cos_amp, out)
    return out[0] if np.ndim(x) == 1 else out


def eval_g_gradient(g, x, step=1e-3, nodes=None):
    """Central-difference Jacobian ``d g_i / d x_j``, shape ``(P, 3, 3)``."""
    if nodes is None:
        nodes = quadrature_nodes(g)
    pts = _as_points(x)
    jac = np.empty((pts.shape[0], 3, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = step
        hi = eval_g_quadrature(g, pts + e, nodes)
        lo = eval_g_quadrature(g, pts - e, nodes)
        jac[:, :, j] = (hi - lo) / (2 * step)
    return jac[0] if np.ndim(x) == 1 else jac


def max_resolved_radius(g):
    """Largest ``|x|`` whose oscillation ``|x||xi|`` the quadrature still resolves."""
    return 0.75 * min(g.n_azimuth, g.n_polar) / (1 + g.delta)


def compute_A(g):
    """``A = integral over [1-delta, 1+delta] of sup over the sphere of |alpha| + |grad alpha|``.

    The supremum is sampled on the polar quadrature nodes plus the equator
    (alpha is azimuth independent).
    """
    lam, wl = _gauss(g.n_radial, 1 - g.delta, 1 + g.delta)
    mu, _ = np.polynomial.legendre.leggauss(g.n_polar)
    theta = np.concatenate([np.arccos(mu), [np.pi / 2]])
    L, T = np.meshgrid(lam, theta, indexing="ij")
    vals = np.abs(g.alpha(L, T)) + g.alpha_grad_norm(L, T)
    return float(np.sum(wl * vals.max(axis=1)))


# -- cut-off ----------------------------------------------------------------

@dataclass(frozen=True)
class CutoffSpec:
    """Radial cut-off equal to 1 within ``M`` of ``center`` and 0 beyond ``2M``."""

    M: float
    center: tuple = None

    def __post_init__(self):
        if not self.M > 0:
            raise ValueError(f"cut-off radius M must be positive, got {self.M}")


def cutoff_profile(r, M):
    """Quintic smoothstep: ``1`` for ``r <= M``, ``0`` for ``r >= 2M``, C2 in between.

    ``|d chi/dr| <= 1.875/M`` and ``|d2 chi/dr2| <= 5.78/M**2``.
    """
    s = np.clip((np.asarray(r, dtype=float) - M) / M, 0.0, 1.0)
    return 1.0 - s**3 * (10 - 15 * s + 6 * s * s)


def _cutoff_dprofile(r, M):
    s = np.clip((np.asarray(r, dtype=float) - M) / M, 0.0, 1.0)
    return -30 * s * s * (1 - s) ** 2 / M


def _cutoff_geometry(spec, grid):
    L = grid.box_length
    if 2 * spec.M >= L / 2:
        raise CutoffWrapError(
            f"cutoff wraps: support radius 2M = {2 * spec.M:.6g} must be below L/2 = {L / 2:.6g}"
        )
    center = np.full(3, L / 2) if spec.center is None else np.asarray(spec.center, dtype=float)
    x = grid.mesh()
    d = np.stack([x[i] - center[i] for i in range(3)])
    r = np.sqrt(np.sum(d * d, axis=0))
    return d, r


def make_cutoff_field(spec, grid):
    """Cut-off samples ``chi(|x - center|)`` on the grid, shape ``(n, n, n)``."""
    _, r = _cutoff_geometry(spec, grid)
    return cutoff_profile(r, spec.M)


def cutoff_gradient(spec, grid):
    """Exact gradient of the cut-off at the grid nodes, shape ``(3, n, n, n)``."""
    d, r = _cutoff_geometry(spec, grid)
    dr = _cutoff_dprofile(r, spec.M)
    safe = np.where(r > 0, r, 1.0)
    return np.where(r > 0, dr / safe, 0.0) * d


# -- curl-curl construction -------------------------------------------------

def beltrami_eigenvalue(g, tol=1e-8):
    """Return ``k0`` with ``curl g = k0 g``; raise if the residual exceeds ``tol``."""
    norm2 = inner(g, g)
    if norm2 == 0.0:
        raise NotBeltramiError("zero field has no curl eigenvalue")
    cg = curl(g)
    k0 = inner(g, cg) / norm2
    res = l2_norm(cg - g * k0) / np.sqrt(norm2)
    if res > tol or k0 == 0.0:
        raise NotBeltramiError(f"curl eigenrelation residual {res:.3e} exceeds {tol:.1e}")
    return k0


def padded_grid(grid):
    return Grid(2 * grid.n, grid.box_length)


def cutoff_product(chi_hat, f, target):
    """Exact product of a scalar and a vector field on the doubled lattice ``target``.

    ``chi_hat`` is the half spectrum of the scalar on ``f.grid`` with Nyquist
    modes removed. Both factors have ``|m_i| < n/2``, so the product fits on
    ``2n`` points without aliasing.
    """
    chi_p = ifft_scalar(resample(chi_hat, f.grid, target), target)
    f_p = ifft_vector(resample(f.coeffs, f.grid, target), target)
    return SpectralVectorField(target, fft_vector(chi_p[None] * f_p))


def scalar_spectrum(chi, grid):
    """Half spectrum of real samples with Nyquist modes removed (mean kept)."""
    return fft_scalar(np.asarray(chi, dtype=float)) * grid.resolved_mask


def make_curlcurl_data(g_field, chi, tol=1e-8):
    """Finite-energy data ``u0 = curl curl(chi g) / k0**2`` and ``h0 = u0 - chi g``.

    ``g_field`` must satisfy ``curl g = k0 g``. The product ``chi g`` is formed
    exactly on the doubled lattice; ``u0`` is truncated back to ``g_field.grid``
    (still exactly divergence-free) while ``h0`` is returned on the doubled
    lattice so that ``u0 = h0 + chi g`` holds without truncation error.
    """
    grid = g_field.grid
    k0 = beltrami_eigenvalue(g_field, tol)
    target = padded_grid(grid)
    chi_g = cutoff_product(scalar_spectrum(chi, grid), g_field, target)
    u0_p = curl(curl(chi_g)) * (1.0 / k0**2)
    u0 = SpectralVectorField(grid, resample(u0_p.coeffs, target, grid))
    h0 = SpectralVectorField(target, resample(u0.coeffs, grid, target)) - chi_g
    return u0, h0
