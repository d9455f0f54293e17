"""Fourier representation of vector fields on the 3-torus and linear spectral operators.

Conventions
-----------
* Coefficients are stored on the real-FFT half spectrum, shape
  ``(3, n, n, n//2 + 1)``. The forward transform is unnormalized and the
  inverse carries ``1/n**3`` (``scipy.fft`` defaults).
* Every functional carries the quadrature weight ``L**3 / n**6`` so it
  approximates a physical integral over the box ``[0, L)**3``.
* The mean mode and all Nyquist modes are zero for every field built by
  this package. The Nyquist wavevector has no sign, so curl and ``D**-1``
  are not defined there.
"""
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np
import scipy.fft as sfft

from . import kernels
from .errors import FieldError

__all__ = [
    "Grid",
    "SpectralVectorField",
    "HelicalPair",
    "leray_project",
    "curl",
    "laplacian",
    "apply_D_power",
    "helical_split",
    "inner",
    "l2_norm",
    "h1_norm",
    "sobolev_seminorm_sq",
    "helicity",
    "helicity_split_value",
    "dealias",
    "fft_vector",
    "ifft_vector",
    "fft_scalar",
    "ifft_scalar",
]


@dataclass(frozen=True)
class Grid:
    """Lattice of ``n**3`` points on the periodic box ``[0, box_length)**3``."""

    n: int
    box_length: float = 2 * np.pi

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 4 or self.n % 2:
            raise ValueError(f"grid n must be an even integer >= 4, got {self.n!r}")
        if not self.box_length > 0:
            raise ValueError(f"box_length must be positive, got {self.box_length!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "box_length", float(self.box_length))

    @property
    def spectral_shape(self):
        return (self.n, self.n, self.n // 2 + 1)

    @property
    def real_shape(self):
        return (self.n, self.n, self.n)

    @property
    def dk(self):
        """Lattice spacing in wavenumber, ``2*pi/L``."""
        return 2 * np.pi / self.box_length

    @property
    def dx(self):
        return self.box_length / self.n

    @property
    def weight(self):
        """Quadrature weight turning coefficient sums into box integrals."""
        return self.box_length**3 / float(self.n) ** 6

    @cached_property
    def m_full(self):
        """Signed integer frequencies along a full axis."""
        return np.fft.fftfreq(self.n, 1.0 / self.n).astype(np.int64)

    @cached_property
    def m_half(self):
        return np.fft.rfftfreq(self.n, 1.0 / self.n).astype(np.int64)

    @cached_property
    def kx(self):
        return self.dk * self.m_full.astype(float)

    @property
    def ky(self):
        return self.kx

    @cached_property
    def kz(self):
        return self.dk * self.m_half.astype(float)

    @cached_property
    def k_vectors(self):
        """Broadcastable ``(kx, ky, kz)`` triple on the half spectrum."""
        return (self.kx[:, None, None], self.ky[None, :, None], self.kz[None, None, :])

    @cached_property
    def k2(self):
        k0, k1, k2 = self.k_vectors
        return k0 * k0 + k1 * k1 + k2 * k2

    @cached_property
    def kmag(self):
        return np.sqrt(self.k2)

    @cached_property
    def half_weights(self):
        """Multiplicity of each half-spectrum mode in the full spectrum."""
        w = np.full(self.n // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return np.broadcast_to(w[None, None, :], self.spectral_shape)

    @cached_property
    def resolved_axis(self):
        """Per-axis mask excluding the Nyquist frequency."""
        return np.abs(self.m_full) < self.n // 2

    @cached_property
    def resolved_half(self):
        return self.m_half < self.n // 2

    @cached_property
    def resolved_mask(self):
        r = self.resolved_axis
        return r[:, None, None] & r[None, :, None] & self.resolved_half[None, None, :]

    @cached_property
    def dealias_axis(self):
        """Per-axis 2/3-rule masks: keep ``|m| <= n/3``."""
        keep = 3 * np.abs(self.m_full) <= self.n
        keep_half = 3 * np.abs(self.m_half) <= self.n
        return keep, keep, keep_half

    @cached_property
    def dealias_mask(self):
        a, b, c = self.dealias_axis
        return a[:, None, None] & b[None, :, None] & c[None, None, :]

    @cached_property
    def coords(self):
        """1-D node coordinates ``j * L / n``."""
        return np.arange(self.n) * self.dx

    def mesh(self):
        x = self.coords
        return np.meshgrid(x, x, x, indexing="ij")

    def scaled(self, factor):
        """Same lattice count on a box shrunk by ``factor``."""
        return Grid(self.n, self.box_length / factor)


def fft_scalar(a):
    return sfft.rfftn(a, axes=(-3, -2, -1))


def ifft_scalar(c, grid):
    return sfft.irfftn(c, s=grid.real_shape, axes=(-3, -2, -1))


fft_vector = fft_scalar
ifft_vector = ifft_scalar


@dataclass(frozen=True, eq=False)
class SpectralVectorField:
    """Three complex Fourier coefficient arrays of a real vector field."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.shape != (3,) + self.grid.spectral_shape:
            raise ValueError(
                f"coefficient shape {c.shape} does not match grid {(3,) + self.grid.spectral_shape}"
            )
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros((3,) + grid.spectral_shape, dtype=np.complex128))

    @classmethod
    def from_real(cls, grid, values):
        """Transform real samples ``(3, n, n, n)``; drops the mean and Nyquist modes."""
        values = np.asarray(values, dtype=float)
        c = fft_vector(values)
        c *= grid.resolved_mask
        c[:, 0, 0, 0] = 0.0
        return cls(grid, c)

    def to_real(self):
        return ifft_vector(self.coeffs, self.grid)

    def with_coeffs(self, coeffs):
        return SpectralVectorField(self.grid, coeffs)

    def copy(self):
        return SpectralVectorField(self.grid, self.coeffs.copy())

    @property
    def mean(self):
        return self.coeffs[:, 0, 0, 0]

    def enforce_reality(self):
        """Project onto Hermitian-consistent coefficients via a real-space round trip."""
        return SpectralVectorField(self.grid, fft_vector(self.to_real()))

    def reality_defect(self):
        """Relative change under :meth:`enforce_reality` (0 for a real field)."""
        ref = np.linalg.norm(self.coeffs)
        if ref == 0.0:
            return 0.0
        return float(np.linalg.norm(self.enforce_reality().coeffs - self.coeffs) / ref)

    def divergence_residual(self):
        """``||khat . c|| / ||c||`` over the half spectrum (0 for solenoidal fields)."""
        g = self.grid
        k0, k1, k2 = g.k_vectors
        kinv = np.where(g.kmag > 0, 1.0 / np.where(g.kmag > 0, g.kmag, 1.0), 0.0)
        div = (k0 * self.coeffs[0] + k1 * self.coeffs[1] + k2 * self.coeffs[2]) * kinv
        num = np.sum(g.half_weights * np.abs(div) ** 2)
        den = np.sum(g.half_weights * np.sum(np.abs(self.coeffs) ** 2, axis=0))
        if den == 0.0:
            return 0.0
        return float(np.sqrt(num / den))

    def _check_other(self, other):
        if not isinstance(other, SpectralVectorField):
            return NotImplemented
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")
        return other

    def __add__(self, other):
        if self._check_other(other) is NotImplemented:
            return NotImplemented
        return SpectralVectorField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other):
        if self._check_other(other) is NotImplemented:
            return NotImplemented
        return SpectralVectorField(self.grid, self.coeffs - other.coeffs)

    def __neg__(self):
        return SpectralVectorField(self.grid, -self.coeffs)

    def __mul__(self, scalar):
        if isinstance(scalar, SpectralVectorField):
            return NotImplemented
        return SpectralVectorField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__


class HelicalPair(NamedTuple):
    """The ``(plus, minus)`` curl-eigencomponents of a solenoidal field."""

    plus: SpectralVectorField
    minus: SpectralVectorField

    def total(self):
        return self.plus + self.minus


def _require_mean_zero(f, what):
    if np.any(f.mean != 0.0):
        raise FieldError(f"{what} needs a mean-zero field; k=0 coefficient is {f.mean!r}")


def leray_project(f):
    """Remove the gradient part: ``c - k (k.c)/|k|**2`` at every ``k != 0``."""
    g = f.grid
    out = np.empty_like(f.coeffs)
    every = np.ones(g.n, dtype=bool)
    kernels.project_masked(
        f.coeffs, g.kx, g.ky, g.kz, every, every, np.ones(g.n // 2 + 1, dtype=bool), out
    )
    return SpectralVectorField(g, out)


def dealias(f):
    """Zero all modes with any ``|m_i| > n/3``."""
    return SpectralVectorField(f.grid, f.coeffs * f.grid.dealias_mask)


def curl(f):
    """Spectral curl ``i k x c``."""
    k0, k1, k2 = f.grid.k_vectors
    c = f.coeffs
    out = np.empty_like(c)
    out[0] = 1j * (k1 * c[2] - k2 * c[1])
    out[1] = 1j * (k2 * c[0] - k0 * c[2])
    out[2] = 1j * (k0 * c[1] - k1 * c[0])
    return SpectralVectorField(f.grid, out)


def laplacian(f):
    return SpectralVectorField(f.grid, -f.grid.k2 * f.coeffs)


def _kmag_power(grid, s):
    if s == 0:
        return np.ones(grid.spectral_shape)
    km = grid.kmag
    pos = km > 0
    return np.where(pos, np.where(pos, km, 1.0) ** s, 0.0)


def apply_D_power(f, s):
    """Multiply each mode by ``|k|**s``, the fractional power of ``sqrt(-Laplacian)``.

    Negative powers are allowed for mean-zero fields; a nonzero mean mode
    raises :class:`FieldError` because ``D**s`` is then ill defined.
    """
    if s == 0:
        return f.copy()
    if s < 0:
        _require_mean_zero(f, f"D**{s}")
    return SpectralVectorField(f.grid, f.coeffs * _kmag_power(f.grid, s))


def helical_split(u, tol=1e-10):
    """Split a solenoidal field into curl-eigencomponents.

    ``plus = (u + D**-1 curl u)/2`` and ``minus = (u - D**-1 curl u)/2``, so
    that ``curl plus = D plus`` and ``curl minus = -D minus``.

    Parameters
    ----------
    u : SpectralVectorField
        Mean-zero, divergence-free field.
    tol : float or None
        Largest accepted :meth:`~SpectralVectorField.divergence_residual`;
        ``None`` skips the check (hot loops on fields known to be solenoidal).

    Raises
    ------
    FieldError
        If ``u`` has a mean mode or is not divergence-free within ``tol``.
    """
    _require_mean_zero(u, "helical_split")
    res = 0.0 if tol is None else u.divergence_residual()
    if tol is not None and res > tol:
        raise FieldError(f"helical_split needs a divergence-free field; residual {res:.3e} > {tol:.1e}")
    g = u.grid
    plus = np.empty_like(u.coeffs)
    minus = np.empty_like(u.coeffs)
    kernels.helical_parts(u.coeffs, g.kx, g.ky, g.kz, plus, minus)
    return HelicalPair(SpectralVectorField(g, plus), SpectralVectorField(g, minus))


def inner(f, h):
    """L2 inner product over the box (real part)."""
    g = f.grid
    s = np.sum(f.coeffs * np.conj(h.coeffs), axis=0)
    return float(g.weight * np.sum(g.half_weights * s.real))


def sobolev_seminorm_sq(f, s):
    """``||D**s f||**2`` over the box; ``s = 0`` is the squared L2 norm."""
    g = f.grid
    dens = np.sum(f.coeffs.real**2 + f.coeffs.imag**2, axis=0)
    if s != 0:
        dens = dens * _kmag_power(g, 2 * s)
    return float(g.weight * np.sum(g.half_weights * dens))


def l2_norm(f):
    return float(np.sqrt(sobolev_seminorm_sq(f, 0)))


def h1_norm(f):
    """``(||f||**2 + ||grad f||**2)**0.5`` with the full gradient."""
    return float(np.sqrt(sobolev_seminorm_sq(f, 0) + sobolev_seminorm_sq(f, 1)))


def helicity(u):
    """``integral u . curl u`` over the box."""
    return inner(u, curl(u))


def helicity_split_value(pair):
    """``||D**0.5 plus||**2 - ||D**0.5 minus||**2``; equals the helicity of ``plus + minus``."""
    return sobolev_seminorm_sq(pair.plus, 0.5) - sobolev_seminorm_sq(pair.minus, 0.5)


def resample(c, grid, target):
    """Zero-pad or truncate half-spectrum coefficients between lattices of one box.

    ``c`` has trailing shape ``grid.spectral_shape``. Values are rescaled so the
    real-space field is unchanged wherever it is representable on ``target``.
    Truncation drops every mode with ``|m_i| >= target.n/2``.
    """
    if target.box_length != grid.box_length:
        raise ValueError("resample keeps the box; lengths differ")
    lead = c.shape[:-3]
    out = np.zeros(lead + target.spectral_shape, dtype=np.complex128)
    keep = min(grid.n, target.n) // 2
    src = grid.m_full
    dst = target.m_full
    src_ok = np.abs(src) < keep
    dst_ok = np.abs(dst) < keep
    # identical ordering of signed frequencies on both sides after masking
    ix_src = np.nonzero(src_ok)[0]
    ix_dst = np.nonzero(dst_ok)[0]
    order_src = ix_src[np.argsort(src[ix_src], kind="stable")]
    order_dst = ix_dst[np.argsort(dst[ix_dst], kind="stable")]
    nz = keep
    block = c[..., order_src[:, None], order_src[None, :], :nz]
    out[..., order_dst[:, None], order_dst[None, :], :nz] = block
    out *= (target.n / grid.n) ** 3
    return out


def resample_field(f, target):
    return SpectralVectorField(target, resample(f.coeffs, f.grid, target))
