"""Hot pointwise kernels, each in a loop form (numba) and a numpy form.

The loop bodies are plain Python functions so they can be compiled on
demand (the benchmark compiles them even when ``HELINS_NUMBA=0``). The
names exported at module level (``cross``, ``project_masked``,
``helical_parts``, ``oscillatory_sum``) are whichever variant
:data:`helins._accel.USE_NUMBA` selects.

Spectral arrays use the real-FFT half spectrum: shape ``(3, n, n, n//2+1)``
with 1-D wavenumber vectors ``kx (n,)``, ``ky (n,)``, ``kz (n//2+1,)``.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, njit

__all__ = [
    "cross",
    "project_masked",
    "helical_parts",
    "oscillatory_sum",
    "LOOP_KERNELS",
    "NUMPY_KERNELS",
    "compile_loops",
]


# -- loop forms -------------------------------------------------------------

def _cross_loop(a, b, out):
    n0, n1, n2 = a.shape[1], a.shape[2], a.shape[3]
    for i in range(n0):
        for j in range(n1):
            for l in range(n2):
                a0 = a[0, i, j, l]
                a1 = a[1, i, j, l]
                a2 = a[2, i, j, l]
                b0 = b[0, i, j, l]
                b1 = b[1, i, j, l]
                b2 = b[2, i, j, l]
                out[0, i, j, l] = a1 * b2 - a2 * b1
                out[1, i, j, l] = a2 * b0 - a0 * b2
                out[2, i, j, l] = a0 * b1 - a1 * b0
    return out


def _project_masked_loop(f, kx, ky, kz, mx, my, mz, out):
    for i in range(kx.shape[0]):
        for j in range(ky.shape[0]):
            for l in range(kz.shape[0]):
                if not (mx[i] and my[j] and mz[l]):
                    out[0, i, j, l] = 0.0
                    out[1, i, j, l] = 0.0
                    out[2, i, j, l] = 0.0
                    continue
                k0 = kx[i]
                k1 = ky[j]
                k2 = kz[l]
                kk = k0 * k0 + k1 * k1 + k2 * k2
                f0 = f[0, i, j, l]
                f1 = f[1, i, j, l]
                f2 = f[2, i, j, l]
                if kk == 0.0:
                    out[0, i, j, l] = 0.0
                    out[1, i, j, l] = 0.0
                    out[2, i, j, l] = 0.0
                    continue
                s = (k0 * f0 + k1 * f1 + k2 * f2) / kk
                out[0, i, j, l] = f0 - k0 * s
                out[1, i, j, l] = f1 - k1 * s
                out[2, i, j, l] = f2 - k2 * s
    return out


def _helical_loop(c, kx, ky, kz, plus, minus):
    for i in range(kx.shape[0]):
        for j in range(ky.shape[0]):
            for l in range(kz.shape[0]):
                k0 = kx[i]
                k1 = ky[j]
                k2 = kz[l]
                kk = math.sqrt(k0 * k0 + k1 * k1 + k2 * k2)
                if kk == 0.0:
                    for m in range(3):
                        plus[m, i, j, l] = 0.0
                        minus[m, i, j, l] = 0.0
                    continue
                k0 /= kk
                k1 /= kk
                k2 /= kk
                c0 = c[0, i, j, l]
                c1 = c[1, i, j, l]
                c2 = c[2, i, j, l]
                # i * khat x c
                r0 = 1j * (k1 * c2 - k2 * c1)
                r1 = 1j * (k2 * c0 - k0 * c2)
                r2 = 1j * (k0 * c1 - k1 * c0)
                plus[0, i, j, l] = 0.5 * (c0 + r0)
                plus[1, i, j, l] = 0.5 * (c1 + r1)
                plus[2, i, j, l] = 0.5 * (c2 + r2)
                minus[0, i, j, l] = 0.5 * (c0 - r0)
                minus[1, i, j, l] = 0.5 * (c1 - r1)
                minus[2, i, j, l] = 0.5 * (c2 - r2)
    return plus, minus


def _oscillatory_loop(points, xi, a, b, out):
    npts = points.shape[0]
    nodes = xi.shape[0]
    for p in range(npts):
        x0 = points[p, 0]
        x1 = points[p, 1]
        x2 = points[p, 2]
        s0 = 0.0
        s1 = 0.0
        s2 = 0.0
        for q in range(nodes):
            ph = x0 * xi[q, 0] + x1 * xi[q, 1] + x2 * xi[q, 2]
            sn = math.sin(ph)
            cs = math.cos(ph)
            s0 += a[q, 0] * sn + b[q, 0] * cs
            s1 += a[q, 1] * sn + b[q, 1] * cs
            s2 += a[q, 2] * sn + b[q, 2] * cs
        out[p, 0] = s0
        out[p, 1] = s1
        out[p, 2] = s2
    return out


# -- numpy forms ------------------------------------------------------------

def _cross_np(a, b, out):
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]
    return out


def _project_masked_np(f, kx, ky, kz, mx, my, mz, out):
    k0 = kx[:, None, None]
    k1 = ky[None, :, None]
    k2 = kz[None, None, :]
    kk = k0 * k0 + k1 * k1 + k2 * k2
    mask = mx[:, None, None] & my[None, :, None] & mz[None, None, :] & (kk > 0.0)
    inv = np.where(kk > 0.0, 1.0 / np.where(kk > 0.0, kk, 1.0), 0.0)
    s = (k0 * f[0] + k1 * f[1] + k2 * f[2]) * inv
    out[0] = np.where(mask, f[0] - k0 * s, 0.0)
    out[1] = np.where(mask, f[1] - k1 * s, 0.0)
    out[2] = np.where(mask, f[2] - k2 * s, 0.0)
    return out


def _helical_np(c, kx, ky, kz, plus, minus):
    k0 = kx[:, None, None]
    k1 = ky[None, :, None]
    k2 = kz[None, None, :]
    kk = np.sqrt(k0 * k0 + k1 * k1 + k2 * k2)
    nz = kk > 0.0
    inv = np.where(nz, 1.0 / np.where(nz, kk, 1.0), 0.0)
    k0 = k0 * inv
    k1 = k1 * inv
    k2 = k2 * inv
    r0 = 1j * (k1 * c[2] - k2 * c[1])
    r1 = 1j * (k2 * c[0] - k0 * c[2])
    r2 = 1j * (k0 * c[1] - k1 * c[0])
    for m, r in enumerate((r0, r1, r2)):
        plus[m] = np.where(nz, 0.5 * (c[m] + r), 0.0)
        minus[m] = np.where(nz, 0.5 * (c[m] - r), 0.0)
    return plus, minus


def _oscillatory_np(points, xi, a, b, out, chunk=65536):
    out[...] = 0.0
    for start in range(0, xi.shape[0], chunk):
        sl = slice(start, start + chunk)
        ph = points @ xi[sl].T
        out += np.sin(ph) @ a[sl] + np.cos(ph) @ b[sl]
    return out


LOOP_KERNELS = {
    "cross": _cross_loop,
    "project_masked": _project_masked_loop,
    "helical_parts": _helical_loop,
    "oscillatory_sum": _oscillatory_loop,
}

NUMPY_KERNELS = {
    "cross": _cross_np,
    "project_masked": _project_masked_np,
    "helical_parts": _helical_np,
    "oscillatory_sum": _oscillatory_np,
}


def compile_loops():
    """Compile every loop kernel with numba regardless of ``HELINS_NUMBA``."""
    import numba

    return {name: numba.njit(cache=True, nogil=True)(fn) for name, fn in LOOP_KERNELS.items()}


if USE_NUMBA:
    cross = njit(_cross_loop)
    project_masked = njit(_project_masked_loop)
    helical_parts = njit(_helical_loop)
    oscillatory_sum = njit(_oscillatory_loop)
else:
    cross = _cross_np
    project_masked = _project_masked_np
    helical_parts = _helical_np
    oscillatory_sum = _oscillatory_np
