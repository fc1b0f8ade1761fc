"""Numeric kernels with selectable backend.

The three loop-heavy kernels (phase accumulation along a sampled loop,
matrix symbol evaluation on a grid, batched determinants) exist in two
implementations: plain numpy and numba ``@njit``.  The active backend is
chosen by the ``FREDCORR_BACKEND`` environment variable:

``numpy``
    always use the pure numpy path,
``numba``
    always use the compiled path (raises if numba is unavailable),
``auto`` (default)
    use numba when importable, numpy otherwise.

Everything else in the package is SVD-bound and stays on numpy/LAPACK.
"""

import math
import os

import numpy as np

from .errors import InvalidInput

__all__ = [
    "HAS_NUMBA",
    "current_backend",
    "phase_scan",
    "eval_symbol_grid",
    "det_grid",
]

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised via FREDCORR_BACKEND=numpy
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(func):
            return func

        if len(args) == 1 and callable(args[0]):
            return args[0]
        return wrap


def current_backend():
    """Resolve the backend name from the environment.

    Returns ``"numpy"`` or ``"numba"``.
    """
    choice = os.environ.get("FREDCORR_BACKEND", "auto").strip().lower()
    if choice not in ("auto", "numpy", "numba"):
        raise InvalidInput(f"unknown FREDCORR_BACKEND value: {choice!r}")
    if choice == "auto":
        return "numba" if HAS_NUMBA else "numpy"
    if choice == "numba" and not HAS_NUMBA:
        raise InvalidInput("FREDCORR_BACKEND=numba but numba is not installed")
    return choice


# -- phase accumulation -------------------------------------------------

def phase_scan_numpy(values):
    """Sum the phase steps around a closed sampled loop.

    values : (N,) complex, samples of a nonvanishing loop, in order.
    Returns (total_phase, max_abs_step).  The loop is closed by a final
    step from ``values[-1]`` back to ``values[0]``.
    """
    w = np.asarray(values, dtype=np.complex128)
    steps = np.angle(np.roll(w, -1) * np.conj(w))
    return float(steps.sum()), float(np.abs(steps).max())


@njit(cache=True)
def _phase_scan_jit(w):  # pragma: no cover - compiled
    n = w.shape[0]
    total = 0.0
    max_step = 0.0
    for j in range(n):
        z = w[(j + 1) % n] * w[j].conjugate()
        step = math.atan2(z.imag, z.real)
        total += step
        a = abs(step)
        if a > max_step:
            max_step = a
    return total, max_step


def phase_scan_numba(values):
    w = np.ascontiguousarray(values, dtype=np.complex128)
    total, max_step = _phase_scan_jit(w)
    return float(total), float(max_step)


def phase_scan(values):
    if current_backend() == "numba":
        return phase_scan_numba(values)
    return phase_scan_numpy(values)


# -- symbol evaluation on a grid ----------------------------------------

def eval_symbol_grid_numpy(coeffs, d_min, zs):
    """Evaluate ``z**d_min * sum_p coeffs[p] z**p`` at each grid point.

    coeffs : (P, c, c) complex, zs : (N,) complex.  Returns (N, c, c).
    """
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    zs = np.asarray(zs, dtype=np.complex128)
    powers = zs[:, None] ** np.arange(coeffs.shape[0])
    vals = np.tensordot(powers, coeffs, axes=(1, 0))
    return vals * (zs ** d_min)[:, None, None]


@njit(cache=True)
def _eval_symbol_grid_jit(coeffs, d_min, zs):  # pragma: no cover - compiled
    npts = zs.shape[0]
    nc = coeffs.shape[1]
    out = np.empty((npts, nc, nc), dtype=np.complex128)
    for j in range(npts):
        z = zs[j]
        # Horner from the top coefficient
        acc = coeffs[coeffs.shape[0] - 1].copy()
        for p in range(coeffs.shape[0] - 2, -1, -1):
            for a in range(nc):
                for b in range(nc):
                    acc[a, b] = acc[a, b] * z + coeffs[p, a, b]
        scale = z ** d_min
        for a in range(nc):
            for b in range(nc):
                out[j, a, b] = acc[a, b] * scale
    return out


def eval_symbol_grid_numba(coeffs, d_min, zs):
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    zs = np.ascontiguousarray(zs, dtype=np.complex128)
    return _eval_symbol_grid_jit(coeffs, d_min, zs)


def eval_symbol_grid(coeffs, d_min, zs):
    if current_backend() == "numba":
        return eval_symbol_grid_numba(coeffs, d_min, zs)
    return eval_symbol_grid_numpy(coeffs, d_min, zs)


# -- batched determinants -----------------------------------------------

def det_grid_numpy(values):
    """Determinant of each (c, c) slice of a (N, c, c) stack."""
    return np.linalg.det(np.asarray(values, dtype=np.complex128))


@njit(cache=True)
def _det_grid_jit(values):  # pragma: no cover - compiled
    npts = values.shape[0]
    out = np.empty(npts, dtype=np.complex128)
    for j in range(npts):
        out[j] = np.linalg.det(values[j])
    return out


def det_grid_numba(values):
    values = np.ascontiguousarray(values, dtype=np.complex128)
    return _det_grid_jit(values)


def det_grid(values):
    if current_backend() == "numba":
        return det_grid_numba(values)
    return det_grid_numpy(values)
