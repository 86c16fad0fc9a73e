"""Hot numeric kernels with two interchangeable backends.

The sequential recurrences (latent spin propagation, OU paths) dominate the
runtime of Monte-Carlo batches. When numba is importable they run as
``@njit(parallel=True)`` loops over trajectories; otherwise a pure-numpy path
steps through time with row-vectorized operations. Set ``SPINTRACK_NUMBA=0``
to force the numpy path (``1`` to require numba). Both backends evaluate the
same per-element expression tree, and the test suite asserts they agree.

Per-trajectory noise is always pre-generated with seeded PCG64 streams, so
results do not depend on the backend's scheduling or thread count.
"""
from __future__ import annotations

import os

import numpy as np


def _resolve_backend() -> bool:
    flag = os.environ.get("SPINTRACK_NUMBA", "").strip().lower()
    if flag in {"0", "false", "off", "no"}:
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        if flag in {"1", "true", "on", "yes"}:
            raise ImportError("SPINTRACK_NUMBA=1 but numba is not importable")
        return False
    return True


USE_NUMBA = _resolve_backend()


# ---------------------------------------------------------------------------
# latent spin + homodyne record recurrence
#
#   p_{i+1} = p_i + (g_b*B_i - Gamma*p_i)*tau + q_spin*zs + q_ba*zb
#   Y_i     = gain*p_i + sy*zy_i
# ---------------------------------------------------------------------------

def _spin_record_loops(b, zs, zb, zy, p0, damp, gbt, q_spin, q_ba, gain, sy):
    m, d = b.shape
    y = np.empty((m, d))
    p_out = np.empty((m, d))
    for j in range(m):
        p = p0[j]
        for i in range(d):
            p_out[j, i] = p
            y[j, i] = gain * p + sy * zy[j, i]
            p = p + (gbt * b[j, i] - damp * p) + q_spin * zs[j, i] + q_ba * zb[j, i]
    return y, p_out


def _spin_record_numpy(b, zs, zb, zy, p0, damp, gbt, q_spin, q_ba, gain, sy):
    m, d = b.shape
    y = np.empty((m, d))
    p_out = np.empty((m, d))
    p = p0.copy()
    for i in range(d):
        p_out[:, i] = p
        y[:, i] = gain * p + sy * zy[:, i]
        p = p + (gbt * b[:, i] - damp * p) + q_spin * zs[:, i] + q_ba * zb[:, i]
    return y, p_out


# ---------------------------------------------------------------------------
# damped transverse component driven by measurement back-action only
#   x_{i+1} = x_i - Gamma*x_i*tau + q_spin*zs + q_ba*zb      (no signal drive)
# ---------------------------------------------------------------------------

def _damped_path_loops(zs, zb, x0, damp, q_spin, q_ba):
    m, d = zs.shape
    x_out = np.empty((m, d))
    for j in range(m):
        x = x0[j]
        for i in range(d):
            x_out[j, i] = x
            x = x - damp * x + q_spin * zs[j, i] + q_ba * zb[j, i]
    return x_out


def _damped_path_numpy(zs, zb, x0, damp, q_spin, q_ba):
    m, d = zs.shape
    x_out = np.empty((m, d))
    x = x0.copy()
    for i in range(d):
        x_out[:, i] = x
        x = x - damp * x + q_spin * zs[:, i] + q_ba * zb[:, i]
    return x_out


# ---------------------------------------------------------------------------
# Ornstein-Uhlenbeck paths, exact one-step transition
#   B_{i+1} = phi*B_i + sd*z_i
# ---------------------------------------------------------------------------

def _ou_paths_loops(z, b0, phi, sd):
    m, n = z.shape
    out = np.empty((m, n))
    for j in range(m):
        b = b0[j]
        for i in range(n):
            out[j, i] = b
            b = phi * b + sd * z[j, i]
    return out


def _ou_paths_numpy(z, b0, phi, sd):
    m, n = z.shape
    out = np.empty((m, n))
    b = b0.copy()
    for i in range(n):
        out[:, i] = b
        b = phi * b + sd * z[:, i]
    return out


if USE_NUMBA:
    from numba import njit, prange

    @njit(cache=True, parallel=True)
    def _spin_record_jit(b, zs, zb, zy, p0, damp, gbt, q_spin, q_ba, gain, sy):
        m, d = b.shape
        y = np.empty((m, d))
        p_out = np.empty((m, d))
        for j in prange(m):
            p = p0[j]
            for i in range(d):
                p_out[j, i] = p
                y[j, i] = gain * p + sy * zy[j, i]
                p = p + (gbt * b[j, i] - damp * p) + q_spin * zs[j, i] + q_ba * zb[j, i]
        return y, p_out

    @njit(cache=True, parallel=True)
    def _damped_path_jit(zs, zb, x0, damp, q_spin, q_ba):
        m, d = zs.shape
        x_out = np.empty((m, d))
        for j in prange(m):
            x = x0[j]
            for i in range(d):
                x_out[j, i] = x
                x = x - damp * x + q_spin * zs[j, i] + q_ba * zb[j, i]
        return x_out

    @njit(cache=True, parallel=True)
    def _ou_paths_jit(z, b0, phi, sd):
        m, n = z.shape
        out = np.empty((m, n))
        for j in prange(m):
            b = b0[j]
            for i in range(n):
                out[j, i] = b
                b = phi * b + sd * z[j, i]
        return out

    spin_record_paths = _spin_record_jit
    damped_paths = _damped_path_jit
    ou_paths = _ou_paths_jit
else:
    spin_record_paths = _spin_record_numpy
    damped_paths = _damped_path_numpy
    ou_paths = _ou_paths_numpy


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
