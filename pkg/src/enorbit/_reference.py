"""Pure-numpy kernel implementations.

This module is the fallback backend: it mirrors the API of the compiled
extension ``enorbit._speedups`` exactly and is selected by ``enorbit.backend``
when the extension is unavailable (or forced via ``ENORBIT_BACKEND``).
"""
from __future__ import annotations

import math

import numpy as np

NAME = "reference"

TWO_PI = 2.0 * np.pi

# Trig tables keyed by (harmonics, time grid); bounded so repeated solver
# calls on the same grid do not rebuild them.
_TABLE_CAP = 32
_tables: dict = {}


def _trig_tables(ks: np.ndarray, times: np.ndarray):
    key = (ks.tobytes(), times.tobytes())
    hit = _tables.get(key)
    if hit is not None:
        return hit
    phase = TWO_PI * np.outer(times, ks.astype(np.float64))
    entry = (np.cos(phase), np.sin(phase))
    if len(_tables) >= _TABLE_CAP:
        _tables.clear()
    _tables[key] = entry
    return entry


def trig_synth(ca, cb, ks, times, deriv=0):
    """Evaluate sum_k a_k cos(2 pi k t) + b_k sin(2 pi k t) (or d/dt, d2/dt2).

    ca, cb: (nk, dim) coefficient arrays; ks: (nk,) harmonic indices;
    times: (nt,). Returns (nt, dim).
    """
    cos_t, sin_t = _trig_tables(np.asarray(ks), np.asarray(times))
    w = TWO_PI * np.asarray(ks, dtype=np.float64)
    if deriv == 0:
        return cos_t @ ca + sin_t @ cb
    if deriv == 1:
        return (-sin_t * w) @ ca + (cos_t * w) @ cb
    if deriv == 2:
        w2 = w * w
        return -(cos_t * w2) @ ca - (sin_t * w2) @ cb
    raise ValueError(f"deriv must be 0, 1 or 2, got {deriv}")


def trig_adjoint(grid_fun, ks, times):
    """Adjoint of synthesis under the mean quadrature pairing.

    grid_fun: (nt, dim). Returns (a, b), each (nk, dim), where
    a[i] = (1/nt) sum_j grid_fun[j] cos(2 pi k_i t_j) and likewise with sin.
    """
    cos_t, sin_t = _trig_tables(np.asarray(ks), np.asarray(times))
    nt = grid_fun.shape[0]
    a = cos_t.T @ grid_fun / nt
    b = sin_t.T @ grid_fun / nt
    return a, b


def _radial_eval(kind, pa, pn, r2):
    """phi(r) and phi'(r)/r for the builtin radial families, from r^2.

    kind 0: pa * r^(2 pn); kind 1: exp(-1/r); kind 2: their sum.
    The exp well is flushed to exactly 0 below r = 1e-50: exp(-1/r) already
    underflows there, and the cutoff keeps 1/r^3 in normal float range.
    """
    if kind == 0:
        return pa * r2**pn, 2.0 * pn * pa * r2 ** (pn - 1.0)
    r = math.sqrt(r2)
    if r <= 1e-50:
        phi, dphi_r = 0.0, 0.0
    else:
        e = math.exp(-1.0 / r)
        phi, dphi_r = e, e / (r2 * r)
    if kind == 2:
        phi += pa * r2**pn
        dphi_r += 2.0 * pn * pa * r2 ** (pn - 1.0)
    return phi, dphi_r


def verlet_radial(kind, pa, pn, q0, v0, dt, steps, energy_ref, blowup_radius):
    """Stormer-Verlet integration of q'' = -grad V for a builtin radial V.

    Returns (q, v, max_energy_err, steps_done, blew_up) where max_energy_err
    tracks |0.5|v|^2 + V(q) - energy_ref| over all whole steps and blew_up is
    set when |q| exceeded blowup_radius (integration stops there).
    """
    q = np.array(q0, dtype=np.float64)
    v = np.array(v0, dtype=np.float64)
    blow2 = blowup_radius * blowup_radius
    r2 = float(q @ q)
    phi, dphi_r = _radial_eval(kind, pa, pn, r2)
    max_err = abs(0.5 * float(v @ v) + phi - energy_ref)
    half = 0.5 * dt
    for n in range(steps):
        v -= half * dphi_r * q
        q += dt * v
        r2 = float(q @ q)
        if r2 > blow2:
            return q, v, max_err, n + 1, True
        phi, dphi_r = _radial_eval(kind, pa, pn, r2)
        v -= half * dphi_r * q
        err = abs(0.5 * float(v @ v) + phi - energy_ref)
        if err > max_err:
            max_err = err
    return q, v, max_err, steps, False
