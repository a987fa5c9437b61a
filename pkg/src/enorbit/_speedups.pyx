# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: trig loop synthesis/adjoint and radial Stormer-Verlet.

Same API as ``enorbit._reference``; ``enorbit.backend`` picks whichever
imports.  Keep the arithmetic in the two backends identical so the parity
tests stay tight.
"""

from libc.math cimport M_PI, cos, exp, fabs, pow, sin, sqrt

import numpy as np

NAME = "compiled"

cdef double TWO_PI = 2.0 * M_PI


def trig_synth(const double[:, ::1] ca, const double[:, ::1] cb, const long[::1] ks,
               const double[::1] times, int deriv=0):
    """Evaluate sum_k a_k cos(2 pi k t) + b_k sin(2 pi k t) (or d/dt, d2/dt2).

    ca, cb: (nk, dim) coefficient arrays; ks: (nk,) harmonic indices;
    times: (nt,). Returns (nt, dim).
    """
    if deriv < 0 or deriv > 2:
        raise ValueError(f"deriv must be 0, 1 or 2, got {deriv}")
    cdef Py_ssize_t nk = ca.shape[0]
    cdef Py_ssize_t dim = ca.shape[1]
    cdef Py_ssize_t nt = times.shape[0]
    out_arr = np.zeros((nt, dim), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t j, i, d
    cdef double t, w, c, s, fa, fb
    with nogil:
        for j in range(nt):
            t = times[j]
            for i in range(nk):
                w = TWO_PI * ks[i]
                c = cos(w * t)
                s = sin(w * t)
                if deriv == 0:
                    fa = c
                    fb = s
                elif deriv == 1:
                    fa = -w * s
                    fb = w * c
                else:
                    fa = -w * w * c
                    fb = -w * w * s
                for d in range(dim):
                    out[j, d] += fa * ca[i, d] + fb * cb[i, d]
    return out_arr


def trig_adjoint(const double[:, ::1] grid_fun, const long[::1] ks, const double[::1] times):
    """Adjoint of synthesis under the mean quadrature pairing.

    grid_fun: (nt, dim). Returns (a, b), each (nk, dim), where
    a[i] = (1/nt) sum_j grid_fun[j] cos(2 pi k_i t_j) and likewise with sin.
    """
    cdef Py_ssize_t nt = grid_fun.shape[0]
    cdef Py_ssize_t dim = grid_fun.shape[1]
    cdef Py_ssize_t nk = ks.shape[0]
    a_arr = np.zeros((nk, dim), dtype=np.float64)
    b_arr = np.zeros((nk, dim), dtype=np.float64)
    cdef double[:, ::1] a = a_arr
    cdef double[:, ::1] b = b_arr
    cdef Py_ssize_t i, j, d
    cdef double w, c, s, inv
    inv = 1.0 / nt
    with nogil:
        for i in range(nk):
            w = TWO_PI * ks[i]
            for j in range(nt):
                c = cos(w * times[j])
                s = sin(w * times[j])
                for d in range(dim):
                    a[i, d] += c * grid_fun[j, d]
                    b[i, d] += s * grid_fun[j, d]
            for d in range(dim):
                a[i, d] *= inv
                b[i, d] *= inv
    return a_arr, b_arr


cdef inline void _radial(int kind, double pa, double pn, double r2,
                         double* phi, double* dphi_r) nogil:
    # phi(r) and phi'(r)/r from r^2.  kind 0: pa*r^(2 pn); 1: exp(-1/r);
    # 2: their sum.  The exp well flushes to 0 below r=1e-50 (exp already
    # underflowed; the cutoff keeps 1/r^3 in normal float range).
    cdef double r, e
    if kind == 0:
        phi[0] = pa * pow(r2, pn)
        dphi_r[0] = 2.0 * pn * pa * pow(r2, pn - 1.0)
        return
    r = sqrt(r2)
    if r <= 1e-50:
        phi[0] = 0.0
        dphi_r[0] = 0.0
    else:
        e = exp(-1.0 / r)
        phi[0] = e
        dphi_r[0] = e / (r2 * r)
    if kind == 2:
        phi[0] += pa * pow(r2, pn)
        dphi_r[0] += 2.0 * pn * pa * pow(r2, pn - 1.0)


def verlet_radial(int kind, double pa, double pn, const double[::1] q0,
                  const double[::1] v0, double dt, long steps, double energy_ref,
                  double blowup_radius):
    """Stormer-Verlet integration of q'' = -grad V for a builtin radial V.

    Returns (q, v, max_energy_err, steps_done, blew_up) where max_energy_err
    tracks |0.5|v|^2 + V(q) - energy_ref| over all whole steps and blew_up is
    set when |q| exceeded blowup_radius (integration stops there).
    """
    cdef Py_ssize_t dim = q0.shape[0]
    q_arr = np.array(q0, dtype=np.float64)
    v_arr = np.array(v0, dtype=np.float64)
    cdef double[::1] q = q_arr
    cdef double[::1] v = v_arr
    cdef double blow2 = blowup_radius * blowup_radius
    cdef double half = 0.5 * dt
    cdef double r2 = 0.0, kin, phi, dphi_r, err, max_err
    cdef Py_ssize_t n, d
    cdef long done = steps
    cdef bint blew = False
    with nogil:
        for d in range(dim):
            r2 += q[d] * q[d]
        _radial(kind, pa, pn, r2, &phi, &dphi_r)
        kin = 0.0
        for d in range(dim):
            kin += v[d] * v[d]
        max_err = fabs(0.5 * kin + phi - energy_ref)
        for n in range(steps):
            for d in range(dim):
                v[d] -= half * dphi_r * q[d]
            r2 = 0.0
            for d in range(dim):
                q[d] += dt * v[d]
                r2 += q[d] * q[d]
            if r2 > blow2:
                done = n + 1
                blew = True
                break
            _radial(kind, pa, pn, r2, &phi, &dphi_r)
            kin = 0.0
            for d in range(dim):
                v[d] -= half * dphi_r * q[d]
                kin += v[d] * v[d]
            err = fabs(0.5 * kin + phi - energy_ref)
            if err > max_err:
                max_err = err
    return q_arr, v_arr, max_err, done, blew
