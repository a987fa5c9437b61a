"""From a minimizing loop to a physical orbit, plus independent verification.

The loop u lives on the unit circle; the orbit is q(t) = u(t / T) with the
period recovered from the stationarity relation

    T^2 = integral |du/dt|^2  /  integral V'(u).u.

Verification never trusts the spectral representation: a Stormer-Verlet
integration of q'' = -grad V(q) from the orbit's initial condition checks
that the loop closes after one period and that the energy stays put.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .errors import DegenerateLoop, IntegratorBlowup, InvalidParameter, NonpositiveForce
from .loops import AntiperiodicLoop, SampleGrid, kinetic_norm, synthesize, synthesize_at
from .potentials import PotentialModel

BLOWUP_RADIUS = 1e12


@dataclass
class OrbitSolution:
    """A periodic orbit sampled over one period.

    times has out_samples+1 entries covering [0, T] inclusive; positions and
    velocities are the matching (out_samples+1, dim) arrays.  diagnostics
    carries the spectral residuals from rescale() and, after
    verify_by_integration(), the integrator's closure error and energy drift.
    """

    T: float
    h: float
    f_star: float
    loop: AntiperiodicLoop
    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    diagnostics: dict = field(default_factory=dict)


def recover_period(
    loop: AntiperiodicLoop, model: PotentialModel, grid: SampleGrid
) -> float:
    """T = sqrt(kinetic integral / force integral).

    Raises DegenerateLoop for a numerically zero loop and NonpositiveForce
    when the force integral is not positive (no period exists then).
    """
    kin = kinetic_norm(loop)
    if kin < 1e-12:
        raise DegenerateLoop("cannot recover a period from a numerically zero loop")
    U = synthesize(loop, grid)
    force = float(np.mean(np.sum(model.gradient(U) * U, axis=-1)))
    if force <= 0.0:
        raise NonpositiveForce(
            f"force integral is {force}; the period formula needs it positive"
        )
    return math.sqrt(kin / force)


def rescale(
    loop: AntiperiodicLoop,
    T: float,
    model: PotentialModel,
    h: float,
    out_samples: int = 512,
    f_star: float = math.nan,
) -> OrbitSolution:
    """Sample the orbit q(t) = u(t/T) at t_i = i T / out_samples, i = 0..out_samples.

    Fills the spectral diagnostics: ode_residual_inf is the largest
    |q'' + grad V(q)| over the samples, energy_err_inf the largest deviation
    of 0.5 |q'|^2 + V(q) from h.  Also records the orbit's size, how far it
    moves, and where its kinetic energy sits in the harmonic ladder (energy
    concentrated above the fundamental flags a candidate non-minimal period).
    """
    if T <= 0 or not np.isfinite(T):
        raise InvalidParameter(f"period must be positive and finite, got {T}")
    if out_samples < 2:
        raise InvalidParameter(f"out_samples must be >= 2, got {out_samples}")
    tau = np.linspace(0.0, 1.0, out_samples + 1)
    q = synthesize_at(loop, tau, 0)
    qd = synthesize_at(loop, tau, 1) / T
    qdd = synthesize_at(loop, tau, 2) / (T * T)

    residual = qdd + np.asarray(model.gradient(q))
    ode_residual_inf = float(np.max(np.linalg.norm(residual, axis=1)))
    energy = 0.5 * np.sum(qd * qd, axis=1) + np.asarray(model.value(q))
    energy_err_inf = float(np.max(np.abs(energy - h)))

    radii = np.linalg.norm(q, axis=1)
    displacement = float(np.max(np.linalg.norm(q - q[0], axis=1)))

    # kinetic energy by harmonic: (2 pi k)^2 (|a_k|^2 + |b_k|^2)
    ks = loop.harmonics.astype(np.float64)
    e_k = (2.0 * np.pi * ks) ** 2 * (
        np.sum(loop.a**2, axis=1) + np.sum(loop.b**2, axis=1)
    )
    total = float(np.sum(e_k))
    if total > 0:
        fundamental_fraction = float(e_k[0] / total)
        dominant = int(loop.harmonics[int(np.argmax(e_k))])
    else:
        fundamental_fraction = 0.0
        dominant = 1

    diagnostics = {
        "ode_residual_inf": ode_residual_inf,
        "energy_err_inf": energy_err_inf,
        "closure_error": None,
        "integrator_energy_drift": None,
        "integrator_steps": None,
        "max_radius": float(np.max(radii)),
        "displacement": displacement,
        "fundamental_energy_fraction": fundamental_fraction,
        "dominant_harmonic": dominant,
        "possible_nonminimal_period": dominant != 1,
    }
    return OrbitSolution(
        T=T,
        h=h,
        f_star=f_star,
        loop=loop,
        times=T * tau,
        positions=q,
        velocities=qd,
        diagnostics=diagnostics,
    )


def _verlet_generic(model, q0, v0, dt, steps, energy_ref, blowup_radius):
    # Same scheme as the radial kernels, driven through the model callables;
    # this is the path for custom potentials.
    q = np.array(q0, dtype=np.float64)
    v = np.array(v0, dtype=np.float64)
    blow2 = blowup_radius * blowup_radius
    grad = np.asarray(model.gradient(q), dtype=np.float64)
    max_err = abs(0.5 * float(v @ v) + float(model.value(q)) - energy_ref)
    half = 0.5 * dt
    for n in range(steps):
        v -= half * grad
        q += dt * v
        if float(q @ q) > blow2:
            return q, v, max_err, n + 1, True
        grad = np.asarray(model.gradient(q), dtype=np.float64)
        v -= half * grad
        err = abs(0.5 * float(v @ v) + float(model.value(q)) - energy_ref)
        if err > max_err:
            max_err = err
    return q, v, max_err, steps, False


def verify_by_integration(
    orbit: OrbitSolution,
    model: PotentialModel,
    steps: int = 8192,
    blowup_radius: float = BLOWUP_RADIUS,
) -> OrbitSolution:
    """Integrate q'' = -grad V over [0, T] and update the orbit diagnostics.

    closure_error is |q(T) - q(0)| + |q'(T) - q'(0)| for the integrated
    trajectory; integrator_energy_drift the largest energy deviation from h
    seen at whole steps.  Builtin radial potentials run in the kernel
    backend; anything else goes through the generic Python stepper.  Raises
    IntegratorBlowup if the trajectory leaves |q| <= blowup_radius.
    """
    if steps < 1:
        raise InvalidParameter(f"steps must be >= 1, got {steps}")
    dt = orbit.T / steps
    q0 = np.ascontiguousarray(orbit.positions[0], dtype=np.float64)
    v0 = np.ascontiguousarray(orbit.velocities[0], dtype=np.float64)
    if model.radial_spec is not None:
        kind, pa, pn = model.radial_spec
        q, v, drift, done, blew = backend.verlet_radial(
            kind, pa, pn, q0, v0, dt, steps, orbit.h, blowup_radius
        )
    else:
        q, v, drift, done, blew = _verlet_generic(
            model, q0, v0, dt, steps, orbit.h, blowup_radius
        )
    if blew:
        raise IntegratorBlowup(
            f"trajectory passed |q| = {blowup_radius} at step {done} of {steps}",
            step=done,
        )
    closure = float(np.linalg.norm(q - q0) + np.linalg.norm(v - v0))
    orbit.diagnostics["closure_error"] = closure
    orbit.diagnostics["integrator_energy_drift"] = float(drift)
    orbit.diagnostics["integrator_steps"] = steps
    return orbit
