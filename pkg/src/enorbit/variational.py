"""Constrained variational structure on the loop space.

The objective is

    f(u) = (1/4) * integral |du/dt|^2 * integral V'(u).u

restricted to the level set g(u) = h of

    g(u) = integral [ V(u) + (1/2) V'(u).u ].

Along the ray a -> g(a u) the constraint value is strictly monotone for
admissible potentials, so the level set is reached by a scalar root find in
the scale factor ("scaling projection").  That projection is the retraction
used by the optimizer, and the first-order machinery here (gradients of f
and g in coefficient space, tangent projection) is everything a projected
descent method needs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateLoop,
    EnorbitError,
    InvalidParameter,
    NonMonotoneScaling,
    RootNotBracketed,
    VanishingConstraintGradient,
)
from .loops import (
    TWO_PI,
    AntiperiodicLoop,
    SampleGrid,
    coefficient_adjoint,
    kinetic_norm,
    synthesize,
)
from .potentials import PotentialModel

# Loops with kinetic integral below this are treated as zero: the scaling
# projection is ill-posed on them and the optimizer redraws such starts.
DEGENERATE_KINETIC = 1e-12


@dataclass(frozen=True)
class ConstraintSpec:
    """Energy level h plus root-find controls for the scaling projection.

    tol is absolute on |g(a u) - h|; bracket_cap bounds the upward bracket
    expansion, and hitting it means no scale reaches the level h (the ray's
    asymptotic ceiling sits at or below h).
    """

    h: float
    tol: float = 1e-12
    max_iterations: int = 200
    bracket_cap: float = 1e8

    def __post_init__(self):
        if not np.isfinite(self.h):
            raise InvalidParameter(f"energy level must be finite, got {self.h}")
        if not self.tol > 0:
            raise InvalidParameter(f"tolerance must be positive, got {self.tol}")
        if self.max_iterations < 1:
            raise InvalidParameter("max_iterations must be >= 1")
        if not self.bracket_cap > 1:
            raise InvalidParameter("bracket_cap must be > 1")


@dataclass(frozen=True)
class ProjectionResult:
    """Outcome of the scaling projection.

    a: accepted scale factor, residual: g(a u) - h there, iterations: root
    refinement steps after bracketing, bracket: the (a_lo, a_hi) interval the
    expansion produced, deriv_min: smallest d/da g(a u) seen at the accepted
    iterates (inf when the root was found without refinement).
    """

    a: float
    residual: float
    iterations: int
    bracket: tuple[float, float]
    deriv_min: float


def g_eval(loop: AntiperiodicLoop, model: PotentialModel, grid: SampleGrid) -> float:
    """Constraint functional: mean of V(u) + 0.5 V'(u).u over the grid."""
    U = synthesize(loop, grid)
    vals = model.value(U) + 0.5 * np.sum(model.gradient(U) * U, axis=-1)
    return float(np.mean(vals))


def g_scale_derivative(
    loop: AntiperiodicLoop, model: PotentialModel, grid: SampleGrid, a: float
) -> float:
    """d/da of g(a u): mean of 1.5 V'(a u).u + 0.5 (V''(a u)(a u)).u."""
    U = synthesize(loop, grid)
    return _dg_from_samples(U, model, a)


def _g_from_samples(U, model, a):
    W = a * U
    vals = model.value(W) + 0.5 * np.sum(model.gradient(W) * W, axis=-1)
    return float(np.mean(vals))


def _dg_from_samples(U, model, a):
    W = a * U
    term = 1.5 * np.sum(model.gradient(W) * U, axis=-1)
    term += 0.5 * np.sum(model.hess_vec(W, W) * U, axis=-1)
    return float(np.mean(term))


def project_to_constraint(
    loop: AntiperiodicLoop,
    model: PotentialModel,
    spec: ConstraintSpec,
    grid: SampleGrid,
) -> ProjectionResult:
    """Find a > 0 with g(a u) = h by bracketing plus safeguarded Newton.

    The bracket grows by doubling from a = 1 (or halves, if g(u) already
    overshoots h); the refinement is Newton with bisection fallback, so it
    cannot leave the bracket.  Raises DegenerateLoop for a numerically zero
    loop, RootNotBracketed when no scale reaches h before the expansion cap,
    and NonMonotoneScaling when d/da g(a u) changes sign along the way.
    """
    grid.check_resolves(loop.K)
    if kinetic_norm(loop) < DEGENERATE_KINETIC:
        raise DegenerateLoop(
            "cannot project a numerically zero loop: g(a u) is constant in a"
        )
    U = synthesize(loop, grid)
    h, tol = spec.h, spec.tol

    g1 = _g_from_samples(U, model, 1.0)
    if abs(g1 - h) <= tol:
        return ProjectionResult(
            a=1.0, residual=g1 - h, iterations=0, bracket=(1.0, 1.0), deriv_min=np.inf
        )

    # Bracket so that g(a_lo u) <= h <= g(a_hi u).  A decrease of g while
    # expanding upward (or an increase while shrinking) contradicts the
    # one-signed scaling derivative and is reported as such.
    if g1 < h:
        a_lo, g_lo = 1.0, g1
        a_hi = 2.0
        while True:
            g_hi = _g_from_samples(U, model, a_hi)
            if g_hi < g_lo - 1e-10 * (1.0 + abs(g_lo)):
                raise NonMonotoneScaling(
                    f"g(a u) decreased from {g_lo} to {g_hi} while expanding "
                    f"the scale to a = {a_hi}",
                    a=a_hi,
                )
            if g_hi >= h:
                break
            a_lo, g_lo = a_hi, g_hi
            a_hi *= 2.0
            if a_hi > spec.bracket_cap:
                raise RootNotBracketed(
                    f"g(a u) reached only {g_hi} < h = {h} at the expansion cap "
                    f"a = {a_lo}; the energy level sits at or above the "
                    "asymptotic ceiling along this direction"
                )
    else:
        a_hi, g_hi = 1.0, g1
        a_lo = 0.5
        while True:
            g_lo = _g_from_samples(U, model, a_lo)
            if g_lo > g_hi + 1e-10 * (1.0 + abs(g_hi)):
                raise NonMonotoneScaling(
                    f"g(a u) increased from {g_hi} to {g_lo} while shrinking "
                    f"the scale to a = {a_lo}",
                    a=a_lo,
                )
            if g_lo <= h:
                break
            a_hi, g_hi = a_lo, g_lo
            a_lo *= 0.5
            if a_lo < 1e-12:
                raise RootNotBracketed(
                    f"g(a u) stayed above h = {h} down to a = {a_hi}; "
                    "no admissible scale in this direction"
                )
    bracket = (a_lo, a_hi)

    # Safeguarded Newton: keep the iterate inside [a_lo, a_hi], fall back to
    # bisection whenever the Newton step leaves the bracket or stops making
    # progress (the rtsafe scheme).
    if g_hi > g_lo:
        a = a_lo + (h - g_lo) * (a_hi - a_lo) / (g_hi - g_lo)
        a = min(max(a, a_lo), a_hi)
    else:
        a = 0.5 * (a_lo + a_hi)
    dx_old = abs(a_hi - a_lo)
    dx = dx_old
    deriv_min = np.inf
    deriv_sign = 0.0

    g = _g_from_samples(U, model, a)
    res = g - h
    iterations = 1
    eps = float(np.finfo(np.float64).eps)
    while abs(res) > tol:
        if (a_hi - a_lo) <= 4.0 * eps * max(abs(a_lo), abs(a_hi)):
            break  # bracket at machine width; the residual is roundoff-limited
        if iterations >= spec.max_iterations:
            raise EnorbitError(
                f"scaling projection did not reach |g - h| <= {tol} in "
                f"{spec.max_iterations} iterations (residual {res})"
            )
        d = _dg_from_samples(U, model, a)
        if d < deriv_min:
            deriv_min = d
        s = np.sign(d)
        if s != 0.0:
            if deriv_sign == 0.0:
                deriv_sign = s
            elif s != deriv_sign:
                raise NonMonotoneScaling(
                    f"d/da g(a u) changed sign at a = {a}", a=a
                )
        if res < 0:
            a_lo = a
        else:
            a_hi = a
        newton_invalid = (
            d == 0.0
            or ((a - a_hi) * d - res) * ((a - a_lo) * d - res) > 0
            or abs(2.0 * res) > abs(dx_old * d)
        )
        dx_old = dx
        if newton_invalid:
            dx = 0.5 * (a_hi - a_lo)
            a = a_lo + dx
        else:
            dx = res / d
            a = a - dx
        g = _g_from_samples(U, model, a)
        res = g - h
        iterations += 1

    d = _dg_from_samples(U, model, a)
    if d < deriv_min:
        deriv_min = d
    if deriv_sign != 0.0 and np.sign(d) not in (0.0, deriv_sign):
        raise NonMonotoneScaling(f"d/da g(a u) changed sign at a = {a}", a=a)

    return ProjectionResult(
        a=float(a),
        residual=float(res),
        iterations=iterations,
        bracket=bracket,
        deriv_min=float(deriv_min),
    )


def f_eval(loop: AntiperiodicLoop, model: PotentialModel, grid: SampleGrid) -> float:
    """Objective: (1/4) * kinetic integral * mean of V'(u).u."""
    U = synthesize(loop, grid)
    force = float(np.mean(np.sum(model.gradient(U) * U, axis=-1)))
    return 0.25 * kinetic_norm(loop) * force


def _kinetic_gradient(loop: AntiperiodicLoop) -> np.ndarray:
    """Coefficient gradient of the kinetic integral: (2 pi k)^2 per block."""
    w2 = (TWO_PI * loop.harmonics.astype(np.float64)) ** 2
    return w2[None, :, None] * loop.packed()


def f_gradient(
    loop: AntiperiodicLoop, model: PotentialModel, grid: SampleGrid
) -> np.ndarray:
    """Coefficient-space gradient of f, shape (2, nk, dim).

    Product rule: d(kinetic) carries (2 pi k)^2 weights, d(force integral)
    pulls V''(u)u + V'(u) back through the adjoint of synthesis.
    """
    U = synthesize(loop, grid)
    grads = model.gradient(U)
    force = float(np.mean(np.sum(grads * U, axis=-1)))
    kin = kinetic_norm(loop)
    grad_force = coefficient_adjoint(model.hess_vec(U, U) + grads, grid, loop.K)
    return 0.25 * (_kinetic_gradient(loop) * force + kin * grad_force)


def constraint_gradient(
    loop: AntiperiodicLoop, model: PotentialModel, grid: SampleGrid
) -> np.ndarray:
    """Coefficient-space gradient of g: adjoint of 1.5 V'(u) + 0.5 V''(u)u.

    With this adjoint convention the pairing <grad g, coeffs(u)> equals the
    scaling derivative d/da g(a u) at a = 1 exactly.
    """
    U = synthesize(loop, grid)
    w = 1.5 * model.gradient(U) + 0.5 * model.hess_vec(U, U)
    return coefficient_adjoint(w, grid, loop.K)


def value_and_gradients(
    loop: AntiperiodicLoop, model: PotentialModel, grid: SampleGrid
) -> tuple[float, np.ndarray, np.ndarray]:
    """f, grad f and grad g in one pass (samples and model calls shared).

    Equivalent to (f_eval, f_gradient, constraint_gradient); the optimizer
    calls this once per iterate.
    """
    U = synthesize(loop, grid)
    grads = model.gradient(U)
    hess_uu = model.hess_vec(U, U)
    force = float(np.mean(np.sum(grads * U, axis=-1)))
    kin = kinetic_norm(loop)
    grad_force = coefficient_adjoint(hess_uu + grads, grid, loop.K)
    grad_f = 0.25 * (_kinetic_gradient(loop) * force + kin * grad_force)
    grad_g = coefficient_adjoint(1.5 * grads + 0.5 * hess_uu, grid, loop.K)
    return 0.25 * kin * force, grad_f, grad_g


def tangent_project(
    grad_f: np.ndarray, grad_g: np.ndarray, weights: np.ndarray | None = None
) -> np.ndarray:
    """Remove the grad_g component: grad_f - lambda grad_g.

    With weights (an inverse-metric diagonal, broadcastable over the
    coefficient array) lambda is computed in that weighted inner product, so
    the result is weights-orthogonal to grad_g; without weights it is the
    Euclidean tangent projection.
    """
    nf = float(np.sqrt(np.vdot(grad_f, grad_f)))
    ng = float(np.sqrt(np.vdot(grad_g, grad_g)))
    if ng <= 1e-14 * nf:
        raise VanishingConstraintGradient(
            f"|grad g| = {ng} is negligible against |grad f| = {nf}"
        )
    wgg = grad_g if weights is None else weights * grad_g
    lam = float(np.vdot(grad_f, wgg)) / float(np.vdot(grad_g, wgg))
    return grad_f - lam * grad_g


def force_integral_floor(h: float, mu1: float, mu2: float) -> float:
    """Lower bound for the force integral on the constraint set:
    (h - mu2/mu1) / (1/2 + 1/mu1), attained with equality by power laws."""
    return (h - mu2 / mu1) / (0.5 + 1.0 / mu1)
