"""Projected-gradient descent on the energy constraint set, with multi-start.

One descent iteration: evaluate f and both gradients, remove the constraint
component from grad f, step against the result, and pull the trial point back
onto the level set with the scaling projection.  An Armijo backtracking line
search (on the retracted objective, with a warm-started trial step) controls
the step length.

Convergence is declared on the Euclidean norm of the projected gradient,
relative to max(1, |f|).  The optional H1 preconditioner divides each
harmonic block by 1 + (2 pi k)^2, which flattens the spectral stiffness of
the kinetic term; it changes the descent direction only, never the
convergence measure.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    DegenerateLoop,
    EnorbitError,
    InvalidParameter,
    NoConvergedStart,
    NonMonotoneScaling,
    RootNotBracketed,
)
from .loops import TWO_PI, AntiperiodicLoop, SampleGrid, grid_for, kinetic_norm, random_loop
from .potentials import PotentialModel
from .variational import (
    ConstraintSpec,
    f_eval,
    project_to_constraint,
    tangent_project,
    value_and_gradients,
)

# Coefficient arrays never collapse to zero in a well-posed run; redraw the
# start (with the next seed) if the Gaussian draw happens to be degenerate.
_REDRAW_LIMIT = 100


@dataclass(frozen=True)
class SolverConfig:
    """Solver settings.  h is the prescribed energy; everything else has
    working defaults (K=15 odd harmonics, N=8(K+1) grid nodes)."""

    h: float
    K: int = 15
    N: Optional[int] = None
    grad_tol: float = 1e-8
    max_iters: int = 5000
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    step_init: float = 1.0
    starts: int = 8
    seed: int = 0
    precondition: bool = True
    projection_tol: Optional[float] = None  # None: 1e-14 * max(1, |h|)
    start_decay: float = 0.5

    def __post_init__(self):
        if not np.isfinite(self.h):
            raise InvalidParameter(f"h must be finite, got {self.h}")
        if self.K < 1 or self.K % 2 == 0:
            raise InvalidParameter(f"K must be a positive odd integer, got {self.K}")
        if self.N is not None and self.N < 4 * (self.K + 1):
            raise InvalidParameter(
                f"N = {self.N} is below the aliasing floor 4(K+1) = {4 * (self.K + 1)}"
            )
        if not self.grad_tol > 0:
            raise InvalidParameter("grad_tol must be positive")
        if self.max_iters < 1:
            raise InvalidParameter("max_iters must be >= 1")
        if not 0 < self.armijo_c < 1:
            raise InvalidParameter("armijo_c must be in (0, 1)")
        if not 0 < self.backtrack < 1:
            raise InvalidParameter("backtrack must be in (0, 1)")
        if not self.step_init > 0:
            raise InvalidParameter("step_init must be positive")
        if self.starts < 1:
            raise InvalidParameter("starts must be >= 1")

    def make_grid(self) -> SampleGrid:
        return grid_for(self.K, self.N)

    def constraint(self) -> ConstraintSpec:
        # The default drives projections well below the descent method's
        # certification needs: residual jitter in g feeds straight into f
        # noise through the retraction, and the line search cannot certify
        # decreases below that floor.
        tol = self.projection_tol
        if tol is None:
            tol = 1e-14 * max(1.0, abs(self.h))
        return ConstraintSpec(h=self.h, tol=tol)


@dataclass
class SolverReport:
    """Result of one start.  history holds (f, projected-gradient norm) per
    iterate, first entry at the projected start, last at the final iterate."""

    converged: bool
    stalled: bool
    iterations: int
    f_star: float
    loop: AntiperiodicLoop
    grad_norm: float
    g_residual: float
    history: list[tuple[float, float]]
    start_seed: int
    start_index: int

    @property
    def degenerate(self) -> bool:
        """Collapsed or nonpositive minimizer; a converged run should never be."""
        return self.f_star <= 0.0 or kinetic_norm(self.loop) <= 1e-8


@dataclass
class StartOutcome:
    """One multi-start entry: either a report or the error that ended it."""

    start_index: int
    seed: int
    converged: bool
    reason: str
    error_type: Optional[str] = None
    report: Optional[SolverReport] = None


@dataclass
class MultiStartResult:
    best: SolverReport
    outcomes: list[StartOutcome] = field(default_factory=list)

    @property
    def reports(self) -> list[SolverReport]:
        return [o.report for o in self.outcomes if o.report is not None]


def _preconditioner(K: int) -> np.ndarray:
    """Inverse H1 metric weights per harmonic block, broadcastable to
    coefficient arrays of shape (2, nk, dim)."""
    ks = np.arange(1, K + 1, 2, dtype=np.float64)
    return (1.0 / (1.0 + (TWO_PI * ks) ** 2))[None, :, None]


def _isotropic_fundamental(loop: AntiperiodicLoop) -> Optional[AntiperiodicLoop]:
    """Equal-norm orthogonal replacement for the fundamental harmonic pair.

    Returns the loop with its k=1 cosine/sine vectors (A, B) replaced by an
    orthonormal pair scaled to preserve (|A|^2 + |B|^2)/2, higher harmonics
    untouched; None when dim < 2 or the fundamental block vanishes.  Used to
    pick a canonical member out of a flat minimum family (see minimize).
    """
    if loop.dim < 2:
        return None
    A = loop.a[0]
    B = loop.b[0]
    s = 0.5 * (float(A @ A) + float(B @ B))
    if s <= 0.0:
        return None
    U, _, Vt = np.linalg.svd(np.stack([A, B], axis=1), full_matrices=False)
    iso = np.sqrt(s) * (U @ Vt)
    a_new = loop.a.copy()
    b_new = loop.b.copy()
    a_new[0] = iso[:, 0]
    b_new[0] = iso[:, 1]
    return AntiperiodicLoop(dim=loop.dim, K=loop.K, a=a_new, b=b_new)


def _draw_start(config: SolverConfig, dim: int, start_index: int):
    seed = config.seed + start_index
    for _ in range(_REDRAW_LIMIT):
        cand = random_loop(seed, config.K, dim, config.start_decay)
        if kinetic_norm(cand) >= 1e-12:
            return cand, seed
        seed += 1
    raise DegenerateLoop(
        f"start {start_index}: {_REDRAW_LIMIT} consecutive degenerate draws"
    )


def minimize(
    config: SolverConfig,
    model: PotentialModel,
    grid: Optional[SampleGrid] = None,
    start_index: int = 0,
) -> SolverReport:
    """Run projected-gradient descent from the start with seed seed+start_index.

    Returns a SolverReport; converged means the projected-gradient norm
    dropped to grad_tol * max(1, |f|).  A failed line search sets the stall
    flag instead of raising.  Projection failures (RootNotBracketed,
    NonMonotoneScaling, DegenerateLoop) propagate, tagged with the iteration.
    """
    if grid is None:
        grid = config.make_grid()
    grid.check_resolves(config.K)
    spec = config.constraint()

    cand, start_seed = _draw_start(config, model.dim, start_index)
    try:
        proj = project_to_constraint(cand, model, spec, grid)
    except (RootNotBracketed, NonMonotoneScaling, DegenerateLoop) as err:
        raise _tag(err, f"start {start_index}, initial projection") from err
    u = cand.scale(proj.a)
    g_residual = proj.residual

    weights = _preconditioner(config.K) if config.precondition else None
    history: list[tuple[float, float]] = []
    converged = False
    stalled = False
    step = config.step_init * config.backtrack  # so the first trial is step_init
    iterations = 0
    last_packed = None  # previous iterate, for the spectral step estimate
    last_negdir = None

    for it in range(config.max_iters + 1):
        f0, grad_f, grad_g = value_and_gradients(u, model, grid)
        resid = tangent_project(grad_f, grad_g)
        grad_norm = float(np.sqrt(np.vdot(resid, resid)))
        history.append((f0, grad_norm))
        iterations = it
        if grad_norm <= config.grad_tol * max(1.0, abs(f0)):
            converged = True
            break
        if it == config.max_iters:
            break

        if weights is None:
            direction = -resid
            slope = -grad_norm * grad_norm
        else:
            resid_w = tangent_project(grad_f, grad_g, weights=weights)
            wrw = weights * resid_w
            direction = -wrw
            # <grad f, direction> equals -<resid_w, W resid_w> exactly (the
            # weighted projection kills the grad_g component); summing the
            # positive form avoids the cancellation the raw inner product
            # hits once the gradient is small.
            slope = -float(np.vdot(resid_w, wrw))
        if slope >= 0.0:
            stalled = True
            break

        packed = u.packed()
        d_scale = float(np.max(np.abs(direction)))
        u_scale = float(np.max(np.abs(packed)))
        # Barzilai-Borwein trial step from the last accepted move; Armijo
        # below still gates acceptance, so descent stays monotone.  Falls
        # back to growing the previous accepted step when the curvature
        # estimate is unusable (first iteration, or s.y <= 0).
        negdir = -direction
        bb = 0.0
        if last_packed is not None:
            s = packed - last_packed
            sy = float(np.vdot(s, negdir - last_negdir))
            if sy > 0.0:
                bb = float(np.vdot(s, s)) / sy
        step = min(bb, 1e8) if bb > 0.0 else min(step / config.backtrack, 1e8)
        last_packed = packed
        last_negdir = negdir
        accepted = False
        while True:
            trial = AntiperiodicLoop.from_packed(
                config.K, model.dim, packed + step * direction
            )
            try:
                proj = project_to_constraint(trial, model, spec, grid)
            except (RootNotBracketed, NonMonotoneScaling, DegenerateLoop) as err:
                raise _tag(err, f"start {start_index}, iteration {it}") from err
            v = trial.scale(proj.a)
            f1 = f_eval(v, model, grid)
            if f1 <= f0 + config.armijo_c * step * slope:
                accepted = True
                break
            step *= config.backtrack
            if step * d_scale < 1e-16 * (1.0 + u_scale):
                break
        if not accepted:
            stalled = True
            break
        u = v
        g_residual = proj.residual

    f_star, grad_norm = history[-1]
    if converged:
        # A rotationally degenerate minimum (the harmonic potential's exact
        # flat family of fundamental-harmonic ellipses) leaves the reported
        # shape at the whim of the random start.  Report the canonical
        # member instead, but only when that member is itself a converged
        # minimizer of the same value: isotropize the fundamental harmonic,
        # re-project, and accept the swap only if f is unchanged within
        # 1e-12 relative and the gradient test still passes.  For any
        # potential without the degeneracy the candidate raises f and is
        # rejected, so this is a no-op there.
        cand = _isotropic_fundamental(u)
        if cand is not None:
            try:
                proj_c = project_to_constraint(cand, model, spec, grid)
                v = cand.scale(proj_c.a)
                f_c, gf_c, gg_c = value_and_gradients(v, model, grid)
                resid_c = tangent_project(gf_c, gg_c)
                gn_c = float(np.sqrt(np.vdot(resid_c, resid_c)))
                if (
                    f_c <= f_star + 1e-12 * (1.0 + abs(f_star))
                    and gn_c <= config.grad_tol * max(1.0, abs(f_c))
                ):
                    u = v
                    f_star = f_c
                    grad_norm = gn_c
                    g_residual = proj_c.residual
            except EnorbitError:
                pass
    return SolverReport(
        converged=converged,
        stalled=stalled,
        iterations=iterations,
        f_star=f_star,
        loop=u,
        grad_norm=grad_norm,
        g_residual=g_residual,
        history=history,
        start_seed=start_seed,
        start_index=start_index,
    )


def _tag(err, context):
    tagged = type(err)(f"{context}: {err}")
    if isinstance(err, NonMonotoneScaling):
        tagged.a = err.a
    return tagged


def multi_start(
    config: SolverConfig,
    model: PotentialModel,
    grid: Optional[SampleGrid] = None,
    workers: int = 1,
) -> MultiStartResult:
    """Run config.starts independent descents (seeds seed+0, ..., seed+starts-1).

    best is the converged report with the smallest f_star, ties broken by the
    smaller start index; the reduction is order-independent, so thread
    workers never change the result.  Raises NoConvergedStart when no start
    converges, carrying one outcome per start.
    """
    if grid is None:
        grid = config.make_grid()

    def run(i: int) -> StartOutcome:
        try:
            report = minimize(config, model, grid, start_index=i)
        except (RootNotBracketed, NonMonotoneScaling, DegenerateLoop) as err:
            return StartOutcome(
                start_index=i,
                seed=config.seed + i,
                converged=False,
                reason=str(err),
                error_type=type(err).__name__,
            )
        if report.converged:
            reason = "converged"
        elif report.stalled:
            reason = "line search stalled"
        else:
            reason = "iteration budget exhausted"
        return StartOutcome(
            start_index=i,
            seed=report.start_seed,
            converged=report.converged,
            reason=reason,
            report=report,
        )

    indices = range(config.starts)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, indices))
    else:
        outcomes = [run(i) for i in indices]

    winners = [o.report for o in outcomes if o.converged and o.report is not None]
    if not winners:
        raise NoConvergedStart(
            f"none of {config.starts} starts converged",
            outcomes=[(o.start_index, o.seed, o.error_type or o.reason) for o in outcomes],
        )
    best = min(winners, key=lambda r: (r.f_star, r.start_index))
    return MultiStartResult(best=best, outcomes=outcomes)
