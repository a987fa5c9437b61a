"""Even potentials with superquadratic-type growth, and hypothesis checking.

A :class:`PotentialModel` bundles the three evaluators the variational layer
needs (value, gradient, Hessian-vector product) together with the growth
metadata (mu1, mu2, A) that determines the admissible energy window
(mu2/mu1, A).  Three builtin families are provided:

* ``make_power_law``:  V(q) = a |q|^(2n)
* ``make_exp_well``:   V(x) = exp(-1/|x|), V(0) = 0
* ``make_combined``:   their sum

All evaluators are vectorized over leading axes: value maps (..., dim) to
(...), gradient and hess_vec map (..., dim) to (..., dim).

``check_conditions`` samples a box and looks for counterexamples to the
structural hypotheses (evenness, outward force, monotone scaling quantity,
growth bound, asymptotic ceiling) plus the arithmetic window test for the
requested energy.  A pass means "no counterexample found among N samples",
never a proof.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvalidParameter

# Below this radius the exp well is flushed to exactly 0.  exp(-1/r) already
# underflows to 0.0 near r = 1.3e-3; the larger cutoff keeps the 1/r^3 and
# 1/r^6 factors in the derivatives finite.
# Flush the exp well to exactly 0 below this radius.  exp(-1/r) is already
# an exact float64 zero for every r < 1.3e-3, so no attainable value changes;
# the floor only keeps r**6 in the Hessian denominator from underflowing to
# 0 and turning the 0/0 into a NaN.
EXP_WELL_ZERO_RADIUS = 1e-50


@dataclass(frozen=True)
class GrowthParams:
    """Growth metadata: V'(q).q >= mu1 V(q) - mu2, and the asymptotic
    ceiling A of V + (1/2) V'(q).q (math.inf when unbounded)."""

    mu1: float
    mu2: float
    A: float

    def __post_init__(self):
        if not self.mu1 > 0:
            raise InvalidParameter(f"mu1 must be positive, got {self.mu1}")
        if self.mu2 < 0:
            raise InvalidParameter(f"mu2 must be nonnegative, got {self.mu2}")

    @property
    def window(self) -> tuple[float, float]:
        """Admissible energy interval (mu2/mu1, A); may be empty."""
        return (self.mu2 / self.mu1, self.A)

    def admits(self, h: float) -> bool:
        lo, hi = self.window
        return lo < h < hi


@dataclass(frozen=True)
class PotentialModel:
    """Evaluators for V, grad V and the Hessian-vector product.

    ``radial_spec`` marks the builtin radial families as (kind, a, n) so the
    compiled integrator can evaluate them without Python callbacks; custom
    models leave it None and take the generic path.
    """

    dim: int
    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    hess_vec: Callable[[np.ndarray, np.ndarray], np.ndarray]
    label: str
    growth: Optional[GrowthParams] = None
    radial_spec: Optional[tuple[int, float, float]] = None

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidParameter(f"dim must be >= 1, got {self.dim}")


def _check_power_args(a: float, n_exp: int):
    if not a > 0:
        raise InvalidParameter(f"power-law coefficient a must be > 0, got {a}")
    if not (isinstance(n_exp, (int, np.integer)) and n_exp >= 1):
        raise InvalidParameter(f"exponent n_exp must be an integer >= 1, got {n_exp}")


def make_power_law(a: float, n_exp: int, dim: int) -> PotentialModel:
    """V(q) = a |q|^(2 n_exp).  Growth: mu1 = 2 n_exp, mu2 = 0, A = inf."""
    _check_power_args(a, n_exp)
    n = int(n_exp)

    def value(q):
        s = np.sum(np.square(q), axis=-1)
        return a * s**n

    def gradient(q):
        q = np.asarray(q, dtype=np.float64)
        s = np.sum(np.square(q), axis=-1)
        return (2.0 * n * a) * s[..., None] ** (n - 1) * q

    def hess_vec(q, v):
        q = np.asarray(q, dtype=np.float64)
        v = np.asarray(v, dtype=np.float64)
        s = np.sum(np.square(q), axis=-1)
        qv = np.sum(q * v, axis=-1)
        if n == 1:
            # constant Hessian 2a I; avoids 0^(-1) at the origin
            return 2.0 * a * v
        out = (2.0 * n * a) * s[..., None] ** (n - 1) * v
        out += (4.0 * n * (n - 1) * a) * s[..., None] ** (n - 2) * qv[..., None] * q
        return out

    return PotentialModel(
        dim=dim,
        value=value,
        gradient=gradient,
        hess_vec=hess_vec,
        label=f"power_law(a={a}, n={n})",
        growth=GrowthParams(mu1=2.0 * n, mu2=0.0, A=math.inf),
        radial_spec=(0, float(a), float(n)),
    )


def _exp_well_pieces(q):
    """Common factors for the exp well: r, e^{-1/r}, and the zero mask."""
    q = np.asarray(q, dtype=np.float64)
    r = np.sqrt(np.sum(np.square(q), axis=-1))
    live = r > EXP_WELL_ZERO_RADIUS
    safe_r = np.where(live, r, 1.0)
    e = np.where(live, np.exp(-1.0 / safe_r), 0.0)
    return q, safe_r, e


def make_exp_well(dim: int) -> PotentialModel:
    """V(x) = exp(-1/|x|) with V(0) = 0.  Growth: mu1 = mu2 = 1, A = 1.

    The admissible window (1, 1) is empty: every energy level is rejected,
    which the projection layer reports as an unbracketable scaling root.
    """

    def value(q):
        _, _, e = _exp_well_pieces(q)
        return e

    def gradient(q):
        q, r, e = _exp_well_pieces(q)
        return (e / r**3)[..., None] * q

    def hess_vec(q, v):
        q, r, e = _exp_well_pieces(q)
        v = np.asarray(v, dtype=np.float64)
        qv = np.sum(q * v, axis=-1)
        return (e / r**3)[..., None] * v + (
            e * (1.0 - 3.0 * r) / r**6 * qv
        )[..., None] * q

    return PotentialModel(
        dim=dim,
        value=value,
        gradient=gradient,
        hess_vec=hess_vec,
        label="exp_well",
        growth=GrowthParams(mu1=1.0, mu2=1.0, A=1.0),
        radial_spec=(1, 0.0, 0.0),
    )


def make_combined(a: float, n_exp: int, dim: int) -> PotentialModel:
    """V(x) = a |x|^(2 n_exp) + exp(-1/|x|).

    Published growth params are mu1 = 1, mu2 = 1, A = inf: the exp term
    satisfies V'(x).x - V(x) > -1 and the power term dominates at infinity,
    so every energy level h > 1 is admissible.
    """
    _check_power_args(a, n_exp)
    power = make_power_law(a, n_exp, dim)
    well = make_exp_well(dim)

    def value(q):
        return power.value(q) + well.value(q)

    def gradient(q):
        return power.gradient(q) + well.gradient(q)

    def hess_vec(q, v):
        return power.hess_vec(q, v) + well.hess_vec(q, v)

    return PotentialModel(
        dim=dim,
        value=value,
        gradient=gradient,
        hess_vec=hess_vec,
        label=f"combined(a={a}, n={n_exp})",
        growth=GrowthParams(mu1=1.0, mu2=1.0, A=math.inf),
        radial_spec=(2, float(a), float(n_exp)),
    )


BUILTIN_FACTORIES = {
    "power_law": make_power_law,
    "exp_well": make_exp_well,
    "combined": make_combined,
}


# ---------------------------------------------------------------------------
# hypothesis checking


@dataclass
class Verdict:
    """Outcome for one condition: 'pass', 'fail' or 'not-checked'.

    For sampled conditions a fail carries the counterexample point (smallest
    sample index) and the offending values.
    """

    status: str
    note: str
    point: Optional[list] = None
    values: Optional[dict] = None

    def to_dict(self) -> dict:
        out = {"status": self.status, "note": self.note}
        if self.point is not None:
            out["point"] = self.point
        if self.values is not None:
            out["values"] = self.values
        return out


@dataclass
class ConditionReport:
    """Per-condition verdicts plus the sampling configuration that produced
    them.  Condition keys: evenness, outward_force, monotone_scaling,
    growth_bound, ceiling, energy_window."""

    verdicts: dict = field(default_factory=dict)
    box_radius: float = 0.0
    samples: int = 0
    seed: int = 0
    excluded_radius: float = 0.0
    growth: Optional[GrowthParams] = None
    h: Optional[float] = None

    CONDITION_KEYS = (
        "evenness",
        "outward_force",
        "monotone_scaling",
        "growth_bound",
        "ceiling",
        "energy_window",
    )

    def failed(self) -> list[str]:
        return [k for k, v in self.verdicts.items() if v.status == "fail"]

    def all_clear(self) -> bool:
        return not self.failed()

    def to_dict(self) -> dict:
        return {
            "verdicts": {k: self.verdicts[k].to_dict() for k in self.CONDITION_KEYS},
            "sampling": {
                "box_radius": self.box_radius,
                "samples": self.samples,
                "seed": self.seed,
                "excluded_radius": self.excluded_radius,
            },
            "growth": {
                "mu1": self.growth.mu1,
                "mu2": self.growth.mu2,
                "A": self.growth.A,
            },
            "h": self.h,
        }


def _sample_points(dim, box_radius, samples, seed):
    """Low-discrepancy radial shells times uniform random directions.

    Radii follow a golden-ratio sequence, log-uniform between the exclusion
    radius and box_radius, so both the near-origin and the large-radius
    behavior get probed.  The absolute floor 2e-3 keeps C-infinity-flat wells
    (exp(-1/r) underflows to exact 0 below r = 1.3e-3) out of the sample:
    there the force is a floating-point zero and strict positivity tests
    would report a spurious counterexample.
    """
    r_min = max(2e-3, 1e-3 * box_radius)
    if r_min >= box_radius:
        r_min = 0.5 * box_radius
    golden = (math.sqrt(5.0) - 1.0) / 2.0
    frac = np.mod((np.arange(samples) + 0.5) * golden, 1.0)
    radii = r_min * (box_radius / r_min) ** frac
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((samples, dim))
    norms = np.linalg.norm(dirs, axis=1)
    norms[norms < 1e-12] = 1.0
    dirs /= norms[:, None]
    return radii[:, None] * dirs, radii, r_min


def _first_failure(bad_mask):
    idx = np.flatnonzero(bad_mask)
    return int(idx[0]) if idx.size else None


def check_conditions(
    model: PotentialModel,
    params: GrowthParams,
    h: float,
    box_radius: float = 10.0,
    samples: int = 500,
    seed: int = 0,
) -> ConditionReport:
    """Sample the box and test the structural hypotheses plus the energy window.

    Verdicts are deterministic given the seed; a counterexample is always the
    sample with the smallest index.  The ceiling test compares
    V + 0.5 V'(q).q against params.A on the largest sampled radii and reports
    'not-checked' when the radial trend of the shell maxima is not monotone.
    """
    if box_radius <= 0:
        raise InvalidParameter(f"box_radius must be > 0, got {box_radius}")
    if samples < 1:
        raise InvalidParameter(f"need at least one sample, got {samples}")

    pts, radii, r_min = _sample_points(model.dim, box_radius, samples, seed)
    report = ConditionReport(
        box_radius=box_radius,
        samples=samples,
        seed=seed,
        excluded_radius=r_min,
        growth=params,
        h=h,
    )
    no_cx = f"no counterexample found among {samples} samples"

    vals = np.asarray(model.value(pts), dtype=np.float64)
    vals_neg = np.asarray(model.value(-pts), dtype=np.float64)
    grads = np.asarray(model.gradient(pts), dtype=np.float64)
    force = np.sum(grads * pts, axis=-1)  # V'(q).q
    hq = np.asarray(model.hess_vec(pts, pts), dtype=np.float64)
    hqq = np.sum(hq * pts, axis=-1)  # (V''(q)q, q)

    # evenness: V(-q) = V(q)
    even_bad = np.abs(vals - vals_neg) > 1e-12 * (1.0 + np.abs(vals))
    i = _first_failure(even_bad)
    if i is None:
        report.verdicts["evenness"] = Verdict("pass", no_cx)
    else:
        report.verdicts["evenness"] = Verdict(
            "fail",
            "V(q) and V(-q) differ",
            point=pts[i].tolist(),
            values={"V(q)": float(vals[i]), "V(-q)": float(vals_neg[i])},
        )

    # outward force: V'(q).q > 0 away from the origin
    i = _first_failure(~(force > 0.0))
    if i is None:
        report.verdicts["outward_force"] = Verdict("pass", no_cx)
    else:
        report.verdicts["outward_force"] = Verdict(
            "fail",
            "V'(q).q is not positive",
            point=pts[i].tolist(),
            values={"V'(q).q": float(force[i])},
        )

    # monotone scaling quantity: 3 V'(q).q + (V''(q)q, q) keeps one sign
    s3 = 3.0 * force + hqq
    if np.any(s3 == 0.0):
        i = _first_failure(s3 == 0.0)
        report.verdicts["monotone_scaling"] = Verdict(
            "fail",
            "3 V'(q).q + (V''(q)q,q) vanishes",
            point=pts[i].tolist(),
            values={"value": 0.0},
        )
    else:
        sign0 = math.copysign(1.0, s3[0])
        i = _first_failure(np.sign(s3) != sign0)
        if i is None:
            report.verdicts["monotone_scaling"] = Verdict("pass", no_cx)
        else:
            report.verdicts["monotone_scaling"] = Verdict(
                "fail",
                "3 V'(q).q + (V''(q)q,q) changes sign",
                point=pts[i].tolist(),
                values={"value": float(s3[i]), "sign_at_first_sample": sign0},
            )

    # growth bound: V'(q).q >= mu1 V(q) - mu2
    rhs = params.mu1 * vals - params.mu2
    bad = force < rhs - 1e-12 * (1.0 + np.abs(rhs))
    i = _first_failure(bad)
    if i is None:
        report.verdicts["growth_bound"] = Verdict("pass", no_cx)
    else:
        report.verdicts["growth_bound"] = Verdict(
            "fail",
            "V'(q).q < mu1 V(q) - mu2",
            point=pts[i].tolist(),
            values={"V'(q).q": float(force[i]), "mu1 V - mu2": float(rhs[i])},
        )

    # ceiling: V + 0.5 V'(q).q <= A on the largest radii, monotone trend
    report.verdicts["ceiling"] = _ceiling_verdict(
        pts, radii, vals + 0.5 * force, params.A, no_cx
    )

    # energy window: mu2/mu1 < h < A (pure arithmetic, no sampling)
    lo, hi = params.window
    if lo < h < hi:
        report.verdicts["energy_window"] = Verdict(
            "pass", f"h = {h} lies in the admissible window ({lo}, {hi})"
        )
    else:
        report.verdicts["energy_window"] = Verdict(
            "fail",
            f"h = {h} outside the admissible window ({lo}, {hi})",
            values={"mu2/mu1": lo, "h": h, "A": hi},
        )

    return report


def _ceiling_verdict(pts, radii, s5, A, no_cx, top_fraction=0.2, shells=5):
    """Test V + 0.5 V'(q).q <= A over the outer radii.

    Only the top ``top_fraction`` of samples by radius is used; a strict
    exceedance anywhere there is a fail.  The shell maxima (equal-count
    radial groups) must be monotone for the pass to count as evidence of an
    asymptotic ceiling; otherwise the verdict is 'not-checked'.
    """
    order = np.argsort(radii, kind="stable")
    n_top = min(len(radii), max(shells * 2, int(len(radii) * top_fraction)))
    top = order[-n_top:]
    shells = min(shells, n_top)  # keep every shell nonempty for tiny samples

    over = s5[top] > A
    if np.any(over):
        bad_global = np.full(len(radii), False)
        bad_global[top[over]] = True
        i = _first_failure(bad_global)
        return Verdict(
            "fail",
            "V + 0.5 V'(q).q exceeds A at a sampled point",
            point=pts[i].tolist(),
            values={"V + 0.5 V'(q).q": float(s5[i]), "A": A},
        )

    groups = np.array_split(top, shells)
    maxima = np.array([np.max(s5[g]) for g in groups])
    diffs = np.diff(maxima)
    tol = 1e-9 * (1.0 + np.max(np.abs(maxima)))
    monotone = np.all(diffs >= -tol) or np.all(diffs <= tol)
    if not monotone:
        return Verdict(
            "not-checked",
            "shell maxima of V + 0.5 V'(q).q are not monotone in radius; "
            "no asymptotic trend to extrapolate",
            values={"shell_maxima": maxima.tolist()},
        )
    return Verdict("pass", no_cx)
