"""Acceptance gate: eleven end-to-end criteria with frozen oracles.

Each test prints one "[criterion N] PASS/FAIL" line directly to the real
stdout (bypassing capture) so the gate's verdict is visible in any pytest
run, then asserts.  Oracles were derived and cross-checked by independent
quadrature before the package was built; the numeric constants here are
frozen from that run.
"""
import contextlib
import json
import math
import sys
import time

import numpy as np
import pytest

from enorbit.cli import main
from enorbit.errors import NoConvergedStart
from enorbit.loops import AntiperiodicLoop, grid_for, random_loop, synthesize
from enorbit.optimizer import SolverConfig, multi_start
from enorbit.orbit import recover_period, rescale, verify_by_integration
from enorbit.potentials import check_conditions, make_combined, make_exp_well, make_power_law
from enorbit.variational import (
    ConstraintSpec,
    constraint_gradient,
    f_eval,
    f_gradient,
    force_integral_floor,
    g_eval,
    project_to_constraint,
)

import conftest
from conftest import circle_loop, fd_gradient

PI2 = math.pi**2
TWO_PI = 2.0 * math.pi


def _report(n, ok, detail=""):
    line = f"[criterion {n}] {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f"  {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line, file=sys.__stdout__, flush=True)


@contextlib.contextmanager
def criterion(n):
    """Collects (label, bool) checks; prints the verdict line; asserts."""
    checks = []
    try:
        yield checks
    except BaseException:
        _report(n, False, "error during evaluation")
        raise
    failing = ", ".join(label for label, flag in checks if not flag)
    _report(n, not failing, failing)
    assert not failing, f"criterion {n} failed: {failing}"


def solve_end_to_end(model, h, K, N=None, starts=4, seed=0, steps=8192):
    cfg = SolverConfig(h=h, K=K, N=N, starts=starts, seed=seed)
    grid = cfg.make_grid()
    result = multi_start(cfg, model, grid)
    best = result.best
    T = recover_period(best.loop, model, grid)
    orbit = rescale(best.loop, T, model, h, f_star=best.f_star)
    verify_by_integration(orbit, model, steps=steps)
    return result, T, orbit


@pytest.fixture(scope="module")
def harmonic_solution():
    model = make_power_law(0.5, 1, 2)
    t0 = time.perf_counter()
    result, T, orbit = solve_end_to_end(model, h=1.0, K=5, N=48)
    runtime = time.perf_counter() - t0
    return {"model": model, "result": result, "T": T, "orbit": orbit, "runtime": runtime}


def test_criterion_01_harmonic_oracle(harmonic_solution):
    best = harmonic_solution["result"].best
    orbit = harmonic_solution["orbit"]
    d = orbit.diagnostics
    max_radius = float(np.max(np.linalg.norm(orbit.positions, axis=1)))
    with criterion(1) as checks:
        checks.append(("converged", best.converged))
        checks.append(("f_star", abs(best.f_star - PI2) <= 1e-6 * PI2))
        checks.append(("T", abs(harmonic_solution["T"] - TWO_PI) <= 1e-6 * TWO_PI))
        checks.append(("max_radius", abs(max_radius - 1.0) <= 1e-5))
        checks.append(("ode_residual", d["ode_residual_inf"] <= 1e-8))
        checks.append(("drift", d["integrator_energy_drift"] <= 1e-6))
        checks.append(("runtime", harmonic_solution["runtime"] < 5.0))


def test_criterion_02_isochrony_sweep():
    model = make_power_law(0.5, 1, 2)
    runs = {}
    for h in (0.5, 1.0, 2.0):
        result, T, _ = solve_end_to_end(model, h=h, K=5, N=48, steps=1024)
        runs[h] = (T, result.best.f_star)
    periods = [T for T, _ in runs.values()]
    f1 = runs[1.0][1]
    with criterion(2) as checks:
        spread = max(periods) - min(periods)
        checks.append(("T_constant", spread <= 1e-6 * min(periods)))
        for h, (_, f) in runs.items():
            ok = abs(f / f1 - h * h) <= 1e-6 * h * h
            checks.append((f"f_ratio_h={h:g}", ok))


def test_criterion_03_general_frequency():
    model = make_power_law(2.0, 1, 2)
    _, T, _ = solve_end_to_end(model, h=1.0, K=5, N=48, steps=1024)
    with criterion(3) as checks:
        checks.append(("T", abs(T - math.pi) <= 1e-6 * math.pi))


def test_criterion_04_quartic_comparison():
    model = make_power_law(1.0, 2, 2)
    h = 3.0
    result, T, orbit = solve_end_to_end(model, h=h, K=15)
    best = result.best
    # feasible competitor: the fundamental circle of radius (h/3)^(1/4),
    # pushed onto the constraint set by the scaling projection
    circle = circle_loop(radius=(h / 3.0) ** 0.25, K=15)
    grid = grid_for(15)
    proj = project_to_constraint(circle, model, ConstraintSpec(h=h), grid)
    f_circle = f_eval(circle.scale(proj.a), model, grid)
    d = orbit.diagnostics
    grad_max = float(np.max(np.linalg.norm(model.gradient(orbit.positions), axis=1)))
    with criterion(4) as checks:
        checks.append(("converged", best.converged))
        checks.append(("below_circle", best.f_star <= f_circle + 1e-8))
        checks.append(("ode_residual", d["ode_residual_inf"] <= 1e-6 * (1.0 + grad_max)))
        checks.append(("energy_err", d["energy_err_inf"] <= 1e-8 * (1.0 + h)))
        checks.append(("closure", d["closure_error"] <= 1e-5))
        checks.append(("steps", d["integrator_steps"] == 8192))


def test_criterion_05_combined_existence():
    model = make_combined(1.0, 1, 2)
    h = 2.0
    result, T, orbit = solve_end_to_end(model, h=h, K=15)
    q = orbit.positions
    displacement = float(np.max(np.linalg.norm(q - q[0], axis=1)))
    max_radius = float(np.max(np.linalg.norm(q, axis=1)))
    d = orbit.diagnostics
    grad_max = float(np.max(np.linalg.norm(model.gradient(q), axis=1)))
    with criterion(5) as checks:
        checks.append(("some_start_converged", any(o.converged for o in result.outcomes)))
        checks.append(("nonconstant", displacement > 1e-6 * max_radius))
        checks.append(("ode_residual", d["ode_residual_inf"] <= 1e-6 * (1.0 + grad_max)))
        checks.append(("energy_err", d["energy_err_inf"] <= 1e-8 * (1.0 + h)))
        checks.append(("closure", d["closure_error"] <= 1e-5))


def test_criterion_06_infeasible_energy(tmp_path):
    model = make_exp_well(2)
    cfg = SolverConfig(h=2.0, K=5, starts=4)
    outcomes = None
    try:
        multi_start(cfg, model)
    except NoConvergedStart as err:
        outcomes = err.outcomes
    exit_code = main(
        [
            "solve", "--potential", "exp_well", "--energy", "2",
            "--K", "5", "--starts", "4", "--out-dir", str(tmp_path),
        ]
    )
    with criterion(6) as checks:
        checks.append(("raises", outcomes is not None))
        if outcomes is not None:
            checks.append(("start_count", len(outcomes) == 4))
            checks.append(
                ("all_root_not_bracketed",
                 all(kind == "RootNotBracketed" for _, _, kind in outcomes))
            )
        checks.append(("cli_exit_3", exit_code == 3))


def test_criterion_07_checker_matches_known_window():
    model = make_exp_well(2)
    sampled = ("evenness", "outward_force", "monotone_scaling", "growth_bound", "ceiling")
    with criterion(7) as checks:
        for h in (0.5, 1.0):
            report = check_conditions(
                model, model.growth, h=h, box_radius=50.0, samples=2000, seed=0
            )
            for key in sampled:
                checks.append((f"{key}_h={h:g}", report.verdicts[key].status == "pass"))
            checks.append(
                (f"energy_window_h={h:g}", report.verdicts["energy_window"].status == "fail")
            )


def test_criterion_08_gradient_suite():
    models = [make_power_law(1.0, 1, 2), make_exp_well(2), make_combined(1.0, 1, 2)]
    grid = grid_for(5)
    with criterion(8) as checks:
        for model in models:
            worst = 0.0
            for seed in range(20):
                u = random_loop(seed, K=5, dim=2, decay=0.7)
                for fun, grad in (
                    (f_eval, f_gradient),
                    (g_eval, constraint_gradient),
                ):
                    an = grad(u, model, grid)
                    fd = fd_gradient(lambda lp: fun(lp, model, grid), u)
                    # per coefficient block (one vector per harmonic and
                    # cos/sin slot): guarded relative error
                    err = np.linalg.norm(fd - an, axis=-1)
                    ref = 1.0 + np.linalg.norm(an, axis=-1)
                    worst = max(worst, float(np.max(err / ref)))
            checks.append((f"{model.label}: max_block_err={worst:.2e}", worst <= 1e-6))


def test_criterion_09_projection_suite():
    cases = [
        (make_power_law(1.0, 1, 2), 1.0),
        (make_combined(1.0, 1, 2), 2.0),
        (make_exp_well(2), 0.5),
    ]
    grid = grid_for(5)
    with criterion(9) as checks:
        for model, h in cases:
            spec = ConstraintSpec(h=h)
            worst_res = 0.0
            deriv_ok = True
            floor_ok = True
            mu1, mu2 = model.growth.mu1, model.growth.mu2
            floor = force_integral_floor(h, mu1, mu2)
            for seed in range(100):
                u = random_loop(seed, K=5, dim=2, decay=0.6)
                res = project_to_constraint(u, model, spec, grid)
                worst_res = max(worst_res, abs(res.residual))
                deriv_ok = deriv_ok and res.deriv_min > 0.0
                U = synthesize(u.scale(res.a), grid)
                force = float(np.mean(np.sum(model.gradient(U) * U, axis=-1)))
                floor_ok = floor_ok and force >= floor - 1e-10
            label = model.label
            checks.append(
                (f"{label}: residual={worst_res:.2e}", worst_res <= 1e-12 * max(1.0, abs(h)))
            )
            checks.append((f"{label}: deriv_positive", deriv_ok))
            checks.append((f"{label}: force_floor", floor_ok))


def test_criterion_10_integrator_order(harmonic_solution):
    model = harmonic_solution["model"]
    best = harmonic_solution["result"].best
    T = harmonic_solution["T"]
    closures = {}
    for steps in (2048, 4096):
        orbit = rescale(best.loop, T, model, 1.0, f_star=best.f_star)
        verify_by_integration(orbit, model, steps=steps)
        closures[steps] = orbit.diagnostics["closure_error"]
    ratio = closures[2048] / closures[4096]
    with criterion(10) as checks:
        checks.append((f"ratio={ratio:.3f}", 3.2 <= ratio <= 4.8))


def test_criterion_11_determinism(tmp_path):
    args = [
        "solve", "--potential", "power_law", "--a", "0.5", "--n-exp", "1",
        "--energy", "1", "--K", "5", "--N", "48", "--starts", "4",
        "--out-dir", str(tmp_path),
    ]
    code1 = main(args)
    first = (tmp_path / "summary.json").read_bytes()
    code2 = main(args)
    second = (tmp_path / "summary.json").read_bytes()

    def strip_timestamp(blob):
        return [ln for ln in blob.splitlines() if b'"timestamp"' not in ln]

    with criterion(11) as checks:
        checks.append(("exit_codes", code1 == 0 and code2 == 0))
        checks.append(("byte_identical", strip_timestamp(first) == strip_timestamp(second)))
