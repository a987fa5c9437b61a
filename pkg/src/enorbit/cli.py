"""Command-line interface: solve, check, sweep, verify.

Configuration comes from a TOML file (--config) with flag overrides; flags
win.  The output directory falls back to the ENORBIT_OUT_DIR environment
variable when neither flag nor file sets it; no other environment state is
consulted.  All artifacts are written atomically (temp file + rename) and
reruns with the same configuration are byte-identical except the timestamp.

Exit codes are a stable contract: 0 success, 1 usage or configuration
error, 2 no start converged, 3 the energy level is infeasible (every start
failed to bracket the scaling root), 4 hypothesis check failure, 5
verification threshold breach.
"""
from __future__ import annotations

import argparse
import copy
import json
import math
import os
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

import numpy as np

from .backend import backend_name
from .errors import (
    ConfigError,
    EnorbitError,
    IntegratorBlowup,
    InvalidParameter,
    NoConvergedStart,
)
from .loops import AntiperiodicLoop
from .optimizer import SolverConfig, multi_start
from .orbit import rescale, recover_period, verify_by_integration
from .potentials import BUILTIN_FACTORIES, GrowthParams, check_conditions
from .variational import f_eval

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NO_CONVERGENCE = 2
EXIT_INFEASIBLE = 3
EXIT_HYPOTHESIS = 4
EXIT_VERIFY = 5

DEFAULTS = {
    "potential": {"name": None, "a": 1.0, "n_exp": 1, "dim": 2},
    "energy": {"h": None},
    "solver": {
        "K": 15,
        "N": None,
        "grad_tol": 1e-8,
        "max_iters": 5000,
        "armijo_c": 1e-4,
        "backtrack": 0.5,
        "step_init": 1.0,
        "starts": 8,
        "seed": 0,
        "precondition": True,
        "workers": 1,
    },
    "check": {"box_radius": 10.0, "samples": 500, "mu1": None, "mu2": None, "A": None},
    "output": {
        "dir": None,
        "emit_orbit_csv": True,
        "emit_history": False,
        "out_samples": 512,
    },
    "verify": {"steps": 8192},
}


# ---------------------------------------------------------------------------
# configuration plumbing


def _load_toml(path: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(p, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"config file {path} is not valid TOML: {err}") from err


def _merge_file(cfg: dict, data: dict):
    for section, values in data.items():
        if section not in cfg:
            raise ConfigError(f"unknown config section [{section}]")
        if not isinstance(values, dict):
            raise ConfigError(f"config section [{section}] must be a table")
        for key, value in values.items():
            if key not in cfg[section]:
                raise ConfigError(f"unknown config key {section}.{key}")
            cfg[section][key] = value


_FLAG_MAP = {
    # dest -> (section, key)
    "potential": ("potential", "name"),
    "a": ("potential", "a"),
    "n_exp": ("potential", "n_exp"),
    "dim": ("potential", "dim"),
    "K": ("solver", "K"),
    "N": ("solver", "N"),
    "grad_tol": ("solver", "grad_tol"),
    "max_iters": ("solver", "max_iters"),
    "armijo_c": ("solver", "armijo_c"),
    "backtrack": ("solver", "backtrack"),
    "step_init": ("solver", "step_init"),
    "starts": ("solver", "starts"),
    "seed": ("solver", "seed"),
    "precondition": ("solver", "precondition"),
    "workers": ("solver", "workers"),
    "box_radius": ("check", "box_radius"),
    "check_samples": ("check", "samples"),
    "mu1": ("check", "mu1"),
    "mu2": ("check", "mu2"),
    "ceiling": ("check", "A"),
    "out_dir": ("output", "dir"),
    "orbit_csv": ("output", "emit_orbit_csv"),
    "history": ("output", "emit_history"),
    "out_samples": ("output", "out_samples"),
    "steps": ("verify", "steps"),
}


def _resolve_config(args) -> dict:
    """defaults < ENORBIT_OUT_DIR < config file < flags."""
    cfg = copy.deepcopy(DEFAULTS)
    env_dir = os.environ.get("ENORBIT_OUT_DIR")
    if env_dir:
        cfg["output"]["dir"] = env_dir
    if getattr(args, "config", None):
        _merge_file(cfg, _load_toml(args.config))
    for dest, (section, key) in _FLAG_MAP.items():
        value = getattr(args, dest, None)
        if value is not None:
            cfg[section][key] = value
    if getattr(args, "energy", None) is not None:
        cfg["energy"]["h"] = _parse_energy_flag(args.energy)
    if cfg["output"]["dir"] is None:
        cfg["output"]["dir"] = "enorbit-out"
    return cfg


def _parse_energy_flag(text: str):
    parts = [p for p in text.split(",") if p.strip()]
    try:
        values = [float(p) for p in parts]
    except ValueError as err:
        raise ConfigError(f"cannot parse --energy value {text!r}") from err
    if not values:
        raise ConfigError("--energy got an empty list")
    if "," in text:
        return values
    return values[0]


def _require_scalar_energy(cfg: dict) -> float:
    h = cfg["energy"]["h"]
    if h is None:
        raise ConfigError("energy.h is required (config [energy] or --energy)")
    if isinstance(h, (list, tuple)):
        raise ConfigError(
            "energy.h must be a single value for this command, got a list; "
            "use the sweep command for lists"
        )
    return float(h)


def _require_energy_list(cfg: dict) -> list[float]:
    h = cfg["energy"]["h"]
    if h is None:
        raise ConfigError("energy.h is required (config [energy] or --energy)")
    if not isinstance(h, (list, tuple)):
        raise ConfigError(
            "energy.h must be a list for the sweep command, got a single value"
        )
    if len(h) == 0:
        raise ConfigError("energy.h is an empty list; nothing to sweep")
    return [float(x) for x in h]


def _build_model(cfg: dict):
    pot = cfg["potential"]
    name = pot["name"]
    if not name:
        raise ConfigError("potential.name is required")
    if name not in BUILTIN_FACTORIES:
        known = ", ".join(sorted(BUILTIN_FACTORIES))
        raise ConfigError(f"unknown potential.name {name!r}; builtins: {known}")
    try:
        dim = int(pot["dim"])
        if name == "exp_well":
            return BUILTIN_FACTORIES[name](dim)
        return BUILTIN_FACTORIES[name](float(pot["a"]), int(pot["n_exp"]), dim)
    except InvalidParameter as err:
        raise ConfigError(f"bad potential parameters: {err}") from err


def _resolve_growth(cfg: dict, model) -> GrowthParams:
    chk = cfg["check"]
    if chk["mu1"] is None and chk["mu2"] is None and chk["A"] is None:
        if model.growth is None:
            raise ConfigError("check.mu1/mu2/A required for a model without growth metadata")
        return model.growth
    base = model.growth or GrowthParams(1.0, 0.0, math.inf)
    mu1 = base.mu1 if chk["mu1"] is None else float(chk["mu1"])
    mu2 = base.mu2 if chk["mu2"] is None else float(chk["mu2"])
    A = base.A if chk["A"] is None else _parse_ceiling(chk["A"])
    try:
        return GrowthParams(mu1=mu1, mu2=mu2, A=A)
    except InvalidParameter as err:
        raise ConfigError(f"bad growth parameters: {err}") from err


def _parse_ceiling(value) -> float:
    if isinstance(value, str):
        if value.strip().lower() in {"inf", "+inf", "infinity"}:
            return math.inf
        try:
            return float(value)
        except ValueError as err:
            raise ConfigError(f"check.A must be a number or 'inf', got {value!r}") from err
    return float(value)


def _solver_config(cfg: dict, h: float) -> SolverConfig:
    s = cfg["solver"]
    try:
        return SolverConfig(
            h=h,
            K=int(s["K"]),
            N=None if s["N"] is None else int(s["N"]),
            grad_tol=float(s["grad_tol"]),
            max_iters=int(s["max_iters"]),
            armijo_c=float(s["armijo_c"]),
            backtrack=float(s["backtrack"]),
            step_init=float(s["step_init"]),
            starts=int(s["starts"]),
            seed=int(s["seed"]),
            precondition=bool(s["precondition"]),
        )
    except InvalidParameter as err:
        raise ConfigError(f"bad solver settings: {err}") from err


# ---------------------------------------------------------------------------
# output plumbing


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, Path):
        return str(x)
    return x


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f"{path.name}.tmp{os.getpid()}")
    tmp.write_text(text)
    os.replace(tmp, path)


def _write_json(path: Path, obj):
    _atomic_write(path, json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def _write_orbit_csv(path: Path, orbit):
    dim = orbit.positions.shape[1]
    header = ["t"] + [f"q{i + 1}" for i in range(dim)] + [f"v{i + 1}" for i in range(dim)]
    lines = [",".join(header)]
    for t, q, v in zip(orbit.times, orbit.positions, orbit.velocities):
        row = [_fmt(float(t))]
        row += [_fmt(float(x)) for x in q]
        row += [_fmt(float(x)) for x in v]
        lines.append(",".join(row))
    _atomic_write(path, "\n".join(lines) + "\n")


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


def _outcome_dicts(result_or_outcomes):
    out = []
    for o in result_or_outcomes:
        entry = {
            "start_index": o.start_index,
            "seed": o.seed,
            "converged": o.converged,
            "reason": o.reason,
            "error_type": o.error_type,
        }
        if o.report is not None:
            entry.update(
                f_star=o.report.f_star,
                iterations=o.report.iterations,
                grad_norm=o.report.grad_norm,
                g_residual=o.report.g_residual,
                stalled=o.report.stalled,
            )
        out.append(entry)
    return out


# ---------------------------------------------------------------------------
# commands


def cmd_solve(args) -> int:
    cfg = _resolve_config(args)
    h = _require_scalar_energy(cfg)
    model = _build_model(cfg)
    growth = _resolve_growth(cfg, model)
    solver_cfg = _solver_config(cfg, h)
    grid = solver_cfg.make_grid()
    out_dir = Path(cfg["output"]["dir"])

    report_cond = check_conditions(
        model,
        growth,
        h,
        box_radius=float(cfg["check"]["box_radius"]),
        samples=int(cfg["check"]["samples"]),
        seed=int(cfg["solver"]["seed"]),
    )

    summary = {
        "config": cfg,
        "backend": backend_name(),
        "condition_report": report_cond.to_dict(),
        "best": None,
        "diagnostics": None,
        "all_starts": [],
        "k_study": None,
    }

    try:
        result = multi_start(
            solver_cfg, model, grid, workers=int(cfg["solver"]["workers"])
        )
    except NoConvergedStart as err:
        reasons = [reason for (_, _, reason) in err.outcomes]
        infeasible = all(r == "RootNotBracketed" for r in reasons)
        summary["failure"] = {
            "message": str(err),
            "outcomes": [
                {"start_index": i, "seed": s, "reason": r} for (i, s, r) in err.outcomes
            ],
        }
        summary["timestamp"] = _timestamp()
        _write_json(out_dir / "summary.json", summary)
        print(f"solve failed: {err}", file=sys.stderr)
        return EXIT_INFEASIBLE if infeasible else EXIT_NO_CONVERGENCE

    best = result.best
    T = recover_period(best.loop, model, grid)
    orbit = rescale(
        best.loop,
        T,
        model,
        h,
        out_samples=int(cfg["output"]["out_samples"]),
        f_star=best.f_star,
    )
    try:
        verify_by_integration(orbit, model, steps=int(cfg["verify"]["steps"]))
    except IntegratorBlowup as err:
        summary["failure"] = {"message": f"verification integration blew up: {err}"}
        summary["timestamp"] = _timestamp()
        _write_json(out_dir / "summary.json", summary)
        print(f"solve failed: {err}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE

    best_dict = {
        "f_star": best.f_star,
        "T": T,
        "h": h,
        "grad_norm": best.grad_norm,
        "g_residual": best.g_residual,
        "converged": best.converged,
        "stalled": best.stalled,
        "iterations": best.iterations,
        "start_index": best.start_index,
        "start_seed": best.start_seed,
        "loop": best.loop.to_dict(),
    }
    if cfg["output"]["emit_history"]:
        best_dict["history"] = [[f, g] for (f, g) in best.history]
    summary["best"] = best_dict
    summary["diagnostics"] = dict(orbit.diagnostics)
    summary["all_starts"] = _outcome_dicts(result.outcomes)

    if getattr(args, "k_study", False):
        summary["k_study"] = _run_k_study(solver_cfg, model, best.f_star)

    summary["timestamp"] = _timestamp()
    _write_json(out_dir / "summary.json", summary)
    if cfg["output"]["emit_orbit_csv"]:
        _write_orbit_csv(out_dir / "orbit.csv", orbit)

    d = orbit.diagnostics
    print(
        f"converged: f_star={best.f_star:.12g} T={T:.12g} h={h:g} "
        f"(start {best.start_index}, {best.iterations} iterations, "
        f"backend {backend_name()})"
    )
    print(
        f"diagnostics: ode_residual={d['ode_residual_inf']:.3g} "
        f"energy_err={d['energy_err_inf']:.3g} closure={d['closure_error']:.3g} "
        f"drift={d['integrator_energy_drift']:.3g}"
    )
    print(f"wrote {out_dir / 'summary.json'}")
    return EXIT_OK


def _run_k_study(solver_cfg: SolverConfig, model, f_star_base: float) -> dict:
    # Doubling the cutoff means the next odd value, 2K+1.
    K2 = 2 * solver_cfg.K + 1
    cfg2 = replace(solver_cfg, K=K2, N=None)
    try:
        result = multi_start(cfg2, model, cfg2.make_grid())
    except (NoConvergedStart, EnorbitError) as err:
        return {"K": K2, "error": str(err)}
    f2 = result.best.f_star
    return {
        "K": K2,
        "f_star": f2,
        "f_star_drift_rel": abs(f2 - f_star_base) / max(1.0, abs(f_star_base)),
    }


def cmd_check(args) -> int:
    cfg = _resolve_config(args)
    h = _require_scalar_energy(cfg)
    model = _build_model(cfg)
    growth = _resolve_growth(cfg, model)
    report = check_conditions(
        model,
        growth,
        h,
        box_radius=float(cfg["check"]["box_radius"]),
        samples=int(cfg["check"]["samples"]),
        seed=int(cfg["solver"]["seed"]),
    )
    out_dir = Path(cfg["output"]["dir"])
    payload = {
        "config": cfg,
        "condition_report": report.to_dict(),
        "timestamp": _timestamp(),
    }
    _write_json(out_dir / "check.json", payload)

    lo, hi = growth.window
    print(f"potential: {model.label}   growth: mu1={growth.mu1:g} mu2={growth.mu2:g} "
          f"A={'inf' if math.isinf(growth.A) else f'{growth.A:g}'}")
    print(f"window: ({lo:g}, {'inf' if math.isinf(hi) else f'{hi:g}'})   h={h:g}   "
          f"samples={report.samples} box_radius={report.box_radius:g}")
    for key in report.CONDITION_KEYS:
        v = report.verdicts[key]
        print(f"  {key:<18} {v.status:<12} {v.note}")
    failed = report.failed()
    if failed:
        print(f"FAILED: {', '.join(failed)}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _resolve_config(args)
    h_list = _require_energy_list(cfg)
    model = _build_model(cfg)
    out_dir = Path(cfg["output"]["dir"])

    rows = []
    n_failed = 0
    infeasible_failures = 0
    for h in h_list:
        solver_cfg = _solver_config(cfg, h)
        grid = solver_cfg.make_grid()
        try:
            result = multi_start(
                solver_cfg, model, grid, workers=int(cfg["solver"]["workers"])
            )
        except NoConvergedStart as err:
            n_failed += 1
            reasons = [reason for (_, _, reason) in err.outcomes]
            if all(r == "RootNotBracketed" for r in reasons):
                infeasible_failures += 1
                note = "infeasible"
            else:
                note = "no convergence"
            rows.append({"h": h, "converged": False, "note": note})
            print(f"h={h:g}: {note}", file=sys.stderr)
            continue
        best = result.best
        T = recover_period(best.loop, model, grid)
        orbit = rescale(
            best.loop, T, model, h,
            out_samples=int(cfg["output"]["out_samples"]), f_star=best.f_star,
        )
        try:
            verify_by_integration(orbit, model, steps=int(cfg["verify"]["steps"]))
        except IntegratorBlowup:
            pass  # leaves closure/drift empty in the row
        d = orbit.diagnostics
        rows.append(
            {
                "h": h,
                "converged": True,
                "note": "",
                "f_star": best.f_star,
                "T": T,
                "grad_norm": best.grad_norm,
                "ode_residual_inf": d["ode_residual_inf"],
                "energy_err_inf": d["energy_err_inf"],
                "closure_error": d["closure_error"],
                "integrator_energy_drift": d["integrator_energy_drift"],
            }
        )
        print(f"h={h:g}: f_star={best.f_star:.12g} T={T:.12g}")

    fields = [
        "h", "converged", "note", "f_star", "T", "grad_norm",
        "ode_residual_inf", "energy_err_inf", "closure_error",
        "integrator_energy_drift",
    ]
    lines = [",".join(fields)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(k)) for k in fields))
    _atomic_write(out_dir / "sweep.csv", "\n".join(lines) + "\n")
    print(f"wrote {out_dir / 'sweep.csv'}")

    if n_failed == 0:
        return EXIT_OK
    if infeasible_failures == n_failed:
        return EXIT_INFEASIBLE
    return EXIT_NO_CONVERGENCE


def cmd_verify(args) -> int:
    path = Path(args.summary)
    if not path.is_file():
        print(f"summary file not found: {path}", file=sys.stderr)
        return EXIT_USAGE
    try:
        summary = json.loads(path.read_text())
    except json.JSONDecodeError as err:
        print(f"cannot parse {path}: {err}", file=sys.stderr)
        return EXIT_USAGE
    best = summary.get("best")
    if not best:
        print("summary has no best solution to verify", file=sys.stderr)
        return EXIT_USAGE

    cfg = summary["config"]
    model = _build_model(cfg)
    solver_cfg = _solver_config(cfg, float(best["h"]))
    grid = solver_cfg.make_grid()
    loop = AntiperiodicLoop.from_dict(best["loop"])

    T = recover_period(loop, model, grid)
    f_star = f_eval(loop, model, grid)
    orbit = rescale(
        loop, T, model, float(best["h"]),
        out_samples=int(cfg["output"]["out_samples"]), f_star=f_star,
    )
    steps = args.steps if args.steps is not None else int(cfg["verify"]["steps"])
    try:
        verify_by_integration(orbit, model, steps=steps)
    except IntegratorBlowup as err:
        print(f"FAIL integration blowup: {err}", file=sys.stderr)
        return EXIT_VERIFY

    d = orbit.diagnostics
    grad_mag = np.linalg.norm(np.asarray(model.gradient(orbit.positions)), axis=1)
    speed = np.linalg.norm(orbit.velocities, axis=1)
    radius = np.linalg.norm(orbit.positions, axis=1)
    residual_tol = (
        args.residual_tol
        if args.residual_tol is not None
        else 1e-6 * (1.0 + float(np.max(grad_mag)))
    )
    energy_tol = (
        args.energy_tol
        if args.energy_tol is not None
        else 1e-8 * (1.0 + abs(float(best["h"])))
    )
    closure_tol = (
        args.closure_tol
        if args.closure_tol is not None
        else 1e-5 * (1.0 + float(np.max(radius)) + float(np.max(speed)))
    )

    checks = [
        ("ode_residual_inf", d["ode_residual_inf"], residual_tol),
        ("energy_err_inf", d["energy_err_inf"], energy_tol),
        ("closure_error", d["closure_error"], closure_tol),
    ]
    ok = True
    for name, value, tol in checks:
        status = "ok" if value <= tol else "BREACH"
        if value > tol:
            ok = False
        print(f"  {name:<22} {value:<12.3e} tolerance {tol:.3e}  {status}")
    drift_ref = best.get("T")
    print(f"  T recomputed: {T:.12g} (stored {drift_ref})")
    if not ok:
        print("FAIL: diagnostics exceed thresholds", file=sys.stderr)
        return EXIT_VERIFY
    print("verification passed")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="TOML configuration file")
    p.add_argument("--out-dir", dest="out_dir", help="output directory")


def _add_potential_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("potential")
    g.add_argument("--potential", choices=sorted(BUILTIN_FACTORIES),
                   help="builtin potential family")
    g.add_argument("--a", type=float, dest="a", help="power-law coefficient")
    g.add_argument("--n-exp", type=int, dest="n_exp", help="half the power-law exponent")
    g.add_argument("--dim", type=int, help="ambient dimension")


def _add_energy_flag(p: argparse.ArgumentParser):
    p.add_argument("--energy", help="energy level h (comma-separate for a sweep list)")


def _add_solver_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("solver")
    g.add_argument("--K", type=int, dest="K", help="highest (odd) harmonic")
    g.add_argument("--N", type=int, dest="N", help="quadrature nodes (>= 4(K+1))")
    g.add_argument("--grad-tol", type=float, dest="grad_tol")
    g.add_argument("--max-iters", type=int, dest="max_iters")
    g.add_argument("--armijo-c", type=float, dest="armijo_c")
    g.add_argument("--backtrack", type=float, dest="backtrack")
    g.add_argument("--step-init", type=float, dest="step_init")
    g.add_argument("--starts", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--precondition", action=argparse.BooleanOptionalAction,
                   default=None, help="H1 preconditioning of the descent direction")
    g.add_argument("--workers", type=int, help="thread workers for the starts")


def _add_check_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("hypothesis check")
    g.add_argument("--box-radius", type=float, dest="box_radius")
    g.add_argument("--check-samples", type=int, dest="check_samples")
    g.add_argument("--mu1", type=float)
    g.add_argument("--mu2", type=float)
    g.add_argument("--ceiling", dest="ceiling", help="asymptotic ceiling A (number or 'inf')")


def _add_output_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("output")
    g.add_argument("--orbit-csv", dest="orbit_csv", action=argparse.BooleanOptionalAction,
                   default=None, help="write orbit.csv")
    g.add_argument("--history", dest="history", action=argparse.BooleanOptionalAction,
                   default=None, help="include per-iteration history in summary.json")
    g.add_argument("--out-samples", type=int, dest="out_samples")
    g.add_argument("--steps", type=int, help="verification integrator steps")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="enorbit",
        description="Periodic orbits at prescribed energy by variational minimization",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="minimize and emit the orbit")
    _add_config_flags(p_solve)
    _add_potential_flags(p_solve)
    _add_energy_flag(p_solve)
    _add_solver_flags(p_solve)
    _add_check_flags(p_solve)
    _add_output_flags(p_solve)
    p_solve.add_argument("--k-study", dest="k_study", action="store_true",
                         help="re-solve at 2K+1 and report the f_star drift")
    p_solve.set_defaults(func=cmd_solve)

    p_check = sub.add_parser("check", help="hypothesis check only")
    _add_config_flags(p_check)
    _add_potential_flags(p_check)
    _add_energy_flag(p_check)
    _add_check_flags(p_check)
    p_check.add_argument("--seed", type=int)
    p_check.set_defaults(func=cmd_check)

    p_sweep = sub.add_parser("sweep", help="solve across a list of energies")
    _add_config_flags(p_sweep)
    _add_potential_flags(p_sweep)
    _add_energy_flag(p_sweep)
    _add_solver_flags(p_sweep)
    _add_check_flags(p_sweep)
    _add_output_flags(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify", help="re-verify a stored summary")
    p_verify.add_argument("summary", help="path to summary.json")
    p_verify.add_argument("--steps", type=int, default=None)
    p_verify.add_argument("--residual-tol", type=float, dest="residual_tol")
    p_verify.add_argument("--energy-tol", type=float, dest="energy_tol")
    p_verify.add_argument("--closure-tol", type=float, dest="closure_tol")
    p_verify.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except EnorbitError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
