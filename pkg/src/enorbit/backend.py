"""Kernel backend selection.

Two implementations exist for each kernel: a pure numpy reference and a
compiled extension.  They do not win in the same places (see
benchmarks/bench_backends.py): the table-caching numpy synthesis beats the
compiled loop nest, while the compiled Verlet integrator beats the
per-step Python loop by a wide margin.  The default therefore mixes them,
taking trig synthesis from the reference and the integrator from the
extension, and falls back to pure Python when the extension is missing.

``ENORBIT_BACKEND`` overrides the choice wholesale: ``python`` forces the
reference everywhere, ``compiled`` forces the extension everywhere (the
parity tests and the benchmark rely on both).
"""
from __future__ import annotations

import os


def _resolve():
    """Returns (name, synth_module, verlet_module)."""
    from . import _reference

    forced = os.environ.get("ENORBIT_BACKEND", "").strip().lower()
    if forced in {"python", "numpy", "reference"}:
        return "reference", _reference, _reference
    if forced in {"c", "compiled", "cython", "speedups"}:
        from . import _speedups

        return "compiled", _speedups, _speedups
    if forced:
        raise ImportError(
            f"unknown ENORBIT_BACKEND value {forced!r}; "
            "use 'python' or 'compiled'"
        )
    try:
        from . import _speedups
    except ImportError:
        return "reference", _reference, _reference
    return "compiled", _reference, _speedups


_name, _synth_mod, _verlet_mod = _resolve()

trig_synth = _synth_mod.trig_synth
trig_adjoint = _synth_mod.trig_adjoint
verlet_radial = _verlet_mod.verlet_radial


def backend_name() -> str:
    """Kernel backend in use: 'compiled' (extension loaded) or 'reference'."""
    return _name
