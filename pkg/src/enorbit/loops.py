"""Antiperiodic Fourier loops on the unit circle and their sample grids.

Loops carry only odd harmonics,

    u(t) = sum_{k odd, k <= K} a_k cos(2 pi k t) + b_k sin(2 pi k t),

so u(t + 1/2) = -u(t) holds exactly and the mean vanishes by construction.
Integrals over [0, 1] are uniform-grid means; the grid must satisfy
N >= 4 (K + 1) to keep the quartic-order integrands of the variational
layer alias-free.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import GridTooCoarse, InvalidParameter

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class AntiperiodicLoop:
    """Odd-harmonic trigonometric loop with values in R^dim.

    a and b hold the cosine and sine coefficient vectors, one row per odd
    harmonic (k = 1, 3, ..., K), shape (nk, dim) with nk = (K+1)//2.
    Instances are immutable values; the arrays are marked read-only.
    """

    dim: int
    K: int
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidParameter(f"dim must be >= 1, got {self.dim}")
        if self.K < 1 or self.K % 2 == 0:
            raise InvalidParameter(f"K must be a positive odd integer, got {self.K}")
        nk = (self.K + 1) // 2
        a = np.ascontiguousarray(self.a, dtype=np.float64)
        b = np.ascontiguousarray(self.b, dtype=np.float64)
        if a.shape != (nk, self.dim) or b.shape != (nk, self.dim):
            raise InvalidParameter(
                f"coefficient arrays must have shape {(nk, self.dim)}, "
                f"got {a.shape} and {b.shape}"
            )
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise InvalidParameter("coefficients must be finite")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def harmonics(self) -> np.ndarray:
        """The odd harmonic indices 1, 3, ..., K."""
        return np.arange(1, self.K + 1, 2, dtype=np.int64)

    def packed(self) -> np.ndarray:
        """Coefficients stacked as one array of shape (2, nk, dim)."""
        return np.stack([self.a, self.b])

    @classmethod
    def from_packed(cls, K: int, dim: int, coeffs: np.ndarray) -> "AntiperiodicLoop":
        return cls(dim=dim, K=K, a=coeffs[0], b=coeffs[1])

    def scale(self, c: float) -> "AntiperiodicLoop":
        """The loop c * u."""
        return AntiperiodicLoop(dim=self.dim, K=self.K, a=c * self.a, b=c * self.b)

    def to_dict(self) -> dict:
        """JSON-ready form: {dim, K, coeffs: [{k, a, b}, ...]}."""
        return {
            "dim": self.dim,
            "K": self.K,
            "coeffs": [
                {"k": int(k), "a": self.a[i].tolist(), "b": self.b[i].tolist()}
                for i, k in enumerate(self.harmonics)
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AntiperiodicLoop":
        dim, K = int(d["dim"]), int(d["K"])
        nk = (K + 1) // 2
        a = np.zeros((nk, dim))
        b = np.zeros((nk, dim))
        seen = set()
        for entry in d["coeffs"]:
            k = int(entry["k"])
            if k < 1 or k > K or k % 2 == 0 or k in seen:
                raise InvalidParameter(f"bad harmonic index {k} in serialized loop")
            seen.add(k)
            a[(k - 1) // 2] = entry["a"]
            b[(k - 1) // 2] = entry["b"]
        return cls(dim=dim, K=K, a=a, b=b)


@dataclass(frozen=True)
class SampleGrid:
    """Uniform N-node grid t_j = j/N on [0, 1) with quadrature weight 1/N."""

    N: int

    def __post_init__(self):
        if self.N < 4:
            raise InvalidParameter(f"grid needs at least 4 nodes, got {self.N}")

    @property
    def weight(self) -> float:
        return 1.0 / self.N

    def times(self) -> np.ndarray:
        return np.arange(self.N, dtype=np.float64) / self.N

    def check_resolves(self, K: int):
        """Raise GridTooCoarse unless N >= 4 (K + 1)."""
        if self.N < 4 * (K + 1):
            raise GridTooCoarse(
                f"grid with N={self.N} nodes cannot resolve K={K}; "
                f"need N >= {4 * (K + 1)}"
            )


def grid_for(K: int, N: int | None = None) -> SampleGrid:
    """Default grid for highest harmonic K: N = 8 (K + 1) unless given."""
    return SampleGrid(N=8 * (K + 1) if N is None else N)


def synthesize_at(loop: AntiperiodicLoop, times: np.ndarray, deriv: int = 0) -> np.ndarray:
    """Loop values (deriv=0), velocity (1) or acceleration (2) at given times."""
    times = np.ascontiguousarray(times, dtype=np.float64)
    return backend.trig_synth(loop.a, loop.b, loop.harmonics, times, deriv)


def synthesize(loop: AntiperiodicLoop, grid: SampleGrid) -> np.ndarray:
    """Sample u on the grid; shape (N, dim)."""
    grid.check_resolves(loop.K)
    return synthesize_at(loop, grid.times(), 0)


def synthesize_velocity(loop: AntiperiodicLoop, grid: SampleGrid) -> np.ndarray:
    """Sample du/dt on the grid; shape (N, dim)."""
    grid.check_resolves(loop.K)
    return synthesize_at(loop, grid.times(), 1)


def kinetic_norm(loop: AntiperiodicLoop) -> float:
    """Integral of |du/dt|^2 over one period, exactly via Parseval:
    0.5 sum_k (2 pi k)^2 (|a_k|^2 + |b_k|^2)."""
    w2 = (TWO_PI * loop.harmonics.astype(np.float64)) ** 2
    return float(0.5 * np.sum(w2 * (np.sum(loop.a**2, axis=1) + np.sum(loop.b**2, axis=1))))


def quadrature(values: np.ndarray, grid: SampleGrid) -> float:
    """Mean of per-node values: approximates the integral over [0, 1]."""
    values = np.asarray(values)
    if values.shape[0] != grid.N:
        raise InvalidParameter(
            f"got {values.shape[0]} values for a grid with {grid.N} nodes"
        )
    return float(np.mean(values, axis=0))


def coefficient_adjoint(grid_fun: np.ndarray, grid: SampleGrid, K: int) -> np.ndarray:
    """Pull a grid function back to coefficient space.

    Returns g with shape (2, nk, dim) such that for every coefficient
    vector c: <g, c> = quadrature(<grid_fun, synthesize(c)>).  Applied to
    the samples of a loop u it therefore returns half of u's coefficients
    (the diagonal of the cos/sin Gram matrix on the grid is 1/2).
    """
    grid.check_resolves(K)
    grid_fun = np.ascontiguousarray(grid_fun, dtype=np.float64)
    if grid_fun.shape[0] != grid.N:
        raise InvalidParameter(
            f"grid function has {grid_fun.shape[0]} rows for a grid with {grid.N} nodes"
        )
    ks = np.arange(1, K + 1, 2, dtype=np.int64)
    a, b = backend.trig_adjoint(grid_fun, ks, grid.times())
    return np.stack([a, b])


def random_loop(seed: int, K: int, dim: int, decay: float = 1.0) -> AntiperiodicLoop:
    """Gaussian random loop, harmonic k damped by decay^((k-1)/2).

    Deterministic in the seed.  decay=1 gives flat white coefficients;
    smaller values concentrate energy in the fundamental.
    """
    if not 0 < decay <= 1:
        raise InvalidParameter(f"decay must be in (0, 1], got {decay}")
    nk = (K + 1) // 2
    rng = np.random.default_rng(seed)
    ks = np.arange(1, K + 1, 2)
    damp = decay ** ((ks - 1) / 2.0)
    a = rng.standard_normal((nk, dim)) * damp[:, None]
    b = rng.standard_normal((nk, dim)) * damp[:, None]
    return AntiperiodicLoop(dim=dim, K=K, a=a, b=b)
