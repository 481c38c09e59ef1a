"""Directed polymer in a random medium on a square lattice.

The polymer starts at column 0 of row 0 and moves to column x-1, x or x+1
on each following row, collecting i.i.d. site energies. Ground states are
found by the row-by-row transfer (min-plus) recursion.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ..errors import ParameterError

LAWS = {"uniform": 0, "constant": 1, "exponential": 2, "gaussian": 3}
_INF = 1e300


@njit(cache=True, inline="always")
def _draw(law):
    if law == 0:
        return np.random.random()
    if law == 1:
        return 0.5
    if law == 2:
        return np.random.exponential(1.0)
    return np.random.normal()


@njit(cache=True)
def _ground_state(height, half_width, law, seed, fixed_end):
    np.random.seed(seed)
    n = 2 * half_width + 1
    F = np.full(n, _INF)
    G = np.full(n, _INF)
    move = np.zeros((height, n), dtype=np.int8)
    F[half_width] = _draw(law)
    for h in range(1, height):
        lo = max(0, half_width - h)
        hi = min(n - 1, half_width + h)
        for i in range(lo, hi + 1):
            best = F[i]
            mv = 0
            if i > 0 and F[i - 1] < best:
                best = F[i - 1]
                mv = -1
            if i < n - 1 and F[i + 1] < best:
                best = F[i + 1]
                mv = 1
            G[i] = best + _draw(law)
            move[h, i] = mv
        for i in range(lo, hi + 1):
            F[i] = G[i]
    if fixed_end:
        end = half_width
    else:
        end = half_width
        for i in range(n):
            if F[i] < F[end] or (F[i] == F[end] and abs(i - half_width) < abs(end - half_width)):
                end = i
    path = np.zeros(height, dtype=np.int64)
    x = end
    for h in range(height - 1, -1, -1):
        path[h] = x - half_width
        x += move[h, x] if h > 0 else 0
    return F[end], path


@njit(cache=True)
def _point_to_line_stats(height, half_width, law, seeds, checkpoints, energies, positions):
    n = 2 * half_width + 1
    for s in range(seeds.shape[0]):
        np.random.seed(seeds[s])
        F = np.full(n, _INF)
        G = np.full(n, _INF)
        F[half_width] = _draw(law)
        c = 0
        for h in range(1, height):
            lo = max(0, half_width - h)
            hi = min(n - 1, half_width + h)
            for i in range(lo, hi + 1):
                best = F[i]
                if i > 0 and F[i - 1] < best:
                    best = F[i - 1]
                if i < n - 1 and F[i + 1] < best:
                    best = F[i + 1]
                G[i] = best + _draw(law)
            for i in range(lo, hi + 1):
                F[i] = G[i]
            while c < checkpoints.shape[0] and checkpoints[c] == h + 1:
                arg = lo
                for i in range(lo, hi + 1):
                    if F[i] < F[arg]:
                        arg = i
                energies[s, c] = F[arg]
                positions[s, c] = arg - half_width
                c += 1


@dataclass
class DPRMGroundState:
    energy: float
    path: np.ndarray  # column per row


def _law(law: str) -> int:
    if law not in LAWS:
        raise ParameterError(f"unknown disorder law {law!r}; choose from {sorted(LAWS)}")
    return LAWS[law]


def default_half_width(height: int) -> int:
    """Lateral box: wide enough that the wandering (~h^{2/3}) never feels it."""
    return int(min(height, max(16, np.ceil(6 * height ** (2.0 / 3.0)))))


def dprm_ground_state(width: int, height: int, rng: np.random.Generator, law: str = "uniform",
                      boundary: str = "free") -> DPRMGroundState:
    """Minimal-energy directed path over ``height`` rows in a box of ``width``
    columns centred on the start; ``boundary`` "free" (point to line) or
    "fixed" (return to the start column). Ties prefer the straight move."""
    if width < 1 or height < 1:
        raise ParameterError("width and height must be positive")
    if boundary not in ("free", "fixed"):
        raise ParameterError("boundary must be 'free' or 'fixed'")
    hw = width // 2
    e, path = _ground_state(int(height), int(hw), _law(law), int(rng.integers(0, 2**31 - 1)), boundary == "fixed")
    return DPRMGroundState(float(e), path)


@dataclass
class DPRMStatistics:
    heights: np.ndarray
    energies: np.ndarray  # (samples, heights)
    positions: np.ndarray  # (samples, heights)

    @property
    def energy_std(self) -> np.ndarray:
        return self.energies.std(axis=0, ddof=1)

    @property
    def position_std(self) -> np.ndarray:
        return self.positions.std(axis=0, ddof=1)


def dprm_statistics(heights, samples: int, rng: np.random.Generator, law: str = "uniform",
                    half_width: int | None = None) -> DPRMStatistics:
    """Point-to-line ground-state energies and endpoints at each height, one
    transfer-matrix sweep per sample."""
    heights = np.asarray(sorted(set(int(h) for h in heights)), dtype=np.int64)
    if heights[0] < 2:
        raise ParameterError("heights must be >= 2")
    H = int(heights[-1])
    hw = default_half_width(H) if half_width is None else int(half_width)
    seeds = rng.integers(0, 2**31 - 1, size=samples)
    E = np.zeros((samples, heights.size))
    X = np.zeros((samples, heights.size), dtype=np.int64)
    _point_to_line_stats(H, hw, _law(law), seeds, heights, E, X)
    return DPRMStatistics(heights, E, X)


@dataclass
class ExponentEstimate:
    beta: float
    beta_err: float
    zeta: float
    zeta_err: float


def dprm_exponents(stats: DPRMStatistics, window=None) -> ExponentEstimate:
    from ..analysis import Series, powerlaw_fit

    n = stats.energies.shape[0]
    sdE, sdX = stats.energy_std, stats.position_std.astype(np.float64)
    rel = 1.0 / np.sqrt(2 * (n - 1))
    fb = powerlaw_fit(Series(stats.heights, sdE, sdE * rel), window)
    fz = powerlaw_fit(Series(stats.heights, sdX, sdX * rel), window)
    return ExponentEstimate(fb.exponent, fb.exponent_err, fz.exponent, fz.exponent_err)
