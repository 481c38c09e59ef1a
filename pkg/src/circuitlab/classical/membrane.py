"""Coarse-grained entanglement membrane.

S_y(t) = min over paths x(t') ending at y of s_eq * int E(x') dt' + S_0(x(0)),
solved by dynamic programming on a space-time grid whose spatial step is
tied to the velocity step, dx = dv * dt.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numba import njit
from scipy.optimize import brentq

from ..errors import ParameterError


def haar_tension(v):
    """Line tension of random brickwork circuits: (1 + v^2) / 2 inside the
    light cone, |v| outside."""
    v = np.abs(np.asarray(v, dtype=np.float64))
    return np.where(v <= 1.0, 0.5 * (1.0 + v**2), v)


def lightcone_tension(v):
    return np.abs(np.asarray(v, dtype=np.float64))


@dataclass
class MembraneModel:
    E: Callable
    s_eq: float = float(np.log(2.0))
    v_max: float = 1.0

    def __post_init__(self):
        if self.s_eq <= 0 or self.v_max <= 0:
            raise ParameterError("s_eq and v_max must be positive")
        if not self.is_convex():
            raise ParameterError("line tension is not convex on the velocity grid")

    def is_convex(self, n: int = 401, tol: float = 1e-9) -> bool:
        v = np.linspace(-self.v_max, self.v_max, n)
        e = np.asarray(self.E(v), dtype=np.float64)
        return bool(np.all(np.isfinite(e)) and np.all(e[:-2] - 2 * e[1:-1] + e[2:] >= -tol))

    @property
    def v_E(self) -> float:
        return float(self.E(np.array([0.0]))[0])

    @property
    def v_B(self) -> float:
        """Smallest positive v with E(v) = v; nan if none up to 10 v_max.

        A tangential root (E(v) - v >= 0 touching zero, as for the Haar
        tension) is located by bisection on E(v) - v <= 1e-14.
        """
        hi = 10 * self.v_max
        v = np.linspace(0.0, hi, 10001)[1:]
        g = np.asarray(self.E(v), dtype=np.float64) - v
        hit = np.flatnonzero(g <= 1e-14)
        if hit.size == 0:
            return float("nan")
        i = int(hit[0])
        lo_v = 0.0 if i == 0 else float(v[i - 1])
        f = lambda u: float(self.E(np.array([u]))[0]) - u  # noqa: E731
        if g[i] < -1e-14 and f(lo_v) > 0:
            return float(brentq(f, lo_v, float(v[i]), xtol=1e-13))
        a, b = lo_v, float(v[i])
        for _ in range(80):
            m = 0.5 * (a + b)
            a, b = (a, m) if f(m) <= 1e-14 else (m, b)
        return b


@njit(cache=True)
def _membrane_dp(S, cost, nsteps):
    h = (cost.shape[0] - 1) // 2
    n = S.shape[0]
    G = np.empty(n)
    for _ in range(nsteps):
        for j in range(n):
            best = np.inf
            for m in range(-h, h + 1):
                i = j - m
                if 0 <= i < n:
                    c = S[i] + cost[m + h]
                    if c < best:
                        best = c
            G[j] = best
        for j in range(n):
            S[j] = G[j]
    return S


def _solve(model: MembraneModel, S0: Callable, y: float, t: float, nv: int, nsteps: int) -> float:
    h = (nv - 1) // 2
    dt = t / nsteps
    dv = model.v_max / h
    K = h * nsteps
    x = y + (np.arange(-K, K + 1) * dv * dt)
    S = np.asarray(S0(x), dtype=np.float64).copy()
    cost = model.s_eq * dt * np.asarray(model.E(np.arange(-h, h + 1) * dv), dtype=np.float64)
    S = _membrane_dp(S, cost, nsteps)
    return float(S[K])


def membrane_entropy(model: MembraneModel, S0, y: float, t: float, nv: int = 81, nsteps: int = 32,
                     richardson: bool = True) -> float:
    """Entropy (nats) of the half line left of ``y`` at time ``t``.

    ``S0`` maps positions to the initial cut entropy in nats; a scalar means
    a flat profile. With ``richardson`` the result is (4 F(2nv-1) - F(nv)) / 3,
    cancelling the leading velocity-grid error.
    """
    if nv < 3 or nv % 2 == 0:
        raise ParameterError("nv must be odd and >= 3")
    if t < 0:
        raise ParameterError("t must be nonnegative")
    if np.isscalar(S0):
        c = float(S0)
        S0 = lambda x: np.full(np.shape(x), c)  # noqa: E731
    if t == 0:
        return float(np.asarray(S0(np.array([y])))[0])
    coarse = _solve(model, S0, y, t, nv, nsteps)
    if not richardson:
        return coarse
    fine = _solve(model, S0, y, t, 2 * nv - 1, nsteps)
    return (4 * fine - coarse) / 3


def hopf_lax(model: MembraneModel, S0, y: float, t: float, n: int = 200001) -> float:
    """Straight-path minimum min_x0 [S0(x0) + s_eq t E((y - x0)/t)], which is
    the exact optimum for a convex, homogeneous tension."""
    v = np.linspace(-model.v_max, model.v_max, n)
    x0 = y - v * t
    s0 = np.full(n, float(S0)) if np.isscalar(S0) else np.asarray(S0(x0), dtype=np.float64)
    return float(np.min(s0 + model.s_eq * t * np.asarray(model.E(v))))


def finite_region_entropy(model: MembraneModel, ell: float, t: float, S0=0.0, **kw) -> float:
    """Interval of length ``ell`` from an initial state with entropy profile S0.

    The minimum of two independent endpoint membranes and one membrane
    joining the endpoints; the latter costs s_eq * ell * inf E(v)/|v| over
    speeds that keep it inside the time slab, |v| >= ell / (2 t).
    """
    if ell <= 0:
        raise ParameterError("interval length must be positive")
    disconnected = membrane_entropy(model, S0, 0.0, t, **kw) + membrane_entropy(model, S0, ell, t, **kw)
    vmin = ell / (2 * t) if t > 0 else np.inf
    if not np.isfinite(vmin):
        return disconnected
    v = np.geomspace(max(vmin, 1e-9), max(vmin, 1e-9) * 1e4, 20001)
    ratio = float(np.min(np.asarray(model.E(v)) / v))
    return min(disconnected, model.s_eq * ell * ratio)
