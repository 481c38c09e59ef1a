"""Deterministic amplitude hydrodynamics of a conserved U(1) charge.

Averaged over U(1)-symmetric Haar gates, the coefficient of Z_x in a
spreading charge operator evolves by replacing both amplitudes of a gated
pair with their mean.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.circuit import brickwork_bonds
from ..errors import ParameterError


@dataclass
class AmplitudeSeries:
    times: np.ndarray
    profiles: np.ndarray  # (len(times), L)
    x: np.ndarray  # site coordinate relative to the initial site

    def at(self, t: int) -> np.ndarray:
        i = np.searchsorted(self.times, t)
        if i >= self.times.size or self.times[i] != t:
            raise ParameterError(f"time {t} was not recorded")
        return self.profiles[i]


def u1_amplitude_diffusion(L: int, t: int, x0: int | None = None, record=None) -> AmplitudeSeries:
    """Iterate a_x, a_{x+1} <- (a_x + a_{x+1}) / 2 over ``t`` open-brickwork
    layers from a delta at ``x0``; records every time in ``record``
    (default: all of 0..t)."""
    if L < 2:
        raise ParameterError("need L >= 2")
    if t < 0:
        raise ParameterError("t must be nonnegative")
    x0 = L // 2 if x0 is None else int(x0)
    if not 0 <= x0 < L:
        raise ParameterError("initial site outside the chain")
    rec = np.arange(t + 1) if record is None else np.unique(np.asarray(record, dtype=np.int64))
    if rec.size and (rec[0] < 0 or rec[-1] > t):
        raise ParameterError("record times outside [0, t]")
    a = np.zeros(L)
    a[x0] = 1.0
    out = np.zeros((rec.size, L))
    j = 0
    if j < rec.size and rec[j] == 0:
        out[j] = a
        j += 1
    for tau in range(1, t + 1):
        start = brickwork_bonds(L, tau, "open")[0][0] if L > 2 or tau % 2 else None
        if start is not None:
            left = a[start:L - 1:2].copy()
            n = left.size
            m = 0.5 * (left + a[start + 1:start + 1 + 2 * n:2])
            a[start:start + 2 * n:2] = m
            a[start + 1:start + 1 + 2 * n:2] = m
        if j < rec.size and rec[j] == tau:
            out[j] = a
            j += 1
    return AmplitudeSeries(rec, out, np.arange(L) - x0)


def u1_conserved_weight(series: AmplitudeSeries) -> np.ndarray:
    """w^c(t) = sum_x a_x(t)^2 for every recorded time."""
    return np.sum(series.profiles**2, axis=1)
