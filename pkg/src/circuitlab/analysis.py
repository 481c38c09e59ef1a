"""Estimators and fits shared by the experiments."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError


@dataclass
class Series:
    x: np.ndarray
    y: np.ndarray
    yerr: np.ndarray | None = None
    n: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.float64)
        self.yerr = np.zeros_like(self.y) if self.yerr is None else np.asarray(self.yerr, dtype=np.float64)
        self.n = np.ones(self.y.shape, dtype=np.int64) if self.n is None else np.asarray(self.n, dtype=np.int64)
        if not (self.x.shape == self.y.shape == self.yerr.shape == self.n.shape):
            raise ParameterError("series fields must have equal lengths")
        if np.any(self.yerr < 0):
            raise ParameterError("standard errors must be nonnegative")

    def window(self, lo=None, hi=None) -> "Series":
        m = np.ones(self.x.shape, dtype=bool)
        if lo is not None:
            m &= self.x >= lo
        if hi is not None:
            m &= self.x <= hi
        return Series(self.x[m], self.y[m], self.yerr[m], self.n[m], dict(self.meta))


def mean_stderr(samples, axis=0) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(samples, dtype=np.float64)
    n = a.shape[axis]
    mean = a.mean(axis=axis)
    if n < 2:
        return mean, np.zeros_like(mean)
    return mean, a.std(axis=axis, ddof=1) / np.sqrt(n)


def series_from_samples(x, samples, meta=None) -> Series:
    """``samples[i]`` is the array of realizations at ``x[i]``."""
    m, e, n = [], [], []
    for s in samples:
        mu, se = mean_stderr(np.asarray(s))
        m.append(mu)
        e.append(se)
        n.append(len(s))
    return Series(x, m, e, n, meta or {})


@dataclass
class PowerLawFit:
    exponent: float
    amplitude: float
    exponent_err: float
    amplitude_err: float


def _wls(X: np.ndarray, y: np.ndarray, sigma: np.ndarray | None):
    """Weighted least squares; returns (coef, cov). Unweighted fits scale the
    covariance by the residual variance."""
    if sigma is None or np.all(sigma == 0):
        w = np.ones_like(y)
        scale = True
    else:
        if np.any(sigma <= 0):
            sigma = np.where(sigma <= 0, np.min(sigma[sigma > 0]) if np.any(sigma > 0) else 1.0, sigma)
        w = 1.0 / sigma**2
        scale = False
    A = X * np.sqrt(w)[:, None]
    b = y * np.sqrt(w)
    coef, *_ = np.linalg.lstsq(A, b, rcond=None)
    cov = np.linalg.pinv(A.T @ A)
    dof = len(y) - X.shape[1]
    if scale:
        res = b - A @ coef
        cov = cov * (float(res @ res) / dof if dof > 0 else 0.0)
    return coef, cov


def powerlaw_fit(series: Series, window: tuple | None = None) -> PowerLawFit:
    """Fit y = a x^k by weighted least squares on log y versus log x."""
    s = series.window(*window) if window else series
    if s.x.size < 2:
        raise ParameterError("need at least two points in the fit window")
    if np.any(s.x <= 0) or np.any(s.y <= 0):
        raise ParameterError("power-law fit needs positive data")
    lx, ly = np.log(s.x), np.log(s.y)
    sig = s.yerr / s.y if np.any(s.yerr > 0) else None
    X = np.stack([np.ones_like(lx), lx], axis=1)
    coef, cov = _wls(X, ly, sig)
    amp = float(np.exp(coef[0]))
    return PowerLawFit(float(coef[1]), amp, float(np.sqrt(max(cov[1, 1], 0.0))),
                       amp * float(np.sqrt(max(cov[0, 0], 0.0))))


def linear_fit(x, y, yerr=None) -> tuple[np.ndarray, np.ndarray]:
    """Straight-line fit; returns ((intercept, slope), standard errors)."""
    x = np.asarray(x, dtype=np.float64)
    X = np.stack([np.ones_like(x), x], axis=1)
    coef, cov = _wls(X, np.asarray(y, dtype=np.float64), None if yerr is None else np.asarray(yerr, float))
    return coef, np.sqrt(np.clip(np.diag(cov), 0, None))


def polynomial_fit(x, y, deg: int, yerr=None) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients (constant term first) and their standard errors."""
    x = np.asarray(x, dtype=np.float64)
    X = np.stack([x**k for k in range(deg + 1)], axis=1)
    coef, cov = _wls(X, np.asarray(y, dtype=np.float64), None if yerr is None else np.asarray(yerr, float))
    return coef, np.sqrt(np.clip(np.diag(cov), 0, None))


# ---------------------------------------------------------------------------
# finite-size crossings


@dataclass
class Crossing:
    estimate: float
    error: float
    pairs: dict  # (L1, L2) -> crossing location


def _pair_crossing(x, y1, y2) -> float | None:
    d = np.asarray(y2) - np.asarray(y1)
    idx = [i for i in range(len(d) - 1) if d[i] == 0 or np.sign(d[i]) != np.sign(d[i + 1])]
    if d[-1] == 0:
        idx.append(len(d) - 1)
    if not idx:
        return None
    # with several sign changes keep the one where the curves separate most sharply
    def sharpness(i):
        return abs(d[min(i + 1, len(d) - 1)] - d[i])

    i = max(idx, key=sharpness)
    if i == len(d) - 1 or d[i] == d[i + 1]:
        return float(x[i])
    return float(x[i] + (x[i + 1] - x[i]) * d[i] / (d[i] - d[i + 1]))


def crossing_finder(x, curves: dict) -> Crossing:
    """Pairwise intersections of curves keyed by system size.

    The estimate is the crossing of the two largest sizes; the error is the
    spread over all size pairs (half the range).
    """
    x = np.asarray(x, dtype=np.float64)
    sizes = sorted(curves)
    if len(sizes) < 2:
        raise ParameterError("need at least two sizes")
    pairs = {}
    for i, a in enumerate(sizes):
        for b in sizes[i + 1:]:
            c = _pair_crossing(x, curves[a], curves[b])
            if c is not None:
                pairs[(a, b)] = c
    key = (sizes[-2], sizes[-1])
    if key not in pairs:
        raise ParameterError("largest-size curves do not cross on the grid")
    vals = np.array(list(pairs.values()))
    return Crossing(pairs[key], float((vals.max() - vals.min()) / 2), pairs)


# ---------------------------------------------------------------------------
# diffusion kernel


@dataclass
class GaussianFit:
    D: float
    center: float
    D_err: float
    center_err: float
    variance: float


def gaussian_kernel_fit(x, profile, t: float) -> GaussianFit:
    """Fit a normalized Gaussian to ``profile`` on lattice points ``x``.

    The variance is read from the fitted width, and D = variance / (2 t), so
    that a profile exp(-x^2 / 2t) / sqrt(2 pi t) gives D = 1/2.
    """
    from scipy.optimize import curve_fit

    x = np.asarray(x, dtype=np.float64)
    a = np.asarray(profile, dtype=np.float64)
    tot = a.sum()
    if not np.isfinite(tot) or tot <= 0:
        raise ParameterError("profile is not normalizable")
    a = a / tot
    mu0 = float(np.sum(a * x))
    var0 = float(np.sum(a * (x - mu0) ** 2))
    if var0 <= 0:
        raise ParameterError("profile has zero width")

    def g(xx, mu, var):
        return np.exp(-((xx - mu) ** 2) / (2 * var)) / np.sqrt(2 * np.pi * var)

    popt, pcov = curve_fit(g, x, a, p0=(mu0, var0))
    mu, var = popt
    err = np.sqrt(np.clip(np.diag(pcov), 0, None))
    return GaussianFit(float(var / (2 * t)), float(mu), float(err[1] / (2 * t)), float(err[0]), float(var))


def profile_moments(x, profile) -> tuple[float, float]:
    x = np.asarray(x, dtype=np.float64)
    a = np.asarray(profile, dtype=np.float64)
    a = a / a.sum()
    mu = float(np.sum(a * x))
    return mu, float(np.sum(a * (x - mu) ** 2))


# ---------------------------------------------------------------------------
# data collapse


def collapse_quality(p, curves: dict, p_c: float, nu: float, z: float = 1.0, errors: dict | None = None) -> float:
    """Mean squared deviation of curves replotted against (p - p_c) L^{1/nu}.

    Each curve is compared with the linear interpolation of every other curve
    on their overlapping scaled range. ``z`` is accepted for bookkeeping only:
    steady-state data at fixed aspect ratio need no time rescaling.
    """
    if nu <= 0:
        raise ParameterError("nu must be positive")
    p = np.asarray(p, dtype=np.float64)
    sizes = sorted(curves)
    if len(sizes) < 2 or p.size < 2:
        raise ParameterError("degenerate collapse grid")
    xs = {L: (p - p_c) * L ** (1.0 / nu) for L in sizes}
    tot, cnt = 0.0, 0
    for a in sizes:
        for b in sizes:
            if a == b:
                continue
            xa, ya = xs[a], np.asarray(curves[a], dtype=np.float64)
            xb, yb = xs[b], np.asarray(curves[b], dtype=np.float64)
            m = (xa >= xb.min()) & (xa <= xb.max())
            if not np.any(m):
                continue
            yi = np.interp(xa[m], xb, yb)
            r = ya[m] - yi
            if errors is not None:
                sa = np.asarray(errors[a], dtype=np.float64)[m]
                sb = np.interp(xa[m], xb, np.asarray(errors[b], dtype=np.float64))
                r = r / np.sqrt(np.maximum(sa**2 + sb**2, 1e-300))
            tot += float(np.sum(r**2))
            cnt += int(np.sum(m))
    if cnt == 0:
        return float("inf")
    return tot / cnt


def collapse_search(p, curves: dict, pc_grid, nu_grid, errors: dict | None = None) -> tuple[float, float, float]:
    """Grid search minimizing :func:`collapse_quality`; returns (p_c, nu, objective)."""
    best = (np.nan, np.nan, np.inf)
    for pc in pc_grid:
        for nu in nu_grid:
            q = collapse_quality(p, curves, pc, nu, errors=errors)
            if q < best[2]:
                best = (float(pc), float(nu), q)
    return best
