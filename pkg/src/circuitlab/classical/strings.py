"""Haar-averaged operator spreading as a Markov chain on Pauli strings.

For q = 2 a Haar-random two-site gate sends any non-identity local content
to a uniformly random one of the 15 non-identity contents and leaves the
identity content alone. Site codes follow 2x + z: I=0, Z=1, X=2, Y=3.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ..core.circuit import brickwork_bonds
from ..errors import ParameterError

CODE_OF = {"I": 0, "Z": 1, "X": 2, "Y": 3}
LABELS = "IZXY"


@dataclass
class PauliString:
    codes: np.ndarray

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        try:
            return cls(np.array([CODE_OF[c] for c in label.upper()], dtype=np.uint8))
        except KeyError as exc:
            raise ParameterError(f"bad Pauli label {label!r}") from exc

    @classmethod
    def single(cls, L: int, site: int, pauli: str = "Z") -> "PauliString":
        c = np.zeros(L, dtype=np.uint8)
        c[site] = CODE_OF[pauli]
        return cls(c)

    @property
    def label(self) -> str:
        return "".join(LABELS[c] for c in self.codes)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.codes)

    @property
    def right_endpoint(self) -> int:
        s = self.support
        return int(s[-1]) if s.size else -1

    @property
    def left_endpoint(self) -> int:
        s = self.support
        return int(s[0]) if s.size else -1

    @property
    def weight(self) -> int:
        return int(self.support.size)


@njit(cache=True)
def _run(codes, depth, seed, tau0, record_every, right, left, density, nrec):
    """Open-chain brickwork string dynamics; pairs holding II are skipped,
    which is exact since the identity content is absorbing."""
    np.random.seed(seed)
    L = codes.shape[0]
    r = 0
    for t in range(depth):
        start = 0 if (tau0 + t) % 2 == 1 else 1
        for a in range(start, L - 1, 2):
            if codes[a] == 0 and codes[a + 1] == 0:
                continue
            k = 1 + np.random.randint(15)
            codes[a] = k >> 2
            codes[a + 1] = k & 3
        if (t + 1) % record_every == 0 and r < nrec:
            lo = -1
            hi = -1
            for i in range(L):
                if codes[i] != 0:
                    if lo < 0:
                        lo = i
                    hi = i
                    density[r, i] += 1.0
            right[r] = hi
            left[r] = lo
            r += 1


@dataclass
class StringRun:
    times: np.ndarray
    right: np.ndarray
    left: np.ndarray
    density: np.ndarray  # (times, L), 0/1 occupation for one run
    final: PauliString


def string_markov_run(L: int, depth: int, rng: np.random.Generator, initial: PauliString | str | None = None,
                      record_every: int = 1) -> StringRun:
    """Sample one trajectory of the string chain on an open brickwork."""
    if L < 2:
        raise ParameterError("need L >= 2")
    if initial is None:
        initial = PauliString.single(L, L // 2)
    elif isinstance(initial, str):
        initial = PauliString.from_label(initial)
    codes = np.array(initial.codes, dtype=np.uint8)
    if codes.size != L:
        raise ParameterError("initial string length differs from L")
    nrec = depth // record_every
    right = np.full(nrec, -1, dtype=np.int64)
    left = np.full(nrec, -1, dtype=np.int64)
    dens = np.zeros((nrec, L))
    _run(codes, depth, int(rng.integers(0, 2**31 - 1)), 1, record_every, right, left, dens, nrec)
    times = np.arange(1, nrec + 1) * record_every
    return StringRun(times, right, left, dens, PauliString(codes))


@dataclass
class FrontProfile:
    times: np.ndarray
    density: np.ndarray  # mean non-identity occupation (times, L)
    right_mean: np.ndarray
    right_std: np.ndarray
    left_mean: np.ndarray
    n_samples: int
    origin: int

    @property
    def width(self) -> np.ndarray:
        return self.right_std


def string_ensemble(L: int, depth: int, samples: int, rng: np.random.Generator, site: int | None = None,
                    record_every: int = 1) -> FrontProfile:
    site = L // 2 if site is None else site
    nrec = depth // record_every
    R = np.zeros((samples, nrec))
    Lf = np.zeros((samples, nrec))
    dens = np.zeros((nrec, L))
    for s in range(samples):
        run = string_markov_run(L, depth, rng, PauliString.single(L, site), record_every)
        R[s] = run.right
        Lf[s] = run.left
        dens += run.density
    times = np.arange(1, nrec + 1) * record_every
    return FrontProfile(times, dens / samples, R.mean(axis=0), R.std(axis=0, ddof=1) if samples > 1 else 0 * R[0],
                        Lf.mean(axis=0), samples, site)


@dataclass
class FrontSummary:
    v_B: float
    v_B_err: float
    width_exponent: float
    width_exponent_err: float
    interior_density: float
    interior_density_err: float


def otoc_front(ens: FrontProfile, t_window=(64, 1024)) -> FrontSummary:
    """Butterfly velocity from the mean right endpoint, front-width exponent,
    and the non-identity density deep inside the cone.

    The Haar-averaged OTOC for a Z reference operator is (4/3) times the
    non-identity density, so the density profile is the OTOC profile up to
    that constant.
    """
    from ..analysis import Series, linear_fit, powerlaw_fit

    t = ens.times.astype(np.float64)
    m = (t >= t_window[0]) & (t <= t_window[1])
    if m.sum() < 2:
        raise ParameterError("front window holds fewer than two times")
    n = ens.n_samples
    y = ens.right_mean[m] - ens.origin
    yerr = ens.right_std[m] / np.sqrt(n)
    coef, err = linear_fit(t[m], y, None)
    w = ens.width[m]
    fit = powerlaw_fit(Series(t[m], w, w / np.sqrt(2 * max(n - 1, 1))))
    # interior: sites within half the mean front distance of the origin, last time
    last = ens.density[-1]
    reach = max(1, int(0.5 * (ens.right_mean[-1] - ens.origin)))
    lo, hi = ens.origin - reach, ens.origin + reach
    interior = last[max(lo, 0):hi + 1]
    dens = float(interior.mean())
    # site occupations are Bernoulli; neighbours are close to independent inside the cone
    derr = float(np.sqrt(dens * (1 - dens) / (n * interior.size)))
    return FrontSummary(float(coef[1]), float(err[1]), fit.exponent, fit.exponent_err, dens, derr)


def exact_string_distribution(L: int, depth: int, site: int, pauli: str = "Z") -> dict[str, float]:
    """Exact distribution over strings after ``depth`` open brickwork layers,
    evolving the chain's probability vector over all 4^L strings."""
    if L > 8:
        raise ParameterError("exact string distribution limited to L <= 8")
    n = 4**L
    p = np.zeros(n)
    p[CODE_OF[pauli] << (2 * (L - 1 - site))] = 1.0
    codes = np.arange(n)
    for tau in range(1, depth + 1):
        for a, b in brickwork_bonds(L, tau, "open"):
            sa, sb = 2 * (L - 1 - a), 2 * (L - 1 - b)
            ident = (((codes >> sa) & 3) | ((codes >> sb) & 3)) == 0
            rest = codes & ~((3 << sa) | (3 << sb))
            new = np.where(ident, p, 0.0)
            mass = np.zeros(n)
            np.add.at(mass, rest[~ident], p[~ident])
            base = codes[ident]  # strings with II on the pair, one per 'rest'
            for k in range(1, 16):
                new[base | ((k >> 2) << sa) | ((k & 3) << sb)] += mass[base] / 15.0
            p = new
    return {"".join(LABELS[(i >> (2 * (L - 1 - j))) & 3] for j in range(L)): float(p[i])
            for i in np.flatnonzero(p > 0)}
