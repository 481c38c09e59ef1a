"""Minimal cuts through circuit networks.

Costs are counted in units of ln q: each intact leg segment crossed costs 1,
legs broken by a measurement cost 0. Three solvers share one cost model:

* :func:`directed_cut_profile` - forward dynamic programming over time
  (cuts monotone in time);
* :func:`min_cut` - Dijkstra on the planar dual (undirected cuts);
* :func:`brute_force_cut` - enumeration over leg subsets, for small graphs.

Columns are indexed by bond position ``b``: column ``b`` lies between sites
``b - 1`` and ``b``; with open boundaries columns 0 and L are the exterior.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from ..core.circuit import Circuit, GateEvent, MeasureEvent, poisson_events
from ..errors import InvalidGeometryError, ParameterError


@dataclass
class CutGraph:
    """Spacetime structure of a circuit made of two-site gates and measurements.

    ``events`` rows are ``(slice, kind, a, b)`` in time order; kind 0 is a gate
    on sites (a, b), kind 1 a measurement of site a.
    """

    L: int
    boundary: str
    events: np.ndarray
    q: int = 2

    @property
    def n_slices(self) -> int:
        return int(self.events[:, 0].max()) + 1 if len(self.events) else 0

    @property
    def unit(self) -> float:
        return float(np.log(self.q))

    def measured(self) -> "CutGraph":
        """Same graph with every leg broken by a measurement after each slice."""
        ev = [tuple(e) for e in self.events]
        out = []
        for s in range(self.n_slices):
            out.extend(e for e in ev if e[0] == s)
        last = self.n_slices
        out.extend((last, 1, i, -1) for i in range(self.L))
        return CutGraph(self.L, self.boundary, np.array(out, dtype=np.int64).reshape(-1, 4), self.q)


def cut_graph(circuit: Circuit) -> CutGraph:
    rows = []
    for t, layer in enumerate(circuit.layers):
        for ev in layer:
            if isinstance(ev, GateEvent):
                if len(ev.sites) != 2:
                    continue  # single-site gates do not change the cut geometry
                a, b = ev.sites
                if circuit.boundary == "open" and abs(a - b) != 1:
                    raise InvalidGeometryError("min-cut needs nearest-neighbour gates")
                rows.append((t, 0, a, b))
            elif isinstance(ev, MeasureEvent):
                rows.append((t, 1, ev.site, -1))
    return CutGraph(circuit.L, circuit.boundary, np.array(rows, dtype=np.int64).reshape(-1, 4), circuit.q)


def _bond_column(a: int, b: int, L: int) -> int:
    """Column crossed by a gate on sites a, b (the bond between them)."""
    lo, hi = min(a, b), max(a, b)
    if hi - lo == 1:
        return hi
    if lo == 0 and hi == L - 1:
        return 0  # periodic wrap bond
    raise InvalidGeometryError(f"gate on non-adjacent sites {a}, {b}")


# ---------------------------------------------------------------------------
# forward dynamic programming (directed cuts)


def directed_cut_profile(graph: CutGraph, init: np.ndarray | None = None) -> np.ndarray:
    """S_b after the whole circuit for every column b (units of ln q).

    ``init`` defaults to 0 everywhere (product initial state). Open boundary
    columns 0 and L stay pinned at their initial value.
    """
    L = graph.L
    periodic = graph.boundary == "periodic"
    ncol = L if periodic else L + 1
    S = np.zeros(ncol, dtype=np.float64) if init is None else np.array(init, dtype=np.float64)
    if S.shape != (ncol,):
        raise ParameterError(f"initial profile must have {ncol} entries")
    ev = graph.events
    kinds = ev[:, 1].copy()
    cols = np.array([_bond_column(a, b, L) if k == 0 else a for _, k, a, b in ev], dtype=np.int64)
    _dp_run(S, ev[:, 0].copy(), kinds, cols, L, periodic)
    return S


@njit(cache=True)
def _relax(S, cost, periodic):
    """Horizontal moves within a slice: S_b <= S_{b'} + (legs crossed)."""
    n = S.shape[0]
    L = cost.shape[0]
    sweeps = 2 if periodic else 1
    for _ in range(sweeps):
        for b in range(1, n) if not periodic else range(n):
            prev = (b - 1) % n
            c = S[prev] + cost[prev if periodic else b - 1]
            if c < S[b]:
                S[b] = c
        for b in range(n - 2, -1, -1) if not periodic else range(n - 1, -1, -1):
            nxt = (b + 1) % n
            c = S[nxt] + cost[b % L]
            if c < S[b]:
                S[b] = c


@njit(cache=True)
def _dp_run(S, slices, kinds, cols, L, periodic):
    n = S.shape[0]
    cost = np.ones(L)
    m = slices.shape[0]
    i = 0
    while i < m:
        s = slices[i]
        any_meas = False
        j = i
        while j < m and slices[j] == s:
            if kinds[j] == 0:
                b = cols[j]
                left = S[(b - 1) % n]
                right = S[(b + 1) % n]
                if periodic or (b > 0 and b < n - 1):
                    S[b] = min(left, right) + 1.0
            else:
                cost[cols[j]] = 0.0
                any_meas = True
            j += 1
        if any_meas:
            _relax(S, cost, periodic)
            cost[:] = 1.0
        i = j


# ---------------------------------------------------------------------------
# planar dual and Dijkstra (undirected cuts)


@dataclass
class DualGraph:
    n_nodes: int
    bottom: int
    top: np.ndarray  # top face node of each column
    rows: np.ndarray
    cols: np.ndarray
    costs: np.ndarray
    face_of: list  # node -> (column, face index) or ("bottom",)


def dual_graph(graph: CutGraph) -> DualGraph:
    L = graph.L
    periodic = graph.boundary == "periodic"
    ncol = L if periodic else L + 1
    gates_per_col = np.zeros(ncol, dtype=np.int64)
    for _, kind, a, b in graph.events:
        if kind == 0:
            gates_per_col[_bond_column(a, b, L)] += 1
    offset = np.concatenate([[0], np.cumsum(gates_per_col + 1)])
    bottom = int(offset[-1])
    face_of = [(c, k) for c in range(ncol) for k in range(gates_per_col[c] + 1)] + [("bottom",)]
    edges: dict[tuple[int, int], float] = {}

    def add(u, v, w):
        key = (min(u, v), max(u, v))
        if key not in edges or w < edges[key]:
            edges[key] = w

    # walk each site's worldline, tracking the faces on its left and right
    left_col = [s % ncol if periodic else s for s in range(L)]
    right_col = [(s + 1) % ncol if periodic else s + 1 for s in range(L)]
    face_idx = np.zeros(ncol, dtype=np.int64)
    seg_cost = np.ones(L)
    # events are processed in time order so face indices advance consistently
    for _, kind, a, b in graph.events:
        if kind == 0:
            c = _bond_column(a, b, L)
            # close the current segments of both sites before the gate
            for site in (a, b):
                lc, rc = left_col[site], right_col[site]
                add(int(offset[lc] + face_idx[lc]), int(offset[rc] + face_idx[rc]), seg_cost[site])
                seg_cost[site] = 1.0
            face_idx[c] += 1
        else:
            seg_cost[a] = 0.0
    for site in range(L):
        lc, rc = left_col[site], right_col[site]
        add(int(offset[lc] + face_idx[lc]), int(offset[rc] + face_idx[rc]), seg_cost[site])
    # bottom faces touch the product initial state; exterior columns are free too
    for c in range(ncol):
        add(int(offset[c]), bottom, 0.0)
        if not periodic and c in (0, ncol - 1):
            for k in range(gates_per_col[c] + 1):
                add(int(offset[c] + k), bottom, 0.0)
    top = np.array([offset[c] + gates_per_col[c] for c in range(ncol)], dtype=np.int64)
    keys = np.array(sorted(edges), dtype=np.int64).reshape(-1, 2)
    costs = np.array([edges[tuple(k)] for k in keys], dtype=np.float64)
    return DualGraph(bottom + 1, bottom, top, keys[:, 0], keys[:, 1], costs, face_of)


def _dijkstra_zero_aware(dg: DualGraph, source: int) -> np.ndarray:
    """Distances from ``source``. Zero-cost edges are contracted first, since
    scipy's sparse input cannot carry explicit zero weights."""
    parent = np.arange(dg.n_nodes)

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    for u, v, c in zip(dg.rows, dg.cols, dg.costs):
        if c == 0.0:
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[max(ru, rv)] = min(ru, rv)
    roots = np.array([find(u) for u in range(dg.n_nodes)])
    uniq, comp = np.unique(roots, return_inverse=True)
    best: dict[tuple[int, int], float] = {}
    for u, v, c in zip(comp[dg.rows], comp[dg.cols], dg.costs):
        if c > 0 and u != v:
            key = (min(u, v), max(u, v))
            if key not in best or c < best[key]:
                best[key] = c
    n = uniq.size
    ks = np.array(list(best), dtype=np.int64).reshape(-1, 2)
    ws = np.array(list(best.values()), dtype=np.float64)
    mat = coo_matrix((ws, (ks[:, 0], ks[:, 1])), shape=(n, n)).tocsr()
    d = dijkstra(mat, directed=False, indices=int(comp[source]))
    return d[comp]


@dataclass
class CutResult:
    cost: float  # nats
    units: float  # number of legs (units of ln q)
    path: list  # dual faces visited, as (column, face index) tuples


def _path(dg: DualGraph, dist: np.ndarray, source: int, target: int) -> list:
    """Walk back from target along tight edges, preferring the smallest node."""
    adj: dict[int, list] = {}
    for u, v, c in zip(dg.rows, dg.cols, dg.costs):
        adj.setdefault(int(u), []).append((int(v), c))
        adj.setdefault(int(v), []).append((int(u), c))
    path = [target]
    seen = {target}
    cur = target
    while cur != source and dist[cur] > 0:
        cands = sorted(v for v, c in adj.get(cur, []) if v not in seen and abs(dist[v] + c - dist[cur]) < 1e-9)
        if not cands:
            break
        cur = cands[0]
        seen.add(cur)
        path.append(cur)
    if cur != source:
        # remaining steps are free (zero-cost component); finish with BFS over zero edges
        path.append(source)
    return [dg.face_of[u] for u in reversed(path)]


def min_cut(graph: CutGraph | Circuit, region) -> CutResult:
    """Minimal cut for a final-time region.

    ``region`` is a single column y (cut for sites [0, y) with open
    boundaries) or a pair (a, c) for the finite interval of sites [a, c).
    """
    if isinstance(graph, Circuit):
        graph = cut_graph(graph)
    dg = dual_graph(graph)
    ncol = dg.top.size
    if np.isscalar(region):
        y = int(region)
        if not 0 <= y < ncol or (graph.boundary == "periodic"):
            if graph.boundary == "periodic":
                raise ParameterError("a single endpoint needs open boundaries")
            raise ParameterError("endpoint out of range")
        src = int(dg.top[y])
        d = _dijkstra_zero_aware(dg, src)
        units = float(d[dg.bottom])
        return CutResult(units * graph.unit, units, _path(dg, d, src, dg.bottom))
    a, c = (int(v) for v in region)
    if not (0 <= a < c <= graph.L) or (graph.boundary == "periodic" and c == graph.L):
        raise ParameterError(f"invalid region {region}")
    ta, tc = int(dg.top[a]), int(dg.top[c % ncol])
    da = _dijkstra_zero_aware(dg, ta)
    dc = _dijkstra_zero_aware(dg, tc)
    split = da[dg.bottom] + dc[dg.bottom]
    joined = da[tc]
    if not np.isfinite(min(split, joined)):
        raise ParameterError("region endpoints are disconnected")
    if joined <= split:
        return CutResult(joined * graph.unit, float(joined), _path(dg, da, ta, tc))
    path = _path(dg, da, ta, dg.bottom) + list(reversed(_path(dg, dc, tc, dg.bottom)))
    return CutResult(split * graph.unit, float(split), path)


# ---------------------------------------------------------------------------
# brute force oracle


def leg_segments(graph: CutGraph):
    """Primal structure: vertices are gates, terminals are final outputs.

    Returns ``(n_vertices, edges)`` where each edge is ``(u, v)`` with
    ``v = -1 - site`` for an output terminal and ``u = -1`` meaning a free
    (dangling) end. Measured segments are split and become dangling.
    """
    L = graph.L
    last = [-1] * L  # vertex at the lower end of each site's open segment (-1 = dangling)
    edges = []
    nv = 0
    for _, kind, a, b in graph.events:
        if kind == 0:
            v = nv
            nv += 1
            for site in (a, b):
                if last[site] >= 0:
                    edges.append((last[site], v))
                last[site] = v
        else:
            last[a] = -1
    for site in range(L):
        if last[site] >= 0:
            edges.append((last[site], -1 - site))
    return nv, edges


def brute_force_cut(graph: CutGraph, sites_A, max_edges: int = 20) -> float:
    """Minimum number of leg segments whose removal separates A's outputs from
    the other outputs (units of ln q). Exponential; for tiny circuits only."""
    L = graph.L
    A = set(int(s) for s in sites_A)
    nv, edges = leg_segments(graph)
    if len(edges) > max_edges:
        raise ParameterError(f"brute force limited to {max_edges} edges, got {len(edges)}")
    # nodes: gate vertices, then terminal A (nv) and terminal B (nv + 1)
    ends = []
    for u, v in edges:
        if v < 0:
            site = -1 - v
            v = nv if site in A else nv + 1
        ends.append((u, v))
    ne = len(ends)
    n = nv + 2
    best = np.inf
    masks = np.arange(1 << ne, dtype=np.int64)
    # popcount of every mask, cheapest first
    pc = np.zeros(masks.size, dtype=np.int64)
    for e in range(ne):
        pc += (masks >> e) & 1
    order = np.argsort(pc, kind="stable")
    for m in order:
        if pc[m] >= best:
            break
        reach = {nv}
        changed = True
        while changed:
            changed = False
            for e, (u, v) in enumerate(ends):
                if (m >> e) & 1:
                    continue
                if (u in reach) != (v in reach):
                    reach.add(v if u in reach else u)
                    changed = True
        if nv + 1 not in reach:
            best = int(pc[m])
    return float(best)


# ---------------------------------------------------------------------------
# Poisson circuits: line tension and KPZ statistics


@njit(cache=True)
def _poisson_dp(S, origin, bonds, tie_bits, checkpoints_idx, out_S, out_origin):
    """Sequential gate updates S_b <- min(S_{b-1}, S_{b+1}) + 1 (open chain,
    columns 0..L with pinned ends); records snapshots at event indices."""
    n = S.shape[0]
    ci = 0
    for e in range(bonds.shape[0] + 1):
        while ci < checkpoints_idx.shape[0] and checkpoints_idx[ci] == e:
            out_S[ci, :] = S
            out_origin[ci, :] = origin
            ci += 1
        if e == bonds.shape[0]:
            break
        b = bonds[e] + 1  # bond between sites bonds[e], bonds[e] + 1 is column bonds[e] + 1
        if b <= 0 or b >= n - 1:
            continue
        l = S[b - 1]
        r = S[b + 1]
        if l < r or (l == r and tie_bits[e] == 0):
            S[b] = l + 1.0
            origin[b] = origin[b - 1]
        else:
            S[b] = r + 1.0
            origin[b] = origin[b + 1]


@dataclass
class PoissonCutSample:
    times: np.ndarray
    S: np.ndarray  # (n_times, L + 1) cut cost per column, units of ln q
    origin: np.ndarray  # (n_times, L + 1) bottom column of the chosen cut


def poisson_cut_sample(L: int, times, rng: np.random.Generator, rate: float = 1.0, pin: int | None = None,
                       disorder: bool = True) -> PoissonCutSample:
    """Directed min-cut costs on a rate-``rate`` Poisson circuit.

    ``pin`` fixes the bottom endpoint at that column (point-to-point cuts);
    otherwise the bottom boundary is free (product state). Ties between the
    two sides are broken at random. With ``disorder=False`` gates act at the
    regular times of a brickwork instead.
    """
    times = np.asarray(sorted(times), dtype=np.float64)
    T = float(times[-1])
    if pin is None:
        S = np.zeros(L + 1)
    else:
        # a pinned bottom endpoint: reaching column b along the bottom crosses |b - pin| legs
        S = np.abs(np.arange(L + 1) - pin).astype(np.float64)
    origin = np.arange(L + 1, dtype=np.int64)
    if disorder:
        ev_t, bonds = poisson_events(L, T, rate, rng)
    else:
        nsteps = int(np.ceil(T * rate * 2))
        rows_t, rows_b = [], []
        for k in range(nsteps):
            start = k % 2
            bs = np.arange(start, L - 1, 2)
            rows_t.append(np.full(bs.size, (k + 1) / (2 * rate)))
            rows_b.append(bs)
        ev_t, bonds = np.concatenate(rows_t), np.concatenate(rows_b)
    tie = rng.integers(0, 2, size=bonds.size, dtype=np.uint8)
    cidx = np.searchsorted(ev_t, times, side="right").astype(np.int64)
    out_S = np.zeros((times.size, L + 1))
    out_o = np.zeros((times.size, L + 1), dtype=np.int64)
    _poisson_dp(S, origin, bonds.astype(np.int64), tie, cidx, out_S, out_o)
    return PoissonCutSample(times, out_S, out_o)


def tension_extrapolate(times, mean, se) -> tuple[np.ndarray, np.ndarray]:
    """Weighted fit of S/t = E + c t^{-2/3} per velocity column; returns (E, err).

    ``mean`` and ``se`` have shape (len(times), n_v).
    """
    times = np.asarray(times, dtype=np.float64)
    mean = np.atleast_2d(np.asarray(mean, dtype=np.float64).T).T
    se = np.atleast_2d(np.asarray(se, dtype=np.float64).T).T
    xfit = times ** (-2.0 / 3.0)
    A = np.stack([np.ones_like(xfit), xfit], axis=1)
    E = np.zeros(mean.shape[1])
    err = np.zeros(mean.shape[1])
    for j in range(mean.shape[1]):
        w = 1.0 / np.maximum(se[:, j], 1e-12) ** 2
        cov = np.linalg.inv(A.T @ (A * w[:, None]))
        E[j] = (cov @ (A.T @ (w * mean[:, j])))[0]
        err[j] = np.sqrt(cov[0, 0])
    return E, err


@dataclass
class TensionEstimate:
    v: np.ndarray
    E: np.ndarray
    err: np.ndarray
    finite_t: dict  # t -> (mean S/t, stderr) per v


def line_tension_estimate(v, samples: int, rng: np.random.Generator, times=(128, 256, 512, 1024),
                          rate: float = 1.0) -> TensionEstimate:
    """E(v) from point-to-point cuts: S(x0 + v t, t) / t extrapolated in t^{-2/3}.

    Each sample pins the bottom endpoint at the chain centre and reads the cut
    cost at every top column, so one sample serves all velocities.
    """
    v = np.atleast_1d(np.asarray(v, dtype=np.float64))
    times = np.asarray(sorted(times), dtype=np.float64)
    if np.any(np.abs(v) > 1.0):
        raise ParameterError("line tension sampled for |v| <= 1 only")
    T = times[-1]
    L = int(2 * T * rate * 1.05) + 8
    x0 = L // 2
    acc = np.zeros((samples, times.size, v.size))
    for s in range(samples):
        smp = poisson_cut_sample(L, times, rng, rate, pin=x0)
        for i, t in enumerate(times):
            cols = np.rint(x0 + v * t).astype(int)
            acc[s, i] = smp.S[i, cols] / t
    mean = acc.mean(axis=0)
    se = acc.std(axis=0, ddof=1) / np.sqrt(samples) if samples > 1 else np.zeros_like(mean)
    E, err = tension_extrapolate(times, mean, se)
    finite = {float(t): (mean[i], se[i]) for i, t in enumerate(times)}
    return TensionEstimate(v, E, err, finite)


@dataclass
class KPZResult:
    beta: float
    beta_err: float
    zeta: float
    zeta_err: float
    times: np.ndarray
    std_S: np.ndarray
    std_x: np.ndarray


def kpz_exponents(times, samples: int, rng: np.random.Generator, rate: float = 1.0,
                  disorder: bool = True) -> KPZResult:
    """Fluctuation (beta) and wandering (zeta) exponents of point-to-line cuts."""
    from ..analysis import powerlaw_fit, Series

    times = np.asarray(sorted(times), dtype=np.float64)
    if samples < 10:
        raise ParameterError("need at least 10 samples for exponent fits")
    T = times[-1]
    L = int(2 * T * rate * 1.05) + 8
    y = L // 2
    S = np.zeros((samples, times.size))
    X = np.zeros((samples, times.size))
    for s in range(samples):
        smp = poisson_cut_sample(L, times, rng, rate, disorder=disorder)
        S[s] = smp.S[:, y]
        X[s] = smp.origin[:, y] - y
    sdS = S.std(axis=0, ddof=1)
    sdX = X.std(axis=0, ddof=1)
    if np.any(sdS <= 0) or np.any(sdX <= 0):
        return KPZResult(0.0, 0.0, 0.0, 0.0, times, sdS, sdX)
    # stderr of a sample std ~ std / sqrt(2(n-1))
    fb = powerlaw_fit(Series(times, sdS, sdS / np.sqrt(2 * (samples - 1))))
    fz = powerlaw_fit(Series(times, sdX, sdX / np.sqrt(2 * (samples - 1))))
    return KPZResult(fb.exponent, fb.exponent_err, fz.exponent, fz.exponent_err, times, sdS, sdX)
