"""numba kernels for the bit-packed stabilizer tableau.

Layout: ``x, z`` are ``uint64[2L, W]`` with qubit ``j`` in word ``j >> 6``,
bit ``j & 63``; ``r`` is ``uint8[2L]``. Rows ``0..L-1`` are destabilizers and
rows ``L..2L-1`` stabilizers. Only the first ``k`` stabilizer rows are active;
pairs ``(j, L + j)`` with ``j >= k`` are logical operator pairs of the mixed
state. The whole set of 2L rows is always a symplectic basis.
"""
import numpy as np
from numba import njit

U1 = np.uint64(1)
ZERO = np.uint64(0)
M1 = np.uint64(0x5555555555555555)
M2 = np.uint64(0x3333333333333333)
M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
H01 = np.uint64(0x0101010101010101)
S1 = np.uint64(1)
S2 = np.uint64(2)
S4 = np.uint64(4)
S56 = np.uint64(56)


@njit(cache=True, inline="always")
def popcount(v):
    v = v - ((v >> S1) & M1)
    v = (v & M2) + ((v >> S2) & M2)
    v = (v + (v >> S4)) & M4
    return np.int64((v * H01) >> S56)


@njit(cache=True, inline="always")
def getbit(row, j):
    return np.int64((row[j >> 6] >> np.uint64(j & 63)) & U1)


@njit(cache=True, inline="always")
def setbit(row, j, b):
    w = j >> 6
    m = U1 << np.uint64(j & 63)
    if b:
        row[w] |= m
    else:
        row[w] &= ~m


@njit(cache=True)
def anticommutes(x, z, i, px, pz):
    acc = ZERO
    for w in range(x.shape[1]):
        acc ^= (x[i, w] & pz[w]) ^ (z[i, w] & px[w])
    return popcount(acc) & 1


@njit(cache=True)
def rowmult(x, z, r, h, xi, zi, ri):
    """Row h <- P_i * P_h for a commuting Pauli (xi, zi, ri); tracks the sign."""
    tot = 0
    for w in range(x.shape[1]):
        x1 = xi[w]
        z1 = zi[w]
        x2 = x[h, w]
        z2 = z[h, w]
        plus = (x1 & z1 & z2 & ~x2) | (x1 & ~z1 & z2 & x2) | (~x1 & z1 & x2 & ~z2)
        minus = (x1 & z1 & x2 & ~z2) | (x1 & ~z1 & z2 & ~x2) | (~x1 & z1 & x2 & z2)
        tot += popcount(plus) - popcount(minus)
        x[h, w] = x2 ^ x1
        z[h, w] = z2 ^ z1
    ph = (2 * np.int64(r[h]) + 2 * np.int64(ri) + tot) % 4
    r[h] = np.uint8(ph >> 1)


@njit(cache=True)
def apply2(x, z, r, a, b, out, sgn):
    """Conjugate every row by a two-qubit Clifford given as a 16-entry table."""
    wa = a >> 6
    wb = b >> 6
    sa = np.uint64(a & 63)
    sb = np.uint64(b & 63)
    for i in range(x.shape[0]):
        xa = (x[i, wa] >> sa) & U1
        za = (z[i, wa] >> sa) & U1
        xb = (x[i, wb] >> sb) & U1
        zb = (z[i, wb] >> sb) & U1
        idx = np.int64((xa << np.uint64(3)) | (za << S2) | (xb << S1) | zb)
        if idx == 0:
            continue
        o = np.uint64(out[idx])
        r[i] ^= sgn[idx]
        nxa = (o >> np.uint64(3)) & U1
        nza = (o >> S2) & U1
        nxb = (o >> S1) & U1
        nzb = o & U1
        x[i, wa] = (x[i, wa] & ~(U1 << sa)) | (nxa << sa)
        z[i, wa] = (z[i, wa] & ~(U1 << sa)) | (nza << sa)
        x[i, wb] = (x[i, wb] & ~(U1 << sb)) | (nxb << sb)
        z[i, wb] = (z[i, wb] & ~(U1 << sb)) | (nzb << sb)


@njit(cache=True)
def apply1(x, z, r, a, out, sgn):
    wa = a >> 6
    sa = np.uint64(a & 63)
    for i in range(x.shape[0]):
        xa = (x[i, wa] >> sa) & U1
        za = (z[i, wa] >> sa) & U1
        idx = np.int64((xa << S1) | za)
        if idx == 0:
            continue
        o = np.uint64(out[idx])
        r[i] ^= sgn[idx]
        x[i, wa] = (x[i, wa] & ~(U1 << sa)) | (((o >> S1) & U1) << sa)
        z[i, wa] = (z[i, wa] & ~(U1 << sa)) | ((o & U1) << sa)


@njit(cache=True)
def apply_layer(x, z, r, sa, sb, gids, out_tab, sgn_tab):
    for g in range(sa.shape[0]):
        apply2(x, z, r, sa[g], sb[g], out_tab[gids[g]], sgn_tab[gids[g]])


@njit(cache=True)
def _swap_rows(x, z, r, i, j):
    for w in range(x.shape[1]):
        t = x[i, w]
        x[i, w] = x[j, w]
        x[j, w] = t
        t = z[i, w]
        z[i, w] = z[j, w]
        z[j, w] = t
    t8 = r[i]
    r[i] = r[j]
    r[j] = t8


@njit(cache=True)
def _copy_row(x, z, r, dst, src):
    for w in range(x.shape[1]):
        x[dst, w] = x[src, w]
        z[dst, w] = z[src, w]
    r[dst] = r[src]


@njit(cache=True)
def measure(x, z, r, k, px, pz, rbit, force):
    """Measure the (unsigned) Pauli (px, pz).

    Returns ``(outcome_bit, case, k)``; case 0 = anticommutes with an active
    stabilizer (random), 1 = deterministic, 2 = independent of the stabilizer
    group (random, k grows). ``force`` >= 0 fixes the outcome bit of a random
    case; ``rbit`` is used otherwise.
    """
    n2 = x.shape[0]
    L = n2 // 2
    W = x.shape[1]
    bit = rbit if force < 0 else force
    # case 0: an active stabilizer anticommutes
    p = -1
    for i in range(L, L + k):
        if anticommutes(x, z, i, px, pz):
            p = i
            break
    if p >= 0:
        xp = x[p].copy()
        zp = z[p].copy()
        rp = r[p]
        for i in range(n2):
            if i != p and i != p - L and anticommutes(x, z, i, px, pz):
                rowmult(x, z, r, i, xp, zp, rp)
        _copy_row(x, z, r, p - L, p)
        for w in range(W):
            x[p, w] = px[w]
            z[p, w] = pz[w]
        r[p] = np.uint8(bit)
        return bit, 0, k
    # case 2: a logical operator anticommutes
    q = -1
    for j in range(k, L):
        if anticommutes(x, z, j, px, pz):
            q = j
            break
        if anticommutes(x, z, L + j, px, pz):
            q = L + j
            break
    if q >= 0:
        j = q if q < L else q - L
        partner = q + L if q < L else q - L
        xq = x[q].copy()
        zq = z[q].copy()
        rq = r[q]
        for i in range(n2):
            if i != q and i != partner and anticommutes(x, z, i, px, pz):
                rowmult(x, z, r, i, xq, zq, rq)
        for w in range(W):
            x[j, w] = xq[w]
            z[j, w] = zq[w]
            x[L + j, w] = px[w]
            z[L + j, w] = pz[w]
        r[j] = rq
        r[L + j] = np.uint8(bit)
        if j != k:
            _swap_rows(x, z, r, j, k)
            _swap_rows(x, z, r, L + j, L + k)
        return bit, 2, k + 1
    # case 1: deterministic; multiply the stabilizers dual to anticommuting destabilizers
    sr = np.zeros(1, dtype=np.uint8)
    tx = np.zeros((1, W), dtype=np.uint64)
    tz = np.zeros((1, W), dtype=np.uint64)
    for i in range(k):
        if anticommutes(x, z, i, px, pz):
            rowmult(tx, tz, sr, 0, x[L + i], z[L + i], r[L + i])
    return np.int64(sr[0]), 1, k


@njit(cache=True)
def measure_site(x, z, r, k, site, basis, rbit, px, pz):
    """Single-qubit measurement; basis 0 = Z, 1 = X, 2 = Y. ``px``/``pz`` are
    scratch buffers of length W."""
    px[:] = ZERO
    pz[:] = ZERO
    if basis == 0 or basis == 2:
        setbit(pz, site, 1)
    if basis == 1 or basis == 2:
        setbit(px, site, 1)
    return measure(x, z, r, k, px, pz, rbit, -1)


@njit(cache=True)
def measure_layer(x, z, r, k, mask, rbits, px, pz):
    """Z-measure every site with mask[site] set; returns (k, random outcome count)."""
    nrand = 0
    for s in range(mask.shape[0]):
        if mask[s]:
            res = measure_site(x, z, r, k, s, 0, rbits[s], px, pz)
            k = res[2]
            if res[1] != 1:
                nrand += 1
    return k, nrand


@njit(cache=True)
def hybrid_chunk(x, z, r, k, bond_a, bond_b, nbonds, tau0, gids, masks, rbits, out_tab, sgn_tab, px, pz):
    """Brickwork layers tau0, tau0+1, ... each followed by Z measurements.

    ``bond_a[s], bond_b[s]`` hold the bonds of odd (s=0) / even (s=1) layers.
    Returns (k, random outcome count, measurement count).
    """
    nrand = 0
    nmeas = 0
    for t in range(gids.shape[0]):
        s = 0 if (tau0 + t) % 2 == 1 else 1
        for g in range(nbonds[s]):
            gid = gids[t, g]
            apply2(x, z, r, bond_a[s, g], bond_b[s, g], out_tab[gid], sgn_tab[gid])
        for site in range(masks.shape[1]):
            if masks[t, site]:
                res = measure_site(x, z, r, k, site, 0, rbits[t, site], px, pz)
                k = res[2]
                nmeas += 1
                if res[1] != 1:
                    nrand += 1
    return k, nrand, nmeas


@njit(cache=True)
def measurement_only_chunk(x, z, r, k, sites, is_zz, rbits, L, px, pz):
    """Sequence of Z_i Z_{i+1} (periodic) or X_i measurements."""
    for n in range(sites.shape[0]):
        px[:] = ZERO
        pz[:] = ZERO
        i = sites[n]
        if is_zz[n]:
            setbit(pz, i, 1)
            setbit(pz, (i + 1) % L, 1)
        else:
            setbit(px, i, 1)
        res = measure(x, z, r, k, px, pz, rbits[n], -1)
        k = res[2]
    return k


# ---------------------------------------------------------------------------
# GF(2) rank


@njit(cache=True)
def gf2_rank(m):
    """Rank of a packed bit matrix ``uint64[rows, words]``; destroys ``m``."""
    rows, W = m.shape
    rank = 0
    for w in range(W):
        for b in range(64):
            if rank >= rows:
                return rank
            mask = U1 << np.uint64(b)
            piv = -1
            for i in range(rank, rows):
                if m[i, w] & mask:
                    piv = i
                    break
            if piv < 0:
                continue
            if piv != rank:
                for ww in range(W):
                    t = m[piv, ww]
                    m[piv, ww] = m[rank, ww]
                    m[rank, ww] = t
            for i in range(piv + 1, rows):
                if m[i, w] & mask:
                    for ww in range(w, W):
                        m[i, ww] ^= m[rank, ww]
            rank += 1
    return rank


@njit(cache=True)
def restricted_rank(x, z, row0, row1, sites):
    """GF(2) rank of rows [row0, row1) restricted to the columns of ``sites``."""
    nr = row1 - row0
    if nr <= 0 or sites.shape[0] == 0:
        return 0
    nc = 2 * sites.shape[0]
    Wc = (nc + 63) // 64
    m = np.zeros((nr, Wc), dtype=np.uint64)
    for i in range(nr):
        for c in range(sites.shape[0]):
            s = sites[c]
            if getbit(x[row0 + i], s):
                setbit(m[i], 2 * c, 1)
            if getbit(z[row0 + i], s):
                setbit(m[i], 2 * c + 1, 1)
    return gf2_rank(m)


@njit(cache=True)
def x_columns(x, row0, row1, L):
    """Column signatures of the X block (as packed words per column)."""
    nr = row1 - row0
    Wr = (nr + 63) // 64
    cols = np.zeros((L, Wr), dtype=np.uint64)
    for i in range(nr):
        for s in range(L):
            if getbit(x[row0 + i], s):
                setbit(cols[s], i, 1)
    return cols
