"""Compiled pair scans over balls of the free group.

Words arrive as padded code matrices from :func:`ulamlab.words.ball_arrays`.
``offsets[m]`` is the ball index of the first word of length ``m``.  Within one
length, words sharing a prefix occupy a contiguous index range, which the
truncated scans use to visit only pairs whose product stays in the ball.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _cancel(x, lx, y, ly):
    c = 0
    while c < lx and c < ly and x[lx - 1 - c] == (y[c] ^ 1):
        c += 1
    return c


@njit(cache=True)
def _push(idx, pos, prev, ch, k):
    if pos == 0:
        return ch
    inv = prev ^ 1
    return idx * (2 * k - 1) + (ch if ch < inv else ch - 1)


@njit(cache=True)
def _product_rank(x, lx, y, ly, c, k, offsets):
    n = lx + ly - 2 * c
    idx = 0
    prev = -1
    pos = 0
    for t in range(lx - c):
        idx = _push(idx, pos, prev, x[t], k)
        prev = x[t]
        pos += 1
    for t in range(c, ly):
        idx = _push(idx, pos, prev, y[t], k)
        prev = y[t]
        pos += 1
    return offsets[n] + idx


@njit(cache=True)
def _partner_range(x, lx, ly, need, k, offsets):
    """Index range of length-``ly`` words starting with the inverse of x's last ``need`` letters."""
    start = offsets[ly]
    if need == 0:
        return start, offsets[ly + 1]
    idx = 0
    prev = -1
    for t in range(need):
        ch = x[lx - 1 - t] ^ 1
        idx = _push(idx, t, prev, ch, k)
        prev = ch
    block = 1
    for _ in range(ly - need):
        block *= 2 * k - 1
    lo = start + idx * block
    return lo, lo + block


@njit(cache=True)
def _need(lx, ly, L):
    excess = lx + ly - L
    if excess <= 0:
        return 0
    return (excess + 1) // 2


@njit(cache=True)
def scalar_defect_scan(codes, lengths, nwords, k, L, offsets, values):
    """max |v(xy) - v(x) v(y)| over pairs with |x|, |y|, |xy| <= L (scalar values).

    Ranges are walked by increasing length, so pairs are visited in (x, y) index
    order and ties keep the first pair.
    """
    best = -1.0
    bi = 0
    bj = 0
    npairs = 0
    for i in range(nwords):
        lx = lengths[i]
        x = codes[i]
        for ly in range(L + 1):
            need = _need(lx, ly, L)
            if need > lx or need > ly:
                continue
            lo, hi = _partner_range(x, lx, ly, need, k, offsets)
            for j in range(lo, hi):
                y = codes[j]
                c = _cancel(x, lx, y, ly)
                if lx + ly - 2 * c > L:
                    continue
                p = _product_rank(x, lx, y, ly, c, k, offsets)
                d = abs(values[p] - values[i] * values[j])
                npairs += 1
                if d > best:
                    best = d
                    bi = i
                    bj = j
    return best, bi, bj, npairs


@njit(cache=True)
def _count_valid(codes, lengths, nwords, k, L, offsets):
    count = 0
    for i in range(nwords):
        lx = lengths[i]
        for ly in range(L + 1):
            need = _need(lx, ly, L)
            if need > lx or need > ly:
                continue
            lo, hi = _partner_range(codes[i], lx, ly, need, k, offsets)
            for j in range(lo, hi):
                c = _cancel(codes[i], lx, codes[j], ly)
                if lx + ly - 2 * c <= L:
                    count += 1
    return count


@njit(cache=True)
def valid_pairs(codes, lengths, nwords, k, L, offsets):
    """All (x, y, xy) index triples with |x|, |y|, |xy| <= L, in (x, y) order."""
    count = _count_valid(codes, lengths, nwords, k, L, offsets)
    I = np.empty(count, dtype=np.int64)
    J = np.empty(count, dtype=np.int64)
    Pr = np.empty(count, dtype=np.int64)
    t = 0
    for i in range(nwords):
        lx = lengths[i]
        for ly in range(L + 1):
            need = _need(lx, ly, L)
            if need > lx or need > ly:
                continue
            lo, hi = _partner_range(codes[i], lx, ly, need, k, offsets)
            for j in range(lo, hi):
                c = _cancel(codes[i], lx, codes[j], ly)
                if lx + ly - 2 * c <= L:
                    I[t] = i
                    J[t] = j
                    Pr[t] = _product_rank(codes[i], lx, codes[j], ly, c, k, offsets)
                    t += 1
    return I, J, Pr


@njit(cache=True)
def brooks_value(buf, n, pat, ipat):
    """Cyclic occurrences of ``pat`` minus those of ``ipat`` in the cyclic reduction of buf[:n].

    ``buf`` needs ``len(pat) - 1`` spare slots past ``n``; they are overwritten.
    """
    t = 0
    while 2 * t + 1 < n and buf[t] == (buf[n - 1 - t] ^ 1):
        t += 1
    q = n - 2 * t
    if q == 0:
        return 0
    m = pat.shape[0]
    # unroll the cyclic word so every window is a linear slice
    for j in range(m - 1):
        buf[n - t + j] = buf[t + j % q]
    p0 = pat[0]
    i0 = ipat[0]
    cnt = 0
    for s in range(t, t + q):
        ch = buf[s]
        if ch == p0:
            ok = 1
            for j in range(1, m):
                if buf[s + j] != pat[j]:
                    ok = 0
                    break
            cnt += ok
        elif ch == i0:
            ok = 1
            for j in range(1, m):
                if buf[s + j] != ipat[j]:
                    ok = 0
                    break
            cnt -= ok
    return cnt


@njit(cache=True)
def coboundary_scan(codes, lengths, nwords, phi, pat, ipat, symmetric):
    """max |phi(xy) - phi(x) - phi(y)| over all pairs of ball words, phi(xy) recomputed.

    With ``symmetric`` set only pairs i <= j are visited: phi(yx) = phi(xy) for a
    conjugation-invariant phi, and the lexicographically first maximiser of the full
    scan always has i <= j, so value and witness are unchanged.
    """
    maxlen = codes.shape[1]
    buf = np.empty(2 * maxlen + pat.shape[0] + 1, dtype=np.int8)
    best = -1
    bi = 0
    bj = 0
    for i in range(nwords):
        lx = lengths[i]
        x = codes[i]
        for j in range(i if symmetric else 0, nwords):
            ly = lengths[j]
            y = codes[j]
            c = _cancel(x, lx, y, ly)
            n = 0
            for t in range(lx - c):
                buf[n] = x[t]
                n += 1
            for t in range(c, ly):
                buf[n] = y[t]
                n += 1
            d = brooks_value(buf, n, pat, ipat) - phi[i] - phi[j]
            if d < 0:
                d = -d
            if d > best:
                best = d
                bi = i
                bj = j
    return best, bi, bj
