"""Numba kernels: bulge chasing, divide-and-conquer tridiagonal eigenvalues,
and elementary-symmetric ratio evaluation.

These are the hot inner loops of the certified cross approximation; the
public wrappers live in :mod:`spsdcross.eigen`.
"""

import numpy as np
from numba import njit

EPS = float(np.finfo(np.float64).eps)
_HUGE = 1.0e300


@njit(cache=True)
def chase_dpr1(lam, u):
    """Tridiagonalize ``diag(lam) - u u.T`` by adjacent Givens similarity.

    Rotations zero the trailing components of ``u`` one at a time; each one
    creates a single bulge that is chased off the band, so the total rotation
    count is O(n^2).  Returns the diagonal and off-diagonal of the result.
    """
    n = lam.size
    d = lam.copy()
    e = np.zeros(n - 1)
    w = u.copy()
    for k in range(n - 2, -1, -1):
        bk = w[k + 1]
        if bk == 0.0:
            continue
        r = np.hypot(w[k], bk)
        c = w[k] / r
        s = bk / r
        w[k] = r
        w[k + 1] = 0.0
        dk = d[k]
        dk1 = d[k + 1]
        d[k] = c * c * dk + s * s * dk1
        d[k + 1] = s * s * dk + c * c * dk1
        e[k] = c * s * (dk1 - dk)
        bulge = 0.0
        if k + 2 <= n - 1:
            bulge = s * e[k + 1]
            e[k + 1] = c * e[k + 1]
        q = k + 1
        while q + 1 <= n - 1 and bulge != 0.0:
            t = e[q - 1]
            h = np.hypot(t, bulge)
            if h == 0.0:
                break
            c = t / h
            s = bulge / h
            e[q - 1] = h
            dq = d[q]
            dq1 = d[q + 1]
            eq = e[q]
            d[q] = c * c * dq + 2.0 * c * s * eq + s * s * dq1
            d[q + 1] = s * s * dq - 2.0 * c * s * eq + c * c * dq1
            e[q] = c * s * (dq1 - dq) + (c * c - s * s) * eq
            if q + 2 <= n - 1:
                bulge = s * e[q + 1]
                e[q + 1] = c * e[q + 1]
            else:
                bulge = 0.0
            q += 1
    d[0] -= w[0] * w[0]
    return d, e


@njit(cache=True)
def _secular_root(dloc, z2, rho, i, norm_t):
    """Root ``i`` of ``1 + rho * sum(z2 / (dloc - x))``.

    Works in offset coordinates from the closer pole so pole differences stay
    cancellation free.  Each step fits the classic two-pole rational model
    (constant plus simple poles at the interval ends) to the split secular
    sums and solves the resulting quadratic; a maintained sign bracket with
    bisection fallback keeps the iteration safe.  Returns
    (origin pole index, offset).
    """
    k = dloc.size
    if i < k - 1:
        gap = dloc[i + 1] - dloc[i]
        fm = 1.0
        for j in range(k):
            fm += rho * z2[j] / ((dloc[j] - dloc[i]) - 0.5 * gap)
        if fm >= 0.0:
            org = i
            lo = 0.0
            hi = 0.5 * gap
        else:
            org = i + 1
            lo = -0.5 * gap
            hi = 0.0
        split = i
    else:
        org = k - 1
        zsum = 0.0
        for j in range(k):
            zsum += z2[j]
        lo = 0.0
        hi = rho * zsum
        if hi <= 0.0:
            return org, 0.0
        for _ in range(64):
            fhi = 1.0
            for j in range(k):
                fhi += rho * z2[j] / ((dloc[j] - dloc[org]) - hi)
            if fhi >= 0.0:
                break
            hi *= 2.0
        split = k - 2

    delta = np.empty(k)
    for j in range(k):
        delta[j] = dloc[j] - dloc[org]

    x = 0.5 * (lo + hi)
    for _ in range(60):
        # secular value, derivative and left/right split at x
        p = 0.0
        pd = 0.0
        q = 0.0
        qd = 0.0
        fabs_sum = 1.0
        for j in range(k):
            den = delta[j] - x
            term = rho * z2[j] / den
            fabs_sum += abs(term)
            if j <= split:
                p += term
                pd += term / den
            else:
                q += term
                qd += term / den
        fx = 1.0 + p + q
        if abs(fx) <= 16.0 * EPS * fabs_sum:
            break
        if fx < 0.0:
            lo = x
        else:
            hi = x
        if hi - lo <= 4.0 * EPS * (abs(lo) + abs(hi)) + 1e-18 * norm_t:
            x = 0.5 * (lo + hi)
            break
        # rational model: f ~ K + bp/(dl - y) + bq/(dr - y), matched to the
        # values and derivatives of the two split sums at the current x
        dl = delta[split] - x
        dr = delta[split + 1] - x if split + 1 < k else delta[k - 1] - x
        bp = pd * dl * dl
        cp = p - pd * dl
        bq = qd * dr * dr
        cq = q - qd * dr
        kk = 1.0 + cp + cq
        a2 = kk
        b2 = -(kk * (dl + dr) + bp + bq)
        c2 = kk * dl * dr + bp * dr + bq * dl
        xnew = -1.0
        disc = b2 * b2 - 4.0 * a2 * c2
        moved = False
        if disc >= 0.0:
            sq = np.sqrt(disc)
            if b2 >= 0.0:
                qq = -0.5 * (b2 + sq)
            else:
                qq = -0.5 * (b2 - sq)
            for cand_sel in range(2):
                if cand_sel == 0:
                    y = qq / a2 if a2 != 0.0 else np.inf
                else:
                    y = c2 / qq if qq != 0.0 else np.inf
                xnew = x + y
                if lo < xnew < hi:
                    moved = True
                    break
        if not moved:
            xnew = 0.5 * (lo + hi)
        if xnew == x:
            break
        x = xnew
    if lo < x < hi:
        off = x
    else:
        off = 0.5 * (lo + hi)
    if off == 0.0:
        anchor = hi if hi != 0.0 else lo
        if anchor != 0.0:
            off = 0.5 * anchor
        else:
            off = EPS * EPS * (1.0 + abs(dloc[org]))
    return org, off


@njit(cache=True)
def _gu_weights(dloc, rho, orgs, offs):
    """Recomputed rank-1 weight magnitudes from the computed roots.

    The interlacing pairing keeps every factor in (0, 1] apart from the final
    ``(lam_max - d_j) / rho`` term, so no product over/underflows.
    """
    k = dloc.size
    zhat = np.empty(k)
    for j in range(k):
        prod = 1.0
        for i in range(k):
            lam_m_dj = (dloc[orgs[i]] - dloc[j]) + offs[i]
            if i < j:
                prod *= lam_m_dj / (dloc[i] - dloc[j])
            elif i < k - 1:
                prod *= lam_m_dj / (dloc[i + 1] - dloc[j])
            else:
                prod *= lam_m_dj / rho
        zhat[j] = np.sqrt(abs(prod))
    return zhat


@njit(cache=True)
def _ql_rows(d_in, e_in):
    """QL implicit-shift eigensolver for a small symmetric tridiagonal block.

    Accumulates the Givens rotations only into the first and last rows of the
    eigenvector matrix, which is all the merge step above needs.  Used as the
    base case of the divide-and-conquer recursion (LAPACK-style cutoff).
    """
    n = d_in.size
    d = d_in.copy()
    e = np.zeros(n)
    e[:n - 1] = e_in
    fr = np.zeros(n)
    lr = np.zeros(n)
    fr[0] = 1.0
    lr[n - 1] = 1.0
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                ddv = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= EPS * ddv:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > 50:
                break
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = np.hypot(g, 1.0)
            sgn = r if g >= 0.0 else -r
            g = d[m] - d[l] + e[l] / (g + sgn)
            s = 1.0
            c = 1.0
            p = 0.0
            broke = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = np.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    broke = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                f = fr[i + 1]
                fr[i + 1] = s * fr[i] + c * f
                fr[i] = c * fr[i] - s * f
                f = lr[i + 1]
                lr[i + 1] = s * lr[i] + c * f
                lr[i] = c * lr[i] - s * f
            if broke:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    idx = np.argsort(d)
    return d[idx], fr[idx], lr[idx]


@njit(cache=True)
def _cuppen_rec(d, e):
    """Divide-and-conquer eigensolver for an unreduced symmetric tridiagonal.

    Returns eigenvalues ascending plus the first and last row of the
    (implicit) eigenvector matrix; only those two rows are needed to
    propagate rank-1 weights up the merge tree.
    """
    n = d.size
    if n == 1:
        lam = np.empty(1)
        fr = np.empty(1)
        lr = np.empty(1)
        lam[0] = d[0]
        fr[0] = 1.0
        lr[0] = 1.0
        return lam, fr, lr
    if n <= 24:
        return _ql_rows(d, e)

    m = n // 2
    b = e[m - 1]
    rho = abs(b)
    d1 = d[:m].copy()
    d2 = d[m:].copy()
    if rho > 0.0:
        d1[m - 1] -= rho
        d2[0] -= rho
    lam1, f1, l1 = _cuppen_rec(d1, e[:m - 1])
    lam2, f2, l2 = _cuppen_rec(d2, e[m:])

    k1 = m
    k2 = n - m
    sgn = 1.0 if b >= 0.0 else -1.0
    dd = np.empty(n)
    zz = np.empty(n)
    ff = np.empty(n)
    ll = np.empty(n)
    # linear merge of the two ascending halves
    i1 = 0
    i2 = 0
    pos = 0
    while i1 < k1 or i2 < k2:
        take1 = i2 >= k2 or (i1 < k1 and lam1[i1] <= lam2[i2])
        if take1:
            dd[pos] = lam1[i1]
            zz[pos] = l1[i1]
            ff[pos] = f1[i1]
            ll[pos] = 0.0
            i1 += 1
        else:
            dd[pos] = lam2[i2]
            zz[pos] = sgn * f2[i2]
            ff[pos] = 0.0
            ll[pos] = l2[i2]
            i2 += 1
        pos += 1
    if rho == 0.0:
        return dd, ff, ll

    zz2sum = 0.0
    for i in range(n):
        zz2sum += zz[i] * zz[i]
    norm_t = max(abs(dd[0]), abs(dd[n - 1])) + rho * zz2sum
    tol = 8.0 * EPS * norm_t
    znorm = np.sqrt(zz2sum)

    deflated = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        if rho * abs(zz[i]) * znorm <= tol:
            deflated[i] = True

    # Nearly equal poles: rotate the pair so one weight vanishes, dropping an
    # off-diagonal coupling no larger than the deflation tolerance.
    prev = -1
    for i in range(n):
        if deflated[i]:
            continue
        if prev >= 0:
            tau = np.hypot(zz[prev], zz[i])
            c = zz[i] / tau
            s = zz[prev] / tau
            if abs((dd[i] - dd[prev]) * c * s) <= tol:
                dp = dd[prev]
                di = dd[i]
                dd[prev] = c * c * dp + s * s * di
                dd[i] = s * s * dp + c * c * di
                zz[prev] = 0.0
                zz[i] = tau
                fp = ff[prev]
                fi = ff[i]
                ff[prev] = c * fp - s * fi
                ff[i] = s * fp + c * fi
                lp = ll[prev]
                li = ll[i]
                ll[prev] = c * lp - s * li
                ll[i] = s * lp + c * li
                deflated[prev] = True
        prev = i

    kept = np.empty(n, dtype=np.int64)
    kk = 0
    for i in range(n):
        if not deflated[i]:
            kept[kk] = i
            kk += 1

    out_lam = dd.copy()
    out_fr = ff.copy()
    out_lr = ll.copy()
    if kk == 1:
        j = kept[0]
        out_lam[j] = dd[j] + rho * zz[j] * zz[j]
    elif kk > 1:
        dloc = np.empty(kk)
        z2 = np.empty(kk)
        zsgn = np.empty(kk)
        frk = np.empty(kk)
        lrk = np.empty(kk)
        for t in range(kk):
            j = kept[t]
            dloc[t] = dd[j]
            z2[t] = zz[j] * zz[j]
            zsgn[t] = 1.0 if zz[j] >= 0.0 else -1.0
            frk[t] = ff[j]
            lrk[t] = ll[j]
        orgs = np.empty(kk, dtype=np.int64)
        offs = np.empty(kk)
        for t in range(kk):
            o, x = _secular_root(dloc, z2, rho, t, norm_t)
            orgs[t] = o
            offs[t] = x
        zhat = _gu_weights(dloc, rho, orgs, offs)
        for t in range(kk):
            sf = 0.0
            sl = 0.0
            nrm2 = 0.0
            for j in range(kk):
                den = (dloc[j] - dloc[orgs[t]]) - offs[t]
                v = zsgn[j] * zhat[j] / den
                nrm2 += v * v
                sf += frk[j] * v
                sl += lrk[j] * v
            inv = 1.0 / np.sqrt(nrm2)
            jj = kept[t]
            out_lam[jj] = dloc[orgs[t]] + offs[t]
            out_fr[jj] = sf * inv
            out_lr[jj] = sl * inv

    p2 = np.argsort(out_lam)
    return out_lam[p2], out_fr[p2], out_lr[p2]


@njit(cache=True)
def tridiag_eigvalues(d, e):
    """Eigenvalues of a symmetric tridiagonal, ascending.

    Splits at negligible off-diagonal entries, then runs the
    divide-and-conquer recursion on each unreduced block.
    """
    n = d.size
    out = np.empty(n)
    start = 0
    for i in range(n - 1):
        if abs(e[i]) <= EPS * (abs(d[i]) + abs(d[i + 1])):
            lam, _, _ = _cuppen_rec(d[start:i + 1].copy(), e[start:i].copy())
            out[start:i + 1] = lam
            start = i + 1
    lam, _, _ = _cuppen_rec(d[start:].copy(), e[start:n - 1].copy())
    out[start:] = lam
    return np.sort(out)


@njit(cache=True)
def esym_ratio(vals, m):
    """Ratio ``e_{m+1} / e_m`` of elementary symmetric polynomials.

    Negative inputs are clamped to zero and the recurrence runs on values
    scaled by their maximum, so the ratio is finite whenever ``e_m > 0``.
    Returns ``inf`` when ``e_m`` vanishes (rank below ``m``).
    """
    n = vals.size
    s = 0.0
    for i in range(n):
        if vals[i] > s:
            s = vals[i]
    if s <= 0.0:
        return np.inf if m >= 1 else 0.0
    mm = m + 1
    e = np.zeros(mm + 1)
    e[0] = 1.0
    top = 0
    for i in range(n):
        v = vals[i] / s
        if v < 0.0:
            v = 0.0
        if top < mm:
            top += 1
        for j in range(top, 0, -1):
            e[j] += v * e[j - 1]
    if e[m] == 0.0:
        return np.inf
    return s * e[m + 1] / e[m]
