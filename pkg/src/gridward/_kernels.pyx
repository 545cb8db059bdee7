# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: outlier scan, DTW, tree splits, SMO inner loop.

Each function has a pure-Python twin in ``_pykernels`` with identical
floating-point semantics; keep the arithmetic expressions in the two
files in lockstep. The extension is built with fp contraction disabled
so sums and products round exactly like the numpy/Python versions.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, fabs
from libc.stdlib cimport free, malloc
from libc.string cimport memmove

cnp.import_array()

BACKEND = "compiled"


cdef inline double _quartile_sorted(double* s, long n, double p) nogil:
    cdef double pos = (n - 1) * p
    cdef long lo = <long>pos
    cdef long hi = lo + 1
    cdef double frac = pos - lo
    if hi >= n:
        return s[lo]
    return s[lo] + frac * (s[hi] - s[lo])


def outlier_severities(values, long warmup):
    """Ternary severity per sample from prefix quartiles (prefix includes
    the sample itself). Samples with 1-based index <= warmup are forced 0.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vals = np.ascontiguousarray(
        values, dtype=np.float64
    )
    cdef long n = vals.shape[0]
    cdef cnp.ndarray[cnp.int8_t, ndim=1] out = np.zeros(n, dtype=np.int8)
    cdef double* buf = <double*>malloc(n * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    cdef long t, m, lo, hi, mid
    cdef double x, q1, q3, iqr
    try:
        with nogil:
            for t in range(n):
                x = vals[t]
                # binary search for the insertion point, then shift right
                lo = 0
                hi = t
                while lo < hi:
                    mid = (lo + hi) >> 1
                    if buf[mid] < x:
                        lo = mid + 1
                    else:
                        hi = mid
                if lo < t:
                    memmove(buf + lo + 1, buf + lo, (t - lo) * sizeof(double))
                buf[lo] = x
                m = t + 1
                if m <= warmup:
                    continue
                q1 = _quartile_sorted(buf, m, 0.25)
                q3 = _quartile_sorted(buf, m, 0.75)
                iqr = q3 - q1
                if x > q3 + 3.0 * iqr or x < q1 - 3.0 * iqr:
                    out[t] = 2
                elif x > q3 + 1.5 * iqr or x < q1 - 1.5 * iqr:
                    out[t] = 1
    finally:
        free(buf)
    return out


def dtw_cost(u, v, long band):
    """DTW distance with |u_i - v_j| pointwise cost and steps
    {(1,0),(0,1),(1,1)}. band < 0 means unbanded; caller guarantees
    band >= |m - n| otherwise.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] uu = np.ascontiguousarray(
        u, dtype=np.float64
    )
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vv = np.ascontiguousarray(
        v, dtype=np.float64
    )
    cdef long m = uu.shape[0]
    cdef long n = vv.shape[0]
    cdef double* prev = <double*>malloc(n * sizeof(double))
    cdef double* cur = <double*>malloc(n * sizeof(double))
    cdef double* tmp
    cdef long i, j, jlo, jhi
    cdef double ui, d, best, result
    if prev == NULL or cur == NULL:
        free(prev)
        free(cur)
        raise MemoryError()
    try:
        with nogil:
            for j in range(n):
                prev[j] = INFINITY
            for i in range(m):
                ui = uu[i]
                if band < 0:
                    jlo = 0
                    jhi = n - 1
                else:
                    jlo = i - band
                    if jlo < 0:
                        jlo = 0
                    jhi = i + band
                    if jhi > n - 1:
                        jhi = n - 1
                for j in range(n):
                    cur[j] = INFINITY
                for j in range(jlo, jhi + 1):
                    d = fabs(ui - vv[j])
                    if i == 0 and j == 0:
                        best = 0.0
                    else:
                        best = prev[j]
                        if j > 0:
                            if prev[j - 1] < best:
                                best = prev[j - 1]
                            if cur[j - 1] < best:
                                best = cur[j - 1]
                    cur[j] = d + best
                tmp = prev
                prev = cur
                cur = tmp
            result = prev[n - 1]
    finally:
        free(prev)
        free(cur)
    return result


def dtw_path(u, v, long band):
    """Full-matrix DTW returning (distance, i-indices, j-indices), both
    index arrays 0-based. Tie-break on backtrack: diagonal, then up, then
    left (same as the pure twin).
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] uu = np.ascontiguousarray(
        u, dtype=np.float64
    )
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vv = np.ascontiguousarray(
        v, dtype=np.float64
    )
    cdef long m = uu.shape[0]
    cdef long n = vv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] D = np.full(
        (m, n), np.inf, dtype=np.float64
    )
    cdef double[:, ::1] Dv = D
    cdef long i, j, jlo, jhi, k
    cdef double ui, d, best, diag, up, left
    with nogil:
        for i in range(m):
            ui = uu[i]
            if band < 0:
                jlo = 0
                jhi = n - 1
            else:
                jlo = i - band
                if jlo < 0:
                    jlo = 0
                jhi = i + band
                if jhi > n - 1:
                    jhi = n - 1
            for j in range(jlo, jhi + 1):
                d = fabs(ui - vv[j])
                if i == 0 and j == 0:
                    best = 0.0
                else:
                    best = Dv[i - 1, j] if i > 0 else INFINITY
                    if i > 0 and j > 0 and Dv[i - 1, j - 1] < best:
                        best = Dv[i - 1, j - 1]
                    if j > 0 and Dv[i, j - 1] < best:
                        best = Dv[i, j - 1]
                Dv[i, j] = d + best
    # path length is at most m + n - 1
    cdef cnp.ndarray[cnp.int32_t, ndim=1] ai = np.empty(m + n - 1, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] bj = np.empty(m + n - 1, dtype=np.int32)
    k = 0
    i = m - 1
    j = n - 1
    ai[k] = <cnp.int32_t>i
    bj[k] = <cnp.int32_t>j
    k += 1
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            diag = Dv[i - 1, j - 1]
            up = Dv[i - 1, j]
            left = Dv[i, j - 1]
            if diag <= up and diag <= left:
                i -= 1
                j -= 1
            elif up <= left:
                i -= 1
            else:
                j -= 1
        elif i > 0:
            i -= 1
        else:
            j -= 1
        ai[k] = <cnp.int32_t>i
        bj[k] = <cnp.int32_t>j
        k += 1
    return float(D[m - 1, n - 1]), ai[:k][::-1].copy(), bj[:k][::-1].copy()


def best_split(X, y, idx, feats, long n_classes):
    """Best Gini split for the node rows ``idx`` over candidate ``feats``.

    Returns (feature, threshold, weighted_gini); feature is -1 when no
    candidate has two distinct values. Matches the pure twin exactly
    (integer class counts, first strictly better split wins).
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Xv = np.ascontiguousarray(
        X, dtype=np.float64
    )
    cdef cnp.ndarray[cnp.int32_t, ndim=1] yv = np.ascontiguousarray(
        y, dtype=np.int32
    )
    cdef cnp.ndarray[cnp.int32_t, ndim=1] iv = np.ascontiguousarray(
        idx, dtype=np.int32
    )
    cdef cnp.ndarray[cnp.int32_t, ndim=1] fv = np.ascontiguousarray(
        feats, dtype=np.int32
    )
    cdef long nn = iv.shape[0]
    cdef long nf = fv.shape[0]
    cdef long best_feat = -1
    cdef double best_thr = 0.0
    cdef double best_g = INFINITY
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sv_np = np.empty(nn, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] order
    cdef cnp.ndarray[cnp.int32_t, ndim=1] sy_np = np.empty(nn, dtype=np.int32)
    cdef double[::1] sv
    cdef cnp.int32_t[::1] sy
    cdef long* cl = <long*>malloc(n_classes * sizeof(long))
    cdef long* ct = <long*>malloc(n_classes * sizeof(long))
    if cl == NULL or ct == NULL:
        free(cl)
        free(ct)
        raise MemoryError()
    cdef long fi, f, i, c, nl, nr
    cdef double ssl, ssr, gl, gr, g
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vals = np.empty(nn, dtype=np.float64)
    try:
        for fi in range(nf):
            f = fv[fi]
            for i in range(nn):
                vals[i] = Xv[iv[i], f]
            # stable argsort keeps parity with the pure twin; equal-value
            # blocks make the label order immaterial for the scan anyway
            order = np.argsort(vals, kind="stable")
            for i in range(nn):
                sv_np[i] = vals[order[i]]
                sy_np[i] = yv[iv[order[i]]]
            sv = sv_np
            sy = sy_np
            with nogil:
                for c in range(n_classes):
                    cl[c] = 0
                    ct[c] = 0
                for i in range(nn):
                    ct[sy[i]] += 1
                ssl = 0.0
                ssr = 0.0
                for c in range(n_classes):
                    ssr += (<double>ct[c]) * (<double>ct[c])
                for i in range(nn - 1):
                    c = sy[i]
                    ssl += 2.0 * cl[c] + 1.0
                    ssr -= 2.0 * (ct[c] - cl[c]) - 1.0
                    cl[c] += 1
                    if sv[i] == sv[i + 1]:
                        continue
                    nl = i + 1
                    nr = nn - nl
                    gl = 1.0 - ssl / ((<double>nl) * (<double>nl))
                    gr = 1.0 - ssr / ((<double>nr) * (<double>nr))
                    g = ((<double>nl) * gl + (<double>nr) * gr) / (<double>nn)
                    if g < best_g:
                        best_g = g
                        best_feat = f
                        best_thr = (sv[i] + sv[i + 1]) * 0.5
    finally:
        free(cl)
        free(ct)
    return int(best_feat), float(best_thr), float(best_g)


def tree_apply(feature, threshold, left, right, X):
    """Route each row of X to a leaf; returns leaf node ids."""
    cdef cnp.ndarray[cnp.int32_t, ndim=1] fe = np.ascontiguousarray(
        feature, dtype=np.int32
    )
    cdef cnp.ndarray[cnp.float64_t, ndim=1] th = np.ascontiguousarray(
        threshold, dtype=np.float64
    )
    cdef cnp.ndarray[cnp.int32_t, ndim=1] le = np.ascontiguousarray(
        left, dtype=np.int32
    )
    cdef cnp.ndarray[cnp.int32_t, ndim=1] ri = np.ascontiguousarray(
        right, dtype=np.int32
    )
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Xv = np.ascontiguousarray(
        X, dtype=np.float64
    )
    cdef long n = Xv.shape[0]
    cdef cnp.ndarray[cnp.int32_t, ndim=1] out = np.empty(n, dtype=np.int32)
    cdef long r, node
    with nogil:
        for r in range(n):
            node = 0
            while fe[node] >= 0:
                if Xv[r, fe[node]] <= th[node]:
                    node = le[node]
                else:
                    node = ri[node]
            out[r] = <cnp.int32_t>node
    return out


def smo_solve(K, y, double C, double tol, long max_iter):
    """Two-class SVM dual via SMO with maximal-violating-pair selection.

    Same contract as the pure twin: returns (alpha, iterations, final_gap).
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Kv = np.ascontiguousarray(
        K, dtype=np.float64
    )
    cdef cnp.ndarray[cnp.float64_t, ndim=1] yv = np.ascontiguousarray(
        y, dtype=np.float64
    )
    cdef long n = yv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] alpha_np = np.zeros(n, dtype=np.float64)
    cdef double[::1] alpha = alpha_np
    cdef cnp.ndarray[cnp.float64_t, ndim=1] G_np = np.full(n, -1.0, dtype=np.float64)
    cdef double[::1] G = G_np
    cdef double[:, ::1] Km = Kv
    cdef double[::1] ys = yv
    cdef long it = 0
    cdef double gap = INFINITY
    cdef long i, j, t
    cdef double vt, m_val, M_val, quad, yi, yj, delta, diff, total
    cdef double ai_old, aj_old, ai, aj, dai, daj, a, b
    with nogil:
        while it < max_iter:
            i = -1
            j = -1
            m_val = -INFINITY
            M_val = INFINITY
            for t in range(n):
                vt = -ys[t] * G[t]
                if (ys[t] > 0.0 and alpha[t] < C) or (ys[t] < 0.0 and alpha[t] > 0.0):
                    if vt > m_val:
                        m_val = vt
                        i = t
                if (ys[t] < 0.0 and alpha[t] < C) or (ys[t] > 0.0 and alpha[t] > 0.0):
                    if vt < M_val:
                        M_val = vt
                        j = t
            gap = m_val - M_val
            if gap <= tol or i < 0 or j < 0:
                break
            quad = Km[i, i] + Km[j, j] - 2.0 * Km[i, j]
            if quad <= 0.0:
                quad = 1e-12
            # A crossed bound is assigned exactly, never left one ulp
            # inside the box, or pair selection can stall (see pure twin).
            yi = ys[i]
            yj = ys[j]
            ai_old = alpha[i]
            aj_old = alpha[j]
            if yi != yj:
                delta = (-G[i] - G[j]) / quad
                diff = ai_old - aj_old
                ai = ai_old + delta
                aj = aj_old + delta
                if diff > 0.0:
                    if aj < 0.0:
                        aj = 0.0
                        ai = diff
                    if ai > C:
                        ai = C
                        aj = C - diff
                else:
                    if ai < 0.0:
                        ai = 0.0
                        aj = -diff
                    if aj > C:
                        aj = C
                        ai = C + diff
            else:
                delta = (G[i] - G[j]) / quad
                total = ai_old + aj_old
                ai = ai_old - delta
                aj = aj_old + delta
                if total > C:
                    if ai > C:
                        ai = C
                        aj = total - C
                    if aj > C:
                        aj = C
                        ai = total - C
                else:
                    if aj < 0.0:
                        aj = 0.0
                        ai = total
                    if ai < 0.0:
                        ai = 0.0
                        aj = total
            alpha[i] = ai
            alpha[j] = aj
            dai = ai - ai_old
            daj = aj - aj_old
            a = yi * dai
            b = yj * daj
            for t in range(n):
                G[t] = G[t] + ys[t] * (a * Km[i, t] + b * Km[j, t])
            it += 1
    return alpha_np, int(it), float(gap)
