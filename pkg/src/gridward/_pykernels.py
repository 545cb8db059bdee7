"""Pure-Python fallbacks for the compiled kernels in ``_kernels.pyx``.

The backend selector in ``_backend`` picks the compiled module when the
extension built, and this one otherwise; callers never see the difference.
Each function here must agree bit-for-bit with its compiled twin, so the
floating-point expressions are kept textually identical between the two
files (and the extension is compiled with fp contraction off). Do not
"simplify" an expression in one file without changing the other.
"""

import bisect
import math

import numpy as np

BACKEND = "pure"


def _quartile_sorted(s, n, p):
    # Linear interpolation at position (n-1)*p over the sorted prefix.
    pos = (n - 1) * p
    lo = int(pos)
    hi = lo + 1
    frac = pos - lo
    if hi >= n:
        return s[lo]
    return s[lo] + frac * (s[hi] - s[lo])


def outlier_severities(values, warmup):
    """Ternary severity per sample from prefix quartiles (prefix includes
    the sample itself). Samples with 1-based index <= warmup are forced 0.
    """
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[0]
    out = np.zeros(n, dtype=np.int8)
    buf = []
    for t in range(n):
        x = float(values[t])
        bisect.insort(buf, x)
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
    return out


def dtw_cost(u, v, band):
    """DTW distance with |u_i - v_j| pointwise cost and steps
    {(1,0),(0,1),(1,1)}. band < 0 means unbanded; otherwise cells with
    |i - j| > band are unreachable. Caller guarantees band >= |m - n|.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    m = u.shape[0]
    n = v.shape[0]
    inf = math.inf
    prev = [inf] * n
    cur = [inf] * n
    ul = u.tolist()
    vl = v.tolist()
    for i in range(m):
        ui = ul[i]
        jlo = 0 if band < 0 else max(0, i - band)
        jhi = n - 1 if band < 0 else min(n - 1, i + band)
        for j in range(n):
            cur[j] = inf
        for j in range(jlo, jhi + 1):
            d = abs(ui - vl[j])
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
        prev, cur = cur, prev
    return prev[n - 1]


def dtw_path(u, v, band):
    """Full-matrix DTW returning (distance, i-indices, j-indices), both
    index arrays 0-based. Tie-break on backtrack: diagonal, then up (i-1),
    then left (j-1).
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    m = u.shape[0]
    n = v.shape[0]
    inf = math.inf
    D = np.full((m, n), inf, dtype=np.float64)
    for i in range(m):
        ui = float(u[i])
        jlo = 0 if band < 0 else max(0, i - band)
        jhi = n - 1 if band < 0 else min(n - 1, i + band)
        for j in range(jlo, jhi + 1):
            d = abs(ui - float(v[j]))
            if i == 0 and j == 0:
                best = 0.0
            else:
                best = D[i - 1, j] if i > 0 else inf
                if i > 0 and j > 0 and D[i - 1, j - 1] < best:
                    best = D[i - 1, j - 1]
                if j > 0 and D[i, j - 1] < best:
                    best = D[i, j - 1]
            D[i, j] = d + best
    ai = [m - 1]
    bj = [n - 1]
    i, j = m - 1, n - 1
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            diag = D[i - 1, j - 1]
            up = D[i - 1, j]
            left = D[i, j - 1]
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
        ai.append(i)
        bj.append(j)
    ai.reverse()
    bj.reverse()
    return (
        float(D[m - 1, n - 1]),
        np.asarray(ai, dtype=np.int32),
        np.asarray(bj, dtype=np.int32),
    )


def best_split(X, y, idx, feats, n_classes):
    """Best Gini split for the node rows ``idx`` over candidate ``feats``.

    Returns (feature, threshold, weighted_gini); feature is -1 when no
    candidate feature has two distinct values. Thresholds are midpoints
    between consecutive distinct sorted values; the first strictly better
    (feature, threshold) in scan order wins. Gini values are computed from
    integer class counts, so results are exactly reproducible.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int32)
    idx = np.asarray(idx, dtype=np.int32)
    nn = idx.shape[0]
    best_feat = -1
    best_thr = 0.0
    best_g = math.inf
    for f in np.asarray(feats, dtype=np.int32):
        vals = X[idx, f]
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        sy = y[idx[order]]
        counts_left = [0] * n_classes
        counts_total = [0] * n_classes
        for c in sy:
            counts_total[c] += 1
        ssl = 0.0  # sum of squared left counts, updated incrementally
        ssr = 0.0
        for c in counts_total:
            ssr += float(c) * float(c)
        for i in range(nn - 1):
            c = sy[i]
            # moving one sample of class c from right to left updates the
            # squared-count sums by +-(2k+1)
            ssl += 2.0 * counts_left[c] + 1.0
            ssr -= 2.0 * (counts_total[c] - counts_left[c]) - 1.0
            counts_left[c] += 1
            if sv[i] == sv[i + 1]:
                continue
            nl = i + 1
            nr = nn - nl
            gl = 1.0 - ssl / (float(nl) * float(nl))
            gr = 1.0 - ssr / (float(nr) * float(nr))
            g = (nl * gl + nr * gr) / nn
            if g < best_g:
                best_g = g
                best_feat = int(f)
                best_thr = (sv[i] + sv[i + 1]) * 0.5
    return best_feat, float(best_thr), float(best_g)


def tree_apply(feature, threshold, left, right, X):
    """Route each row of X to a leaf; returns leaf node ids.

    ``feature[k] == -1`` marks node k as a leaf. Rows with
    x[feature] <= threshold go left.
    """
    X = np.asarray(X, dtype=np.float64)
    feature = np.asarray(feature, dtype=np.int32)
    threshold = np.asarray(threshold, dtype=np.float64)
    left = np.asarray(left, dtype=np.int32)
    right = np.asarray(right, dtype=np.int32)
    n = X.shape[0]
    out = np.empty(n, dtype=np.int32)
    for r in range(n):
        node = 0
        while feature[node] >= 0:
            if X[r, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[r] = node
    return out


def smo_solve(K, y, C, tol, max_iter):
    """Two-class SVM dual via SMO with maximal-violating-pair selection.

    Minimizes (1/2) a'Qa - e'a with Q_ij = y_i y_j K_ij subject to
    0 <= a <= C and y'a = 0. Returns (alpha, iterations, final_gap);
    converged when gap = m - M <= tol. Bias is recovered by the caller.
    """
    K = np.asarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = y.shape[0]
    alpha = np.zeros(n, dtype=np.float64)
    G = np.full(n, -1.0, dtype=np.float64)  # gradient of the dual objective
    it = 0
    gap = math.inf
    neg_inf = -math.inf
    while it < max_iter:
        v = -y * G
        up = ((y > 0.0) & (alpha < C)) | ((y < 0.0) & (alpha > 0.0))
        low = ((y < 0.0) & (alpha < C)) | ((y > 0.0) & (alpha > 0.0))
        vi = np.where(up, v, neg_inf)
        vj = np.where(low, v, math.inf)
        i = int(np.argmax(vi))
        j = int(np.argmin(vj))
        m_val = vi[i]
        M_val = vj[j]
        gap = m_val - M_val
        if gap <= tol:
            break
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad <= 0.0:
            quad = 1e-12
        # Two-variable subproblem. A crossed bound must be assigned
        # EXACTLY (not clipped via derived L/H): an alpha left one ulp
        # inside the box keeps its index in the working set while the
        # next step underflows to zero, and selection stalls forever.
        yi = y[i]
        yj = y[j]
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
        G += y * (a * K[i] + b * K[j])
        it += 1
    return alpha, it, float(gap)
