"""Independent reference implementations the tests compare against.

Everything here is written the slow, obvious way on purpose: sort the
whole prefix, enumerate every warping path, difference the loss
numerically. None of it imports the package's kernels.
"""

import numpy as np


def quartiles_sorted(prefix):
    """(q1, q3, iqr) by sorting and interpolating at position (n-1)*p.

    Interpolation form pinned to q = s[lo] + frac*(s[hi]-s[lo]); the
    package must use the identical expression for bitwise agreement.
    """
    s = np.sort(np.asarray(prefix, dtype=np.float64))
    n = s.shape[0]
    out = []
    for p in (0.25, 0.75):
        pos = (n - 1) * p
        lo = int(pos)
        hi = lo + 1
        frac = pos - lo
        if hi >= n:
            out.append(float(s[lo]))
        else:
            out.append(float(s[lo] + frac * (s[hi] - s[lo])))
    q1, q3 = out
    return q1, q3, q3 - q1


def severities_loop(values, warmup=30):
    """Per-sample ternary severity; the prefix includes the judged sample."""
    out = []
    for t in range(1, len(values) + 1):
        if t <= warmup:
            out.append(0)
            continue
        x = float(values[t - 1])
        q1, q3, iqr = quartiles_sorted(values[:t])
        if x > q3 + 3.0 * iqr or x < q1 - 3.0 * iqr:
            out.append(2)
        elif x > q3 + 1.5 * iqr or x < q1 - 1.5 * iqr:
            out.append(1)
        else:
            out.append(0)
    return out


def first_trigger(severities, threshold=2, trigger_n=70):
    """0-based index where the running count of consecutive samples with
    severity >= threshold first reaches trigger_n, or None."""
    run = 0
    for t, s in enumerate(severities):
        if s >= threshold:
            run += 1
            if run >= trigger_n:
                return t
        else:
            run = 0
    return None


def enumerate_paths(m, n):
    """Every monotone path of steps {(1,0),(0,1),(1,1)} from (0,0) to
    (m-1,n-1), as lists of 0-based index pairs. Exponential; keep m,n <= 8.
    """
    out = []
    stack = [[(0, 0)]]
    while stack:
        path = stack.pop()
        i, j = path[-1]
        if i == m - 1 and j == n - 1:
            out.append(path)
            continue
        for di, dj in ((1, 1), (1, 0), (0, 1)):
            a, b = i + di, j + dj
            if a < m and b < n:
                stack.append(path + [(a, b)])
    return out


def dtw_brute(u, v):
    """Min over all paths of the forward-folded |u_i - v_j| sum."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    best = np.inf
    for path in enumerate_paths(u.shape[0], v.shape[0]):
        acc = 0.0
        for i, j in path:
            acc = acc + abs(u[i] - v[j])
        if acc < best:
            best = acc
    return float(best)


def path_cost(u, v, path_1based):
    acc = 0.0
    for a, b in path_1based:
        acc = acc + abs(float(u[a - 1]) - float(v[b - 1]))
    return acc


def adjusted_rand_index(labels_a, labels_b):
    a = np.asarray(labels_a)
    b = np.asarray(labels_b)
    n = a.shape[0]
    ua = np.unique(a)
    ub = np.unique(b)
    ct = np.zeros((ua.shape[0], ub.shape[0]), dtype=np.int64)
    for x, y in zip(a, b):
        ct[np.searchsorted(ua, x), np.searchsorted(ub, y)] += 1

    def comb2(v):
        return v * (v - 1) // 2

    sum_ij = comb2(ct).sum()
    sum_a = comb2(ct.sum(axis=1)).sum()
    sum_b = comb2(ct.sum(axis=0)).sum()
    total = comb2(n)
    expected = sum_a * sum_b / total
    maximum = 0.5 * (sum_a + sum_b)
    if maximum == expected:
        return 1.0
    return float((sum_ij - expected) / (maximum - expected))


def fd_gradients(loss_fn, params, step=1e-5):
    """Central finite differences of loss_fn() w.r.t. each array in
    params, differentiating in place. Returns arrays shaped like params.
    """
    grads = []
    for p in params:
        g = np.zeros_like(p)
        flat = p.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.shape[0]):
            keep = flat[i]
            flat[i] = keep + step
            up = loss_fn()
            flat[i] = keep - step
            down = loss_fn()
            flat[i] = keep
            gflat[i] = (up - down) / (2.0 * step)
        grads.append(g)
    return grads
