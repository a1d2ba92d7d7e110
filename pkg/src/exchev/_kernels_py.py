"""Pure-Python reference kernels.

These mirror ``_kernels.pyx`` operation for operation, so both backends
return bitwise identical arrays for identical inputs.
"""
import heapq
import math

import numpy as np

STATUS_OK = 0
STATUS_EXHAUSTED = 1
STATUS_EVENT_CAP = 2


def maxlinear_exponents(E, inv_coef):
    """``X[r, k] = min_j E[r, j] * inv_coef[j, k]``.

    Parameters
    ----------
    E : ndarray, shape (n, K)
        Positive standard exponential variates, one per atom.
    inv_coef : ndarray, shape (K, d)
        Reciprocal max-linear coefficients, ``inf`` where a coefficient is 0.
    """
    E = np.asarray(E, dtype=np.float64)
    inv = np.asarray(inv_coef, dtype=np.float64)
    X = np.full((E.shape[0], inv.shape[1]), np.inf)
    for j in range(inv.shape[0]):
        np.minimum(X, E[:, j:j + 1] * inv[j], out=X)
    return X


def condiid_first_passage(eps, gaps, comp, comp_start, comp_len, inv_x, jump,
                          inv_xmax, b, max_events):
    """First-passage times ``X_k = inf{t : H_t > eps_k}`` row by row.

    ``H_t = b t + sum_a -log G_a(T_a / t -)`` with arrival times ``T_a`` the
    cumulative sums of `gaps`. Arrival ``a`` uses mixture component
    ``comp[a]``, whose positive atoms (descending) are described by
    ``inv_x`` (reciprocal atom) and ``jump`` (``log F(x)/F(x-)``, possibly
    ``inf``) in the slice ``comp_start[c] : comp_start[c] + comp_len[c]``.

    Returns
    -------
    X : ndarray, shape (n, d)
    status : ndarray of int8, shape (n,)
        0 done, 1 arrival buffer exhausted, 2 event cap exceeded.
    """
    n, d = eps.shape
    B = gaps.shape[1]
    X = np.zeros((n, d))
    status = np.zeros(n, dtype=np.int8)
    inf = math.inf
    eps_l = np.asarray(eps, dtype=np.float64).tolist()
    gaps_l = np.asarray(gaps, dtype=np.float64).tolist()
    comp_l = np.asarray(comp, dtype=np.intp).tolist()
    comp_start = [int(v) for v in comp_start]
    comp_len = [int(v) for v in comp_len]
    inv_x = [float(v) for v in inv_x]
    jump = [float(v) for v in jump]
    inv_xmax = float(inv_xmax)
    b = float(b)
    for r in range(n):
        row_eps = eps_l[r]
        order = sorted(range(d), key=row_eps.__getitem__)
        row_gaps = gaps_l[r]
        row_comp = comp_l[r]
        heap = []
        t = 0.0
        H = 0.0
        i = 0
        k = 0
        T = 0.0
        nev = 0
        while i < d:
            exhausted = False
            while True:
                t_ev = heap[0][0] if heap else inf
                t_dr = t + (row_eps[order[i]] - H) / b if b > 0.0 else inf
                cand = t_ev if t_ev < t_dr else t_dr
                if k < B:
                    T_next = T + row_gaps[k]
                    if T_next * inv_xmax <= cand:
                        T = T_next
                        c = row_comp[k]
                        s = comp_start[c]
                        heapq.heappush(heap, (T * inv_x[s], k, T, c, 0))
                        k += 1
                        nev += 1
                        continue
                elif cand == inf or T * inv_xmax < cand:
                    exhausted = True
                break
            if exhausted:
                status[r] = STATUS_EXHAUSTED
                break
            if t_dr <= t_ev:
                X[r, order[i]] = t_dr
                t = t_dr
                H = row_eps[order[i]]
                i += 1
            else:
                te, ka, Ta, c, j = heapq.heappop(heap)
                nev += 1
                s = comp_start[c]
                H = H + b * (te - t) + jump[s + j]
                t = te
                if j + 1 < comp_len[c]:
                    heapq.heappush(heap, (Ta * inv_x[s + j + 1], ka, Ta, c, j + 1))
                while i < d and H > row_eps[order[i]]:
                    X[r, order[i]] = t
                    i += 1
            if nev > max_events:
                status[r] = STATUS_EVENT_CAP
                break
    return X, status
