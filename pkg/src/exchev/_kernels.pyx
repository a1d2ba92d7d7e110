# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled sampling kernels.

Semantics are identical to ``exchev._kernels_py``; see that module for the
argument conventions.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY
from libc.stdlib cimport free, malloc

cnp.import_array()

cdef enum:
    _OK = 0
    _EXHAUSTED = 1
    _EVENT_CAP = 2

STATUS_OK = _OK
STATUS_EXHAUSTED = _EXHAUSTED
STATUS_EVENT_CAP = _EVENT_CAP


def maxlinear_exponents(E, inv_coef):
    cdef const double[:, ::1] e = np.ascontiguousarray(E, dtype=np.float64)
    cdef const double[:, ::1] inv = np.ascontiguousarray(inv_coef, dtype=np.float64)
    cdef Py_ssize_t n = e.shape[0], K = inv.shape[0], d = inv.shape[1]
    out = np.empty((n, d), dtype=np.float64)
    cdef double[:, ::1] X = out
    cdef Py_ssize_t r, j, k
    cdef double v, ej
    with nogil:
        for r in range(n):
            for k in range(d):
                X[r, k] = INFINITY
            for j in range(K):
                ej = e[r, j]
                for k in range(d):
                    v = ej * inv[j, k]
                    if v < X[r, k]:
                        X[r, k] = v
    return out


# binary min-heap keyed on (time, arrival index)
cdef inline bint _less(double ta, Py_ssize_t ka, double tb, Py_ssize_t kb) noexcept nogil:
    return ta < tb or (ta == tb and ka < kb)


cdef inline void _heap_push(double* ht, Py_ssize_t* hk, double* hT, Py_ssize_t* hc,
                            Py_ssize_t* hj, Py_ssize_t* size, double t, Py_ssize_t ka,
                            double Ta, Py_ssize_t c, Py_ssize_t j) noexcept nogil:
    cdef Py_ssize_t pos = size[0]
    cdef Py_ssize_t parent
    size[0] += 1
    while pos > 0:
        parent = (pos - 1) >> 1
        if _less(t, ka, ht[parent], hk[parent]):
            ht[pos] = ht[parent]
            hk[pos] = hk[parent]
            hT[pos] = hT[parent]
            hc[pos] = hc[parent]
            hj[pos] = hj[parent]
            pos = parent
        else:
            break
    ht[pos] = t
    hk[pos] = ka
    hT[pos] = Ta
    hc[pos] = c
    hj[pos] = j


cdef inline void _heap_pop(double* ht, Py_ssize_t* hk, double* hT, Py_ssize_t* hc,
                           Py_ssize_t* hj, Py_ssize_t* size) noexcept nogil:
    # removes the root; caller reads it beforehand
    cdef Py_ssize_t last, pos, child
    cdef double t
    cdef Py_ssize_t ka, c, j
    cdef double Ta
    size[0] -= 1
    last = size[0]
    if last == 0:
        return
    t = ht[last]
    ka = hk[last]
    Ta = hT[last]
    c = hc[last]
    j = hj[last]
    pos = 0
    while True:
        child = 2 * pos + 1
        if child >= last:
            break
        if child + 1 < last and _less(ht[child + 1], hk[child + 1], ht[child], hk[child]):
            child += 1
        if _less(ht[child], hk[child], t, ka):
            ht[pos] = ht[child]
            hk[pos] = hk[child]
            hT[pos] = hT[child]
            hc[pos] = hc[child]
            hj[pos] = hj[child]
            pos = child
        else:
            break
    ht[pos] = t
    hk[pos] = ka
    hT[pos] = Ta
    hc[pos] = c
    hj[pos] = j


def condiid_first_passage(eps, gaps, comp, comp_start, comp_len, inv_x, jump,
                          inv_xmax, b, max_events):
    cdef const double[:, ::1] E = np.ascontiguousarray(eps, dtype=np.float64)
    cdef const double[:, ::1] G = np.ascontiguousarray(gaps, dtype=np.float64)
    cdef const Py_ssize_t[:, ::1] C = np.ascontiguousarray(comp, dtype=np.intp)
    cdef const Py_ssize_t[::1] cstart = np.ascontiguousarray(comp_start, dtype=np.intp)
    cdef const Py_ssize_t[::1] clen = np.ascontiguousarray(comp_len, dtype=np.intp)
    cdef const double[::1] ix = np.ascontiguousarray(inv_x, dtype=np.float64)
    cdef const double[::1] jp = np.ascontiguousarray(jump, dtype=np.float64)
    cdef double ixmax = inv_xmax
    cdef double bb = b
    cdef long long cap = max_events
    cdef Py_ssize_t n = E.shape[0], d = E.shape[1], B = G.shape[1]

    out = np.zeros((n, d), dtype=np.float64)
    st = np.zeros(n, dtype=np.int8)
    cdef double[:, ::1] X = out
    cdef signed char[::1] status = st

    cdef Py_ssize_t cap_heap = B if B > 0 else 1
    cdef double* ht = <double*> malloc(cap_heap * sizeof(double))
    cdef double* hT = <double*> malloc(cap_heap * sizeof(double))
    cdef Py_ssize_t* hk = <Py_ssize_t*> malloc(cap_heap * sizeof(Py_ssize_t))
    cdef Py_ssize_t* hc = <Py_ssize_t*> malloc(cap_heap * sizeof(Py_ssize_t))
    cdef Py_ssize_t* hj = <Py_ssize_t*> malloc(cap_heap * sizeof(Py_ssize_t))
    cdef Py_ssize_t* order = <Py_ssize_t*> malloc((d if d > 0 else 1) * sizeof(Py_ssize_t))
    if ht == NULL or hT == NULL or hk == NULL or hc == NULL or hj == NULL or order == NULL:
        free(ht); free(hT); free(hk); free(hc); free(hj); free(order)
        raise MemoryError()

    cdef Py_ssize_t r, i, k, c, s, j, ka, a, bpos, size
    cdef double t, H, T, T_next, t_ev, t_dr, cand, te, Ta, key
    cdef long long nev
    cdef bint exhausted

    try:
        with nogil:
            for r in range(n):
                # stable insertion sort of thresholds
                for a in range(d):
                    order[a] = a
                for a in range(1, d):
                    key = E[r, order[a]]
                    j = order[a]
                    bpos = a - 1
                    while bpos >= 0 and E[r, order[bpos]] > key:
                        order[bpos + 1] = order[bpos]
                        bpos -= 1
                    order[bpos + 1] = j
                size = 0
                t = 0.0
                H = 0.0
                i = 0
                k = 0
                T = 0.0
                nev = 0
                while i < d:
                    exhausted = False
                    while True:
                        t_ev = ht[0] if size > 0 else INFINITY
                        if bb > 0.0:
                            t_dr = t + (E[r, order[i]] - H) / bb
                        else:
                            t_dr = INFINITY
                        cand = t_ev if t_ev < t_dr else t_dr
                        if k < B:
                            T_next = T + G[r, k]
                            if T_next * ixmax <= cand:
                                T = T_next
                                c = C[r, k]
                                s = cstart[c]
                                _heap_push(ht, hk, hT, hc, hj, &size, T * ix[s], k, T, c, 0)
                                k += 1
                                nev += 1
                                continue
                        elif cand == INFINITY or T * ixmax < cand:
                            exhausted = True
                        break
                    if exhausted:
                        status[r] = _EXHAUSTED
                        break
                    if t_dr <= t_ev:
                        X[r, order[i]] = t_dr
                        t = t_dr
                        H = E[r, order[i]]
                        i += 1
                    else:
                        te = ht[0]
                        ka = hk[0]
                        Ta = hT[0]
                        c = hc[0]
                        j = hj[0]
                        _heap_pop(ht, hk, hT, hc, hj, &size)
                        nev += 1
                        s = cstart[c]
                        H = H + bb * (te - t) + jp[s + j]
                        t = te
                        if j + 1 < clen[c]:
                            _heap_push(ht, hk, hT, hc, hj, &size, Ta * ix[s + j + 1], ka, Ta, c, j + 1)
                        while i < d and H > E[r, order[i]]:
                            X[r, order[i]] = t
                            i += 1
                    if nev > cap:
                        status[r] = _EVENT_CAP
                        break
    finally:
        free(ht); free(hT); free(hk); free(hc); free(hj); free(order)
    return out, st
