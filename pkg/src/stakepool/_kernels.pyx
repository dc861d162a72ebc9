# cython: language_level=3
"""Compiled twins of the functions in ``_kernels_py``."""
from libc.math cimport pow, INFINITY

import numpy as np
cimport numpy as cnp

cnp.import_array()

DEF MAX_ITER = 200


cdef inline double _cdf(int family, double alpha, double T, double c) nogil:
    if c >= T:
        return 1.0
    if family == 0:
        return c / T
    return pow(c / T, alpha)


cdef double _gap(int family, double alpha, double T, double H, double M,
                 double R, double lam, double cd, bint with_delegators,
                 double c) nogil:
    cdef double F = _cdf(family, alpha, T, c)
    cdef double denom = F * H + M
    cdef double owner, deleg = 0.0, rest
    if denom == 0.0:
        owner = INFINITY
    else:
        owner = lam * R / denom
    if with_delegators and lam < 1.0:
        rest = (1.0 - F) * H
        if rest <= 0.0:
            deleg = INFINITY
        else:
            deleg = (1.0 - lam) * R / rest
    return owner - deleg + cd - c


def gap(int family, double alpha, double T, double H, double M, double R,
        double lam, double cd, bint with_delegators, double c):
    return _gap(family, alpha, T, H, M, R, lam, cd, with_delegators, c)


def solve_gap(int family, double alpha, double T, double H, double M,
              double R, double lam, double cd, bint with_delegators):
    cdef double lo = 0.0, hi = T, mid, g
    cdef int i
    if _gap(family, alpha, T, H, M, R, lam, cd, with_delegators, T) >= 0.0:
        return T
    for i in range(MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g = _gap(family, alpha, T, H, M, R, lam, cd, with_delegators, mid)
        if g > 0.0:
            lo = mid
        elif g < 0.0:
            hi = mid
        else:
            return mid
    return 0.5 * (lo + hi)


cdef Py_ssize_t _count_below(const double[:] row, double c) nogil:
    # number of entries < c in an ascending row (searchsorted side="left")
    cdef Py_ssize_t lo = 0, hi = row.shape[0], mid
    while lo < hi:
        mid = (lo + hi) // 2
        if row[mid] < c:
            lo = mid + 1
        else:
            hi = mid
    return lo


def mc_gaps(const double[:, :] sorted_costs, const double[:, :] choice_u,
            const double[:] thresholds, long m, double lam, double r):
    cdef Py_ssize_t reps = sorted_costs.shape[0], n = sorted_costs.shape[1]
    cdef Py_ssize_t j, i, k, pools, nd, nonempty, idx
    cdef double total = <double>(n + m)
    cdef double owner, deleg, c
    cdef cnp.ndarray[cnp.float64_t, ndim=1] gaps_arr = np.empty(reps)
    cdef double[:] gaps = gaps_arr
    cdef cnp.ndarray[cnp.int64_t, ndim=1] counts_arr = np.zeros(n + m + 1, dtype=np.int64)
    cdef cnp.int64_t[:] counts = counts_arr
    with nogil:
        for j in range(reps):
            c = thresholds[j]
            k = _count_below(sorted_costs[j], c)
            pools = k + m
            owner = lam * r / (pools if pools > 0 else 1)
            nd = n - k
            if nd > 0 and pools > 0:
                for i in range(pools):
                    counts[i] = 0
                nonempty = 0
                for i in range(k, n):
                    idx = <Py_ssize_t>(choice_u[j, i] * pools)
                    if idx > pools - 1:
                        idx = pools - 1
                    if counts[idx] == 0:
                        nonempty += 1
                    counts[idx] += 1
                deleg = (1.0 - lam) * r * (nd + nonempty) / (total * nd)
            else:
                deleg = (1.0 - lam) * r * 2.0 / total
            gaps[j] = owner - c - deleg
    return gaps_arr
