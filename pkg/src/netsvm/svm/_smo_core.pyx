# cython: language_level=3
"""Compiled SMO loop for the C-SVC dual.

Same algorithm as :func:`netsvm.svm.smo._solve_python` (second-order working
set selection, no shrinking, LRU row cache) with the O(n) inner loops in C.
The GIL is released for the whole solve so one-vs-one pairs can train on
threads.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, tanh, pow
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef double TAU = 1e-12
cdef double INF = float("inf")


cdef struct Cache:
    double *rows
    long *row_slot
    long *slot_row
    long *slot_tick
    long capacity
    long n
    long tick


cdef inline double _kernel(const double[:, ::1] X, const double *sqnorm, long a, long b,
                           int kind, int degree, double gamma, double coef0) noexcept nogil:
    cdef long k
    cdef long d = X.shape[1]
    cdef double dot = 0.0
    cdef double sq
    for k in range(d):
        dot += X[a, k] * X[b, k]
    if kind == 0:
        return dot
    if kind == 1:
        return pow(gamma * dot + coef0, degree)
    if kind == 3:
        return tanh(gamma * dot + coef0)
    sq = sqnorm[a] + sqnorm[b] - 2.0 * dot
    if sq < 0.0:
        sq = 0.0
    return exp(-gamma * sq)


cdef double* _get_row(Cache *c, long i, long pinned, const double[:, ::1] X, const double *sqnorm,
                      int kind, int degree, double gamma, double coef0) noexcept nogil:
    cdef long s = c.row_slot[i]
    cdef long t, best
    cdef long best_tick
    cdef double *row
    c.tick += 1
    if s >= 0:
        c.slot_tick[s] = c.tick
        return c.rows + s * c.n
    best = -1
    best_tick = 0
    for t in range(c.capacity):
        if t == pinned:
            continue
        if c.slot_row[t] < 0:
            best = t
            break
        if best < 0 or c.slot_tick[t] < best_tick:
            best = t
            best_tick = c.slot_tick[t]
    if c.slot_row[best] >= 0:
        c.row_slot[c.slot_row[best]] = -1
    c.slot_row[best] = i
    c.row_slot[i] = best
    c.slot_tick[best] = c.tick
    row = c.rows + best * c.n
    for t in range(c.n):
        row[t] = _kernel(X, sqnorm, i, t, kind, degree, gamma, coef0)
    return row


def solve(const double[:, ::1] X, const double[::1] y, int kind, int degree, double gamma,
          double coef0, double C, double eps, long max_iter, long capacity,
          double[::1] alpha, double[::1] G):
    """Run SMO in place on ``alpha``/``G``; return ``(iterations, converged)``.

    ``alpha`` must be feasible and ``G`` its gradient ``Q @ alpha - 1`` on entry.
    """
    cdef long n = X.shape[0]
    cdef long d = X.shape[1]
    cdef long t, i, j, it = 0
    cdef int converged = 0
    cdef double Gmax, Gmax2, obj_min, gd, quad, obj, Kii
    cdef double ai_old, aj_old, delta, diff, s, dai, daj, yi, yj
    cdef double *Ki
    cdef double *Kj
    cdef double *QD
    cdef double *sqnorm
    cdef Cache c

    if capacity < 2:
        capacity = 2
    if capacity > n:
        capacity = n if n >= 2 else 2
    c.n = n
    c.capacity = capacity
    c.tick = 0
    c.rows = <double*> malloc(capacity * n * sizeof(double))
    c.row_slot = <long*> malloc(n * sizeof(long))
    c.slot_row = <long*> malloc(capacity * sizeof(long))
    c.slot_tick = <long*> malloc(capacity * sizeof(long))
    QD = <double*> malloc(n * sizeof(double))
    sqnorm = <double*> malloc(n * sizeof(double))
    if not c.rows or not c.row_slot or not c.slot_row or not c.slot_tick or not QD or not sqnorm:
        free(c.rows); free(c.row_slot); free(c.slot_row); free(c.slot_tick); free(QD); free(sqnorm)
        raise MemoryError("kernel cache allocation failed")

    with nogil:
        for t in range(n):
            c.row_slot[t] = -1
            s = 0.0
            for i in range(d):
                s = s + X[t, i] * X[t, i]
            sqnorm[t] = s
        for t in range(capacity):
            c.slot_row[t] = -1
            c.slot_tick[t] = 0
        for t in range(n):
            QD[t] = _kernel(X, sqnorm, t, t, kind, degree, gamma, coef0)

        while it < max_iter:
            # i: maximal violator in I_up (first index on ties)
            Gmax = -INF
            i = -1
            for t in range(n):
                if y[t] > 0:
                    if alpha[t] < C and -G[t] > Gmax:
                        Gmax = -G[t]
                        i = t
                else:
                    if alpha[t] > 0 and G[t] > Gmax:
                        Gmax = G[t]
                        i = t
            if i < 0:
                converged = 1
                break
            Ki = _get_row(&c, i, -1, X, sqnorm, kind, degree, gamma, coef0)
            Kii = QD[i]
            Gmax2 = -INF
            obj_min = INF
            j = -1
            for t in range(n):
                if y[t] > 0:
                    if alpha[t] > 0:
                        if G[t] > Gmax2:
                            Gmax2 = G[t]
                        gd = Gmax + G[t]
                    else:
                        continue
                else:
                    if alpha[t] < C:
                        if -G[t] > Gmax2:
                            Gmax2 = -G[t]
                        gd = Gmax - G[t]
                    else:
                        continue
                if gd > 0:
                    quad = Kii + QD[t] - 2.0 * Ki[t]
                    if quad <= 0:
                        quad = TAU
                    obj = -(gd * gd) / quad
                    if obj < obj_min:
                        obj_min = obj
                        j = t
            if Gmax + Gmax2 < eps or j < 0:
                converged = 1
                break

            it += 1
            Kj = _get_row(&c, j, c.row_slot[i], X, sqnorm, kind, degree, gamma, coef0)
            yi = y[i]
            yj = y[j]
            ai_old = alpha[i]
            aj_old = alpha[j]
            quad = Kii + QD[j] - 2.0 * Ki[j]
            if quad <= 0:
                quad = TAU
            if yi != yj:
                delta = (-G[i] - G[j]) / quad
                diff = alpha[i] - alpha[j]
                alpha[i] += delta
                alpha[j] += delta
                if diff > 0:
                    if alpha[j] < 0:
                        alpha[j] = 0
                        alpha[i] = diff
                else:
                    if alpha[i] < 0:
                        alpha[i] = 0
                        alpha[j] = -diff
                if diff > 0:
                    if alpha[i] > C:
                        alpha[i] = C
                        alpha[j] = C - diff
                else:
                    if alpha[j] > C:
                        alpha[j] = C
                        alpha[i] = C + diff
            else:
                delta = (G[i] - G[j]) / quad
                s = alpha[i] + alpha[j]
                alpha[i] -= delta
                alpha[j] += delta
                if s > C:
                    if alpha[i] > C:
                        alpha[i] = C
                        alpha[j] = s - C
                else:
                    if alpha[j] < 0:
                        alpha[j] = 0
                        alpha[i] = s
                if s > C:
                    if alpha[j] > C:
                        alpha[j] = C
                        alpha[i] = s - C
                else:
                    if alpha[i] < 0:
                        alpha[i] = 0
                        alpha[j] = s
            dai = (alpha[i] - ai_old) * yi
            daj = (alpha[j] - aj_old) * yj
            for t in range(n):
                G[t] += y[t] * (Ki[t] * dai + Kj[t] * daj)

    free(c.rows); free(c.row_slot); free(c.slot_row); free(c.slot_tick); free(QD); free(sqnorm)
    return it, bool(converged)
