# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled versions of the kernels in `_fallback` (same signatures and results)."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def pre_exists(cnp.int64_t[:] offsets, cnp.int64_t[:] dst, cnp.int64_t[:, :] mapped, X, bint vanish):
    cdef cnp.uint8_t[:, :] x = np.ascontiguousarray(X, dtype=np.uint8)
    cdef Py_ssize_t S = offsets.shape[0] - 1
    cdef Py_ssize_t A = x.shape[0]
    out = np.zeros((A, S), dtype=np.uint8)
    cdef cnp.uint8_t[:, :] y = out
    cdef Py_ssize_t s, e, a
    cdef cnp.int64_t m
    for s in range(S):
        for e in range(offsets[s], offsets[s + 1]):
            for a in range(A):
                if y[a, s]:
                    continue
                m = mapped[e, a]
                if m < 0:
                    if vanish:
                        y[a, s] = 1
                elif x[m, dst[e]]:
                    y[a, s] = 1
    return out.astype(bool)


def pre_forall(cnp.int64_t[:] offsets, cnp.int64_t[:] dst, cnp.int64_t[:, :] mapped, X, bint vanish):
    cdef cnp.uint8_t[:, :] x = np.ascontiguousarray(X, dtype=np.uint8)
    cdef Py_ssize_t S = offsets.shape[0] - 1
    cdef Py_ssize_t A = x.shape[0]
    out = np.ones((A, S), dtype=np.uint8)
    cdef cnp.uint8_t[:, :] y = out
    cdef Py_ssize_t s, e, a
    cdef cnp.int64_t m
    for s in range(S):
        for e in range(offsets[s], offsets[s + 1]):
            for a in range(A):
                if not y[a, s]:
                    continue
                m = mapped[e, a]
                if m < 0:
                    if not vanish:
                        y[a, s] = 0
                elif not x[m, dst[e]]:
                    y[a, s] = 0
    return out.astype(bool)


def reachable(cnp.int64_t[:] offsets, cnp.int64_t[:] dst, Py_ssize_t start):
    cdef Py_ssize_t n = offsets.shape[0] - 1
    seen_arr = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[:] seen = seen_arr
    cdef cnp.int64_t[:] stack = np.empty(n + 1, dtype=np.int64)
    cdef Py_ssize_t top = 0, s, e, t
    seen[start] = 1
    stack[0] = start
    top = 1
    while top > 0:
        top -= 1
        s = stack[top]
        for e in range(offsets[s], offsets[s + 1]):
            t = dst[e]
            if not seen[t]:
                seen[t] = 1
                stack[top] = t
                top += 1
    return seen_arr.astype(bool)
