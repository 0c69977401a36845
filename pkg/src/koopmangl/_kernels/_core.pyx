# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the sequential hot loops.

Mirrors the contracts of ``_pure``: every kernel returns ``(array, bad_step)``
with ``bad_step = -1`` on success.
"""

import numpy as np

from libc.math cimport cos, isfinite, sin, tanh


def simulate_hereditary_2d(double[::1] x0, double[::1] inputs,
                           double[::1] kernel, double[:, ::1] process_noise):
    cdef Py_ssize_t T = inputs.shape[0]
    cdef Py_ssize_t J = kernel.shape[0]
    states_arr = np.empty((T + 1, 2), dtype=np.float64)
    gh_arr = np.empty(T + 1, dtype=np.float64)
    cdef double[:, ::1] states = states_arr
    cdef double[::1] gh = gh_arr
    cdef Py_ssize_t k, j, L
    cdef double x1, x2, u, mem, n1, n2
    cdef Py_ssize_t bad = -1

    states[0, 0] = x0[0]
    states[0, 1] = x0[1]
    gh[0] = tanh(x0[0])
    with nogil:
        for k in range(T):
            x1 = states[k, 0]
            x2 = states[k, 1]
            u = inputs[k]
            L = k + 1 if k + 1 < J else J
            mem = 0.0
            for j in range(1, L + 1):
                mem += kernel[j - 1] * gh[k + 1 - j]
            n1 = 0.90 * x1 + 0.10 * sin(x2) + 0.10 * u + mem + process_noise[k, 0]
            n2 = 0.85 * x2 + 0.08 * cos(x1) + 0.05 * x1 * x1 + 0.05 * u \
                + process_noise[k, 1]
            if not (isfinite(n1) and isfinite(n2)):
                bad = k
                break
            states[k + 1, 0] = n1
            states[k + 1, 1] = n2
            gh[k + 1] = tanh(n1)
    if bad >= 0:
        states_arr[bad + 1:] = np.nan
    return states_arr, int(bad)


def rollout_memory(double[:, ::1] A, double[:, ::1] B, double[::1] w,
                   double[:, ::1] history, double[:, ::1] inputs):
    cdef Py_ssize_t N = w.shape[0] - 1
    cdef Py_ssize_t p = A.shape[0]
    cdef Py_ssize_t m = B.shape[1]
    cdef Py_ssize_t H = inputs.shape[0]
    cdef Py_ssize_t hist_len = history.shape[0]
    buf_arr = np.empty((hist_len + H, p), dtype=np.float64)
    cdef double[:, ::1] buf = buf_arr
    cdef Py_ssize_t i, t, r, c, j, cur
    cdef double acc
    cdef Py_ssize_t bad = -1
    cdef bint ok

    for i in range(hist_len):
        for c in range(p):
            buf[i, c] = history[hist_len - 1 - i, c]  # oldest-first
    with nogil:
        for t in range(H):
            cur = hist_len + t - 1
            ok = True
            for r in range(p):
                acc = 0.0
                for c in range(p):
                    acc += A[r, c] * buf[cur, c]
                for c in range(m):
                    acc += B[r, c] * inputs[t, c]
                for j in range(1, N + 1):
                    acc -= w[j] * buf[cur + 1 - j, r]
                if not isfinite(acc):
                    ok = False
                buf[cur + 1, r] = acc
            if not ok:
                bad = t
                break
    if bad >= 0:
        buf_arr[hist_len + bad:] = np.nan
    return buf_arr[hist_len:].copy(), int(bad)


def rollout_companion(double[:, ::1] A, double[:, ::1] B, double[::1] w,
                      double[:, ::1] history, double[:, ::1] inputs):
    cdef Py_ssize_t N = w.shape[0] - 1
    cdef Py_ssize_t p = A.shape[0]
    cdef Py_ssize_t m = B.shape[1]
    cdef Py_ssize_t H = inputs.shape[0]
    cdef Py_ssize_t rlen = N if N >= 1 else 1
    A1_arr = np.asarray(A) - w[1] * np.eye(p) if N >= 1 else np.asarray(A).copy()
    ring_arr = np.empty((rlen, p), dtype=np.float64)
    out_arr = np.empty((H, p), dtype=np.float64)
    top_arr = np.empty(p, dtype=np.float64)
    cdef double[:, ::1] A1 = A1_arr
    cdef double[:, ::1] ring = ring_arr
    cdef double[:, ::1] out = out_arr
    cdef double[::1] top = top_arr
    cdef Py_ssize_t t, r, c, j, head, pos
    cdef double acc
    cdef Py_ssize_t bad = -1
    cdef bint ok

    for r in range(rlen):
        for c in range(p):
            ring[r, c] = history[r, c]  # newest-first; ring[(head + j) % rlen] = lag j
    head = 0
    with nogil:
        for t in range(H):
            ok = True
            for r in range(p):
                acc = 0.0
                for c in range(p):
                    acc += A1[r, c] * ring[head, c]
                for c in range(m):
                    acc += B[r, c] * inputs[t, c]
                for j in range(2, N + 1):
                    pos = (head + j - 1) % rlen
                    acc -= w[j] * ring[pos, r]
                if not isfinite(acc):
                    ok = False
                top[r] = acc
            if not ok:
                bad = t
                break
            head = (head + rlen - 1) % rlen
            for r in range(p):
                ring[head, r] = top[r]
                out[t, r] = top[r]
    if bad >= 0:
        out_arr[bad:] = np.nan
    return out_arr, int(bad)
