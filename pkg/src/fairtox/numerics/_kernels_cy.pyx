# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled pointwise kernels for the recurrent cell.

Same contract as ``_kernels_py``: gate preactivations come in four
contiguous blocks (input, forget, candidate, output) along the last axis.
"""

import numpy as np

from libc.math cimport exp, expf, tanh, tanhf

ctypedef fused real:
    float
    double


cdef inline double _sig(double x) nogil:
    cdef double e
    if x >= 0.0:
        return 1.0 / (1.0 + exp(-x))
    e = exp(x)
    return e / (1.0 + e)


cdef inline float _sigf(float x) nogil:
    cdef float e
    if x >= 0.0:
        return <float>(1.0) / (<float>(1.0) + expf(-x))
    e = expf(x)
    return e / (<float>(1.0) + e)


def lstm_pointwise_forward(real[:, ::1] z, real[:, ::1] c_prev):
    cdef Py_ssize_t batch = z.shape[0]
    cdef Py_ssize_t hidden = c_prev.shape[1]
    if z.shape[1] != 4 * hidden or c_prev.shape[0] != batch:
        raise ValueError("gate matrix must be batch x 4*hidden")
    dtype = np.float32 if real is float else np.float64
    a_arr = np.empty((batch, 4 * hidden), dtype=dtype)
    c_arr = np.empty((batch, hidden), dtype=dtype)
    h_arr = np.empty((batch, hidden), dtype=dtype)
    cdef real[:, ::1] a = a_arr
    cdef real[:, ::1] c = c_arr
    cdef real[:, ::1] h = h_arr
    cdef Py_ssize_t b, j
    cdef real gi, gf, gg, go, cv
    with nogil:
        for b in range(batch):
            for j in range(hidden):
                if real is float:
                    gi = _sigf(z[b, j])
                    gf = _sigf(z[b, hidden + j])
                    gg = tanhf(z[b, 2 * hidden + j])
                    go = _sigf(z[b, 3 * hidden + j])
                else:
                    gi = _sig(z[b, j])
                    gf = _sig(z[b, hidden + j])
                    gg = tanh(z[b, 2 * hidden + j])
                    go = _sig(z[b, 3 * hidden + j])
                cv = gf * c_prev[b, j] + gi * gg
                a[b, j] = gi
                a[b, hidden + j] = gf
                a[b, 2 * hidden + j] = gg
                a[b, 3 * hidden + j] = go
                c[b, j] = cv
                if real is float:
                    h[b, j] = go * tanhf(cv)
                else:
                    h[b, j] = go * tanh(cv)
    return a_arr, c_arr, h_arr


def lstm_pointwise_backward(real[:, ::1] dh, real[:, ::1] dc_in, real[:, ::1] a,
                            real[:, ::1] c_prev, real[:, ::1] c):
    cdef Py_ssize_t batch = a.shape[0]
    cdef Py_ssize_t hidden = c_prev.shape[1]
    if a.shape[1] != 4 * hidden:
        raise ValueError("activated gate matrix must be batch x 4*hidden")
    dtype = np.float32 if real is float else np.float64
    dz_arr = np.empty((batch, 4 * hidden), dtype=dtype)
    dcp_arr = np.empty((batch, hidden), dtype=dtype)
    cdef real[:, ::1] dz = dz_arr
    cdef real[:, ::1] dcp = dcp_arr
    cdef Py_ssize_t b, j
    cdef real gi, gf, gg, go, tc, dc
    with nogil:
        for b in range(batch):
            for j in range(hidden):
                gi = a[b, j]
                gf = a[b, hidden + j]
                gg = a[b, 2 * hidden + j]
                go = a[b, 3 * hidden + j]
                if real is float:
                    tc = tanhf(c[b, j])
                else:
                    tc = tanh(c[b, j])
                dc = dc_in[b, j] + dh[b, j] * go * (1 - tc * tc)
                dz[b, j] = (dc * gg) * gi * (1 - gi)
                dz[b, hidden + j] = (dc * c_prev[b, j]) * gf * (1 - gf)
                dz[b, 2 * hidden + j] = (dc * gi) * (1 - gg * gg)
                dz[b, 3 * hidden + j] = (dh[b, j] * tc) * go * (1 - go)
                dcp[b, j] = dc * gf
    return dz_arr, dcp_arr
