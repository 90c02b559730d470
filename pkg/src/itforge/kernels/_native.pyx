# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled dense network kernels: affine/ReLU/softmax forward, layer
gradients, and the Adam update. Mirrors numpy_backend semantics."""

from libc.math cimport exp, sqrt

import numpy as np

NAME = "native"


def forward(double[:, ::1] x, double[:, ::1] w1, double[::1] b1,
            double[:, ::1] w2, double[::1] b2):
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1]
    cdef Py_ssize_t hdim = w1.shape[0], k = w2.shape[0]
    h_arr = np.empty((n, hdim), dtype=np.float64)
    p_arr = np.empty((n, k), dtype=np.float64)
    cdef double[:, ::1] h = h_arr
    cdef double[:, ::1] p = p_arr
    cdef Py_ssize_t i, j, c
    cdef double acc, zmax, total
    for i in range(n):
        for j in range(hdim):
            acc = b1[j]
            for c in range(d):
                acc += x[i, c] * w1[j, c]
            h[i, j] = acc if acc > 0.0 else 0.0
        zmax = -1e308
        for c in range(k):
            acc = b2[c]
            for j in range(hdim):
                acc += h[i, j] * w2[c, j]
            p[i, c] = acc
            if acc > zmax:
                zmax = acc
        total = 0.0
        for c in range(k):
            p[i, c] = exp(p[i, c] - zmax)
            total += p[i, c]
        for c in range(k):
            p[i, c] /= total
    return h_arr, p_arr


def backward(double[:, ::1] x, double[:, ::1] h, double[:, ::1] dz2,
             double[:, ::1] w2):
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1]
    cdef Py_ssize_t hdim = h.shape[1], k = dz2.shape[1]
    g_w1_arr = np.zeros((hdim, d), dtype=np.float64)
    g_b1_arr = np.zeros(hdim, dtype=np.float64)
    g_w2_arr = np.zeros((k, hdim), dtype=np.float64)
    g_b2_arr = np.zeros(k, dtype=np.float64)
    dh_arr = np.empty(hdim, dtype=np.float64)
    cdef double[:, ::1] g_w1 = g_w1_arr
    cdef double[::1] g_b1 = g_b1_arr
    cdef double[:, ::1] g_w2 = g_w2_arr
    cdef double[::1] g_b2 = g_b2_arr
    cdef double[::1] dh = dh_arr
    cdef Py_ssize_t i, j, c
    cdef double acc
    for i in range(n):
        for c in range(k):
            acc = dz2[i, c]
            g_b2[c] += acc
            for j in range(hdim):
                g_w2[c, j] += acc * h[i, j]
        for j in range(hdim):
            if h[i, j] > 0.0:
                acc = 0.0
                for c in range(k):
                    acc += dz2[i, c] * w2[c, j]
                dh[j] = acc
            else:
                dh[j] = 0.0
        for j in range(hdim):
            acc = dh[j]
            if acc != 0.0:
                g_b1[j] += acc
                for c in range(d):
                    g_w1[j, c] += acc * x[i, c]
    return g_w1_arr, g_b1_arr, g_w2_arr, g_b2_arr


def adam_step(double[::1] param, double[::1] grad, double[::1] m,
              double[::1] v, long t, double lr, double beta1, double beta2,
              double eps):
    cdef Py_ssize_t i, n = param.shape[0]
    cdef double c1 = 1.0 - beta1 ** t
    cdef double c2 = 1.0 - beta2 ** t
    cdef double g, m_hat, v_hat
    for i in range(n):
        g = grad[i]
        m[i] = beta1 * m[i] + (1.0 - beta1) * g
        v[i] = beta2 * v[i] + (1.0 - beta2) * g * g
        m_hat = m[i] / c1
        v_hat = v[i] / c2
        param[i] -= lr * m_hat / (sqrt(v_hat) + eps)
