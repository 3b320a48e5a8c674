# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-node 3x3 frame kernels (hot loops of the time stepper).

Mirrors _kernels_np exactly: same skew-matrix convention
A(w) = [[0, w3, -w2], [-w3, 0, w1], [w2, -w1, 0]] and the same closed-form
Cayley factor.  Inputs are C-contiguous (M, 3, 3) / (M, 3) arrays.
"""

import numpy as np

cimport cython
from libc.math cimport fabs


def cayley_apply(double[:, :, ::1] p, double[:, ::1] omega, double tau):
    cdef Py_ssize_t m, i, n = p.shape[0]
    cdef double q1, q2, q3, s, d
    cdef double c00, c01, c02, c10, c11, c12, c20, c21, c22
    out_arr = np.empty((n, 3, 3))
    cdef double[:, :, ::1] out = out_arr
    for m in range(n):
        q1 = tau * omega[m, 0]
        q2 = tau * omega[m, 1]
        q3 = tau * omega[m, 2]
        s = q1 * q1 + q2 * q2 + q3 * q3
        d = 1.0 / (4.0 + s)
        c00 = 1.0 + (2.0 * q1 * q1 - 2.0 * s) * d
        c01 = (4.0 * q3 + 2.0 * q1 * q2) * d
        c02 = (-4.0 * q2 + 2.0 * q1 * q3) * d
        c10 = (-4.0 * q3 + 2.0 * q2 * q1) * d
        c11 = 1.0 + (2.0 * q2 * q2 - 2.0 * s) * d
        c12 = (4.0 * q1 + 2.0 * q2 * q3) * d
        c20 = (4.0 * q2 + 2.0 * q3 * q1) * d
        c21 = (-4.0 * q1 + 2.0 * q3 * q2) * d
        c22 = 1.0 + (2.0 * q3 * q3 - 2.0 * s) * d
        for i in range(3):
            out[m, i, 0] = p[m, i, 0] * c00 + p[m, i, 1] * c10 + p[m, i, 2] * c20
            out[m, i, 1] = p[m, i, 0] * c01 + p[m, i, 1] * c11 + p[m, i, 2] * c21
            out[m, i, 2] = p[m, i, 0] * c02 + p[m, i, 1] * c12 + p[m, i, 2] * c22
    return out_arr


def gram_error(double[:, :, ::1] p):
    cdef Py_ssize_t m, a, b, n = p.shape[0]
    cdef double g, worst = 0.0
    for m in range(n):
        for a in range(3):
            for b in range(a, 3):
                g = (p[m, 0, a] * p[m, 0, b] + p[m, 1, a] * p[m, 1, b]
                     + p[m, 2, a] * p[m, 2, b])
                if a == b:
                    g -= 1.0
                g = fabs(g)
                if g > worst:
                    worst = g
    return worst


def det_error(double[:, :, ::1] p):
    cdef Py_ssize_t m, n = p.shape[0]
    cdef double det, worst = 0.0
    for m in range(n):
        det = (p[m, 0, 0] * (p[m, 1, 1] * p[m, 2, 2] - p[m, 1, 2] * p[m, 2, 1])
               - p[m, 0, 1] * (p[m, 1, 0] * p[m, 2, 2] - p[m, 1, 2] * p[m, 2, 0])
               + p[m, 0, 2] * (p[m, 1, 0] * p[m, 2, 1] - p[m, 1, 1] * p[m, 2, 0]))
        det = fabs(det - 1.0)
        if det > worst:
            worst = det
    return worst


def tangent_pairings(double[:, :, ::1] m, double[:, :, ::1] d):
    cdef Py_ssize_t j, n = m.shape[0]
    out_arr = np.empty((n, 3))
    cdef double[:, ::1] out = out_arr
    for j in range(n):
        out[j, 0] = (m[j, 0, 2] * d[j, 0, 1] + m[j, 1, 2] * d[j, 1, 1]
                     + m[j, 2, 2] * d[j, 2, 1]
                     - m[j, 0, 1] * d[j, 0, 2] - m[j, 1, 1] * d[j, 1, 2]
                     - m[j, 2, 1] * d[j, 2, 2])
        out[j, 1] = (m[j, 0, 0] * d[j, 0, 2] + m[j, 1, 0] * d[j, 1, 2]
                     + m[j, 2, 0] * d[j, 2, 2]
                     - m[j, 0, 2] * d[j, 0, 0] - m[j, 1, 2] * d[j, 1, 0]
                     - m[j, 2, 2] * d[j, 2, 0])
        out[j, 2] = (m[j, 0, 1] * d[j, 0, 0] + m[j, 1, 1] * d[j, 1, 0]
                     + m[j, 2, 1] * d[j, 2, 0]
                     - m[j, 0, 0] * d[j, 0, 1] - m[j, 1, 0] * d[j, 1, 1]
                     - m[j, 2, 0] * d[j, 2, 1])
    return out_arr


def frame_times_skew(double[:, :, ::1] p, double[:, ::1] omega):
    cdef Py_ssize_t m, i, n = p.shape[0]
    cdef double w1, w2, w3
    out_arr = np.empty((n, 3, 3))
    cdef double[:, :, ::1] out = out_arr
    for m in range(n):
        w1 = omega[m, 0]
        w2 = omega[m, 1]
        w3 = omega[m, 2]
        for i in range(3):
            out[m, i, 0] = -w3 * p[m, i, 1] + w2 * p[m, i, 2]
            out[m, i, 1] = w3 * p[m, i, 0] - w1 * p[m, i, 2]
            out[m, i, 2] = -w2 * p[m, i, 0] + w1 * p[m, i, 1]
    return out_arr
