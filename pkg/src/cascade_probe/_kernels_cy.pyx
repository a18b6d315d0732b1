# cython: boundscheck=False, wraparound=False, cdivision=True
"""Fused elementwise kernels for the integrating-factor RK4 stepper.

Mirrors _kernels_np; the point is avoiding the temporaries numpy allocates in
the complex stage updates, which dominate the per-step cost after the FFTs.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef double complex cplx


def advect(double[:, ::1] out, double[:, ::1] u1, double[:, ::1] u2,
           double[:, ::1] w1, double[:, ::1] w2):
    cdef Py_ssize_t i, j, n = out.shape[0], m = out.shape[1]
    for i in range(n):
        for j in range(m):
            out[i, j] = u1[i, j] * w1[i, j] + u2[i, j] * w2[i, j]
    return np.asarray(out)


def stage_shifted(cplx[:, ::1] out, double[:, ::1] e, cplx[:, ::1] w,
                  cplx[:, ::1] nl, double c):
    cdef Py_ssize_t i, j, n = out.shape[0], m = out.shape[1]
    for i in range(n):
        for j in range(m):
            out[i, j] = e[i, j] * (w[i, j] + c * nl[i, j])
    return np.asarray(out)


def stage_offset(cplx[:, ::1] out, double[:, ::1] e, cplx[:, ::1] w,
                 cplx[:, ::1] nl, double c):
    cdef Py_ssize_t i, j, n = out.shape[0], m = out.shape[1]
    for i in range(n):
        for j in range(m):
            out[i, j] = e[i, j] * w[i, j] + c * nl[i, j]
    return np.asarray(out)


def stage_far(cplx[:, ::1] out, double[:, ::1] e2, double[:, ::1] e,
              cplx[:, ::1] w, cplx[:, ::1] nl, double dt):
    cdef Py_ssize_t i, j, n = out.shape[0], m = out.shape[1]
    for i in range(n):
        for j in range(m):
            out[i, j] = e2[i, j] * w[i, j] + dt * e[i, j] * nl[i, j]
    return np.asarray(out)


def rk4_final(cplx[:, ::1] w, double[:, ::1] e, double[:, ::1] e2,
              cplx[:, ::1] n1, cplx[:, ::1] n2, cplx[:, ::1] n3,
              cplx[:, ::1] n4, double dt):
    cdef Py_ssize_t i, j, n = w.shape[0], m = w.shape[1]
    cdef double c = dt / 6.0
    for i in range(n):
        for j in range(m):
            w[i, j] = e2[i, j] * w[i, j] + c * (
                e2[i, j] * n1[i, j]
                + 2.0 * e[i, j] * (n2[i, j] + n3[i, j])
                + n4[i, j]
            )
    return np.asarray(w)
