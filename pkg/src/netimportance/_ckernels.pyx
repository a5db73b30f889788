# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled RK4 steady-state kernels.

Same signatures and semantics as ``_pykernels``.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, pow, isfinite

cnp.import_array()

cdef enum:
    CONVERGED = 0
    NOT_CONVERGED = 1
    DIVERGED = 2


cdef void _mut_rhs(const double[::1] x, double[::1] out, const long[::1] guild,
                   const double[::1] alpha, const double[::1] mu,
                   double beta_intra, double beta_inter, double h,
                   const long[::1] indptr, const long[::1] indices,
                   const double[::1] data, long pin) noexcept nogil:
    cdef Py_ssize_t n = x.shape[0], i, p
    cdef double tot0 = 0.0, tot1 = 0.0, b, g
    for i in range(n):
        if guild[i] == 0:
            tot0 += x[i]
        else:
            tot1 += x[i]
    for i in range(n):
        b = 0.0
        for p in range(indptr[i], indptr[i + 1]):
            b += data[p] * x[indices[p]]
        g = tot0 if guild[i] == 0 else tot1
        out[i] = x[i] * (alpha[i] - (beta_intra * x[i] + beta_inter * (g - x[i]))
                         + b / (1.0 + h * b)) + mu[i]
    if pin >= 0:
        out[pin] = 0.0


cdef void _gene_rhs(const double[::1] x, double[::1] out, double[::1] work,
                    double B, double f, double hill, double C,
                    const long[::1] indptr, const long[::1] indices,
                    const double[::1] data, long pin) noexcept nogil:
    cdef Py_ssize_t n = x.shape[0], i, p
    cdef double xh, s
    for i in range(n):
        xh = pow(x[i], hill)
        work[i] = xh / (1.0 + xh)
    for i in range(n):
        s = 0.0
        for p in range(indptr[i], indptr[i + 1]):
            s += data[p] * work[indices[p]]
        out[i] = -B * pow(x[i], f) + C * s
    if pin >= 0:
        out[pin] = 0.0


def mutualistic_rhs(x, guild, alpha, mu, double beta_intra, double beta_inter,
                    double h, indptr, indices, data):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty(xv.shape[0])
    _mut_rhs(xv, out, np.ascontiguousarray(guild, dtype=np.int64),
             np.ascontiguousarray(alpha, dtype=np.float64),
             np.ascontiguousarray(mu, dtype=np.float64),
             beta_intra, beta_inter, h,
             np.ascontiguousarray(indptr, dtype=np.int64),
             np.ascontiguousarray(indices, dtype=np.int64),
             np.ascontiguousarray(data, dtype=np.float64), -1)
    return out


def gene_rhs(x, double B, double f, double hill, double C, indptr, indices, data):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty(xv.shape[0])
    work = np.empty(xv.shape[0])
    _gene_rhs(xv, out, work, B, f, hill, C,
              np.ascontiguousarray(indptr, dtype=np.int64),
              np.ascontiguousarray(indices, dtype=np.int64),
              np.ascontiguousarray(data, dtype=np.float64), -1)
    return out


cdef inline double _maxabs(const double[::1] v) noexcept nogil:
    cdef double m = 0.0, a
    cdef Py_ssize_t i
    for i in range(v.shape[0]):
        a = fabs(v[i])
        if a > m or a != a:
            m = a
    return m


cdef int _rk4_update(double[::1] x, double[::1] k1, double[::1] k2, double[::1] k3,
                     double[::1] k4, double dt, long pin, double pin_value) noexcept nogil:
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double v
    for i in range(n):
        v = x[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        if v < 0.0:
            v = 0.0
        x[i] = v
    if pin >= 0:
        x[pin] = pin_value
    for i in range(n):
        if not isfinite(x[i]):
            return 0
    return 1


cdef inline void _axpy(double[::1] out, const double[::1] x, double a,
                       const double[::1] k) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(x.shape[0]):
        out[i] = x[i] + a * k[i]


def steady_mutualistic(x0, guild, alpha, mu, double beta_intra, double beta_inter,
                       double h, indptr, indices, data, double dt, double eps,
                       long max_steps, long pin_index=-1, double pin_value=0.0):
    x_arr = np.array(x0, dtype=np.float64, copy=True)
    cdef double[::1] x = x_arr
    cdef Py_ssize_t n = x.shape[0]
    cdef double[::1] k1 = np.empty(n), k2 = np.empty(n), k3 = np.empty(n)
    cdef double[::1] k4 = np.empty(n), y = np.empty(n)
    cdef const long[::1] g = np.ascontiguousarray(guild, dtype=np.int64)
    cdef const double[::1] al = np.ascontiguousarray(alpha, dtype=np.float64)
    cdef const double[::1] m = np.ascontiguousarray(mu, dtype=np.float64)
    cdef const long[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const long[::1] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const double[::1] d = np.ascontiguousarray(data, dtype=np.float64)
    cdef long steps = 0
    cdef int status
    if pin_index >= 0:
        x[pin_index] = pin_value
    with nogil:
        while True:
            _mut_rhs(x, k1, g, al, m, beta_intra, beta_inter, h, ip, ix, d, pin_index)
            if _maxabs(k1) < eps:
                status = CONVERGED
                break
            if steps >= max_steps:
                status = NOT_CONVERGED
                break
            _axpy(y, x, 0.5 * dt, k1)
            _mut_rhs(y, k2, g, al, m, beta_intra, beta_inter, h, ip, ix, d, pin_index)
            _axpy(y, x, 0.5 * dt, k2)
            _mut_rhs(y, k3, g, al, m, beta_intra, beta_inter, h, ip, ix, d, pin_index)
            _axpy(y, x, dt, k3)
            _mut_rhs(y, k4, g, al, m, beta_intra, beta_inter, h, ip, ix, d, pin_index)
            steps += 1
            if not _rk4_update(x, k1, k2, k3, k4, dt, pin_index, pin_value):
                status = DIVERGED
                break
    return x_arr, status, steps


def steady_gene(x0, double B, double f, double hill, double C, indptr, indices, data,
                double dt, double eps, long max_steps, long pin_index=-1,
                double pin_value=0.0):
    x_arr = np.array(x0, dtype=np.float64, copy=True)
    cdef double[::1] x = x_arr
    cdef Py_ssize_t n = x.shape[0]
    cdef double[::1] k1 = np.empty(n), k2 = np.empty(n), k3 = np.empty(n)
    cdef double[::1] k4 = np.empty(n), y = np.empty(n), work = np.empty(n)
    cdef const long[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const long[::1] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const double[::1] d = np.ascontiguousarray(data, dtype=np.float64)
    cdef long steps = 0
    cdef int status
    if pin_index >= 0:
        x[pin_index] = pin_value
    with nogil:
        while True:
            _gene_rhs(x, k1, work, B, f, hill, C, ip, ix, d, pin_index)
            if _maxabs(k1) < eps:
                status = CONVERGED
                break
            if steps >= max_steps:
                status = NOT_CONVERGED
                break
            _axpy(y, x, 0.5 * dt, k1)
            _gene_rhs(y, k2, work, B, f, hill, C, ip, ix, d, pin_index)
            _axpy(y, x, 0.5 * dt, k2)
            _gene_rhs(y, k3, work, B, f, hill, C, ip, ix, d, pin_index)
            _axpy(y, x, dt, k3)
            _gene_rhs(y, k4, work, B, f, hill, C, ip, ix, d, pin_index)
            steps += 1
            if not _rk4_update(x, k1, k2, k3, k4, dt, pin_index, pin_value):
                status = DIVERGED
                break
    return x_arr, status, steps
