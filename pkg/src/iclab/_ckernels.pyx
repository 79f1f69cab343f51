# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot kernels; see ``_pykernels`` for the contract."""

import numpy as np
cimport cython

ctypedef double complex cplx

cdef extern from "complex.h" nogil:
    double creal(double complex)
    double cimag(double complex)
    double complex conj(double complex)
    double cabs(double complex)


cdef void _compose(const cplx[:, ::1] U2, const cplx[:, ::1] V2,
                   const cplx[:, ::1] U1, const cplx[:, ::1] V1,
                   cplx[:, ::1] Uo, cplx[:, ::1] Vo) noexcept nogil:
    cdef Py_ssize_t M = U2.shape[0]
    cdef Py_ssize_t i, j, k
    cdef cplx su, sv
    for i in range(M):
        for j in range(M):
            su = 0
            sv = 0
            for k in range(M):
                su = su + U2[i, k] * U1[k, j] + V2[i, k] * conj(V1[k, j])
                sv = sv + U2[i, k] * V1[k, j] + V2[i, k] * conj(U1[k, j])
            Uo[i, j] = su
            Vo[i, j] = sv


def compose(U2, V2, U1, V1):
    M = U2.shape[0]
    Uo = np.empty((M, M), dtype=np.complex128)
    Vo = np.empty((M, M), dtype=np.complex128)
    _compose(np.ascontiguousarray(U2, dtype=np.complex128),
             np.ascontiguousarray(V2, dtype=np.complex128),
             np.ascontiguousarray(U1, dtype=np.complex128),
             np.ascontiguousarray(V1, dtype=np.complex128), Uo, Vo)
    return Uo, Vo


cdef inline void _copy(const cplx[:, ::1] src, cplx[:, ::1] dst) noexcept nogil:
    cdef Py_ssize_t i, j
    for i in range(src.shape[0]):
        for j in range(src.shape[1]):
            dst[i, j] = src[i, j]


cdef void _chain(const cplx[:, :, ::1] Us, const cplx[:, :, ::1] Vs,
                 Py_ssize_t probe,
                 const cplx[:, ::1] dUp, const cplx[:, ::1] dVp,
                 cplx[:, ::1] U, cplx[:, ::1] V,
                 cplx[:, ::1] dU, cplx[:, ::1] dV,
                 cplx[:, ::1] tU, cplx[:, ::1] tV) noexcept nogil:
    cdef Py_ssize_t L = Us.shape[0]
    cdef Py_ssize_t M = Us.shape[1]
    cdef Py_ssize_t n, i, j
    for i in range(M):
        for j in range(M):
            U[i, j] = 1.0 if i == j else 0.0
            V[i, j] = 0
            dU[i, j] = 0
            dV[i, j] = 0
    for n in range(L):
        if n == probe:
            _compose(dUp, dVp, U, V, tU, tV)
        else:
            _compose(Us[n], Vs[n], dU, dV, tU, tV)
        _copy(tU, dU)
        _copy(tV, dV)
        _compose(Us[n], Vs[n], U, V, tU, tV)
        _copy(tU, U)
        _copy(tV, V)


def chain(Us, Vs):
    Us = np.ascontiguousarray(Us, dtype=np.complex128)
    Vs = np.ascontiguousarray(Vs, dtype=np.complex128)
    M = Us.shape[1]
    out = np.empty((6, M, M), dtype=np.complex128)
    z = np.zeros((M, M), dtype=np.complex128)
    _chain(Us, Vs, -1, z, z, out[0], out[1], out[2], out[3], out[4], out[5])
    return out[0].copy(), out[1].copy()


def chain_derivative(Us, Vs, probe, dUp, dVp):
    Us = np.ascontiguousarray(Us, dtype=np.complex128)
    Vs = np.ascontiguousarray(Vs, dtype=np.complex128)
    M = Us.shape[1]
    out = np.empty((6, M, M), dtype=np.complex128)
    _chain(Us, Vs, probe,
           np.ascontiguousarray(dUp, dtype=np.complex128),
           np.ascontiguousarray(dVp, dtype=np.complex128),
           out[0], out[1], out[2], out[3], out[4], out[5])
    return out[0].copy(), out[1].copy(), out[2].copy(), out[3].copy()


cdef void _propagate(const cplx[:, ::1] U, const cplx[:, ::1] V,
                     const cplx[::1] d, const cplx[:, ::1] N, const cplx[:, ::1] A,
                     cplx[::1] d2, cplx[:, ::1] N2, cplx[:, ::1] A2) noexcept nogil:
    # N2 = U* N U^T + U* A* V^T + V* A U^T + V* (I + N^T) V^T
    # A2 = U A U^T + U (I + N^T) V^T + V N U^T + V A* V^T
    cdef Py_ssize_t M = U.shape[0]
    cdef Py_ssize_t j, k, l, m
    cdef cplx sn, sa, K
    for j in range(M):
        sn = 0
        for l in range(M):
            sn = sn + U[j, l] * d[l] + V[j, l] * conj(d[l])
        d2[j] = sn
    for j in range(M):
        for k in range(M):
            sn = 0
            sa = 0
            for l in range(M):
                for m in range(M):
                    K = N[m, l]
                    if l == m:
                        K = K + 1.0
                    sn = sn + (conj(U[j, l]) * N[l, m] * U[k, m]
                               + conj(U[j, l]) * conj(A[l, m]) * V[k, m]
                               + conj(V[j, l]) * A[l, m] * U[k, m]
                               + conj(V[j, l]) * K * V[k, m])
                    sa = sa + (U[j, l] * A[l, m] * U[k, m]
                               + U[j, l] * K * V[k, m]
                               + V[j, l] * N[l, m] * U[k, m]
                               + V[j, l] * conj(A[l, m]) * V[k, m])
            N2[j, k] = sn
            A2[j, k] = sa


def propagate(U, V, d, N, A):
    M = U.shape[0]
    d2 = np.empty(M, dtype=np.complex128)
    N2 = np.empty((M, M), dtype=np.complex128)
    A2 = np.empty((M, M), dtype=np.complex128)
    _propagate(np.ascontiguousarray(U, dtype=np.complex128),
               np.ascontiguousarray(V, dtype=np.complex128),
               np.ascontiguousarray(d, dtype=np.complex128),
               np.ascontiguousarray(N, dtype=np.complex128),
               np.ascontiguousarray(A, dtype=np.complex128), d2, N2, A2)
    return d2, N2, A2


cdef inline double _cov(const cplx[::1] d, const cplx[:, ::1] N,
                        const cplx[:, ::1] A, Py_ssize_t j, Py_ssize_t k) noexcept nogil:
    cdef double c = (2.0 * creal(conj(d[j]) * d[k] * conj(N[j, k]))
                     + 2.0 * creal(conj(d[j]) * conj(d[k]) * A[j, k])
                     + cabs(N[j, k]) ** 2 + cabs(A[j, k]) ** 2)
    if j == k:
        c += cabs(d[j]) ** 2 + creal(N[j, j])
    return c


def intensity_covariance(d, N, A):
    cdef const cplx[::1] dv = np.ascontiguousarray(d, dtype=np.complex128)
    cdef const cplx[:, ::1] Nv = np.ascontiguousarray(N, dtype=np.complex128)
    cdef const cplx[:, ::1] Av = np.ascontiguousarray(A, dtype=np.complex128)
    cdef Py_ssize_t M = dv.shape[0]
    C = np.empty((M, M), dtype=np.float64)
    cdef double[:, ::1] Cv = C
    cdef Py_ssize_t j, k
    for j in range(M):
        for k in range(M):
            Cv[j, k] = _cov(dv, Nv, Av, j, k)
    return C


def evaluate(Us, Vs, Py_ssize_t probe, dUp, dVp, d, N, A, w):
    cdef const cplx[:, :, ::1] Usv = np.ascontiguousarray(Us, dtype=np.complex128)
    cdef const cplx[:, :, ::1] Vsv = np.ascontiguousarray(Vs, dtype=np.complex128)
    cdef const cplx[:, ::1] dUpv = np.ascontiguousarray(dUp, dtype=np.complex128)
    cdef const cplx[:, ::1] dVpv = np.ascontiguousarray(dVp, dtype=np.complex128)
    cdef const cplx[::1] dv = np.ascontiguousarray(d, dtype=np.complex128)
    cdef const cplx[:, ::1] Nv = np.ascontiguousarray(N, dtype=np.complex128)
    cdef const cplx[:, ::1] Av = np.ascontiguousarray(A, dtype=np.complex128)
    cdef const double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t M = Usv.shape[1]
    work = np.empty((8, M, M), dtype=np.complex128)
    vecs = np.empty((2, M), dtype=np.complex128)
    cdef cplx[:, :, ::1] W = work
    cdef cplx[:, ::1] X = vecs
    cdef double mean = 0, var = 0, deriv = 0
    cdef Py_ssize_t j, k, l, m
    cdef cplx s, K
    with nogil:
        _chain(Usv, Vsv, probe, dUpv, dVpv, W[0], W[1], W[2], W[3], W[4], W[5])
        _propagate(W[0], W[1], dv, Nv, Av, X[0], W[6], W[7])
        for k in range(M):
            if wv[k] == 0:
                continue
            mean += wv[k] * (cabs(X[0, k]) ** 2 + creal(W[6, k, k]))
            for j in range(M):
                if wv[j] != 0:
                    var += wv[j] * wv[k] * _cov(X[0], W[6], W[7], j, k)
            # d(d'_k) and d(N'_kk) from the derivative chain (W[2], W[3])
            s = 0
            for l in range(M):
                s = s + W[2, k, l] * dv[l] + W[3, k, l] * conj(dv[l])
            X[1, k] = s
            s = 0
            for l in range(M):
                for m in range(M):
                    K = Nv[m, l]
                    if l == m:
                        K = K + 1.0
                    s = s + (conj(W[2, k, l]) * Nv[l, m] * W[0, k, m]
                             + conj(W[2, k, l]) * conj(Av[l, m]) * W[1, k, m]
                             + conj(W[3, k, l]) * Av[l, m] * W[0, k, m]
                             + conj(W[3, k, l]) * K * W[1, k, m])
            deriv += wv[k] * (2.0 * creal(conj(X[0, k]) * X[1, k]) + 2.0 * creal(s))
    return mean, var, deriv
