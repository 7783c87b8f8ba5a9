# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled network kernels: fused forward/backward/Adam minibatch step.

Matches the semantics of the numpy backend (float64, same update rule,
same activation conventions); rounding may differ because summation
order is not identical. Matrix products go through BLAS dgemm, the
elementwise work is plain C loops.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, sqrt, tanh
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()

ACT_SIGMOID, ACT_TANH, ACT_RELU = 0, 1, 2
OUT_NONE, OUT_RELU_SHIFTED = 0, 1


cdef void _gemm_ab(const double[:, ::1] A, const double[:, ::1] B, double[:, ::1] C) noexcept nogil:
    # C (m x n) = A (m x k) . B (k x n), all row-major.
    cdef int m = <int> A.shape[0], k = <int> A.shape[1], n = <int> B.shape[1]
    cdef double one = 1.0, zero = 0.0
    dgemm("N", "N", &n, &m, &k, &one, <double*> &B[0, 0], &n, <double*> &A[0, 0], &k, &zero, &C[0, 0], &n)


cdef void _gemm_atb(const double[:, ::1] A, const double[:, ::1] B, double[:, ::1] C) noexcept nogil:
    # C (k x n) = A^T . B with A (m x k), B (m x n), all row-major.
    cdef int m = <int> A.shape[0], k = <int> A.shape[1], n = <int> B.shape[1]
    cdef double one = 1.0, zero = 0.0
    dgemm("N", "T", &n, &k, &m, &one, <double*> &B[0, 0], &n, <double*> &A[0, 0], &k, &zero, &C[0, 0], &n)


cdef void _gemm_abt(const double[:, ::1] A, const double[:, ::1] B, double[:, ::1] C) noexcept nogil:
    # C (m x n) = A (m x k) . B^T with B (n x k), all row-major.
    cdef int m = <int> A.shape[0], k = <int> A.shape[1], n = <int> B.shape[0]
    cdef double one = 1.0, zero = 0.0
    dgemm("T", "N", &n, &m, &k, &one, <double*> &B[0, 0], &k, <double*> &A[0, 0], &k, &zero, &C[0, 0], &n)


cdef void _bias_activate(double[:, ::1] Z, const double[::1] b, int kind, bint is_output) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double z
    for i in range(Z.shape[0]):
        for j in range(Z.shape[1]):
            z = Z[i, j] + b[j]
            if is_output:
                if kind == 1:  # relu shifted to a lower bound of -1
                    Z[i, j] = (z if z > 0.0 else 0.0) - 1.0
                else:
                    Z[i, j] = z
            else:
                if kind == 0:
                    Z[i, j] = 1.0 / (1.0 + exp(-z))
                elif kind == 1:
                    Z[i, j] = tanh(z)
                else:
                    Z[i, j] = z if z > 0.0 else 0.0


def forward(list Ws, list bs, int hidden_act, int out_act, X):
    """Batch forward pass; returns a fresh (n, out_dim) array."""
    A = np.ascontiguousarray(X, dtype=np.float64)
    cdef int l, last = len(Ws) - 1
    for l in range(len(Ws)):
        W = Ws[l]
        Z = np.empty((A.shape[0], W.shape[1]), dtype=np.float64)
        _gemm_ab(A, W, Z)
        _bias_activate(Z, bs[l], out_act if l == last else hidden_act, l == last)
        A = Z
    return A


cdef class CTrainer:
    """Fused minibatch step over an in-place parameter set."""

    cdef list Ws, bs, mW, vW, mb, vb, acts, deltas, gWs, gbs
    cdef int hidden_act, out_act, n_layers
    cdef double lr, beta1, beta2, eps
    cdef public long t
    cdef Py_ssize_t cap

    def __init__(self, Ws, bs, hidden_act, out_act, lr, beta1, beta2, eps):
        for arr in list(Ws) + list(bs):
            if not (isinstance(arr, np.ndarray) and arr.dtype == np.float64 and arr.flags["C_CONTIGUOUS"]):
                raise ValueError("parameters must be C-contiguous float64 arrays")
        self.Ws, self.bs = list(Ws), list(bs)
        self.hidden_act, self.out_act = hidden_act, out_act
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.n_layers = len(Ws)
        self.mW = [np.zeros_like(W) for W in Ws]
        self.vW = [np.zeros_like(W) for W in Ws]
        self.mb = [np.zeros_like(b) for b in bs]
        self.vb = [np.zeros_like(b) for b in bs]
        self.gWs = [np.zeros_like(W) for W in Ws]
        self.gbs = [np.zeros_like(b) for b in bs]
        self.cap = 0
        self.acts = []
        self.deltas = []

    def forward(self, X):
        return forward(self.Ws, self.bs, self.hidden_act, self.out_act, X)

    def step(self, X, Y):
        Xc = np.ascontiguousarray(X, dtype=np.float64)
        Yc = np.ascontiguousarray(Y, dtype=np.float64)
        cdef Py_ssize_t m = Xc.shape[0]
        if m > self.cap:
            self.cap = m
            self.acts = [np.empty((m, W.shape[1]), dtype=np.float64) for W in self.Ws]
            self.deltas = [np.empty((m, W.shape[1]), dtype=np.float64) for W in self.Ws]

        cdef double[:, ::1] X_mv = Xc
        cdef double[:, ::1] Y_mv = Yc
        cdef double[:, ::1] cur, A, D, D_prev
        cdef Py_ssize_t i, j
        cdef int l
        cdef double loss = 0.0, e, inv_elems, d, a
        cdef int out_act = self.out_act, hidden_act = self.hidden_act

        cur = X_mv
        for l in range(self.n_layers):
            A = self.acts[l]
            A = A[:m]
            _gemm_ab(cur, self.Ws[l], A)
            _bias_activate(A, self.bs[l], out_act if l == self.n_layers - 1 else hidden_act,
                           l == self.n_layers - 1)
            cur = A

        # output delta: MAE subgradient (0 at exactly 0) times output derivative
        cdef Py_ssize_t out_dim = Y_mv.shape[1]
        inv_elems = 1.0 / (m * out_dim)
        D = self.deltas[self.n_layers - 1]
        D = D[:m]
        with nogil:
            for i in range(m):
                for j in range(out_dim):
                    e = cur[i, j] - Y_mv[i, j]
                    loss += fabs(e)
                    d = 0.0 if e == 0.0 else (inv_elems if e > 0.0 else -inv_elems)
                    if out_act == 1 and cur[i, j] <= -1.0:
                        d = 0.0
                    D[i, j] = d
        loss *= inv_elems

        cdef double[:, ::1] gW
        cdef double[::1] gb
        for l in range(self.n_layers - 1, -1, -1):
            if l == 0:
                A = X_mv
            else:
                A = self.acts[l - 1]
                A = A[:m]
            D = self.deltas[l]
            D = D[:m]
            gW = self.gWs[l]
            gb = self.gbs[l]
            _gemm_atb(A, D, gW)
            with nogil:
                for j in range(gb.shape[0]):
                    gb[j] = 0.0
                for i in range(m):
                    for j in range(gb.shape[0]):
                        gb[j] += D[i, j]
            if l > 0:
                D_prev = self.deltas[l - 1]
                D_prev = D_prev[:m]
                _gemm_abt(D, self.Ws[l], D_prev)
                with nogil:
                    for i in range(m):
                        for j in range(D_prev.shape[1]):
                            a = A[i, j]
                            if hidden_act == 0:
                                D_prev[i, j] *= a * (1.0 - a)
                            elif hidden_act == 1:
                                D_prev[i, j] *= 1.0 - a * a
                            elif a <= 0.0:
                                D_prev[i, j] = 0.0

        self.t += 1
        cdef double c1 = 1.0 - self.beta1 ** self.t
        cdef double c2 = 1.0 - self.beta2 ** self.t
        for l in range(self.n_layers):
            self._adam2(self.Ws[l], self.gWs[l], self.mW[l], self.vW[l], c1, c2)
            self._adam1(self.bs[l], self.gbs[l], self.mb[l], self.vb[l], c1, c2)
        return loss

    cdef void _adam2(self, double[:, ::1] p, double[:, ::1] g, double[:, ::1] m,
                     double[:, ::1] v, double c1, double c2) noexcept nogil:
        cdef Py_ssize_t i, j
        cdef double gij
        for i in range(p.shape[0]):
            for j in range(p.shape[1]):
                gij = g[i, j]
                m[i, j] = self.beta1 * m[i, j] + (1.0 - self.beta1) * gij
                v[i, j] = self.beta2 * v[i, j] + (1.0 - self.beta2) * gij * gij
                p[i, j] -= self.lr * (m[i, j] / c1) / (sqrt(v[i, j] / c2) + self.eps)

    cdef void _adam1(self, double[::1] p, double[::1] g, double[::1] m,
                     double[::1] v, double c1, double c2) noexcept nogil:
        cdef Py_ssize_t j
        cdef double gj
        for j in range(p.shape[0]):
            gj = g[j]
            m[j] = self.beta1 * m[j] + (1.0 - self.beta1) * gj
            v[j] = self.beta2 * v[j] + (1.0 - self.beta2) * gj * gj
            p[j] -= self.lr * (m[j] / c1) / (sqrt(v[j] / c2) + self.eps)
