"""numba-compiled twins of ``_kernels_numpy``.

One pass per sample, no batch-sized temporaries beyond the outputs.
"""

import numpy as np
from numba import njit

_opts = dict(cache=True, nogil=True)


@njit(**_opts)
def _pt_into(rho, out, da, db):
    for i in range(da):
        for j in range(db):
            for k in range(da):
                for l in range(db):
                    out[i * db + j, k * db + l] = rho[i * db + l, k * db + j]


@njit(**_opts)
def pt_batch(rhos, da, db):
    n, d = rhos.shape[0], rhos.shape[1]
    out = np.empty((n, d, d), dtype=np.complex128)
    for s in range(n):
        _pt_into(rhos[s], out[s], da, db)
    return out


@njit(**_opts)
def pt_min_eig(rhos, da, db):
    n, d = rhos.shape[0], rhos.shape[1]
    out = np.empty(n)
    buf = np.empty((d, d), dtype=np.complex128)
    for s in range(n):
        _pt_into(rhos[s], buf, da, db)
        out[s] = np.linalg.eigvalsh(buf)[0]
    return out


@njit(**_opts)
def delta_t_batch(rhos, da, db):
    n = rhos.shape[0]
    k = min(da, db)
    out = np.empty((n, k, k))
    for s in range(n):
        for i in range(k):
            for j in range(k):
                out[s, i, j] = rhos[s, i * db + j, j * db + i].real
    return out


@njit(**_opts)
def delta_lambda_batch(rhos, adj, da, db):
    n = rhos.shape[0]
    k = adj.shape[2]
    out = np.zeros((n, k, k))
    for s in range(n):
        for i in range(k):
            for j in range(k):
                acc = 0.0
                for l in range(db):
                    for m in range(db):
                        z = rhos[s, i * db + l, j * db + m] * adj[m, l, j, i]
                        acc += z.real
                out[s, i, j] = acc
    return out


@njit(**_opts)
def _det(a):
    k = a.shape[0]
    if k == 1:
        return a[0, 0]
    if k == 2:
        return a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    if k == 3:
        return (a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
                - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
                + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0]))
    return np.linalg.det(a)


@njit(**_opts)
def sym_det(mats):
    n = mats.shape[0]
    out = np.empty(n)
    for s in range(n):
        out[s] = _det(mats[s])
    return out


@njit(**_opts)
def sym_min_eig(mats):
    n = mats.shape[0]
    out = np.empty(n)
    for s in range(n):
        out[s] = np.linalg.eigvalsh(mats[s])[0]
    return out


@njit(**_opts)
def expectation_batch(w, rhos):
    n, d = rhos.shape[0], rhos.shape[1]
    out = np.empty(n)
    for s in range(n):
        acc = 0.0
        for a in range(d):
            for b in range(d):
                acc += (w[a, b] * rhos[s, b, a]).real
        out[s] = acc
    return out


@njit(**_opts)
def minors_batch(mats, subsets, sizes):
    n = mats.shape[0]
    ns = subsets.shape[0]
    out = np.empty((n, ns))
    for t in range(ns):
        r = sizes[t]
        sub = np.empty((r, r))
        for s in range(n):
            for p in range(r):
                for q in range(r):
                    sub[p, q] = mats[s, subsets[t, p], subsets[t, q]]
            out[s, t] = _det(sub)
    return out
