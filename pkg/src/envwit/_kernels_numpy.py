"""Vectorized numpy implementations of the batch kernels.

Each function mirrors one in ``_kernels_numba`` with identical signature and
semantics.  Batches are ``(n, D, D)`` complex arrays with ``D = d_a * d_b``.
"""

import numpy as np


def pt_batch(rhos, da, db):
    n = rhos.shape[0]
    t = rhos.reshape(n, da, db, da, db).transpose(0, 1, 4, 3, 2)
    return np.ascontiguousarray(t).reshape(n, da * db, da * db)


def pt_min_eig(rhos, da, db):
    return np.linalg.eigvalsh(pt_batch(rhos, da, db))[:, 0]


def delta_t_batch(rhos, da, db):
    """``Delta[i, j] = Re rho[(i, j), (j, i)]`` for ``i, j < min(da, db)``."""
    k = min(da, db)
    i = np.arange(k)[:, None]
    j = np.arange(k)[None, :]
    return rhos[:, i * db + j, j * db + i].real.copy()


def delta_lambda_batch(rhos, adj, da, db):
    """``Delta[i, j] = sum_{l,m} Re(rho[(i,l),(j,m)] * adj[m, l, j, i])``."""
    n = rhos.shape[0]
    k = adj.shape[2]
    r = rhos.reshape(n, da, db, da, db)[:, :k, :, :k, :]
    return np.einsum("niljm,mlji->nij", r, adj).real


def sym_det(mats):
    k = mats.shape[-1]
    if k == 1:
        return mats[:, 0, 0].copy()
    if k == 2:
        return mats[:, 0, 0] * mats[:, 1, 1] - mats[:, 0, 1] * mats[:, 1, 0]
    if k == 3:
        a, b, c = mats[:, 0, 0], mats[:, 0, 1], mats[:, 0, 2]
        d, e, f = mats[:, 1, 0], mats[:, 1, 1], mats[:, 1, 2]
        g, h, i = mats[:, 2, 0], mats[:, 2, 1], mats[:, 2, 2]
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    return np.linalg.det(mats)


def sym_min_eig(mats):
    return np.linalg.eigvalsh(mats)[:, 0]


def expectation_batch(w, rhos):
    """``Re tr(W rho)`` for each state."""
    return np.einsum("ab,nba->n", w, rhos).real


def minors_batch(mats, subsets, sizes):
    """Determinants of principal submatrices.

    ``subsets`` is an ``(S, kmax)`` int array padded with -1 and ``sizes``
    the number of valid indices per row.
    """
    n = mats.shape[0]
    out = np.empty((n, subsets.shape[0]))
    for s in range(subsets.shape[0]):
        idx = subsets[s, : sizes[s]]
        out[:, s] = sym_det(np.ascontiguousarray(mats[:, idx][:, :, idx]))
    return out
