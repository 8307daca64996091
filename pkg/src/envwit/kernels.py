"""Batch kernels for the Monte-Carlo sweeps, dispatched by backend.

The backend is chosen once at import from ``ENVWIT_BACKEND``:

* ``numba`` (default) - compiled per-sample loops from ``_kernels_numba``;
* ``numpy`` - the vectorized reference path in ``_kernels_numpy``.

If numba cannot be imported the numpy path is used silently.  Both
implementations stay importable as :data:`numpy_impl` / :func:`numba_impl`
so they can be compared head to head.
"""

from __future__ import annotations

import os
from types import ModuleType

import numpy as np

from . import _kernels_numpy as numpy_impl
from .matcore import principal_subsets

__all__ = [
    "BACKEND",
    "numpy_impl",
    "numba_impl",
    "pt_batch",
    "pt_min_eig",
    "delta_t_batch",
    "delta_lambda_batch",
    "sym_det",
    "sym_min_eig",
    "expectation_batch",
    "minors_batch",
    "subset_table",
]


def numba_impl() -> ModuleType | None:
    try:
        from . import _kernels_numba
    except ImportError:
        return None
    return _kernels_numba


def _select() -> tuple[str, ModuleType]:
    want = os.environ.get("ENVWIT_BACKEND", "numba").strip().lower()
    if want not in ("numba", "numpy"):
        raise RuntimeError(f"ENVWIT_BACKEND must be 'numba' or 'numpy', got {want!r}")
    if want == "numba":
        mod = numba_impl()
        if mod is not None:
            return "numba", mod
    return "numpy", numpy_impl


BACKEND, _impl = _select()

pt_batch = _impl.pt_batch
pt_min_eig = _impl.pt_min_eig
delta_t_batch = _impl.delta_t_batch
delta_lambda_batch = _impl.delta_lambda_batch
sym_det = _impl.sym_det
sym_min_eig = _impl.sym_min_eig
expectation_batch = _impl.expectation_batch
minors_batch = _impl.minors_batch


def subset_table(k: int) -> tuple[np.ndarray, np.ndarray, list[tuple[int, ...]]]:
    """Padded index table of all principal subsets for :func:`minors_batch`."""
    subs = principal_subsets(k)
    table = np.full((len(subs), k), -1, dtype=np.int64)
    for r, s in enumerate(subs):
        table[r, : len(s)] = s
    sizes = np.array([len(s) for s in subs], dtype=np.int64)
    return table, sizes, subs
