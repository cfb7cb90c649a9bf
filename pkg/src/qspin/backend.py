"""Index-arithmetic kernels for dense operators, with optional JIT acceleration.

Everything heavy in this package is either LAPACK (eigendecompositions, left
to numpy) or one of the three inner loops implemented here: embedding a local
matrix into the full space, tracing out a region, and multiplying a product
state together.  Each loop exists twice, as a numba-compiled kernel and as
vectorized numpy over precomputed index tables.  The environment variable
``QSPIN_BACKEND`` picks the implementation:

* ``auto`` (default) -- numba when importable, numpy otherwise;
* ``numba`` -- require numba, fail loudly if missing;
* ``numpy`` -- force the pure-numpy path (useful for debugging and as the
  reference in ``benchmarks/bench_kernels.py``).

All index tables use the single global convention: the full space is the
tensor product over sites in increasing site index, site 0 being the most
significant (leftmost) factor.
"""

from __future__ import annotations

import os

import numpy as np

_ENV_CHOICE = os.environ.get("QSPIN_BACKEND", "auto").strip().lower()
if _ENV_CHOICE not in ("auto", "numba", "numpy"):
    raise ValueError(
        f"QSPIN_BACKEND must be one of auto|numba|numpy, got {_ENV_CHOICE!r}"
    )

if _ENV_CHOICE in ("auto", "numba"):
    try:
        from numba import njit

        _HAVE_NUMBA = True
    except ImportError:
        if _ENV_CHOICE == "numba":
            raise
        _HAVE_NUMBA = False
else:
    _HAVE_NUMBA = False

USE_NUMBA = _HAVE_NUMBA


def backend_name() -> str:
    """Name of the kernel implementation in use (``"numba"`` or ``"numpy"``)."""
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# Index tables (big-endian mixed radix over site dimensions)
# ---------------------------------------------------------------------------

def site_strides(local_dims) -> np.ndarray:
    """Stride of each site in the flattened full-space index.

    ``strides[x] = prod(local_dims[x+1:])``, so a full basis index decomposes
    as ``i = sum_x digit_x * strides[x]`` with ``digit_x`` the local basis
    label at site ``x``.
    """
    dims = [int(d) for d in local_dims]
    n = len(dims)
    strides = np.ones(n, dtype=np.int64)
    for x in range(n - 2, -1, -1):
        strides[x] = strides[x + 1] * dims[x + 1]
    return strides


def subspace_indices(sites, local_dims, strides) -> np.ndarray:
    """Full-space offsets of every basis state of a site subset.

    ``sites`` must be ascending.  Entry ``p`` is the full-space index
    contribution of the subset basis state labelled ``p``, where subset
    states are enumerated big-endian over the subset's sites.
    """
    idx = np.zeros(1, dtype=np.int64)
    for x in sites:
        d = int(local_dims[x])
        step = np.arange(d, dtype=np.int64) * int(strides[x])
        idx = (idx[:, None] + step[None, :]).ravel()
    return idx


def region_index_map(sites, local_dims, strides, dim_total: int) -> np.ndarray:
    """Map every full-space index to the sub-index of a site subset.

    Entry ``i`` is the big-endian label, within the subset ``sites``
    (ascending), of the digits that full index ``i`` carries on those sites.
    """
    out = np.zeros(dim_total, dtype=np.int64)
    all_idx = np.arange(dim_total, dtype=np.int64)
    sub_stride = 1
    for x in reversed(list(sites)):
        d = int(local_dims[x])
        out += ((all_idx // int(strides[x])) % d) * sub_stride
        sub_stride *= d
    return out


# ---------------------------------------------------------------------------
# numpy reference kernels
# ---------------------------------------------------------------------------

def embed_dense_numpy(mat, sup_idx, env_idx, dim: int) -> np.ndarray:
    """Full-space matrix acting as ``mat`` on a subset and as identity elsewhere."""
    out = np.zeros((dim, dim), dtype=np.complex128)
    block = sup_idx[:, None] + env_idx[None, :]  # (d_sup, d_env)
    out[block[:, None, :], block[None, :, :]] = mat[:, :, None]
    return out


def partial_trace_numpy(psi, keep_idx, env_idx) -> np.ndarray:
    """Trace out the complement of the kept subset by direct index summation."""
    da = keep_idx.size
    out = np.empty((da, da), dtype=np.complex128)
    cols = keep_idx[None, :] + env_idx[:, None]  # (d_env, da)
    for p in range(da):
        rows = keep_idx[p] + env_idx  # (d_env,)
        out[p, :] = psi[rows[:, None], cols].sum(axis=0)
    return out


def apply_product_factor_numpy(out, rho, index_map) -> None:
    """In-place entrywise multiply of ``out`` by a region factor."""
    out *= rho[np.ix_(index_map, index_map)]


# ---------------------------------------------------------------------------
# numba kernels
# ---------------------------------------------------------------------------

if _HAVE_NUMBA:

    @njit(cache=True)
    def embed_dense_numba(mat, sup_idx, env_idx, dim):  # pragma: no cover - jitted
        out = np.zeros((dim, dim), dtype=np.complex128)
        dx = sup_idx.size
        de = env_idx.size
        for p in range(dx):
            for q in range(dx):
                v = mat[p, q]
                if v != 0:
                    for r in range(de):
                        out[sup_idx[p] + env_idx[r], sup_idx[q] + env_idx[r]] = v
        return out

    @njit(cache=True)
    def partial_trace_numba(psi, keep_idx, env_idx):  # pragma: no cover - jitted
        da = keep_idx.size
        de = env_idx.size
        out = np.zeros((da, da), dtype=np.complex128)
        for p in range(da):
            kp = keep_idx[p]
            for q in range(da):
                kq = keep_idx[q]
                acc = 0.0 + 0.0j
                for r in range(de):
                    acc += psi[kp + env_idx[r], kq + env_idx[r]]
                out[p, q] = acc
        return out

    @njit(cache=True)
    def apply_product_factor_numba(out, rho, index_map):  # pragma: no cover - jitted
        n = index_map.size
        for i in range(n):
            ri = index_map[i]
            for j in range(n):
                out[i, j] *= rho[ri, index_map[j]]


# ---------------------------------------------------------------------------
# dispatchers
# ---------------------------------------------------------------------------

def embed_dense(mat, sup_idx, env_idx, dim: int) -> np.ndarray:
    mat = np.ascontiguousarray(mat, dtype=np.complex128)
    if USE_NUMBA:
        return embed_dense_numba(mat, sup_idx, env_idx, dim)
    return embed_dense_numpy(mat, sup_idx, env_idx, dim)


def partial_trace_dense(psi, keep_idx, env_idx) -> np.ndarray:
    psi = np.ascontiguousarray(psi, dtype=np.complex128)
    if USE_NUMBA:
        return partial_trace_numba(psi, keep_idx, env_idx)
    return partial_trace_numpy(psi, keep_idx, env_idx)


def apply_product_factor(out, rho, index_map) -> None:
    rho = np.ascontiguousarray(rho, dtype=np.complex128)
    if USE_NUMBA:
        apply_product_factor_numba(out, rho, index_map)
    else:
        apply_product_factor_numpy(out, rho, index_map)
