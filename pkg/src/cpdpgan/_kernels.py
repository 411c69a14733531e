"""O(n^2) numeric kernels: pairwise distances and Gaussian kernel sums.

Each kernel has a numba ``@njit`` implementation and a pure-numpy one.
The numba path is used unless ``CPDPGAN_DISABLE_NUMBA`` is set to a truthy
value (or numba cannot be imported). Both paths are exported so tests and
the benchmark can compare them directly.
"""

import os

import numpy as np

try:
    from numba import njit
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

_FLAG = os.environ.get("CPDPGAN_DISABLE_NUMBA", "").strip().lower()
USE_NUMBA = HAS_NUMBA and _FLAG not in ("1", "true", "yes", "on")

# rows per chunk for the numpy path; bounds temporaries to ~chunk * n doubles
_CHUNK = 256


def pdist_numpy(x):
    """Condensed Euclidean distances {||x_i - x_j|| : i < j}, row-major pair order."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = x.shape[0]
    out = np.empty(n * (n - 1) // 2)
    pos = 0
    for i in range(n - 1):
        diff = x[i + 1:] - x[i]
        k = n - 1 - i
        out[pos:pos + k] = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        pos += k
    return out


def gaussian_kernel_sum_numpy(a, b, gamma, exclude_diagonal=False):
    """sum_ij exp(-gamma * ||a_i - b_j||^2), optionally skipping i == j."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    total = 0.0
    for start in range(0, a.shape[0], _CHUNK):
        block = a[start:start + _CHUNK]
        diff = block[:, None, :] - b[None, :, :]
        sq = np.einsum("ijk,ijk->ij", diff, diff)
        k = np.exp(-gamma * sq)
        if exclude_diagonal:
            rows = np.arange(block.shape[0])
            cols = rows + start
            keep = cols < b.shape[0]
            k[rows[keep], cols[keep]] = 0.0
        total += k.sum()
    return float(total)


if HAS_NUMBA:

    @njit(cache=True)
    def pdist_numba(x):
        n, f = x.shape
        out = np.empty(n * (n - 1) // 2)
        pos = 0
        for i in range(n - 1):
            for j in range(i + 1, n):
                s = 0.0
                for k in range(f):
                    d = x[i, k] - x[j, k]
                    s += d * d
                out[pos] = np.sqrt(s)
                pos += 1
        return out

    @njit(cache=True)
    def _kernel_sum_numba(a, b, gamma, exclude_diagonal):
        total = 0.0
        f = a.shape[1]
        for i in range(a.shape[0]):
            for j in range(b.shape[0]):
                if exclude_diagonal and i == j:
                    continue
                s = 0.0
                for k in range(f):
                    d = a[i, k] - b[j, k]
                    s += d * d
                total += np.exp(-gamma * s)
        return total

    def gaussian_kernel_sum_numba(a, b, gamma, exclude_diagonal=False):
        a = np.ascontiguousarray(a, dtype=np.float64)
        b = np.ascontiguousarray(b, dtype=np.float64)
        return float(_kernel_sum_numba(a, b, float(gamma), bool(exclude_diagonal)))

else:  # pragma: no cover
    pdist_numba = None
    gaussian_kernel_sum_numba = None


def pdist(x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if USE_NUMBA:
        return pdist_numba(x)
    return pdist_numpy(x)


def gaussian_kernel_sum(a, b, gamma, exclude_diagonal=False):
    if USE_NUMBA:
        return gaussian_kernel_sum_numba(a, b, gamma, exclude_diagonal)
    return gaussian_kernel_sum_numpy(a, b, gamma, exclude_diagonal)


def backend():
    return "numba" if USE_NUMBA else "numpy"
