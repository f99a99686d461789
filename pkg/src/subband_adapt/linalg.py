"""Small dense SPD kernels for the M x M solve in the update rule.

The heavy lifting lives in a few ``numba`` kernels that write into
caller-provided buffers, so the per-sample loop never allocates. The
Python-facing functions wrap them with shape and invariant checks.
"""

import numpy as np
from numba import njit

from .errors import NotPositiveDefinite, ValidationError

__all__ = [
    "SpdMatrix",
    "CholeskySolver",
    "cholesky_solve",
    "weighted_gram",
]

SYMMETRY_RTOL = 1e-12


@njit(cache=True, nogil=True)
def cholesky_inplace(a):
    """Overwrite the lower triangle of ``a`` with its Cholesky factor.

    Returns -1 on success, otherwise the index of the first pivot that was
    not strictly positive. The strict upper triangle is left untouched.
    """
    n = a.shape[0]
    for j in range(n):
        acc = a[j, j]
        for k in range(j):
            acc -= a[j, k] * a[j, k]
        if not acc > 0.0:
            return j
        piv = np.sqrt(acc)
        a[j, j] = piv
        for i in range(j + 1, n):
            acc = a[i, j]
            for k in range(j):
                acc -= a[i, k] * a[j, k]
            a[i, j] = acc / piv
    return -1


@njit(cache=True, nogil=True)
def cholesky_solve_inplace(factor, b):
    """Solve ``L L^T x = b`` in place, ``L`` being the lower triangle of ``factor``."""
    n = factor.shape[0]
    for i in range(n):
        acc = b[i]
        for k in range(i):
            acc -= factor[i, k] * b[k]
        b[i] = acc / factor[i, i]
    for i in range(n - 1, -1, -1):
        acc = b[i]
        for k in range(i + 1, n):
            acc -= factor[k, i] * b[k]
        b[i] = acc / factor[i, i]


@njit(cache=True, nogil=True)
def weighted_gram_into(u_b, w, ridge, out):
    """out = ridge*I + u_b^T diag(w) u_b, lower triangle computed then mirrored."""
    rows, cols = u_b.shape
    for i in range(cols):
        for j in range(i + 1):
            acc = 0.0
            for k in range(rows):
                acc += u_b[k, i] * w[k] * u_b[k, j]
            out[i, j] = acc
            out[j, i] = acc
        out[i, i] += ridge


class SpdMatrix:
    """Symmetric positive-definite matrix, checked for symmetry on construction.

    Positive definiteness is only established when the matrix is factored.
    """

    __slots__ = ("entries",)

    def __init__(self, entries, check=True):
        entries = np.asarray(entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValidationError(f"SPD matrix must be square, got shape {entries.shape}")
        if check:
            scale = max(np.max(np.abs(entries), initial=0.0), np.finfo(float).tiny)
            asym = np.max(np.abs(entries - entries.T), initial=0.0)
            if asym > SYMMETRY_RTOL * scale:
                raise ValidationError(
                    f"matrix is not symmetric (max asymmetry {asym:.3e})"
                )
        self.entries = entries

    @property
    def dim(self):
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.entries
        return self.entries.astype(dtype)

    def __matmul__(self, other):
        return self.entries @ other

    def __repr__(self):
        return f"SpdMatrix(dim={self.dim})"


class CholeskySolver:
    """Reusable solver for systems of a fixed dimension.

    Holds its own factor buffer, so repeated calls do not allocate when an
    ``out`` vector is supplied. One instance must not be shared across
    threads.
    """

    def __init__(self, dim):
        if dim < 1:
            raise ValidationError("dimension must be positive")
        self.dim = dim
        self._factor = np.empty((dim, dim))

    def solve(self, a, b, out=None):
        a = a.entries if isinstance(a, SpdMatrix) else np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        if a.shape != (self.dim, self.dim) or b.shape != (self.dim,):
            raise ValidationError(
                f"shape mismatch: matrix {a.shape}, rhs {b.shape}, solver dim {self.dim}"
            )
        np.copyto(self._factor, a)
        bad = cholesky_inplace(self._factor)
        if bad >= 0:
            raise NotPositiveDefinite(f"non-positive pivot at index {bad}")
        if out is None:
            out = b.copy()
        else:
            np.copyto(out, b)
        cholesky_solve_inplace(self._factor, out)
        return out


def cholesky_solve(a, b):
    """Solve ``a x = b`` for symmetric positive-definite ``a``.

    Parameters
    ----------
    a : SpdMatrix or array_like, shape (dim, dim)
    b : array_like, shape (dim,)

    Raises
    ------
    NotPositiveDefinite
        If a Cholesky pivot is not strictly positive.
    """
    if not isinstance(a, SpdMatrix):
        a = SpdMatrix(a)
    return CholeskySolver(a.dim).solve(a, b)


def weighted_gram(u_b, w, ridge, out=None):
    """Return ``ridge * I + u_b^T diag(w) u_b`` as an :class:`SpdMatrix`.

    The result is bitwise symmetric: only one triangle is accumulated.
    """
    u_b = np.ascontiguousarray(u_b, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    if u_b.ndim != 2 or w.shape != (u_b.shape[0],):
        raise ValidationError(
            f"dimension mismatch: u_b {u_b.shape}, w {w.shape}"
        )
    if out is None:
        out = np.empty((u_b.shape[1], u_b.shape[1]))
    weighted_gram_into(u_b, w, float(ridge), out)
    return SpdMatrix(out, check=False)
