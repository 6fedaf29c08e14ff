"""Finite-dimensional truncation of a separable Hilbert space.

Vectors are plain 1-D float64 numpy arrays of a fixed dimension d, with the
Euclidean norm as the Hilbert norm.  Bounded linear operators are dense d x d
matrices wrapped in :class:`LinOp`, which caches the operator (spectral) norm
and guards dimension agreement.  Everything is immutable after construction
and safe to share across worker threads.
"""

from __future__ import annotations

import numpy as np

__all__ = ["LinOp", "operator_norm", "covariance_operator"]


def _readonly(a):
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


def operator_norm(mat, tol=1e-12, max_iter=10_000):
    """Largest singular value of a square matrix.

    For d <= 2 the closed form is used.  Otherwise: power iteration on
    M^T M with a fixed, deterministic start vector, stopping when the
    Rayleigh estimate moves by less than ``tol`` relative per step.  The
    deterministic scheme gives bit-stable results across platforms, which
    matters for reproducible reports.
    """
    mat = np.asarray(mat, dtype=np.float64)
    d = mat.shape[0]
    if mat.shape != (d, d):
        raise ValueError(f"operator must be square, got shape {mat.shape}")
    if d == 1:
        return abs(float(mat[0, 0]))
    if d == 2:
        # eigenvalues of the 2x2 Gram matrix, stable closed form
        g = mat.T @ mat
        a, b, c = g[0, 0], g[0, 1], g[1, 1]
        half_gap = np.hypot((a - c) / 2.0, b)
        return float(np.sqrt(max((a + c) / 2.0 + half_gap, 0.0)))

    gram = mat.T @ mat
    v = 1.0 + np.arange(d) / d
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = gram @ v
        new_lam = float(np.linalg.norm(w))
        if new_lam == 0.0:
            return 0.0
        v = w / new_lam
        if abs(new_lam - lam) <= tol * new_lam:
            lam = new_lam
            break
        lam = new_lam
    return float(np.sqrt(lam))


class LinOp:
    """Bounded linear operator on the truncated space (dense square matrix)."""

    __slots__ = ("entries", "_norm")

    def __init__(self, entries, *, _norm=None):
        mat = _readonly(entries)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"operator entries must be square, got shape {mat.shape}")
        self.entries = mat
        self._norm = _norm

    @classmethod
    def identity(cls, dim):
        return cls(np.eye(dim), _norm=1.0)

    @classmethod
    def zero(cls, dim):
        return cls(np.zeros((dim, dim)), _norm=0.0)

    @property
    def dim(self):
        return self.entries.shape[0]

    @property
    def norm(self):
        """Operator norm ||T|| = sup over unit v of ||T v||; cached."""
        if self._norm is None:
            self._norm = operator_norm(self.entries)
        return self._norm

    def apply(self, v):
        """Matrix-vector product; v may also be a stack of row vectors (..., d)."""
        v = np.asarray(v, dtype=np.float64)
        if v.shape[-1] != self.dim:
            raise ValueError(
                f"dimension mismatch: operator is {self.dim}-dimensional, "
                f"vector has {v.shape[-1]} coordinates"
            )
        return v @ self.entries.T

    def adjoint(self):
        return LinOp(self.entries.T, _norm=self._norm)

    def __matmul__(self, other):
        if not isinstance(other, LinOp):
            return NotImplemented
        if other.dim != self.dim:
            raise ValueError("dimension mismatch in operator composition")
        return LinOp(self.entries @ other.entries)

    def __add__(self, other):
        if not isinstance(other, LinOp):
            return NotImplemented
        return LinOp(self.entries + other.entries)

    def __sub__(self, other):
        if not isinstance(other, LinOp):
            return NotImplemented
        return LinOp(self.entries - other.entries)

    def __neg__(self):
        return LinOp(-self.entries, _norm=self._norm)

    def __mul__(self, scalar):
        return LinOp(self.entries * float(scalar))

    __rmul__ = __mul__

    def __repr__(self):
        return f"LinOp(dim={self.dim}, norm={self.norm:.6g})"


def covariance_operator(samples):
    """Empirical second-moment operator of centered vector samples.

    Entry (i, j) is the average of coords_i * coords_j over the samples.  The
    mean is *not* subtracted: the innovation models guarantee centering.  The
    result is bit-exactly symmetric and positive semidefinite up to rounding.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("covariance_operator needs an (m, d) sample array with m >= 2")
    m = x.shape[0]
    raw = (x.T @ x) / m
    return LinOp((raw + raw.T) / 2.0)
