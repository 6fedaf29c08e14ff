"""The Gaussian limit law of the normalized partial sums.

The limit is a centered Gaussian vector whose covariance is the full
coefficient sum conjugated with the innovation covariance.  This module
samples its norm law, and estimates a bound on the density of that norm by
the supremum of a kernel density estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .empirical import EmpiricalLaw
from .hilbert import LinOp

__all__ = [
    "LimitSpec",
    "limit_covariance",
    "sample_limit",
    "sample_limit_norms",
    "silverman_bandwidth",
    "density_bound",
]


@dataclass(frozen=True)
class LimitSpec:
    """Covariance of the limit Gaussian and its cached symmetric PSD root."""

    covariance: LinOp
    sqrt_factor: LinOp


def _symmetrize(mat):
    return (mat + mat.T) / 2.0


def _psd_sqrt(mat, tol=1e-9):
    sym = _symmetrize(mat)
    eigval, eigvec = np.linalg.eigh(sym)
    scale = max(float(eigval[-1]), 1.0)
    if eigval[0] < -tol * scale:
        raise ValueError(
            f"covariance is not positive semidefinite (min eigenvalue {eigval[0]:.3e})"
        )
    root = (eigvec * np.sqrt(np.clip(eigval, 0.0, None))) @ eigvec.T
    return LinOp(_symmetrize(sym)), LinOp(_symmetrize(root))


def limit_covariance(coeffs, innovation_cov: LinOp) -> LimitSpec:
    """Build the limit spec from coefficients and the innovation covariance."""
    # validate the input is (numerically) symmetric PSD before conjugating
    _psd_sqrt(innovation_cov.entries)
    a = coeffs.total.entries
    cov = a @ innovation_cov.entries @ a.T
    covariance, root = _psd_sqrt(cov)
    return LimitSpec(covariance, root)


def sample_limit(spec: LimitSpec, m, seed, *, chunk=262_144):
    """m independent draws of the limit Gaussian vector, shape (m, d).

    Draws are counter-based by sample index, so disjoint index ranges can be
    generated concurrently and concatenated without changing the result.
    """
    if m < 1:
        raise ValueError("need at least one draw")
    d = spec.covariance.dim
    key = rng.derive_key(seed, rng.STREAM_LIMIT)
    out = np.empty((m, d))
    root_t = spec.sqrt_factor.entries.T
    for start in range(0, m, chunk):
        stop = min(start + chunk, m)
        g = rng.normals(key, np.arange(start, stop, dtype=np.int64), d)
        out[start:stop] = g @ root_t
    return out


def sample_limit_norms(spec: LimitSpec, m, seed) -> EmpiricalLaw:
    """Sorted sample of the Hilbert norm of the limit Gaussian."""
    vecs = sample_limit(spec, m, seed)
    return EmpiricalLaw.from_samples(np.linalg.norm(vecs, axis=1))


def silverman_bandwidth(law: EmpiricalLaw):
    """Rule-of-thumb kernel bandwidth: 1.06 * std * m^(-1/5)."""
    std = float(np.std(law.samples))
    return 1.06 * std * law.count ** (-0.2)


def density_bound(law: EmpiricalLaw, bandwidth) -> float:
    """Sup over a grid of a Gaussian-kernel density estimate of the norm law.

    The grid covers [0, max sample] with step bandwidth/4.  Samples are
    binned at grid resolution and convolved with the kernel, which matches
    the exact KDE to well below the estimator's own noise.  A degenerate law
    (every sample equal) has no bounded density; returns inf.
    """
    if bandwidth <= 0:
        raise ValueError("bandwidth must be > 0")
    if law.count < 1_000:
        raise ValueError("density bound needs at least 1000 samples")
    x = law.samples
    if x[0] == x[-1]:
        return math.inf
    step = bandwidth / 4.0
    top = float(x[-1])
    n_bins = int(math.ceil(top / step)) + 1
    edges = (np.arange(n_bins + 1) - 0.5) * step
    counts, _ = np.histogram(x, bins=edges)
    reach = int(math.ceil(6.0 * bandwidth / step))
    u = np.arange(-reach, reach + 1) * step / bandwidth
    kernel = np.exp(-0.5 * u * u) / (bandwidth * math.sqrt(2.0 * math.pi))
    dens = np.convolve(counts / law.count, kernel, mode="same")
    return float(dens.max())
