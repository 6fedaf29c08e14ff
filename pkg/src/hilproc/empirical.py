"""Empirical laws of norm samples and the two-sample CDF sup-distance."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["EmpiricalLaw", "sup_distance", "dkw_noise_floor"]


@dataclass(frozen=True)
class EmpiricalLaw:
    """A sorted sample of a real-valued norm functional.

    The CDF is the right-continuous step function t -> (# samples <= t) / m.
    """

    samples: np.ndarray

    @classmethod
    def from_samples(cls, values):
        arr = np.sort(np.asarray(values, dtype=np.float64).ravel())
        if arr.size == 0:
            raise ValueError("an empirical law needs at least one sample")
        arr.setflags(write=False)
        return cls(arr)

    @property
    def count(self):
        return int(self.samples.size)

    def cdf(self, t):
        """P(X <= t); accepts scalars or arrays."""
        pos = np.searchsorted(self.samples, t, side="right")
        out = pos / self.count
        return float(out) if np.isscalar(t) else out


def sup_distance(a: EmpiricalLaw, b: EmpiricalLaw) -> float:
    """Exact sup over t of |CDF_a(t) - CDF_b(t)| (two-sample KS statistic).

    Both CDFs are step functions, so the sup is attained at a jump point of
    either sample, approached from the right or from the left.
    """
    pts = np.concatenate([a.samples, b.samples])
    fa_r = a.cdf(pts)
    fb_r = b.cdf(pts)
    fa_l = np.searchsorted(a.samples, pts, side="left") / a.count
    fb_l = np.searchsorted(b.samples, pts, side="left") / b.count
    return float(max(np.abs(fa_r - fb_r).max(), np.abs(fa_l - fb_l).max()))


def dkw_noise_floor(m_a, m_b, confidence=0.01):
    """Two-sample Monte Carlo resolution limit of the sup-distance estimate.

    With probability at least 1 - confidence, each empirical CDF is uniformly
    within sqrt(ln(2/confidence) / (2 m)) of its law, so measured distances
    below the sum of the two radii are indistinguishable from zero.
    """
    if not 0 < confidence < 1:
        raise ValueError("confidence must lie in (0, 1)")
    c = math.log(2.0 / confidence)
    return math.sqrt(c / (2.0 * m_a)) + math.sqrt(c / (2.0 * m_b))
