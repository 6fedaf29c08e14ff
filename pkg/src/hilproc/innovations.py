"""I.i.d. centered innovation models and their norm functionals.

Three noise regimes drive the rate experiments: bounded (constant radius M,
so the essential sup of the norm is exactly M), sub-exponential (exponential
radial law, finite psi1 Orlicz norm), and heavy-tailed (Pareto radial law
with index alpha, finite L^r moments exactly for r < alpha).  Two extra
modes exist for exact-law sanity checks: full Gaussian vectors, and a
seed-free constant vector.

A model couples a symmetric direction law on the unit sphere with a radial
law, so every model is centered by construction.  Sampling is counter-based:
the draw for index k is a pure function of (model, stream key, k).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, ndtri

from . import rng
from .hilbert import LinOp

__all__ = [
    "DirectionLaw",
    "InnovationModel",
    "YoungFunction",
    "DivergenceError",
    "luxemburg_norm",
    "lr_norm",
    "fit_moment_envelope",
    "envelope_holds",
]

# slot layout per index: direction draws occupy [0, d), the radial draw slot d
_RADIAL_SLOT_EXTRA = 1


class DivergenceError(RuntimeError):
    """A moment or Orlicz functional diverged for the given law."""


@dataclass(frozen=True)
class DirectionLaw:
    """Symmetric law on the unit sphere of the truncation.

    kinds:
      * ``axes``   — uniform over the 2d signed basis vectors (the default);
      * ``sphere`` — uniform on the unit sphere;
      * ``fixed``  — a fixed unit vector with a random sign.
    """

    kind: str
    vector: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("axes", "sphere", "fixed"):
            raise ValueError(f"unknown direction kind {self.kind!r}")
        if self.kind == "fixed":
            v = np.asarray(self.vector, dtype=np.float64)
            nv = np.linalg.norm(v)
            if nv == 0:
                raise ValueError("fixed direction must be a nonzero vector")
            object.__setattr__(self, "vector", tuple(v / nv))

    def second_moment(self, dim):
        """E[dir dir^T] as a (d, d) matrix."""
        if self.kind == "fixed":
            v = np.asarray(self.vector)
            return np.outer(v, v)
        return np.eye(dim) / dim


@dataclass(frozen=True)
class InnovationModel:
    """Specification and sampler of the i.i.d. centered innovations.

    Radial parameter meaning by kind: ``bounded`` — the constant radius M
    (norm bound, attained); ``subexp`` — the exponential scale theta;
    ``heavy`` — the Pareto scale (support [scale, inf), index ``alpha``);
    ``gaussian`` — the per-coordinate standard deviation; ``constant`` —
    unused (the fixed vector is stored in ``vector``).
    """

    kind: str
    dim: int
    direction: DirectionLaw
    radius: float = 1.0
    alpha: float | None = None
    vector: tuple[float, ...] | None = None

    # -- constructors ------------------------------------------------------

    @classmethod
    def bounded(cls, dim, radius=1.0, direction=None):
        if radius < 0:
            raise ValueError("radius bound must be >= 0")
        return cls("bounded", dim, direction or DirectionLaw("axes"), radius)

    @classmethod
    def sub_exponential(cls, dim, scale=1.0, direction=None):
        if scale <= 0:
            raise ValueError("exponential scale must be > 0")
        return cls("subexp", dim, direction or DirectionLaw("axes"), scale)

    @classmethod
    def heavy_tail(cls, dim, alpha, scale=1.0, direction=None):
        if alpha <= 2:
            raise ValueError("Pareto index must exceed 2 (finite covariance)")
        if scale <= 0:
            raise ValueError("Pareto scale must be > 0")
        return cls("heavy", dim, direction or DirectionLaw("axes"), scale, alpha=alpha)

    @classmethod
    def gaussian(cls, dim, scale=1.0):
        return cls("gaussian", dim, DirectionLaw("sphere"), scale)

    @classmethod
    def constant(cls, vector):
        v = np.asarray(vector, dtype=np.float64)
        return cls("constant", v.size, DirectionLaw("axes"), 0.0, vector=tuple(v))

    # -- sampling ----------------------------------------------------------

    def sample(self, lo, hi, key):
        """Draws for the inclusive index range [lo, hi]; shape (hi-lo+1, d)."""
        idx = np.arange(lo, hi + 1, dtype=np.int64)
        return self.sample_at(idx, key)

    def sample_at(self, indices, key):
        """Draws at arbitrary integer indices; key may be an array of stream keys.

        Output shape is ``broadcast(key, indices) + (d,)``; each draw depends
        only on (model, key, index).
        """
        d = self.dim
        indices = np.asarray(indices, dtype=np.int64)
        if self.kind == "constant":
            shape = np.broadcast_shapes(np.shape(key), indices.shape)
            out = np.empty(shape + (d,), dtype=np.float64)
            out[...] = np.asarray(self.vector)
            return out

        if self.kind == "gaussian":
            u = rng.uniforms(key, indices, d)
            return self.radius * ndtri(u)

        # constant-radius kinds skip the radial draw entirely
        radial = self.kind != "bounded"
        dl = self.direction
        if dl.kind == "sphere":
            u = rng.uniforms(key, indices, d + (_RADIAL_SLOT_EXTRA if radial else 0))
            g = ndtri(u[..., :d])
            dirs = g / np.linalg.norm(g, axis=-1, keepdims=True)
            scale = self._radii(u[..., d]) if radial else self.radius
            dirs *= scale if np.isscalar(scale) else scale[..., None]
            return dirs

        u = rng.uniforms(key, indices, 2 if radial else 1)
        scale = self._radii(u[..., 1]) if radial else self.radius
        shape = u.shape[:-1]
        dirs = np.zeros(shape + (d,), dtype=np.float64)
        if dl.kind == "axes":
            # one uniform encodes axis and sign; u < 1 strictly so pick < 2d
            pick = (u[..., 0] * (2 * d)).astype(np.int64)
            vals = (1.0 - 2.0 * (pick & 1)) * scale
            np.put_along_axis(dirs, (pick >> 1)[..., None], vals[..., None], axis=-1)
        else:  # fixed direction, random sign
            sign = np.where(u[..., 0] < 0.5, -1.0, 1.0)
            dirs[...] = np.asarray(dl.vector)
            dirs *= (sign * scale)[..., None]
        return dirs

    def _radii(self, u):
        if self.kind == "bounded":
            return np.full_like(u, self.radius)
        if self.kind == "subexp":
            return -self.radius * np.log1p(-u)
        if self.kind == "heavy":
            return self.radius * (1.0 - u) ** (-1.0 / self.alpha)
        raise AssertionError(self.kind)

    # -- analytic functionals ----------------------------------------------

    def covariance(self):
        """The autocovariance operator E[eps eps^T] as a LinOp."""
        d = self.dim
        if self.kind == "constant":
            v = np.asarray(self.vector)
            return LinOp(np.outer(v, v))
        if self.kind == "gaussian":
            return LinOp(self.radius**2 * np.eye(d))
        return LinOp(self.radial_moment(2) * self.direction.second_moment(d))

    def radial_moment(self, m):
        """E (radius^m); may be inf for heavy tails."""
        if self.kind == "bounded":
            return self.radius**m
        if self.kind == "subexp":
            return self.radius**m * math.gamma(m + 1)
        if self.kind == "heavy":
            if m >= self.alpha:
                return math.inf
            return self.radius**m * self.alpha / (self.alpha - m)
        if self.kind == "gaussian":
            # E ||sigma * N(0, I_d)||^m, the chi distribution moment
            d = self.dim
            return self.radius**m * math.exp(
                0.5 * m * math.log(2) + gammaln((d + m) / 2) - gammaln(d / 2)
            )
        if self.kind == "constant":
            return float(np.linalg.norm(self.vector)) ** m
        raise AssertionError(self.kind)

    def sup_norm(self):
        """Essential sup of ||eps||; inf for unbounded kinds."""
        if self.kind == "bounded":
            return self.radius
        if self.kind == "constant":
            return float(np.linalg.norm(self.vector))
        return math.inf

    def lr_norm_analytic(self, r):
        """(E ||eps||^r)^(1/r); raises DivergenceError if the moment is infinite."""
        m = self.radial_moment(r)
        if not math.isfinite(m):
            raise DivergenceError(
                f"L^{r} norm diverges for heavy-tail index alpha={self.alpha}"
            )
        return m ** (1.0 / r)

    def moment_envelope(self):
        """Exact Bernstein-type pair (B, L) with E||eps||^m <= m!/2 B^2 L^(m-2),
        or None when no closed form is available (fit empirically instead)."""
        if self.kind == "bounded":
            return (self.radius, self.radius / 3.0)
        if self.kind == "subexp":
            return (math.sqrt(2.0) * self.radius, self.radius)
        if self.kind == "constant":
            r = float(np.linalg.norm(self.vector))
            return (r, r / 3.0)
        return None


# ---------------------------------------------------------------------------
# Young functions and Orlicz (Luxemburg) norms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class YoungFunction:
    """A convex nondecreasing function with psi(0)=0 and psi(inf)=inf.

    Two families are supported: ``psi1`` with psi(x) = exp(x) - 1
    (sub-exponential Orlicz space) and ``power`` with psi(x) = x^r, r >= 1.
    """

    kind: str
    r: float | None = None

    def __post_init__(self):
        if self.kind == "power":
            if self.r is None or self.r < 1:
                raise ValueError("power Young function needs r >= 1")
        elif self.kind != "psi1":
            raise ValueError(f"unknown Young function kind {self.kind!r}")

    @classmethod
    def psi1(cls):
        return cls("psi1")

    @classmethod
    def power(cls, r):
        return cls("power", float(r))

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "psi1":
            with np.errstate(over="ignore"):
                return np.expm1(x)
        return x**self.r

    def inverse_at_one(self):
        """The value t with psi(t) = 1 (used by the constant-radius fast path)."""
        return math.log(2.0) if self.kind == "psi1" else 1.0

    def label(self):
        return "psi1" if self.kind == "psi1" else f"power({self.r:g})"


def _as_norms(samples):
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim == 2:
        x = np.linalg.norm(x, axis=1)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("need a nonempty 1-D array of norms or 2-D array of vectors")
    if not np.all(np.isfinite(x)):
        raise DivergenceError("non-finite sample norms")
    return x


def lr_norm(samples, r):
    """Empirical L^r norm (mean of ||Z||^r)^(1/r)."""
    if r < 1:
        raise ValueError("r must be >= 1")
    x = _as_norms(samples)
    top = float(np.max(x))
    if top == 0.0:
        return 0.0
    # scale by the max so x^r cannot overflow for large r
    return top * float(np.mean((x / top) ** r)) ** (1.0 / r)


def luxemburg_norm(samples, psi, tol=1e-8):
    """Luxemburg norm inf{c > 0 : E psi(||Z||/c) <= 1} from samples.

    The mean of psi(x/c) is strictly decreasing in c, so the infimum is the
    root of mean psi(x/c) - 1, found by doubling/halving a bracket and then
    bisecting to ``tol`` relative width.  Constant-radius inputs take the
    closed-form path c0 / psi^{-1}(1).
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    x = _as_norms(samples)
    top = float(np.max(x))
    if top == 0.0:
        return 0.0
    if float(np.min(x)) == top:
        return top / psi.inverse_at_one()

    def excess(c):
        with np.errstate(over="ignore"):
            vals = psi(x / c)
            mean = float(np.mean(vals))
        return mean - 1.0

    # bracket: grow/shrink by doubling until the sign changes
    hi = top
    for _ in range(200):
        if excess(hi) <= 0.0:
            break
        hi *= 2.0
    else:
        raise DivergenceError("could not bracket the Luxemburg norm from above")
    lo = hi / 2.0
    for _ in range(200):
        if excess(lo) > 0.0:
            break
        hi = lo
        lo /= 2.0
        if lo == 0.0:
            return 0.0
    while hi - lo > tol * lo:
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def envelope_holds(moments, B, L, slack=0.0):
    """Check E||Z||^m <= m!/2 * B^2 * L^(m-2) for moments[m] at m = 2, 3, ...

    ``moments`` maps the order m to the empirical moment.  A relative
    ``slack`` loosens the comparison for floating-point headroom.
    """
    for m, mu in moments.items():
        bound = math.gamma(m + 1) / 2.0 * B * B * L ** (m - 2)
        if mu > bound * (1.0 + slack):
            return False
    return True


def fit_moment_envelope(samples, m_max=8):
    """Smallest (L, then B) with E||Z||^m <= m!/2 B^2 L^(m-2) for m = 2..m_max.

    B is pinned by the m = 2 case (B = sqrt(mu_2), where the envelope is
    tight), then L is the smallest value making every higher moment fit; the
    exact minimizer is max over m of (2 mu_m / (m! B^2))^(1/(m-2)).
    """
    if m_max < 3:
        raise ValueError("m_max must be >= 3")
    x = _as_norms(samples)
    top = float(np.max(x))
    if top == 0.0:
        return (0.0, 1.0)
    moments = {m: top**m * float(np.mean((x / top) ** m)) for m in range(2, m_max + 1)}
    if not all(math.isfinite(v) for v in moments.values()):
        raise DivergenceError("empirical moments are not finite")
    B = math.sqrt(moments[2])
    L = 0.0
    for m in range(3, m_max + 1):
        need = (2.0 * moments[m] / (math.gamma(m + 1) * B * B)) ** (1.0 / (m - 2))
        L = max(L, need)
    L *= 1.0 + 1e-12  # float headroom so the returned pair verifies
    assert envelope_holds(moments, B, L, slack=1e-9)
    return (B, L)
