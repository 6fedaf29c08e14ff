"""Normal-approximation rate measurement and bound verification.

The central quantity is the sup-distance between the law of the normalized
window sum's norm and the norm law of the limit Gaussian, estimated as a
two-sample statistic against a large fixed reference sample.  Around it:

* the rate-transfer function ``phi`` that converts an Orlicz-norm scale of
  the correction term into a CDF-distance increment;
* assembled upper bounds for the bounded-innovation and Orlicz regimes,
  with the i.i.d. baseline distance standing in for its nonconstructive
  constant;
* exact-enumeration and Monte Carlo checkers for the supporting
  inequalities (shift inequality on norms, Bernstein-type tail bound,
  block-sum norm growth);
* a log-log regression utility for fitted convergence rates with a noise
  floor that excludes statistically unresolved points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .empirical import EmpiricalLaw, dkw_noise_floor, sup_distance
from .gaussian_limit import (
    LimitSpec,
    density_bound,
    limit_covariance,
    sample_limit_norms,
    silverman_bandwidth,
)
from .innovations import InnovationModel, YoungFunction, luxemburg_norm, lr_norm
from .linproc import batch_norms

__all__ = [
    "InsufficientSignalError",
    "inverse_h",
    "phi",
    "orlicz_rate_bound",
    "bounded_rate_bound",
    "ReferenceLaw",
    "build_reference",
    "BoundReport",
    "measure_delta_n",
    "CrucialInequalityReport",
    "crucial_inequality_check",
    "TailBoundReport",
    "tail_bound_check",
    "BlockNormReport",
    "block_norm_bounds_check",
    "RateFit",
    "rate_fit",
]


class InsufficientSignalError(RuntimeError):
    """Too few measured points rise above the Monte Carlo noise floor."""


# ---------------------------------------------------------------------------
# The rate-transfer function phi
# ---------------------------------------------------------------------------


def inverse_h(psi: YoungFunction, y, *, rel_tol=1e-14, max_iter=200):
    """Solve t * psi(t) = y for t > 0 by bracketing bisection.

    t -> t * psi(t) is continuous and strictly increasing for both Young
    families, so the root is unique.  The bracket starts at [1e-12, 1] and
    doubles upward until it straddles y.
    """
    if y <= 0:
        raise ValueError("inverse_h needs y > 0")

    def h(t):
        with np.errstate(over="ignore"):
            return t * float(psi(t))

    lo, hi = 1e-12, 1.0
    for _ in range(max_iter):
        if h(hi) >= y:
            break
        lo = hi
        hi *= 2.0
    else:
        raise ValueError(f"could not bracket inverse_h target {y!r}")
    while h(lo) > y and lo > 0.0:
        hi = lo
        lo /= 2.0
    for _ in range(max_iter):
        if hi - lo <= rel_tol * lo:
            break
        mid = 0.5 * (lo + hi)
        if h(mid) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def phi(psi: YoungFunction, x):
    """The rate transfer x -> x * t(x) where t(x) solves t * psi(t) = 1/x.

    For the power family this equals x^(r/(r+1)); for psi1 it behaves like
    x * log(1/x) for small x (the measured ratio to x*log(1+1/x) stays just
    below 1).  Computed by the generic inversion for both families; the
    closed forms serve as test oracles.
    """
    if x <= 0:
        raise ValueError("phi is defined for x > 0")
    return x * inverse_h(psi, 1.0 / x)


def orlicz_rate_bound(delta_main, density_bound_value, orlicz_correction, psi, n):
    """Distance bound: baseline plus phi of the scaled correction Orlicz norm."""
    for name, v in (
        ("delta_main", delta_main),
        ("density_bound_value", density_bound_value),
        ("orlicz_correction", orlicz_correction),
    ):
        if v < 0:
            raise ValueError(f"{name} must be >= 0")
    if orlicz_correction == 0.0:
        return delta_main
    return delta_main + phi(psi, density_bound_value * orlicz_correction / math.sqrt(n))


def bounded_rate_bound(delta_main, density_bound_value, sup_innov, weighted_sum_1, n):
    """Distance bound for bounded innovations:
    baseline + 14 * c(N) * sup||eps|| * sum|j|*||a_j|| / sqrt(n)."""
    return delta_main + 14.0 * density_bound_value * sup_innov * weighted_sum_1 / math.sqrt(n)


# ---------------------------------------------------------------------------
# Reference law and per-horizon measurement
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReferenceLaw:
    """Large fixed sample of the limit norm, reused across horizons."""

    law: EmpiricalLaw
    density_bound: float
    bandwidth: float
    spec: LimitSpec

    @property
    def size(self):
        return self.law.count


def build_reference(coeffs, model, size, seed, bandwidth=None) -> ReferenceLaw:
    spec = limit_covariance(coeffs, model.covariance())
    law = sample_limit_norms(spec, size, seed)
    bw = bandwidth if bandwidth is not None else silverman_bandwidth(law)
    if bw > 0 and law.samples[0] != law.samples[-1]:
        dens = density_bound(law, bw)
    else:
        dens = math.inf
    return ReferenceLaw(law, dens, bw, spec)


@dataclass(frozen=True)
class BoundReport:
    """Everything measured at one horizon, with the assembled bounds."""

    n: int
    delta_hat: float
    delta_main: float
    mc_error: float
    confidence: float
    replicates: int
    reference_size: int
    density_bound: float
    weighted_sum_1: float
    sup_innov: float | None = None
    bound_sup: float | None = None
    c1_hat: float | None = None
    orlicz_qr: float | None = None
    psi: str | None = None
    bound_orlicz: float | None = None

    @property
    def theorem_bound(self):
        """The applicable assembled bound (bounded regime preferred)."""
        if self.bound_sup is not None:
            return self.bound_sup
        return self.bound_orlicz

    @property
    def above_noise_floor(self):
        return self.delta_hat > self.mc_error


def measure_delta_n(
    coeffs,
    model,
    n,
    replicates,
    reference: ReferenceLaw,
    seed,
    *,
    psi: YoungFunction | None = None,
    confidence=0.01,
    threads=1,
) -> BoundReport:
    """Estimate the normalized-sum distance at one horizon.

    Simulates ``replicates`` independent window sums (streams keyed by
    replicate index), forms the empirical law of ||S_n||/sqrt(n), and takes
    the sup-distance to the reference.  The baseline distance of the
    i.i.d.-sum term is measured on the same draws, and the correction term's
    Orlicz norm is estimated from the same batch when ``psi`` is given.
    """
    keys = rng.derive_key(seed, rng.STREAM_INNOVATIONS, n, np.arange(replicates))
    res = batch_norms(coeffs, model, n, keys, threads=threads)
    law_total = EmpiricalLaw.from_samples(res.scaled_total)
    law_main = EmpiricalLaw.from_samples(res.scaled_main)
    delta_hat = sup_distance(law_total, reference.law)
    delta_main = sup_distance(law_main, reference.law)
    mc = dkw_noise_floor(replicates, reference.size, confidence)
    w1 = coeffs.weighted_norm_sum(1.0)

    sup_innov = model.sup_norm()
    bound_sup = c1_hat = None
    if math.isfinite(sup_innov):
        bound_sup = bounded_rate_bound(
            delta_main, reference.density_bound, sup_innov, w1, n
        )
        c1_hat = delta_main * math.sqrt(n) + 14.0 * reference.density_bound * sup_innov * w1
    else:
        sup_innov = None

    orlicz_qr = psi_label = bound_orlicz = None
    if psi is not None:
        orlicz_qr = luxemburg_norm(res.correction, psi)
        psi_label = psi.label()
        bound_orlicz = orlicz_rate_bound(
            delta_main, reference.density_bound, orlicz_qr, psi, n
        )

    return BoundReport(
        n=n,
        delta_hat=delta_hat,
        delta_main=delta_main,
        mc_error=mc,
        confidence=confidence,
        replicates=replicates,
        reference_size=reference.size,
        density_bound=reference.density_bound,
        weighted_sum_1=w1,
        sup_innov=sup_innov,
        bound_sup=bound_sup,
        c1_hat=c1_hat,
        orlicz_qr=orlicz_qr,
        psi=psi_label,
        bound_orlicz=bound_orlicz,
    )


# ---------------------------------------------------------------------------
# Inequality checkers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CrucialInequalityReport:
    lhs: float
    rhs: float
    threshold: float
    shift: float

    @property
    def margin(self):
        return self.rhs - self.lhs

    @property
    def passed(self):
        return self.margin >= -1e-12


def crucial_inequality_check(atoms, threshold, shift) -> CrucialInequalityReport:
    """Exact enumeration of P(||U+V|| <= t) <= P(||U|| <= t+s) + P(||V|| >= s).

    ``atoms`` is a finite discrete space: (probability, ||U||, ||V||, ||U+V||)
    per atom, the three norms satisfying the triangle inequality.  All three
    probabilities are computed by direct summation.
    """
    if threshold <= 0 or shift <= 0:
        raise ValueError("threshold and shift must be > 0")
    atoms = list(atoms)
    total = math.fsum(p for p, *_ in atoms)
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"atom probabilities sum to {total!r}, expected 1")
    for p, u, v, uv in atoms:
        if p < 0:
            raise ValueError("atom probabilities must be >= 0")
        if uv > u + v + 1e-12 or uv < abs(u - v) - 1e-12:
            raise ValueError(
                f"norms (|U|={u}, |V|={v}, |U+V|={uv}) violate the triangle inequality"
            )
    lhs = math.fsum(p for p, _, _, uv in atoms if uv <= threshold)
    rhs = math.fsum(p for p, u, _, _ in atoms if u <= threshold + shift) + math.fsum(
        p for p, _, v, _ in atoms if v >= shift
    )
    return CrucialInequalityReport(lhs, rhs, threshold, shift)


def _block_sum_norms(model, block_length, keys, chunk_target=4_000_000):
    """||sum of innovations over [1, block_length]||, one value per stream key."""
    m = len(keys)
    out = np.empty(m)
    idx = np.arange(1, block_length + 1, dtype=np.int64)
    chunk = max(1, int(chunk_target // max(block_length * model.dim, 1)))
    for start in range(0, m, chunk):
        stop = min(start + chunk, m)
        sums = model.sample_at(idx, keys[start:stop, None]).sum(axis=1)
        out[start:stop] = np.linalg.norm(sums, axis=1)
    return out


@dataclass(frozen=True)
class TailBoundReport:
    block_length: int
    replicates: int
    xs: np.ndarray
    empirical: np.ndarray
    bounds: np.ndarray
    slack: np.ndarray

    @property
    def passed(self):
        return bool(np.all(self.empirical <= self.bounds + self.slack))


def tail_bound_check(
    model, block_length, xs, replicates, seed, *, envelope=None
) -> TailBoundReport:
    """Monte Carlo check of the Bernstein-type block-sum tail bound.

    Compares the empirical frequency of ||sum of a block of innovations||
    exceeding each x against exp(-x^2 / (2 q B^2 + 2 x L)) for the model's
    moment-envelope pair (B, L); three binomial standard errors of slack.
    """
    pair = envelope if envelope is not None else model.moment_envelope()
    if pair is None:
        raise ValueError("model has no moment envelope; fit one empirically first")
    b_const, l_const = pair
    keys = rng.derive_key(seed, rng.STREAM_TAIL, block_length, np.arange(replicates))
    norms = _block_sum_norms(model, block_length, keys)
    xs = np.asarray(xs, dtype=np.float64)
    emp = np.array([float(np.mean(norms >= x)) for x in xs])
    with np.errstate(divide="ignore"):
        expo = np.where(
            xs > 0,
            -(xs**2) / (2.0 * block_length * b_const**2 + 2.0 * xs * l_const),
            0.0,
        )
    bounds = np.exp(expo)
    slack = 3.0 * np.sqrt(emp * (1.0 - emp) / replicates)
    return TailBoundReport(block_length, replicates, xs, emp, bounds, slack)


@dataclass(frozen=True)
class BlockNormReport:
    lengths: np.ndarray
    norms: np.ndarray
    fitted_constant: float
    slope: float

    def slope_within(self, target=0.5, tol=0.1):
        return abs(self.slope - target) <= tol


def block_norm_bounds_check(
    model, lengths, psi: YoungFunction, replicates, seed
) -> BlockNormReport:
    """Estimate block-sum norms over a grid of lengths, fit the constant.

    For the psi1 family the inequality is ||sum||_psi1 <= K (L + B sqrt(q));
    for the power family with exponent r it is ||sum||_r <= 2 K r ||eps||_r
    sqrt(q).  K is the smallest constant making every tested length satisfy
    the inequality, and the slope of log norm vs log length is reported
    (the square-root growth shows up as slope 1/2).
    """
    lengths = np.asarray(sorted(lengths), dtype=np.int64)
    norms = np.empty(len(lengths), dtype=np.float64)
    for i, q in enumerate(lengths):
        keys = rng.derive_key(seed, rng.STREAM_BLOCKS, int(q), np.arange(replicates))
        block = _block_sum_norms(model, int(q), keys)
        if psi.kind == "psi1":
            norms[i] = luxemburg_norm(block, psi) if block.max(initial=0.0) > 0 else 0.0
        else:
            norms[i] = lr_norm(block, psi.r)

    if psi.kind == "psi1":
        pair = model.moment_envelope()
        if pair is None:
            from .innovations import fit_moment_envelope

            one = model.sample_at(
                np.arange(replicates), rng.derive_key(seed, rng.STREAM_BLOCKS, 0)
            )
            pair = fit_moment_envelope(np.linalg.norm(one, axis=1))
        b_const, l_const = pair
        denom = l_const + b_const * np.sqrt(lengths)
    else:
        eps_r = model.lr_norm_analytic(psi.r)
        denom = 2.0 * psi.r * eps_r * np.sqrt(lengths)

    with np.errstate(invalid="ignore", divide="ignore"):
        ratios = np.where(denom > 0, norms / denom, 0.0)
    fitted_k = float(np.max(ratios, initial=0.0))

    positive = norms > 0
    if positive.sum() >= 2:
        slope = float(
            np.polyfit(np.log(lengths[positive]), np.log(norms[positive]), 1)[0]
        )
    else:
        slope = math.nan
    return BlockNormReport(lengths, norms, fitted_k, slope)


# ---------------------------------------------------------------------------
# Convergence-rate regression
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    stderr: float
    used_n: tuple[int, ...]
    excluded_n: tuple[int, ...]
    log_over_sqrt_slope: float

    def as_dict(self):
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "stderr": self.stderr,
            "used_n": list(self.used_n),
            "excluded_n": list(self.excluded_n),
            "log_over_sqrt_slope": self.log_over_sqrt_slope,
        }


def _ols(x, y):
    n = len(x)
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = ym - slope * xm
    if n > 2:
        resid = y - (intercept + slope * x)
        stderr = math.sqrt(float(np.sum(resid**2)) / (n - 2) / sxx)
    else:
        stderr = 0.0
    return slope, float(intercept), stderr


def rate_fit(points) -> RateFit:
    """OLS of log delta on log n over points that clear the noise floor.

    ``points`` is a sequence of (n, delta_hat, mc_error); points with
    delta_hat <= mc_error are excluded and reported.  A second regression
    against log(log n / sqrt(n)) is fitted for the sub-exponential regime,
    where a slope near 1 indicates that functional form.
    """
    points = [(int(n), float(d), float(e)) for n, d, e in points]
    used = [(n, d) for n, d, e in points if d > e and d > 0]
    excluded = tuple(n for n, d, e in points if not (d > e and d > 0))
    if len(used) < 4:
        raise InsufficientSignalError(
            f"only {len(used)} points exceed the noise floor; need at least 4 "
            "(raise the replicate count or lower the horizons)"
        )
    ns = np.array([n for n, _ in used], dtype=np.float64)
    ds = np.log(np.array([d for _, d in used]))
    slope, intercept, stderr = _ols(np.log(ns), ds)
    ls_slope, _, _ = _ols(np.log(np.log(ns) / np.sqrt(ns)), ds)
    return RateFit(slope, intercept, stderr, tuple(int(n) for n in ns), excluded, ls_slope)
