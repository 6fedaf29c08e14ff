"""Experiment configuration: a single JSON document, validated with field paths.

Matrices appear as row-major nested lists.  Validation errors name the
offending field (e.g. ``coefficients.rho``) so CLI users can fix configs
without reading tracebacks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .hilbert import LinOp
from .innovations import DirectionLaw, InnovationModel, YoungFunction
from .linproc import CoeffSeq

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "parse_config"]


class ConfigError(ValueError):
    """Invalid experiment configuration; message starts with the field path."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


def _get(obj, path, key, kind, default=..., required_msg="is required"):
    full = f"{path}.{key}" if path else key
    if key not in obj:
        if default is ...:
            raise ConfigError(full, required_msg)
        return default
    val = obj[key]
    if kind is float and isinstance(val, int) and not isinstance(val, bool):
        val = float(val)
    if kind is not None and not isinstance(val, kind):
        raise ConfigError(full, f"expected {getattr(kind, '__name__', kind)}, got {type(val).__name__}")
    return val


def _matrix(raw, path, dim):
    try:
        mat = np.asarray(raw, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ConfigError(path, f"not a numeric matrix: {exc}") from None
    if mat.shape != (dim, dim):
        raise ConfigError(path, f"expected a {dim}x{dim} matrix, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise ConfigError(path, "matrix entries must be finite")
    return mat


@dataclass
class ExperimentConfig:
    dimension: int
    coefficients: dict
    innovations: dict
    tau: float
    n_grid: list[int]
    replicates: int
    reference_size: int
    seed: int
    kde_bandwidth: float | None = None
    orlicz: dict | None = None
    identity_tolerance: float = 1e-9
    confidence: float = 0.01
    verify_random_configs: int = 100
    verify_inequality_spaces: int = 1000
    verify_sup_bound_replicates: int = 10_000
    out_dir: str | None = None
    injected_points: list | None = None

    def build_coeffs(self) -> CoeffSeq:
        spec = self.coefficients
        d = self.dimension
        if spec["kind"] == "geometric":
            base = LinOp(_matrix(spec["base"], "coefficients.base", d))
            return CoeffSeq.geometric(base, spec["rho"], spec["j_max"])
        ops = {
            int(term["j"]): _matrix(term["matrix"], f"coefficients.terms[{i}].matrix", d)
            for i, term in enumerate(spec["terms"])
        }
        return CoeffSeq(ops, dim=d)

    def build_model(self) -> InnovationModel:
        spec = self.innovations
        d = self.dimension
        kind = spec["kind"]
        direction = spec.get("_direction")
        if kind == "bounded":
            return InnovationModel.bounded(d, spec["radius"], direction)
        if kind == "subexp":
            return InnovationModel.sub_exponential(d, spec["scale"], direction)
        if kind == "heavy":
            return InnovationModel.heavy_tail(d, spec["alpha"], spec.get("scale", 1.0), direction)
        if kind == "gaussian":
            return InnovationModel.gaussian(d, spec.get("scale", 1.0))
        return InnovationModel.constant(spec["vector"])

    def build_psi(self) -> YoungFunction | None:
        if self.orlicz is None:
            return None
        if self.orlicz["kind"] == "psi1":
            return YoungFunction.psi1()
        return YoungFunction.power(self.orlicz["r"])


def parse_config(doc) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "config must be a JSON object")

    dim = _get(doc, "", "dimension", int)
    if dim < 1:
        raise ConfigError("dimension", f"must be >= 1, got {dim}")

    coeff = _get(doc, "", "coefficients", dict)
    ckind = _get(coeff, "coefficients", "kind", str)
    if ckind == "geometric":
        rho = _get(coeff, "coefficients", "rho", float)
        if not 0.0 < rho < 1.0:
            raise ConfigError("coefficients.rho", f"must lie in (0, 1), got {rho}")
        j_max = _get(coeff, "coefficients", "j_max", int)
        if j_max < 0:
            raise ConfigError("coefficients.j_max", "must be >= 0")
        _matrix(_get(coeff, "coefficients", "base", None), "coefficients.base", dim)
        coeff = {"kind": "geometric", "rho": rho, "j_max": j_max, "base": coeff["base"]}
    elif ckind == "explicit":
        terms = _get(coeff, "coefficients", "terms", list)
        if not terms:
            raise ConfigError("coefficients.terms", "must list at least one coefficient")
        for i, term in enumerate(terms):
            if not isinstance(term, dict) or "j" not in term or "matrix" not in term:
                raise ConfigError(f"coefficients.terms[{i}]", "needs fields 'j' and 'matrix'")
            _matrix(term["matrix"], f"coefficients.terms[{i}].matrix", dim)
        coeff = {"kind": "explicit", "terms": terms}
    else:
        raise ConfigError("coefficients.kind", f"unknown kind {ckind!r} (geometric | explicit)")

    innov_raw = _get(doc, "", "innovations", dict)
    ikind = _get(innov_raw, "innovations", "kind", str)
    innov = {"kind": ikind}
    if ikind == "bounded":
        innov["radius"] = _get(innov_raw, "innovations", "radius", float)
        if innov["radius"] < 0:
            raise ConfigError("innovations.radius", "must be >= 0")
    elif ikind == "subexp":
        innov["scale"] = _get(innov_raw, "innovations", "scale", float)
        if innov["scale"] <= 0:
            raise ConfigError("innovations.scale", "must be > 0")
    elif ikind == "heavy":
        innov["alpha"] = _get(innov_raw, "innovations", "alpha", float)
        innov["scale"] = _get(innov_raw, "innovations", "scale", float, default=1.0)
        if innov["alpha"] <= 2:
            raise ConfigError("innovations.alpha", "must exceed 2 for a finite covariance")
    elif ikind == "gaussian":
        innov["scale"] = _get(innov_raw, "innovations", "scale", float, default=1.0)
    elif ikind == "constant":
        vec = _get(innov_raw, "innovations", "vector", list)
        if len(vec) != dim:
            raise ConfigError("innovations.vector", f"expected {dim} coordinates")
        innov["vector"] = [float(v) for v in vec]
    else:
        raise ConfigError(
            "innovations.kind",
            f"unknown kind {ikind!r} (bounded | subexp | heavy | gaussian | constant)",
        )
    if "direction" in innov_raw:
        dspec = _get(innov_raw, "innovations", "direction", dict)
        dkind = _get(dspec, "innovations.direction", "kind", str)
        if dkind not in ("axes", "sphere", "fixed"):
            raise ConfigError("innovations.direction.kind", f"unknown kind {dkind!r}")
        vec = None
        if dkind == "fixed":
            vec = _get(dspec, "innovations.direction", "vector", list)
            if len(vec) != dim:
                raise ConfigError("innovations.direction.vector", f"expected {dim} coordinates")
        innov["_direction"] = DirectionLaw(dkind, tuple(vec) if vec else None)

    tau = _get(doc, "", "tau", float, default=1.0)
    if tau < 0:
        raise ConfigError("tau", "must be >= 0")

    n_grid = _get(doc, "", "n_grid", list)
    if not n_grid:
        raise ConfigError("n_grid", "must list at least one horizon")
    for i, n in enumerate(n_grid):
        if not isinstance(n, int) or n < 1:
            raise ConfigError(f"n_grid[{i}]", f"horizons must be integers >= 1, got {n!r}")
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ConfigError("n_grid", "horizons must be strictly increasing")

    replicates = _get(doc, "", "replicates", int)
    if replicates < 1:
        raise ConfigError("replicates", "must be >= 1")
    reference_size = _get(doc, "", "reference_size", int, default=1_000_000)
    if reference_size < 1:
        raise ConfigError("reference_size", "must be >= 1")

    seed = _get(doc, "", "seed", int)
    if not 0 <= seed < 2**64:
        raise ConfigError("seed", "must be an unsigned 64-bit integer")

    bw = _get(doc, "", "kde_bandwidth", float, default=None)
    if bw is not None and bw <= 0:
        raise ConfigError("kde_bandwidth", "must be > 0 when given")

    orlicz = _get(doc, "", "orlicz", dict, default=None)
    if orlicz is not None:
        okind = _get(orlicz, "orlicz", "kind", str)
        if okind == "power":
            r = _get(orlicz, "orlicz", "r", float)
            if r < 1:
                raise ConfigError("orlicz.r", "must be >= 1")
            orlicz = {"kind": "power", "r": r}
        elif okind == "psi1":
            orlicz = {"kind": "psi1"}
        else:
            raise ConfigError("orlicz.kind", f"unknown kind {okind!r} (psi1 | power)")
        if ikind == "heavy" and orlicz["kind"] == "power" and innov["alpha"] <= orlicz["r"]:
            raise ConfigError(
                "innovations.alpha",
                f"heavy-tail index {innov['alpha']} must exceed the requested "
                f"moment order r={orlicz['r']}",
            )

    tols = _get(doc, "", "tolerances", dict, default={})
    identity_tol = _get(tols, "tolerances", "identity", float, default=1e-9)
    confidence = _get(tols, "tolerances", "confidence", float, default=0.01)
    if not 0 < confidence < 1:
        raise ConfigError("tolerances.confidence", "must lie in (0, 1)")

    ver = _get(doc, "", "verify", dict, default={})
    v_rand = _get(ver, "verify", "random_configs", int, default=100)
    v_ineq = _get(ver, "verify", "inequality_spaces", int, default=1000)
    v_sup = _get(ver, "verify", "sup_bound_replicates", int, default=10_000)

    injected = _get(doc, "", "injected_points", list, default=None)
    if injected is not None:
        for i, pt in enumerate(injected):
            if not isinstance(pt, dict) or "n" not in pt or "delta_hat" not in pt:
                raise ConfigError(
                    f"injected_points[{i}]", "needs fields 'n' and 'delta_hat'"
                )

    return ExperimentConfig(
        dimension=dim,
        coefficients=coeff,
        innovations=innov,
        tau=tau,
        n_grid=list(n_grid),
        replicates=replicates,
        reference_size=reference_size,
        seed=seed,
        kde_bandwidth=bw,
        orlicz=orlicz,
        identity_tolerance=identity_tol,
        confidence=confidence,
        verify_random_configs=v_rand,
        verify_inequality_spaces=v_ineq,
        verify_sup_bound_replicates=v_sup,
        out_dir=_get(doc, "", "out_dir", str, default=None),
        injected_points=injected,
    )


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError("<file>", f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}") from None
    return parse_config(doc)
