"""Experiment orchestration CLI.

Subcommands:
  verify — run the exact-identity and inequality suites for a config
  delta  — measure the normalized-sum distance at each configured horizon
  rates  — delta plus convergence-rate regression, CSV and SVG outputs
  plot   — re-render rates.svg from an existing points.csv

Exit codes: 0 pass, 1 check failure, 2 configuration error, 3 insufficient
signal.  Results depend only on (config, seed); --threads changes speed,
never output bytes.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import rng
from .berry_esseen import (
    BoundReport,
    InsufficientSignalError,
    build_reference,
    crucial_inequality_check,
    measure_delta_n,
    rate_fit,
)
from .config import ConfigError, load_config
from .innovations import InnovationModel
from .linproc import Realization, outer_via_blocks, partial_sum, sup_norm_bound_check
from .report import report_json, read_points_csv, write_points_csv
from .svgplot import write_rates_svg

__all__ = ["main"]

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NO_SIGNAL = 3


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _decomposition_checks(cfg, coeffs, model, checks):
    tol = cfg.identity_tolerance
    for n in cfg.n_grid:
        for rep in range(3):
            key = rng.derive_key(cfg.seed, rng.STREAM_VERIFY, n, rep)
            dec = partial_sum(coeffs, model, n, key)
            scale = 1.0 + float(np.linalg.norm(dec.total))
            real = Realization.draw(model, 1 - coeffs.j_max - n, n + coeffs.j_max, key)
            block_res = float(np.linalg.norm(outer_via_blocks(coeffs, real, n) - dec.outer))
            for name, res in (
                ("decomposition_identity", dec.identity_residual()),
                ("beyond_window_block_form", block_res),
                ("correction_split", dec.split_residual()),
            ):
                checks.append(
                    {
                        "check": name,
                        "n": n,
                        "replicate": rep,
                        "residual": res / scale,
                        "tolerance": tol,
                        "pass": res / scale <= tol,
                    }
                )


def _randomized_decomposition_checks(cfg, checks):
    tol = cfg.identity_tolerance
    gen = np.random.default_rng(cfg.seed)
    worst = 0.0
    for case in range(cfg.verify_random_configs):
        d = int(gen.integers(1, 9))
        j_max = int(gen.integers(1, 17))
        n = int(gen.integers(1, 129))
        kind = ("bounded", "subexp", "heavy")[case % 3]
        if kind == "bounded":
            model = InnovationModel.bounded(d, float(gen.uniform(0.1, 2.0)))
        elif kind == "subexp":
            model = InnovationModel.sub_exponential(d, float(gen.uniform(0.2, 1.5)))
        else:
            model = InnovationModel.heavy_tail(d, alpha=float(gen.uniform(3.5, 8.0)))
        offsets = gen.choice(
            np.arange(-j_max, j_max + 1), size=int(gen.integers(1, 2 * j_max + 2)), replace=False
        )
        from .linproc import CoeffSeq

        coeffs = CoeffSeq(
            {int(j): gen.normal(size=(d, d)) * gen.uniform(0.1, 1.0) for j in offsets}, dim=d
        )
        key = rng.derive_key(cfg.seed, rng.STREAM_VERIFY, 0xABC, case)
        dec = partial_sum(coeffs, model, n, key)
        scale = 1.0 + float(np.linalg.norm(dec.total))
        res = max(dec.identity_residual(), dec.split_residual()) / scale
        real = Realization.draw(model, 1 - coeffs.j_max - n, n + coeffs.j_max, key)
        res = max(res, float(np.linalg.norm(outer_via_blocks(coeffs, real, n) - dec.outer)) / scale)
        worst = max(worst, res)
    checks.append(
        {
            "check": "randomized_decompositions",
            "cases": cfg.verify_random_configs,
            "residual": worst,
            "tolerance": tol,
            "pass": worst <= tol,
        }
    )


def _inequality_checks(cfg, checks):
    gen = np.random.default_rng(rng.derive_key(cfg.seed, rng.STREAM_INEQUALITY).item())
    worst = math.inf
    for _ in range(cfg.verify_inequality_spaces):
        k = int(gen.integers(1, 9))
        probs = gen.uniform(0.05, 1.0, size=k)
        probs /= probs.sum()
        atoms = []
        for p in probs:
            u = float(gen.uniform(0.0, 3.0))
            v = float(gen.uniform(0.0, 3.0))
            uv = float(gen.uniform(abs(u - v), u + v))
            atoms.append((float(p), u, v, uv))
        rep = crucial_inequality_check(
            atoms, threshold=float(gen.uniform(0.1, 4.0)), shift=float(gen.uniform(0.05, 2.0))
        )
        worst = min(worst, rep.margin)
    checks.append(
        {
            "check": "shift_inequality_enumeration",
            "cases": cfg.verify_inequality_spaces,
            "margin": worst,
            "tolerance": -1e-12,
            "pass": worst >= -1e-12,
        }
    )


def _sup_bound_checks(cfg, coeffs, model, threads, checks):
    if not math.isfinite(model.sup_norm()):
        return
    for n in cfg.n_grid:
        rep = sup_norm_bound_check(
            coeffs, model, n, cfg.verify_sup_bound_replicates, cfg.seed, threads=threads
        )
        checks.append(
            {
                "check": "correction_sup_bound",
                "n": n,
                "max_observed": rep.max_observed,
                "bound": rep.bound,
                "pass": rep.passed,
            }
        )


def run_verify(cfg, threads=1):
    coeffs = cfg.build_coeffs()
    model = cfg.build_model()
    checks = []
    _decomposition_checks(cfg, coeffs, model, checks)
    _randomized_decomposition_checks(cfg, checks)
    _inequality_checks(cfg, checks)
    _sup_bound_checks(cfg, coeffs, model, threads, checks)
    passed = all(c["pass"] for c in checks)
    return {"kind": "verify", "passed": passed, "checks": checks}


# ---------------------------------------------------------------------------
# delta / rates
# ---------------------------------------------------------------------------


def _measure_all(cfg, threads):
    coeffs = cfg.build_coeffs()
    model = cfg.build_model()
    psi = cfg.build_psi()
    reference = build_reference(
        coeffs, model, cfg.reference_size, cfg.seed, bandwidth=cfg.kde_bandwidth
    )
    reports = [
        measure_delta_n(
            coeffs,
            model,
            n,
            cfg.replicates,
            reference,
            cfg.seed,
            psi=psi,
            confidence=cfg.confidence,
            threads=threads,
        )
        for n in cfg.n_grid
    ]
    return reference, reports


def _injected_reports(cfg):
    reports = []
    for pt in cfg.injected_points:
        reports.append(
            BoundReport(
                n=int(pt["n"]),
                delta_hat=float(pt["delta_hat"]),
                delta_main=float(pt.get("delta_main", 0.0)),
                mc_error=float(pt.get("mc_error", 0.0)),
                confidence=cfg.confidence,
                replicates=0,
                reference_size=0,
                density_bound=0.0,
                weighted_sum_1=0.0,
            )
        )
    return reports


def _report_points(reports):
    keys = (
        "n delta_hat delta_main mc_error density_bound weighted_sum_1 "
        "sup_innov orlicz_qr psi c1_hat bound_sup bound_orlicz replicates "
        "reference_size confidence"
    ).split()
    return [{k: getattr(r, k) for k in keys} for r in reports]


def run_delta(cfg, out_dir, threads=1):
    if cfg.replicates < 1000:
        raise ConfigError("replicates", "distance studies need replicates >= 1000")
    _, reports = _measure_all(cfg, threads)
    write_points_csv(out_dir / "points.csv", reports)
    return {"kind": "delta", "passed": True, "points": _report_points(reports)}


def run_rates(cfg, out_dir, threads=1):
    if len(cfg.n_grid) < 4 and not cfg.injected_points:
        raise ConfigError("n_grid", "rate studies need at least 4 horizons")
    if cfg.injected_points:
        reports = _injected_reports(cfg)
    else:
        if cfg.replicates < 1000:
            raise ConfigError("replicates", "distance studies need replicates >= 1000")
        _, reports = _measure_all(cfg, threads)
    # write the measured points before fitting, so an insufficient-signal
    # exit still leaves the data on disk
    write_points_csv(out_dir / "points.csv", reports)
    rows = read_points_csv(out_dir / "points.csv")
    write_rates_svg(out_dir / "rates.svg", rows)
    fit = rate_fit([(r.n, r.delta_hat, r.mc_error) for r in reports])
    return {
        "kind": "rates",
        "passed": True,
        "fit": fit.as_dict(),
        "points": _report_points(reports),
    }


def run_plot(out_dir):
    rows = read_points_csv(out_dir / "points.csv")
    write_rates_svg(out_dir / "rates.svg", rows)
    return {"kind": "plot", "passed": True, "points": len(rows)}


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="hilproc",
        description="simulate operator-coefficient linear processes and "
        "measure normal-approximation rates",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("verify", "run exact-identity and inequality suites"),
        ("delta", "measure the distance at each configured horizon"),
        ("rates", "full rate study: distances, regression, CSV and SVG"),
        ("plot", "re-render rates.svg from an existing points.csv"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, help="experiment config (JSON)")
        p.add_argument("--seed", type=int, help="override the config seed (u64)")
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument("--threads", type=int, default=1, help="worker threads (speed only)")
        p.add_argument("--json", action="store_true", help="print the report to stdout")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        cfg = None
        if args.command != "plot" or args.config is not None:
            if args.config is None:
                raise ConfigError("--config", "a config file is required")
            cfg = load_config(args.config)
            if args.seed is not None:
                if not 0 <= args.seed < 2**64:
                    raise ConfigError("--seed", "must be an unsigned 64-bit integer")
                cfg.seed = args.seed
        out_dir = args.out or Path(cfg.out_dir if cfg and cfg.out_dir else "out")
        out_dir.mkdir(parents=True, exist_ok=True)
        threads = max(1, args.threads)

        if args.command == "verify":
            result = run_verify(cfg, threads)
        elif args.command == "delta":
            result = run_delta(cfg, out_dir, threads)
        elif args.command == "rates":
            result = run_rates(cfg, out_dir, threads)
        else:
            result = run_plot(out_dir)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InsufficientSignalError as exc:
        print(f"insufficient signal: {exc}", file=sys.stderr)
        return EXIT_NO_SIGNAL
    except FileNotFoundError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    text = report_json(result)
    with open(out_dir / "report.json", "w", encoding="utf-8") as fh:
        fh.write(text)
    if args.json:
        sys.stdout.write(text)
    if not result["passed"]:
        failed = [c for c in result.get("checks", []) if not c["pass"]]
        print(f"{len(failed)} check(s) failed; see report.json", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
