"""Command-line front end: solve, sweep, verify and reproduce figure data.

Verbs:

* ``solve``      design one seeded link realisation and print the
                 per-subcarrier power split, multipliers and diagonal gains;
* ``sweep-mse``  run the configured axis and write the metrics CSV;
* ``sweep-ber``  same engine, bit-error oriented defaults (more symbols);
* ``check``      run the oracle suite and fail nonzero on any violation;
* ``fig N``      reproduce the data behind figure N at desk scale.

Configs are flat ``key=value`` text files with keys named after
:class:`afrelay.montecarlo.ExperimentConfig` fields; axis fields accept
comma-separated values.  Command-line flags override file values.  Exit
codes: 0 ok, 1 check failure, 2 usage/validation error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields, replace

import numpy as np

from .checks import SUITES, run_suite
from .montecarlo import (
    AXES,
    ExperimentConfig,
    prepare_point,
    run_trial,
    series_to_csv,
    sweep,
    trial_rng,
)
from .presets import FIGURES, figure_series
from .solver import solve as solve_design
from .estimation import sample_estimate
from .channel import generate_channel, exponential_profile
from .msemodel import link_model, total_mse

_CONFIG_FIELDS = {f.name: f.type for f in fields(ExperimentConfig)}
_INT_KEYS = {"n_s", "m_r", "n_r", "m_d", "k", "l", "trials", "seed", "symbols"}


class UsageError(Exception):
    pass


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key == "variant":
        return raw
    if key in _INT_KEYS:
        return int(raw)
    if "," in raw and key in AXES:
        return tuple(float(tok) for tok in raw.split(",") if tok.strip())
    return float(raw)


def load_config(path: str | None, overrides: dict) -> ExperimentConfig:
    """Config file plus overrides -> validated ExperimentConfig."""
    values = {}
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise UsageError(f"{path}:{lineno}: expected key=value")
                key, raw = (tok.strip() for tok in line.split("=", 1))
                if key not in _CONFIG_FIELDS:
                    raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
                values[key] = _parse_value(key, raw)
    values.update(overrides)
    try:
        cfg = ExperimentConfig(**values)
        cfg.validate()
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    return cfg


def _collect_overrides(args: argparse.Namespace) -> dict:
    mapping = {
        "K": "k",
        "L": "l",
        "trials": "trials",
        "seed": "seed",
        "variant": "variant",
        "threshold": "threshold",
        "alpha": "alpha",
        "sigma_e2": "sigma_e2",
        "er_n2_db": "er_n2_db",
        "es_n1_db": "es_n1_db",
        "symbols": "symbols",
    }
    out = {}
    for flag, key in mapping.items():
        val = getattr(args, flag, None)
        if val is not None:
            out[key] = _parse_value(key, val) if isinstance(val, str) else val
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        key, raw = (tok.strip() for tok in item.split("=", 1))
        if key not in _CONFIG_FIELDS:
            raise UsageError(f"unknown config key {key!r}")
        out[key] = _parse_value(key, raw)
    if getattr(args, "flat", False):
        out["l"] = 1
    return out


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config key (repeatable)")
    parser.add_argument("-o", "--output", help="output CSV path")
    parser.add_argument("--workers", type=int, help="thread count (env AFRELAY_WORKERS)")
    parser.add_argument("--K", type=int, dest="K", help="number of subcarriers")
    parser.add_argument("--L", type=int, dest="L", help="number of channel taps")
    parser.add_argument("--trials", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--variant", choices=["robust", "uncorrelated", "hsa", "spa",
                                              "switched", "naive"])
    parser.add_argument("--threshold", type=float)
    parser.add_argument("--alpha", type=str)
    parser.add_argument("--sigma-e2", type=str, dest="sigma_e2")
    parser.add_argument("--er-n2-db", type=str, dest="er_n2_db")
    parser.add_argument("--es-n1-db", type=str, dest="es_n1_db")
    parser.add_argument("--symbols", type=int)
    parser.add_argument("--flat", action="store_true", help="flat fading (L=1)")


def _write_or_print(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        print(f"wrote {path}")
    else:
        sys.stdout.write(text)


def _cmd_solve(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, _collect_overrides(args))
    for name in AXES:
        if np.ndim(getattr(cfg, name)) > 0:
            raise UsageError(f"solve needs scalar settings; {name} is an axis")
    setup = prepare_point(cfg)
    rng = trial_rng(cfg.seed, 0)
    ch_sr = generate_channel(cfg.m_r, cfg.n_s, cfg.l, setup.profile, rng)
    ch_rd = generate_channel(cfg.m_d, cfg.n_r, cfg.l, setup.profile, rng)
    est_sr = sample_estimate(ch_sr, setup.moments_sr, cfg.k, rng)
    est_rd = sample_estimate(ch_rd, setup.moments_rd, cfg.k, rng)
    model = link_model(est_sr, est_rd, setup.r_s, cfg.sigma_n1_sq, cfg.sigma_n2_sq)
    sol = solve_design(model, setup.p_r, variant=cfg.variant, threshold=cfg.threshold)

    print(f"variant={sol.variant} branch={sol.branch} P_r={setup.p_r:.6g} "
          f"gamma={sol.gamma:.6g} total_mse={total_mse(sol, model):.6g}")
    print(f"{'k':>3} {'P_r_k':>12} {'modes':>5} {'eta_k':>12} {'gamma_k':>12}  gains")
    for k in range(cfg.k):
        gains = " ".join(f"{v:.4f}" for v in sol.lam_f[k])
        print(f"{k:>3} {sol.p_r_k[k]:>12.6g} {sol.active_modes[k]:>5d} "
              f"{sol.eta_k[k]:>12.6g} {sol.gamma_k[k]:>12.6g}  [{gains}]")
    if args.output:
        lines = ["# afrelay-solution v1",
                 "subcarrier,p_r_k,active_modes,eta_k,gamma_k,lam_f,lam_g"]
        for k in range(cfg.k):
            lines.append(",".join([
                str(k), repr(float(sol.p_r_k[k])), str(int(sol.active_modes[k])),
                repr(float(sol.eta_k[k])), repr(float(sol.gamma_k[k])),
                ";".join(repr(float(v)) for v in sol.lam_f[k]),
                ";".join(repr(float(v)) for v in sol.lam_g[k]),
            ]))
        _write_or_print("\n".join(lines) + "\n", args.output)
    return 0


def _cmd_sweep(args: argparse.Namespace, ber: bool) -> int:
    overrides = _collect_overrides(args)
    if ber and "symbols" not in overrides:
        overrides["symbols"] = 8
    cfg = load_config(args.config, overrides)
    series = sweep(cfg, workers=args.workers)
    _write_or_print(series_to_csv(series), args.output)
    return 0


def _cmd_check(args: argparse.Namespace) -> int:
    if args.dump_moments:
        from .estimation import error_moments, moments_to_csv
        from .training import build_gram

        moments = error_moments(build_gram(64, 5, 2, 0.4), 0.01)
        _write_or_print(moments_to_csv(moments), args.dump_moments)
    names = None if args.suite in (None, "all") else [args.suite]
    results = run_suite(names)
    for res in results:
        print(res)
    return 0 if all(r.passed for r in results) else 1


def _cmd_fig(args: argparse.Namespace) -> int:
    if args.number not in FIGURES:
        raise UsageError(f"no preset for figure {args.number}; "
                         f"available: {sorted(FIGURES)}")
    series = figure_series(args.number, k=args.K if args.K else 64,
                           trials=args.trials,
                           seed=args.seed if args.seed is not None else 1,
                           workers=args.workers)
    _write_or_print(series_to_csv(series), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="afrelay",
        description="Robust MMSE relay transceiver design experiments",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p_solve = sub.add_parser("solve", help="design one seeded realisation")
    _add_common(p_solve)

    p_mse = sub.add_parser("sweep-mse", help="sweep the configured axis (MSE focus)")
    _add_common(p_mse)

    p_ber = sub.add_parser("sweep-ber", help="sweep the configured axis (BER focus)")
    _add_common(p_ber)

    p_check = sub.add_parser("check", help="run the oracle suite")
    p_check.add_argument("--suite", choices=sorted(SUITES) + ["all"], default="all")
    p_check.add_argument("--dump-moments", metavar="PATH",
                         help="also write the default design's error moments as CSV")

    p_fig = sub.add_parser("fig", help="reproduce the data behind one figure")
    p_fig.add_argument("number", type=int)
    _add_common(p_fig)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.verb == "solve":
            return _cmd_solve(args)
        if args.verb == "sweep-mse":
            return _cmd_sweep(args, ber=False)
        if args.verb == "sweep-ber":
            return _cmd_sweep(args, ber=True)
        if args.verb == "check":
            return _cmd_check(args)
        if args.verb == "fig":
            return _cmd_fig(args)
        raise AssertionError(args.verb)  # pragma: no cover
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
