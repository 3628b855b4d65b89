"""Command-line front end: config parsing, experiment dispatch, CSV/JSON out.

Exit codes: 0 success, 1 runtime/numeric failure, 2 usage or config error.
CSV files use a header row, period decimal separator and LF line endings;
floats are written with shortest round-trip repr so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .harness import (
    CdfSeries,
    ConfigError,
    ScenarioConfig,
    response_sweep,
    run_clis_experiment,
    run_dlis_experiment,
    run_frequency_comparison,
)


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path_or_dash, header: list[str], columns: list[np.ndarray]) -> None:
    rows = zip(*columns)
    text = ",".join(header) + "\n"
    text += "".join(",".join(_fmt(v) for v in row) + "\n" for row in rows)
    if path_or_dash == "-":
        sys.stdout.write(text)
    else:
        with open(path_or_dash, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _cdf_columns(cdf: CdfSeries) -> tuple[list[str], list[np.ndarray]]:
    return ["value", "cdf"], [cdf.values, cdf.ordinates]


def _summary_stats(samples: np.ndarray, mean_sum: float) -> dict:
    cdf = CdfSeries.from_samples(samples)
    return {
        "sum": mean_sum,
        "median": cdf.median,
        "p95_likely": cdf.p95_likely,
    }


def _execute(config: ScenarioConfig, out_dir: Path) -> list[str]:
    """Run the configured experiment and write its artifacts; returns the
    list of files written (relative to out_dir)."""
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs: list[str] = []
    summary: dict = {"experiment": config.experiment, "curves": {}}

    def emit(name: str, header, columns):
        _write_csv(out_dir / name, header, columns)
        outputs.append(name)

    if config.experiment == "response":
        table = _response_table(config)
        emit("response.csv", list(table.keys()), list(table.values()))
    elif config.experiment == "clis":
        result = run_clis_experiment(config)
        header = ["sweep_value", "sum_se_los", "sum_se_upper"]
        cols = [
            np.asarray(result.values),
            result.mean_curve("los"),
            result.mean_curve("upper"),
        ]
        if result.sum_ricean is not None:
            header.append("sum_se_ricean")
            cols.append(result.mean_curve("ricean"))
        emit("clis_sum_se.csv", header, cols)
        cdf = result.cdf_los(0)
        h, c = _cdf_columns(cdf)
        emit("clis_per_user_cdf.csv", h, c)
        summary["curves"]["los"] = _summary_stats(
            result.per_user_los[0], float(result.sum_los[0].mean())
        )
        summary["curves"]["upper"] = {"sum": float(result.sum_upper[0].mean())}
        if result.sum_ricean is not None:
            summary["curves"]["ricean"] = {"sum": float(result.sum_ricean[0].mean())}
    elif config.experiment == "dlis":
        curves = run_dlis_experiment(config)
        for label, curve in curves.items():
            h, c = _cdf_columns(curve.cdf)
            emit(f"dlis_{label}_cdf.csv", h, c)
            summary["curves"][label] = _summary_stats(curve.per_user, curve.mean_sum)
    elif config.experiment == "compare":
        curves = run_frequency_comparison(config)
        for label, curve in curves.items():
            h, c = _cdf_columns(curve.cdf)
            emit(f"compare_{label}_cdf.csv", h, c)
            summary["curves"][label] = _summary_stats(curve.per_user, curve.mean_sum)
    else:  # pragma: no cover - validate() rejects other values
        raise ConfigError("experiment", f"unknown experiment {config.experiment!r}")

    with open(out_dir / "summary.json", "w", encoding="utf-8", newline="") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    outputs.append("summary.json")

    manifest = {
        "artifact": "lisim",
        "version": __version__,
        "seed": config.seed,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "config": config.to_dict(),
        "outputs": sorted(outputs + ["manifest.json"]),
    }
    with open(out_dir / "manifest.json", "w", encoding="utf-8", newline="") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    outputs.append("manifest.json")
    return outputs


def _response_table(config: ScenarioConfig) -> dict[str, np.ndarray]:
    if config.response_mode == "radius":
        if config.radius_max is None:
            raise ConfigError("response.radius_max", "radius sweep needs radius_max")
        return response_sweep(
            config.kappa,
            radius_range=(config.radius, config.radius_max),
            points=config.points,
            chi=config.chi,
        )
    radii = list(config.radius_list) if config.radius_list else [config.radius]
    table = response_sweep(
        config.kappa, radius_list=radii, chi_max=config.chi_max, points=config.points
    )
    if len(radii) == 1:  # single radius keeps the plain two-column layout
        key = next(k for k in table if k != "chi")
        return {"chi": table["chi"], "abs_sigma": table[key]}
    return table


def _parse_list(text: str, flag: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ConfigError(flag, f"expected a comma-separated list of numbers, got {text!r}")


def _threads_default(args_threads: int | None) -> int:
    if args_threads is not None:
        return args_threads
    env = os.environ.get("LIS_SIM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError("LIS_SIM_THREADS", f"not an integer: {env!r}")
    return 1


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="master RNG seed")
    parser.add_argument("--drops", type=int, default=None, help="Monte-Carlo drops")
    parser.add_argument("--out-dir", default="out", help="output directory")
    parser.add_argument("--threads", type=int, default=None, help="worker threads")


def _add_scene(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--users", type=int, default=None, help="number of users K")
    parser.add_argument("--units", type=int, default=None, help="number of units M")
    parser.add_argument("--radius", type=float, default=None, help="surface radius (m)")
    parser.add_argument("--unit-radius", type=float, default=None)
    parser.add_argument("--frequency", type=float, default=None, help="carrier (Hz)")
    parser.add_argument("--rho-db", type=float, default=None)
    parser.add_argument("--ricean-db", type=float, default=None)
    parser.add_argument("--area-side", type=float, default=None)
    parser.add_argument("--user-height", type=float, default=None)
    parser.add_argument("--far-field", choices=("warn", "resample", "ignore"), default=None)


def _add_dlis(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--association", choices=("lua", "random", "nearest"), default=None)
    parser.add_argument("--objective", choices=("sum", "max-min"), default=None)
    parser.add_argument("--oc", choices=("off", "closed", "exhaustive"), default=None)
    parser.add_argument("--pc", action="store_true", default=None)
    parser.add_argument("--order", choices=("oc-pc", "pc-oc"), default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lisim",
        description="Uplink simulator for large-intelligent-surface layouts",
    )
    parser.add_argument("--version", action="version", version=f"lisim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_resp = sub.add_parser("response", help="effective-channel response tables")
    p_resp.add_argument("--r", type=float, action="append", required=True,
                        help="surface radius in m (repeatable)")
    p_resp.add_argument("--lambda", dest="wavelength", type=float, required=True,
                        help="wavelength in m")
    p_resp.add_argument("--chi-max", type=float, default=0.2)
    p_resp.add_argument("--points", type=int, default=512)
    p_resp.add_argument("--sweep", choices=("chi", "radius"), default="chi")
    p_resp.add_argument("--chi", type=float, default=0.0, help="fixed chi for radius sweep")
    p_resp.add_argument("--r-max", type=float, default=None, help="radius sweep upper end")
    p_resp.add_argument("--out", default="-", help="output CSV path, or - for stdout")

    p_run = sub.add_parser("run", help="run an experiment from a config file")
    p_run.add_argument("--config", required=True, help="JSON scenario config")
    _add_common(p_run)

    p_clis = sub.add_parser("clis", help="centralized-layout sum-SE experiment")
    _add_common(p_clis)
    _add_scene(p_clis)
    p_clis.add_argument("--radius-list", default=None, help="comma-separated radii")
    p_clis.add_argument("--lambda-list", default=None, help="comma-separated wavelengths")

    p_dlis = sub.add_parser("dlis", help="distributed-layout per-user SE experiment")
    _add_common(p_dlis)
    _add_scene(p_dlis)
    _add_dlis(p_dlis)

    p_cmp = sub.add_parser("compare", help="centralized vs distributed across bands")
    _add_common(p_cmp)
    _add_scene(p_cmp)
    _add_dlis(p_cmp)
    p_cmp.add_argument("--frequencies", default=None, help="comma-separated Hz values")

    return parser


_FLAG_TO_FIELD = {
    "seed": "seed",
    "drops": "drops",
    "users": "k_users",
    "units": "m_units",
    "radius": "radius",
    "unit_radius": "unit_radius",
    "frequency": "frequency_hz",
    "rho_db": "rho_db",
    "ricean_db": "ricean_factor_db",
    "area_side": "area_side",
    "user_height": "user_height",
    "far_field": "far_field",
    "association": "association",
    "objective": "lua_objective",
    "order": "order",
}


def _config_from_args(args: argparse.Namespace, experiment: str) -> ScenarioConfig:
    overrides: dict = {"experiment": experiment}
    for flag, field in _FLAG_TO_FIELD.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[field] = value
    if getattr(args, "oc", None) is not None:
        overrides["oc"] = args.oc != "off"
        if args.oc != "off":
            overrides["oc_mode"] = args.oc
    if getattr(args, "pc", None):
        overrides["pc"] = True
    if getattr(args, "radius_list", None):
        overrides["radius_list"] = _parse_list(args.radius_list, "--radius-list")
    if getattr(args, "lambda_list", None):
        overrides["lambda_list"] = _parse_list(args.lambda_list, "--lambda-list")
    if getattr(args, "frequencies", None):
        overrides["frequencies"] = _parse_list(args.frequencies, "--frequencies")
    overrides["threads"] = _threads_default(args.threads)
    try:
        return ScenarioConfig(**overrides)
    except TypeError as exc:
        raise ConfigError("flags", str(exc))


def _cmd_response(args: argparse.Namespace) -> int:
    if args.sweep == "radius":
        if args.r_max is None:
            raise ConfigError("--r-max", "radius sweep needs an upper radius")
        table = response_sweep(
            2.0 * math.pi / args.wavelength,
            radius_range=(min(args.r), args.r_max),
            points=args.points,
            chi=args.chi,
        )
    else:
        table = response_sweep(
            2.0 * math.pi / args.wavelength,
            radius_list=args.r,
            chi_max=args.chi_max,
            points=args.points,
        )
        if len(args.r) == 1:
            key = next(k for k in table if k != "chi")
            table = {"chi": table["chi"], "abs_sigma": table[key]}
    _write_csv(args.out, list(table.keys()), list(table.values()))
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    config = ScenarioConfig.from_file(args.config)
    overrides: dict = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.drops is not None:
        overrides["drops"] = args.drops
    overrides["threads"] = _threads_default(args.threads if args.threads else None) \
        if args.threads is not None or os.environ.get("LIS_SIM_THREADS") else config.threads
    config = dataclasses.replace(config, **overrides)
    _execute(config, Path(args.out_dir))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "response":
            return _cmd_response(args)
        if args.command == "run":
            return _cmd_run(args)
        config = _config_from_args(args, args.command)
        _execute(config, Path(args.out_dir))
        return 0
    except ConfigError as exc:
        print(f"config error - {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # numeric/runtime failures
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
