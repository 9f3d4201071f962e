"""Command line front-end.

Subcommands cover the full pipeline: ray-traced LOS probability curves
(los-prob), fitting the analytic LOS model to curves (fit-plos), hybrid path
loss sweeps (pathloss), regression on measured scatter (fit) and link outage
analysis (outage).

Exit codes: 0 on success, 1 on numerical failure, 2 on input or parse errors.
Output files are written atomically and identical invocations (including the
seed) produce byte-identical output.  The MMWPL_THREADS environment variable
caps the worker count used for curve generation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import fitting, link_analysis, los_probability, pathloss
from .geometry import BuildingDBError, Point3, PointInsideBuildingError, load_building_db

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_INPUT = 2


def _fmt(v) -> str:
    return format(float(v), ".6g")


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _emit(out: str | None, text: str) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        _write_atomic(Path(out), text)


def _worker_count() -> int | None:
    raw = os.environ.get("MMWPL_THREADS")
    if raw is None:
        return None
    count = int(raw)
    if count < 1:
        raise ValueError(f"MMWPL_THREADS must be a positive integer, got {raw!r}")
    return count


def _parse_xyz(text: str) -> Point3:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"expected x,y,z with three components, got {text!r}")
    return Point3(float(parts[0]), float(parts[1]), float(parts[2]))


def _grid_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--rmin", type=float, default=10.0, help="first distance, m")
    parser.add_argument("--rmax", type=float, default=200.0, help="last distance, m")
    parser.add_argument("--step", type=float, default=1.0, help="grid step, m")


def _model_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--preset", choices=sorted(pathloss.PRESETS), help="published parameter set")
    parser.add_argument("--nlos", choices=["close-in", "floating"], default="close-in",
                        help="NLOS model family")
    parser.add_argument("--dbp", type=float, default=27.0, help="LOS probability breakpoint, m")
    parser.add_argument("--alpha", type=float, default=71.0, help="LOS probability decay, m")
    parser.add_argument("--frequency", type=float, help="carrier frequency in Hz (explicit models)")
    parser.add_argument("--los-exponent", type=float, help="LOS close-in exponent")
    parser.add_argument("--los-sigma", type=float, help="LOS shadowing spread, dB")
    parser.add_argument("--nlos-exponent", type=float, help="NLOS close-in exponent")
    parser.add_argument("--nlos-intercept", type=float, help="NLOS floating intercept, dB")
    parser.add_argument("--nlos-slope", type=float, help="NLOS floating slope")
    parser.add_argument("--nlos-sigma", type=float, help="NLOS shadowing spread, dB")


def _build_hybrid(args) -> pathloss.HybridModel:
    p_los = los_probability.LosProbParams(args.dbp, args.alpha)
    explicit = [args.frequency, args.los_exponent, args.los_sigma, args.nlos_sigma]
    if args.preset is not None:
        if any(v is not None for v in explicit + [args.nlos_exponent, args.nlos_intercept, args.nlos_slope]):
            raise ValueError("give either --preset or explicit model parameters, not both")
        return pathloss.hybrid_from_preset(args.preset, nlos=args.nlos, p_los=p_los)
    if any(v is None for v in explicit):
        raise ValueError(
            "explicit models need --frequency, --los-exponent, --los-sigma and --nlos-sigma "
            "(or use --preset)"
        )
    los = pathloss.CloseInModel(args.frequency, args.los_exponent, args.los_sigma)
    if args.nlos == "close-in":
        if args.nlos_exponent is None:
            raise ValueError("--nlos close-in needs --nlos-exponent")
        nlos = pathloss.CloseInModel(args.frequency, args.nlos_exponent, args.nlos_sigma)
    else:
        if args.nlos_intercept is None or args.nlos_slope is None:
            raise ValueError("--nlos floating needs --nlos-intercept and --nlos-slope")
        nlos = pathloss.FloatingInterceptModel(args.nlos_intercept, args.nlos_slope, args.nlos_sigma)
    return pathloss.HybridModel(los, nlos, p_los)


def cmd_los_prob(args) -> int:
    try:
        workers = _worker_count()
        db = load_building_db(args.db)
        tx = _parse_xyz(args.tx)
    except (OSError, BuildingDBError, ValueError) as exc:
        return _fail(EXIT_INPUT, str(exc))
    try:
        curve = los_probability.los_probability_curve(
            db, tx, r_min=args.rmin, r_max=args.rmax, step=args.step,
            n_points=args.n_points, rx_height_m=args.rx_height,
            interior_counts_as_nlos=args.interior_nlos, max_workers=workers,
        )
    except PointInsideBuildingError as exc:
        return _fail(EXIT_INPUT, f"tx position invalid: {exc}")
    except ValueError as exc:
        return _fail(EXIT_INPUT, str(exc))
    _emit(args.out, los_probability.curve_to_csv(curve))
    return EXIT_OK


def cmd_fit_plos(args) -> int:
    curves = []
    for path in args.curves:
        try:
            curves.append(los_probability.curve_from_csv(Path(path).read_text()))
        except (OSError, ValueError) as exc:
            return _fail(EXIT_INPUT, f"{path}: {exc}")
    try:
        if args.mean:
            fits = [los_probability.fit_p_los(los_probability.mean_curve(curves))]
        else:
            fits = [los_probability.fit_p_los(c) for c in curves]
    except ValueError as exc:
        return _fail(EXIT_NUMERICAL, str(exc))
    docs = [
        {"d_bp_m": params.d_bp_m, "alpha_m": params.alpha_m, "squared": params.squared, "mse": mse}
        for params, mse in fits
    ]
    payload = docs[0] if len(docs) == 1 else docs
    _emit(args.out, json.dumps(payload, indent=2) + "\n")
    return EXIT_OK


def cmd_pathloss(args) -> int:
    try:
        model = _build_hybrid(args)
        distances = los_probability.radius_grid(args.rmin, args.rmax, args.step)
    except ValueError as exc:
        return _fail(EXIT_INPUT, str(exc))
    try:
        p = los_probability.p_los_model(distances, model.p_los)
        mean = pathloss.mean_pl_hybrid(model, distances)
        sigma = pathloss.shadow_sigma_hybrid(model, distances)
    except ValueError as exc:
        return _fail(EXIT_NUMERICAL, str(exc))
    lines = ["d_m,p_los,mean_pl_db,sigma_db"]
    for row in zip(distances, p, mean, sigma):
        lines.append(",".join(_fmt(v) for v in row))
    _emit(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_fit(args) -> int:
    try:
        samples = fitting.samples_from_csv(Path(args.samples).read_text())
    except (OSError, ValueError) as exc:
        return _fail(EXIT_INPUT, f"{args.samples}: {exc}")
    subset = [s for s in samples if s.condition == args.condition]
    try:
        if args.model == "close-in":
            if args.frequency is None:
                return _fail(EXIT_INPUT, "--model close-in needs --frequency")
            fitted = fitting.fit_close_in(subset, args.frequency)
            doc = {
                "model": "close-in",
                "frequency_hz": fitted.frequency_hz,
                "exponent": fitted.exponent,
                "shadow_std_db": fitted.shadow_std_db,
            }
        else:
            fitted = fitting.fit_floating(subset)
            doc = {
                "model": "floating-intercept",
                "intercept_db": fitted.intercept_db,
                "slope": fitted.slope,
                "shadow_std_db": fitted.shadow_std_db,
                "valid_range_m": list(fitted.valid_range_m),
            }
    except ValueError as exc:
        return _fail(EXIT_NUMERICAL, str(exc))
    _emit(args.out, json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def cmd_outage(args) -> int:
    try:
        model = _build_hybrid(args)
        spec = link_analysis.OutageSpec(args.threshold)
        distances = los_probability.radius_grid(args.rmin, args.rmax, args.step)
        if args.monte_carlo is not None:
            if args.monte_carlo < 1:
                raise ValueError("--monte-carlo draw count must be positive")
            if args.seed is None:
                raise ValueError("--monte-carlo requires --seed for reproducibility")
    except ValueError as exc:
        return _fail(EXIT_INPUT, str(exc))
    try:
        rows = []
        rng = np.random.default_rng(args.seed) if args.monte_carlo is not None else None
        for d in distances:
            outage = link_analysis.outage_probability(model, float(d), spec)
            row = [d, 1.0 - outage, outage]
            if rng is not None:
                draws = pathloss.sample_pl(model, float(d), rng, size=args.monte_carlo)
                row.append(float(np.mean(draws > spec.max_path_loss_db)))
            rows.append(row)
    except ValueError as exc:
        return _fail(EXIT_NUMERICAL, str(exc))
    header = "d_m,coverage,outage" + (",outage_mc" if args.monte_carlo is not None else "")
    lines = [header] + [",".join(_fmt(v) for v in row) for row in rows]
    _emit(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mmwpl",
        description="Probabilistic omnidirectional millimeter-wave path loss toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("los-prob", help="ray-traced LOS probability curve for a scene")
    p.add_argument("--db", required=True, help="building DB JSON document")
    p.add_argument("--tx", required=True, help="transmitter position as x,y,z in meters")
    _grid_args(p)
    p.add_argument("--n-points", type=int, default=100, help="circle positions per radius")
    p.add_argument("--rx-height", type=float, default=1.5, help="receiver height, m")
    p.add_argument("--interior-nlos", action="store_true",
                   help="count in-building circle positions as NLOS instead of dropping them")
    p.add_argument("--out", help="output CSV path (stdout when omitted)")
    p.set_defaults(func=cmd_los_prob)

    p = sub.add_parser("fit-plos", help="fit the analytic LOS probability model to curves")
    p.add_argument("curves", nargs="+", help="curve CSV files")
    p.add_argument("--mean", action="store_true", help="average the curves before fitting")
    p.add_argument("--out", help="output JSON path (stdout when omitted)")
    p.set_defaults(func=cmd_fit_plos)

    p = sub.add_parser("pathloss", help="hybrid mean path loss and shadowing sweep")
    _model_args(p)
    _grid_args(p)
    p.add_argument("--out", help="output CSV path (stdout when omitted)")
    p.set_defaults(func=cmd_pathloss)

    p = sub.add_parser("fit", help="fit a path loss model to measured scatter")
    p.add_argument("samples", help="samples CSV file")
    p.add_argument("--model", choices=["close-in", "floating"], required=True)
    p.add_argument("--condition", choices=list(fitting.CONDITIONS), required=True,
                   help="which labeled subset to fit")
    p.add_argument("--frequency", type=float, help="carrier frequency in Hz (close-in only)")
    p.add_argument("--out", help="output JSON path (stdout when omitted)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("outage", help="coverage and outage versus distance")
    _model_args(p)
    _grid_args(p)
    p.add_argument("--threshold", type=float, required=True, help="maximum tolerable path loss, dB")
    p.add_argument("--monte-carlo", type=int, help="validate analytically via N shadowing draws")
    p.add_argument("--seed", type=int, help="RNG seed (required with --monte-carlo)")
    p.add_argument("--out", help="output CSV path (stdout when omitted)")
    p.set_defaults(func=cmd_outage)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
