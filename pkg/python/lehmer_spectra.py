#!/usr/bin/env python3
"""
lehmer-spectra command line

    verify    run every exact identity suite (exit 1 on any failure)
    figure    min-modulus series, envelope and plots for a preset
    series    min-modulus series only
    envelope  envelope / residue table of a (cached) series
    tau       tau(p_n) table
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import pandas as pd

from artifact_cache import ArtifactCache
from envelope_analysis import format_table, format_window_sweep
from error_handler import SpectraError, error_handler
from exact_codec import dumps
from pipeline import (
    FIGURE_PRESETS, PRESETS, PROFILES, VerifyOptions, envelope_json, load_tau_p,
    resolve_config, run_envelope, run_figure, run_series, run_verify, tau_text,
)

logger = logging.getLogger(__name__)


def _window_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")


def _add_pipeline_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--preset", choices=sorted(PRESETS), default="fig1", help="Pipeline preset")
    parser.add_argument("--profile", choices=sorted(PROFILES), default="desk", help="Precision profile")
    parser.add_argument("--nmax", type=int, help="Largest matrix order")
    parser.add_argument("--nmin", type=int, help="Smallest order in the series (default 2)")
    parser.add_argument("--deform", type=str, help="Deformation parameter c (rational, e.g. 1 or 1/2)")
    parser.add_argument("--digits", type=int, dest="target_digits", help="Target decimal digits")
    parser.add_argument("--window", type=int, help="Envelope window w")
    parser.add_argument("--window-sweep", type=_window_list, help="Comma-separated windows to compare")
    parser.add_argument("--mod", type=int, dest="modulus", help="Residue modulus m")
    parser.add_argument("--workers", type=int, help="Worker processes (default: physical cores)")
    parser.add_argument("--format", choices=["csv", "json"], dest="output_format", help="Output format")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lehmer-spectra",
                                     description="Spectra of Hessenberg matrices built from tau(p_n)")
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    parser.add_argument("--quiet", "-q", action="store_true", help="Warnings and errors only")
    parser.add_argument("--cache-dir", help="Cache root (default: $LEHMER_SPECTRA_CACHE or ~/.lehmer_spectra)")
    parser.add_argument("--no-cache", action="store_true", help="Do not read or write the cache")
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="Run the exact identity suites")
    verify.add_argument("--nmax", type=int, default=25, help="Order bound for the tau_p suites")
    verify.add_argument("--lehmer-nmax", type=int, default=400, help="Range of the tau(p_n) != 0 scan")
    verify.add_argument("--poly-nmax", type=int, default=60,
                        help="Order bound for the characteristic polynomial suites")
    verify.add_argument("--seed", type=int, default=0, help="Seed for random-sequence trials")
    verify.add_argument("--trials", type=int, default=200, help="Random determinant-identity trials")
    verify.add_argument("--corrupt-tau-index", type=int, help="Add 1 to tau(k) before verifying")
    verify.add_argument("--out", help="Write the JSON report here")

    figure = sub.add_parser("figure", help="Series, envelope, tables and SVG for a figure")
    figure.add_argument("--which", type=int, choices=sorted(FIGURE_PRESETS), help="Figure number (sets --preset)")
    _add_pipeline_arguments(figure)
    figure.add_argument("--out", default="results", help="Output directory")

    series = sub.add_parser("series", help="Min-modulus series")
    _add_pipeline_arguments(series)
    series.add_argument("--out", help="Output file (default: stdout)")

    envelope = sub.add_parser("envelope", help="Envelope and residue table")
    _add_pipeline_arguments(envelope)
    envelope.add_argument("--out", help="Write the envelope JSON here")

    tau = sub.add_parser("tau", help="tau(p_n) for n <= nmax")
    tau.add_argument("--nmax", type=int, default=400, help="Number of primes")
    tau.add_argument("--format", choices=["csv", "json"], default="csv", dest="output_format")
    tau.add_argument("--out", help="Output file (default: stdout)")
    return parser


def _configure_logging(args):
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format='%(asctime)s - %(levelname)s - %(message)s')


def _open_cache(args) -> Optional[ArtifactCache]:
    if args.no_cache:
        return None
    return ArtifactCache(Path(args.cache_dir) if args.cache_dir else None)


def _config_from(args):
    preset = args.preset
    if getattr(args, "which", None):
        preset = FIGURE_PRESETS[args.which]
    return resolve_config(
        preset,
        args.profile,
        nmax=args.nmax,
        nmin=args.nmin,
        deform=args.deform,
        target_digits=args.target_digits,
        window=args.window,
        window_sweep=args.window_sweep,
        modulus=args.modulus,
        workers=args.workers,
        output_format=args.output_format,
        cache_dir=args.cache_dir,
    )


def _emit(text: str, out: Optional[str]):
    if out:
        Path(out).write_text(text, encoding="utf-8")
        logger.info(f"✅ written {out}")
    else:
        sys.stdout.write(text)


def cmd_verify(args) -> int:
    options = VerifyOptions(
        nmax=args.nmax,
        lehmer_nmax=args.lehmer_nmax,
        poly_nmax=args.poly_nmax,
        random_trials=args.trials,
        seed=args.seed,
        corrupt_tau_index=args.corrupt_tau_index,
    )
    report = run_verify(options)
    if args.out:
        _emit(dumps(report.to_json_dict()), args.out)
    for suite in report.suites:
        print(f"{'PASS' if suite.passed else 'FAIL'}  {suite.name:<32} {suite.checked:>8} checks")
    if not report.passed:
        print(f"first failure: {report.first_failure}")
    return report.exit_status


def cmd_figure(args) -> int:
    config = _config_from(args)
    cache = _open_cache(args)
    try:
        written = run_figure(config, Path(args.out), cache)
    finally:
        if cache is not None:
            logger.info(f"cache: {cache.stats()}")
            cache.close()
    for path in written:
        print(path)
    return 0


def cmd_series(args) -> int:
    config = _config_from(args)
    cache = _open_cache(args)
    try:
        results = run_series(config, cache)
    finally:
        if cache is not None:
            cache.close()
    if config.output_format == "json":
        _emit(dumps([r.to_json_dict() for r in results]), args.out)
    else:
        frame = pd.DataFrame([r.csv_row() for r in results])
        _emit(frame.to_csv(index=False, lineterminator="\n"), args.out)
    return 0


def cmd_envelope(args) -> int:
    config = _config_from(args)
    cache = _open_cache(args)
    try:
        results = run_series(config, cache)
    finally:
        if cache is not None:
            cache.close()
    summary = run_envelope(config, results)
    if args.out:
        _emit(dumps(envelope_json(summary)), args.out)
    report = summary["report"]
    print(f"envelope of {config.preset} (window {config.window}, mod {config.modulus}): "
          f"{len(report.abscissas)} points")
    print(format_table(report.residues), end="")
    print(f"blocks: {report.blocks}")
    if summary["reference"]:
        print(f"published table: {summary['reference']}")
    if summary["sweep"]:
        print(format_window_sweep(summary["sweep"]), end="")
    return 0


def cmd_tau(args) -> int:
    cache = _open_cache(args)
    try:
        seq = load_tau_p(args.nmax, cache)
    finally:
        if cache is not None:
            cache.close()
    _emit(tau_text(seq, args.output_format), args.out)
    return 0


COMMANDS = {
    "verify": cmd_verify,
    "figure": cmd_figure,
    "series": cmd_series,
    "envelope": cmd_envelope,
    "tau": cmd_tau,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args)
    try:
        return COMMANDS[args.command](args)
    except SpectraError as e:
        error_handler.log_error(e)
        sys.stderr.write(dumps(error_handler.create_error_response(e)))
        return 2


if __name__ == "__main__":
    sys.exit(main())
