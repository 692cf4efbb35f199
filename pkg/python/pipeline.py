"""
End-to-end pipelines: tau_p -> source sequence -> characteristic polynomials
-> certified minimum moduli -> lower envelope, with every stage cached.
"""

import hashlib
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd
import psutil

from artifact_cache import ArtifactCache, ArtifactKind, CacheKey
from charpoly import (
    ExactPoly, charpoly_family, check_closed_form_random, check_principal_minors_random,
    check_three_way, check_too_good, lehmer_check,
)
from envelope_analysis import (
    DEFAULT_MODULUS, DEFAULT_WINDOW, EnvelopeReport, block_structure, compare_reference,
    envelope_report, format_table, format_window_sweep, window_sweep, write_residue_csv,
)
from error_handler import ErrorType, IdentityReport, SpectraError, error_handler
from exact_codec import dumps, encode_rational
from hess_matrices import (
    MatrixFamily, MatrixSpec, check_deformation_consistency, determinant_identity_trials,
    verify_lemma22,
)
from newton_d import ExactSeq, check_d_relation, h_from_j, j_from_h, tau_p_as_h, tau_p_as_j
from rootfind import MinModResult, min_modulus_series
from seq_core import TauPrimeSeq, TauTable, check_tau_table, first_primes, tau_p, tau_series
from svg_plot import two_panel_svg

logger = logging.getLogger(__name__)


class SourceRole(Enum):
    """Which side of the D relation tau_p is assigned to"""
    H_IS_TAU = "h=tau_p"
    J_IS_TAU = "j=tau_p"


FAMILY_FOR_ROLE = {SourceRole.H_IS_TAU: MatrixFamily.J, SourceRole.J_IS_TAU: MatrixFamily.H}


@dataclass(frozen=True)
class PrecisionProfile:
    target_digits: int
    start_bits: int
    cap_bits: int
    nmax: int


PROFILES = {
    "desk": PrecisionProfile(target_digits=30, start_bits=384, cap_bits=6144, nmax=120),
    "full": PrecisionProfile(target_digits=100, start_bits=768, cap_bits=12288, nmax=400),
}

PRESETS: Dict[str, Dict[str, Any]] = {
    "fig1": {"family": MatrixFamily.J, "source_role": SourceRole.H_IS_TAU, "deform": Fraction(1),
             "reference": "J"},
    "fig2": {"family": MatrixFamily.J, "source_role": SourceRole.H_IS_TAU, "deform": None,
             "reference": None},
    "fig3": {"family": MatrixFamily.H, "source_role": SourceRole.J_IS_TAU, "deform": Fraction(1),
             "reference": "H"},
    "c0": {"family": MatrixFamily.J, "source_role": SourceRole.H_IS_TAU, "deform": Fraction(0),
           "reference": None},
}
FIGURE_PRESETS = {1: "fig1", 2: "fig2", 3: "fig3"}


def default_workers() -> int:
    return psutil.cpu_count(logical=False) or os.cpu_count() or 1


@dataclass
class PipelineConfig:
    preset: str
    family: MatrixFamily
    source_role: SourceRole
    deform: Optional[Fraction]
    nmax: int
    nmin: int = 2
    target_digits: int = 30
    start_bits: int = 384
    cap_bits: int = 6144
    window: int = DEFAULT_WINDOW
    window_sweep: List[int] = field(default_factory=list)
    modulus: int = DEFAULT_MODULUS
    cache_dir: Optional[str] = None
    workers: int = 1
    output_format: str = "csv"
    reference: Optional[str] = None

    def validate(self):
        checks = [
            (self.nmax >= 1, ErrorType.EMPTY_DOMAIN, f"nmax must be >= 1, got {self.nmax}"),
            (1 <= self.nmin <= self.nmax, ErrorType.CONFIG_ERROR,
             f"nmin must lie in 1..nmax, got {self.nmin}"),
            (FAMILY_FOR_ROLE[self.source_role] == self.family, ErrorType.ROLE_MISMATCH,
             f"{self.source_role.value} feeds the {FAMILY_FOR_ROLE[self.source_role].value} family, "
             f"not {self.family.value}"),
            (self.window >= 1 and all(w >= 1 for w in self.window_sweep), ErrorType.CONFIG_ERROR,
             "envelope windows must be >= 1"),
            (self.modulus >= 2, ErrorType.CONFIG_ERROR, f"modulus must be >= 2, got {self.modulus}"),
            (self.target_digits >= 1 and 0 < self.start_bits <= self.cap_bits, ErrorType.CONFIG_ERROR,
             "precision profile needs target_digits >= 1 and start_bits <= cap_bits"),
            (self.start_bits >= self.target_digits * math.log2(10), ErrorType.CONFIG_ERROR,
             f"start_bits {self.start_bits} cannot hold {self.target_digits} digits"),
            (self.workers >= 1, ErrorType.CONFIG_ERROR, "workers must be >= 1"),
            (self.output_format in ("csv", "json"), ErrorType.CONFIG_ERROR,
             f"unknown output format {self.output_format}"),
        ]
        for ok, error_type, message in checks:
            if not ok:
                raise SpectraError(message=message, error_type=error_type, context={"preset": self.preset})
        return self

    @property
    def stem(self) -> str:
        return self.preset

    def to_json_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data.update({
            "family": self.family.value,
            "source_role": self.source_role.value,
            "deform": None if self.deform is None else encode_rational(self.deform),
        })
        data.pop("cache_dir")
        data.pop("workers")
        return data


def resolve_config(preset: str = "fig1", profile: str = "desk", **overrides: Any) -> PipelineConfig:
    """Preset + precision profile + explicit overrides (None means "not given")"""
    if preset not in PRESETS:
        raise SpectraError(
            message=f"unknown preset '{preset}' (choose from {', '.join(PRESETS)})",
            error_type=ErrorType.CONFIG_ERROR,
        )
    if profile not in PROFILES:
        raise SpectraError(
            message=f"unknown precision profile '{profile}' (choose from {', '.join(PROFILES)})",
            error_type=ErrorType.CONFIG_ERROR,
        )
    prof = PROFILES[profile]
    config = PipelineConfig(
        preset=preset,
        nmax=prof.nmax,
        target_digits=prof.target_digits,
        start_bits=prof.start_bits,
        cap_bits=prof.cap_bits,
        workers=default_workers(),
        **PRESETS[preset],
    )
    given = {k: v for k, v in overrides.items() if v is not None}
    if "deform" in given:
        given["deform"] = Fraction(given["deform"])
    config = replace(config, **given)
    return config.validate()


def fingerprint(config: PipelineConfig) -> str:
    """Stable id of the polynomial family a config describes"""
    key = dumps({
        "family": config.family.value,
        "source_role": config.source_role.value,
        "deform": None if config.deform is None else encode_rational(config.deform),
    })
    return hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]


def rootset_fingerprint(config: PipelineConfig) -> str:
    """Cache id for root sets: the polynomial family plus the escalation start"""
    return f"{fingerprint(config)}-from{config.start_bits}"


def load_tau_p(nmax: int, cache: Optional[ArtifactCache] = None) -> TauPrimeSeq:
    key = CacheKey(ArtifactKind.TAU_P, "tau_p", nmax)
    if cache is not None:
        payload = cache.load(key)
        if payload is not None:
            return TauPrimeSeq.from_json_dict(payload)
    seq = tau_p(nmax)
    if cache is not None:
        cache.store(key, seq.to_json_dict())
    return seq


def source_sequence(config: PipelineConfig, tau: TauPrimeSeq) -> ExactSeq:
    """The sequence the family's matrices are built from, undeformed"""
    values = tau.values[:config.nmax]
    if config.source_role == SourceRole.H_IS_TAU:
        return j_from_h(tau_p_as_h(values), config.nmax)
    return h_from_j(tau_p_as_j(values), config.nmax)


def run_polys(config: PipelineConfig, cache: Optional[ArtifactCache] = None) -> List[ExactPoly]:
    """Characteristic polynomials for orders 1..nmax"""
    fp = fingerprint(config)
    if cache is not None:
        cached = [cache.load(CacheKey(ArtifactKind.CHARPOLY, fp, n)) for n in range(1, config.nmax + 1)]
        if all(p is not None for p in cached):
            logger.info(f"✅ {config.nmax} characteristic polynomials loaded from cache ({config.preset})")
            return [ExactPoly.from_json_dict(p) for p in cached]

    tau = load_tau_p(config.nmax, cache)
    source = source_sequence(config, tau)
    template = MatrixSpec(config.family, config.nmax, source, config.deform)
    polys = charpoly_family(template, config.nmax)
    if cache is not None:
        for n, poly in enumerate(polys, start=1):
            cache.store(CacheKey(ArtifactKind.CHARPOLY, fp, n), poly.to_json_dict())
    logger.info(f"✅ characteristic polynomials computed through n={config.nmax} ({config.preset})")
    return polys


def run_series(config: PipelineConfig, cache: Optional[ArtifactCache] = None) -> List[MinModResult]:
    """Certified min modulus for n = nmin..nmax, reusing cached root sets"""
    polys = run_polys(config, cache)
    fp = rootset_fingerprint(config)
    ns = range(config.nmin, config.nmax + 1)
    known = {n: cache.load_all(ArtifactKind.ROOTSET, fp, n) for n in ns} if cache is not None else {}

    def on_result(n: int, result: MinModResult, fresh: Dict[int, Any]):
        if cache is not None:
            for bits, payload in sorted(fresh.items()):
                cache.store(CacheKey(ArtifactKind.ROOTSET, fp, n, bits), payload)
        logger.debug(f"n={n}: min modulus {result.value} at {result.precision_bits} bits")

    kwargs = dict(
        target_digits=config.target_digits,
        start_bits=config.start_bits,
        cap_bits=config.cap_bits,
        first_n=config.nmin,
        known=known,
        on_result=on_result,
    )
    selected = polys[config.nmin - 1:]
    if config.workers > 1 and len(selected) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as executor:
            results = min_modulus_series(selected, executor=executor, **kwargs)
    else:
        results = min_modulus_series(selected, **kwargs)
    unstable = [r.n for r in results if not r.stable]
    logger.info(f"✅ min-modulus series done for {config.preset}: {len(results)} points, "
                f"{len(unstable)} unstable")
    return results


def series_points(results: Sequence[MinModResult]):
    """(n, log10 value) pairs plus the unstable indices"""
    points = [(r.n, r.log10_decimal() if r.is_finite else float("nan")) for r in results]
    unstable = [r.n for r in results if not r.stable]
    return points, unstable


def run_envelope(config: PipelineConfig, results: Sequence[MinModResult]) -> Dict[str, Any]:
    """Envelope report, its block structure, reference comparison and optional window sweep"""
    points, unstable = series_points(results)
    report = envelope_report(points, config.window, config.modulus, source=config.preset,
                             unstable=unstable)
    summary: Dict[str, Any] = {
        "report": report,
        "structure": block_structure(report),
        "reference": compare_reference(report, config.reference) if config.reference else None,
        "sweep": window_sweep(points, config.window_sweep, config.modulus, config.preset, unstable)
        if config.window_sweep else [],
    }
    return summary


def envelope_json(summary: Dict[str, Any]) -> Dict[str, Any]:
    report: EnvelopeReport = summary["report"]
    return {
        **report.to_json_dict(),
        "structure": summary["structure"],
        "reference": summary["reference"],
        "sweep": [block_structure(r) for r in summary["sweep"]],
    }


def _float_or_nan(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        return float("nan")


def run_figure(config: PipelineConfig, out_dir: Path,
               cache: Optional[ArtifactCache] = None) -> List[Path]:
    """Series CSV/JSON, two-panel SVG, envelope JSON, residue table and CSV, config echo"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    results = run_series(config, cache)
    summary = run_envelope(config, results)
    report: EnvelopeReport = summary["report"]
    stem = config.stem
    written: List[Path] = []

    csv_path = out_dir / f"{stem}_series.csv"
    pd.DataFrame([r.csv_row() for r in results],
                 columns=["n", "min_modulus", "log10_min_modulus", "precision_bits", "stable"]
                 ).to_csv(csv_path, index=False, lineterminator="\n")
    written.append(csv_path)

    json_path = out_dir / f"{stem}_series.json"
    json_path.write_text(dumps([r.to_json_dict() for r in results]), encoding="utf-8")
    written.append(json_path)

    raw = [(r.n, _float_or_nan(r.value)) for r in results]
    logs = [(r.n, _float_or_nan(r.log10_value)) for r in results]
    svg_path = out_dir / f"{stem}.svg"
    title = f"{config.family.value} family, {config.source_role.value}, " \
            f"c={'none' if config.deform is None else config.deform}"
    svg_path.write_text(two_panel_svg(title, raw, logs, report.abscissas), encoding="utf-8")
    written.append(svg_path)

    envelope_path = out_dir / f"{stem}_envelope.json"
    envelope_path.write_text(dumps(envelope_json(summary)), encoding="utf-8")
    written.append(envelope_path)

    table_path = out_dir / f"{stem}_residues.txt"
    table_path.write_text(format_table(report.residues), encoding="utf-8")
    written.append(table_path)

    residue_csv = out_dir / f"{stem}_residues.csv"
    write_residue_csv(report, residue_csv)
    written.append(residue_csv)

    if summary["sweep"]:
        sweep_path = out_dir / f"{stem}_window_sweep.txt"
        sweep_path.write_text(format_window_sweep(summary["sweep"]), encoding="utf-8")
        written.append(sweep_path)

    config_path = out_dir / "config.json"
    config_path.write_text(dumps(config.to_json_dict()), encoding="utf-8")
    written.append(config_path)

    logger.info(f"✅ figure {stem}: {len(written)} files written to {out_dir}")
    return written


def tau_text(tau: TauPrimeSeq, output_format: str = "csv") -> str:
    """tau(p_n) as CSV (n, p_n, tau_p) or canonical JSON"""
    if output_format == "json":
        return dumps(tau.to_json_dict())
    frame = pd.DataFrame({
        "n": range(1, tau.nmax + 1),
        "p_n": list(tau.primes[:tau.nmax]),
        "tau_p": [str(v) for v in tau.values],
    })
    return frame.to_csv(index=False, lineterminator="\n")


@dataclass
class VerifyOptions:
    nmax: int = 25
    random_trials: int = 200
    random_nmax: int = 25
    closed_form_trials: int = 20
    closed_form_nmax: int = 15
    minor_trials: int = 50
    minor_nmax: int = 8
    too_good_nmax: int = 6
    poly_nmax: int = 60
    lehmer_nmax: int = 400
    tau_check_limit: int = 1000
    seed: int = 0
    corrupt_tau_index: Optional[int] = None


@dataclass
class VerifyReport:
    suites: List[IdentityReport] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites)

    @property
    def first_failure(self) -> Optional[Dict[str, Any]]:
        for suite in self.suites:
            if not suite.passed:
                return {"suite": suite.name, **(suite.first_failure or {})}
        return None

    @property
    def exit_status(self) -> int:
        return 0 if self.passed else 1

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "first_failure": self.first_failure,
            "suites": [s.to_json_dict() for s in self.suites],
            "errors": error_handler.get_error_statistics(),
        }


def build_tau_table(limit: int, corrupt_index: Optional[int] = None) -> TauTable:
    table = tau_series(limit)
    if corrupt_index is None:
        return table
    if not 1 <= corrupt_index <= limit:
        raise SpectraError(
            message=f"corrupt_tau_index {corrupt_index} outside 1..{limit}",
            error_type=ErrorType.CONFIG_ERROR,
        )
    values = list(table.values)
    values[corrupt_index - 1] += 1
    logger.warning(f"⚠️ tau({corrupt_index}) deliberately corrupted")
    return TauTable(nmax=limit, values=tuple(values))


def _run_suite(report: VerifyReport, name: str, suite, *args, **kwargs):
    try:
        result = suite(*args, **kwargs)
    except Exception as e:
        error = error_handler.wrap(e, {"suite": name})
        error_handler.log_error(error)
        result = IdentityReport(name=name)
        result.record(False, error=error.message, error_type=error.error_type.value)
    result.name = name
    report.suites.append(result)
    status = "✅" if result.passed else "❌"
    logger.info(f"{status} {name}: {result.checked} checks")
    return result


def run_verify(options: Optional[VerifyOptions] = None) -> VerifyReport:
    """Every exact identity suite; the report's exit_status is the gate"""
    options = options or VerifyOptions()
    report = VerifyReport()
    lehmer_nmax = max(options.lehmer_nmax, options.nmax, options.poly_nmax)
    primes = first_primes(lehmer_nmax)
    limit = max(options.tau_check_limit, primes.nth(lehmer_nmax))
    table = build_tau_table(limit, options.corrupt_tau_index)
    tau = TauPrimeSeq(nmax=lehmer_nmax, primes=primes.primes,
                      values=tuple(table[p] for p in primes.primes))
    nmax = options.nmax
    h_tau = tau_p_as_h(tau.values[:nmax])
    j_tau = tau_p_as_j(tau.values[:nmax])

    _run_suite(report, "tau_table", check_tau_table, table, options.tau_check_limit)
    _run_suite(report, "d_relation_h_is_tau", lambda: check_d_relation(h_tau, j_from_h(h_tau, nmax), nmax))
    _run_suite(report, "d_relation_j_is_tau", lambda: check_d_relation(h_from_j(j_tau, nmax), j_tau, nmax))
    _run_suite(report, "determinant_identities_tau", verify_lemma22, h_tau, nmax, False)
    _run_suite(report, "determinant_identities_random", determinant_identity_trials,
               options.random_trials, options.random_nmax, options.seed)
    for family, source in ((MatrixFamily.J, j_from_h(h_tau, nmax)), (MatrixFamily.H, h_tau)):
        for c in (0, 1):
            _run_suite(report, f"deformation_{family.value}_c{c}", check_deformation_consistency,
                       family, source, c, nmax)
    _run_suite(report, "closed_form_three_way", check_three_way, tau, options.poly_nmax)
    _run_suite(report, "closed_form_random", check_closed_form_random,
               options.closed_form_trials, options.closed_form_nmax, options.seed)
    _run_suite(report, "principal_minors_random", check_principal_minors_random,
               options.minor_trials, options.minor_nmax, options.seed)
    _run_suite(report, "too_good", check_too_good, tau, options.too_good_nmax)
    _run_suite(report, "lehmer", lehmer_check, lehmer_nmax, tau, options.poly_nmax)

    if report.passed:
        logger.info(f"✅ all {len(report.suites)} identity suites passed")
    else:
        logger.error(f"❌ verification failed: {report.first_failure}")
    return report
