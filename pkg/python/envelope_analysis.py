"""
Lower envelopes of min-modulus series and their residue tables.

An abscissa n is on the lower envelope when its value is strictly below every
other available value within distance `window`. Equal values inside the window
go to the smaller n and are listed as ties.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from error_handler import ErrorType, SpectraError

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = 1
DEFAULT_MODULUS = 4
TABLE_COLUMNS = 9

# Published residue tables (rows of nine), envelope of the deformed J series
# and of the deformed H series respectively.
REFERENCE_J_ROWS = (
    "1 1 1 1 1 1 1 1 1",
    "1 2 2 2 2 2 2 2 2",
    "2 3 3 3 3 3 3 3 3",
    "3 0 0 0 0 0 0 0 0",
    "0 1 1 1 1 1 1 1 1",
    "1 2 2 2 2 2 2 2 2",
    "2 3 3 3 3 3 3 3 3",
    "3 0 0 0 0 0 0 0 0",
    "0 1 1 1 1 1 1 1 1",
    "1 2 2 2 2 2 2 2 2",
    "2 3 3 3 3 3",
)
REFERENCE_H_ROWS = (
    "0 0 2 2 3 3 3 3 3",
    "0 0 0 0 0 1 1 1 1",
    "1 1 2 2 2 2 2 3 3",
    "3 3 3 3 0 0 0 0 0",
    "1 1 1 1 1 1 2 2 2",
    "2 2 2 2 3 3 3",
)


def _flatten(rows: Sequence[str]) -> Tuple[int, ...]:
    return tuple(int(token) for row in rows for token in row.split())


REFERENCE_TABLES = {
    "J": _flatten(REFERENCE_J_ROWS),
    "H": _flatten(REFERENCE_H_ROWS),
}

Point = Tuple[int, Any]


@dataclass
class EnvelopeScan:
    """Envelope abscissas plus what was left out and which ties were broken"""
    window: int
    abscissas: List[int]
    excluded: List[Dict[str, Any]] = field(default_factory=list)
    ties: List[Tuple[int, int]] = field(default_factory=list)


@dataclass
class EnvelopeReport:
    source: str
    window: int
    modulus: int
    abscissas: List[int]
    residues: List[int]
    blocks: List[Tuple[int, int]]
    excluded: List[Dict[str, Any]] = field(default_factory=list)
    ties: List[Tuple[int, int]] = field(default_factory=list)

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.abscissas, self.abscissas[1:])):
            raise SpectraError(
                message="envelope abscissas must be strictly increasing",
                error_type=ErrorType.CONFIG_ERROR,
                context={"source": self.source},
            )

    @property
    def cycle(self) -> List[int]:
        return residue_cycle(self.blocks)

    @property
    def differences(self) -> List[int]:
        return [b - a for a, b in zip(self.abscissas, self.abscissas[1:])]

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "source": self.source,
            "window": self.window,
            "modulus": self.modulus,
            "abscissas": self.abscissas,
            "residues": self.residues,
            "blocks": [[r, length] for r, length in self.blocks],
            "cycle": self.cycle,
            "excluded": self.excluded,
            "ties": [list(t) for t in self.ties],
        }


def _is_valid(value: Any) -> bool:
    try:
        return math.isfinite(float(value))
    except (TypeError, ValueError, OverflowError):
        return False


def scan_envelope(series: Sequence[Point], window: int = DEFAULT_WINDOW,
                  unstable: Sequence[int] = ()) -> EnvelopeScan:
    """Strict local minima of a series contiguous in n, NaN and unstable points left out"""
    if window < 1:
        raise SpectraError(
            message=f"envelope window must be >= 1, got {window}",
            error_type=ErrorType.CONFIG_ERROR,
            context={"window": window},
        )
    ns = [n for n, _ in series]
    if any(b != a + 1 for a, b in zip(ns, ns[1:])):
        raise SpectraError(
            message="envelope needs a series contiguous in n",
            error_type=ErrorType.INCOMPLETE_INPUT,
            context={"first": ns[0] if ns else None, "last": ns[-1] if ns else None},
        )

    scan = EnvelopeScan(window=window, abscissas=[])
    skip = set(unstable)
    values: Dict[int, Any] = {}
    for n, value in series:
        if not _is_valid(value):
            scan.excluded.append({"n": n, "reason": "not finite"})
        elif n in skip:
            scan.excluded.append({"n": n, "reason": "unstable"})
        else:
            values[n] = value
    if scan.excluded:
        logger.warning(f"⚠️ {len(scan.excluded)} series points left out of the envelope: "
                       f"{[e['n'] for e in scan.excluded]}")

    for n, value in values.items():
        qualifies = True
        for m in range(n - window, n + window + 1):
            if m == n or m not in values:
                continue
            other = values[m]
            if value == other:
                if m > n:
                    scan.ties.append((n, m))
                else:
                    qualifies = False
            elif other < value:
                qualifies = False
        if qualifies:
            scan.abscissas.append(n)
    if scan.ties:
        logger.info(f"envelope ties broken toward smaller n: {scan.ties}")
    return scan


def lower_envelope(series: Sequence[Point], window: int = DEFAULT_WINDOW) -> List[int]:
    return scan_envelope(series, window).abscissas


def run_length_encode(values: Sequence[int]) -> List[Tuple[int, int]]:
    blocks: List[Tuple[int, int]] = []
    for value in values:
        if blocks and blocks[-1][0] == value:
            blocks[-1] = (value, blocks[-1][1] + 1)
        else:
            blocks.append((value, 1))
    return blocks


def residue_cycle(blocks: Sequence[Tuple[int, int]]) -> List[int]:
    """Residues in the order their blocks appear"""
    return [residue for residue, _ in blocks]


def residue_table(abscissas: Sequence[int], modulus: int = DEFAULT_MODULUS,
                  source: str = "", window: int = DEFAULT_WINDOW,
                  scan: Optional[EnvelopeScan] = None) -> EnvelopeReport:
    if modulus < 2:
        raise SpectraError(
            message=f"residue modulus must be >= 2, got {modulus}",
            error_type=ErrorType.CONFIG_ERROR,
            context={"modulus": modulus},
        )
    residues = [n % modulus for n in abscissas]
    return EnvelopeReport(
        source=source,
        window=window,
        modulus=modulus,
        abscissas=list(abscissas),
        residues=residues,
        blocks=run_length_encode(residues),
        excluded=list(scan.excluded) if scan else [],
        ties=list(scan.ties) if scan else [],
    )


def block_summary(report: EnvelopeReport) -> List[Tuple[int, int]]:
    """(residue, run length) blocks; the cycle order is report.cycle"""
    return run_length_encode(report.residues)


def envelope_report(series: Sequence[Point], window: int = DEFAULT_WINDOW,
                    modulus: int = DEFAULT_MODULUS, source: str = "",
                    unstable: Sequence[int] = ()) -> EnvelopeReport:
    scan = scan_envelope(series, window, unstable)
    return residue_table(scan.abscissas, modulus, source=source, window=window, scan=scan)


def window_sweep(series: Sequence[Point], windows: Sequence[int],
                 modulus: int = DEFAULT_MODULUS, source: str = "",
                 unstable: Sequence[int] = ()) -> List[EnvelopeReport]:
    """One report per window; larger windows only thin the envelope"""
    return [envelope_report(series, w, modulus, source, unstable) for w in windows]


def block_structure(report: EnvelopeReport) -> Dict[str, Any]:
    """Lengths of the first block, the interior blocks, and the trailing (possibly cut) block"""
    lengths = [length for _, length in report.blocks]
    return {
        "window": report.window,
        "points": len(report.abscissas),
        "first_block": lengths[0] if lengths else None,
        "interior_blocks": sorted(set(lengths[1:-1])),
        "last_block": lengths[-1] if len(lengths) > 1 else None,
        "differences": sorted(set(report.differences)),
        "cycle_regular": all((b - a) % report.modulus == 1
                             for a, b in zip(report.cycle, report.cycle[1:])),
    }


def format_window_sweep(reports: Sequence[EnvelopeReport]) -> str:
    lines = ["window  points  first  interior  last  differences  regular"]
    for report in reports:
        s = block_structure(report)
        lines.append(
            f"{s['window']:>6}  {s['points']:>6}  {str(s['first_block']):>5}  "
            f"{','.join(map(str, s['interior_blocks'])) or '-':>8}  {str(s['last_block']):>4}  "
            f"{','.join(map(str, s['differences'])) or '-':>11}  {'yes' if s['cycle_regular'] else 'no':>7}"
        )
    return "\n".join(lines) + "\n"


def common_prefix_length(a: Sequence[int], b: Sequence[int]) -> int:
    length = 0
    for x, y in zip(a, b):
        if x != y:
            break
        length += 1
    return length


def compare_reference(report: EnvelopeReport, family: str) -> Dict[str, Any]:
    """How far the computed residues agree with the published table for `family`"""
    reference = REFERENCE_TABLES[family]
    prefix = common_prefix_length(report.residues, reference)
    return {
        "family": family,
        "reference_length": len(reference),
        "computed_length": len(report.residues),
        "common_prefix": prefix,
        "consistent": prefix == min(len(reference), len(report.residues)),
    }


def format_table(residues: Sequence[int], columns: int = TABLE_COLUMNS) -> str:
    """Aligned rows of `columns` residues"""
    rows = []
    for start in range(0, len(residues), columns):
        rows.append(" ".join(f"{r:>2}" for r in residues[start:start + columns]).rstrip())
    return "\n".join(rows) + "\n"


def write_residue_csv(report: EnvelopeReport, path: Path):
    frame = pd.DataFrame({"abscissa": report.abscissas, "residue": report.residues},
                         columns=["abscissa", "residue"])
    frame.to_csv(path, index=False, lineterminator="\n")
