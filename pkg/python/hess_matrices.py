"""
Lower Hessenberg matrix families built from J-role and H-role sequences.

    J_n(j):  entry(i,k) = j_{i-k+1} for k <= i,  entry(i,i+1) = -i
    H_n(h):  entry(i,1) = i h_i,  entry(i,k) = h_{i-k+1} for 2 <= k <= i,
             entry(i,i+1) = 1

A deformation by c builds the same layout from the sequence (c, s_1, s_2, ...).
Determinants are exact: the matrix is scaled to integers by the lcm of its
denominators and reduced with Bareiss' fraction-free elimination.
"""

import logging
import math
import random
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import combinations
from typing import Dict, Any, List, Optional, Sequence, Tuple, Union

from error_handler import ErrorType, IdentityReport, SpectraError
from exact_codec import encode_rational
from newton_d import ExactSeq, SeqRole, j_from_h, random_h_sequence

logger = logging.getLogger(__name__)

Scalar = Union[int, Fraction]


class MatrixFamily(Enum):
    J = "J"
    H = "H"


FAMILY_ROLE = {MatrixFamily.J: SeqRole.J, MatrixFamily.H: SeqRole.H}


@dataclass(frozen=True)
class MatrixSpec:
    """Descriptor of one family member: J_n(s), H_n(s) or their c-deformations"""
    family: MatrixFamily
    order: int
    source: ExactSeq
    deform: Optional[Fraction] = None

    def __post_init__(self):
        if self.deform is not None:
            object.__setattr__(self, "deform", Fraction(self.deform))
        if self.order < 1:
            raise SpectraError(
                message=f"matrix order must be >= 1, got {self.order}",
                error_type=ErrorType.EMPTY_DOMAIN,
                context={"order": self.order},
            )
        if self.source.role != FAMILY_ROLE[self.family]:
            raise SpectraError(
                message=f"{self.family.value} family needs a {FAMILY_ROLE[self.family].value}-role "
                        f"sequence, got {self.source.role.value}",
                error_type=ErrorType.ROLE_MISMATCH,
            )

    def with_order(self, order: int) -> "MatrixSpec":
        return MatrixSpec(self.family, order, self.source, self.deform)

    def effective_source(self) -> ExactSeq:
        """The sequence the layout actually reads (shifted when deformed)"""
        if self.deform is None:
            return self.source
        return self.source.deformed(self.deform)

    @property
    def label(self) -> str:
        c = "" if self.deform is None else f"^({self.deform})"
        return f"{self.family.value}{c}_{self.order}"


@dataclass(frozen=True)
class ExactMatrix:
    """Dense n x n grid of rationals; indices are 1-based in entry()"""
    rows: Tuple[Tuple[Fraction, ...], ...]

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Scalar]]) -> "ExactMatrix":
        grid = tuple(tuple(Fraction(x) for x in row) for row in rows)
        if any(len(row) != len(grid) for row in grid):
            raise SpectraError(
                message="matrix must be square",
                error_type=ErrorType.INCOMPLETE_INPUT,
                context={"shape": [len(row) for row in grid]},
            )
        return cls(grid)

    @property
    def n(self) -> int:
        return len(self.rows)

    def entry(self, i: int, k: int) -> Fraction:
        return self.rows[i - 1][k - 1]

    def leading(self, m: int) -> "ExactMatrix":
        """Top-left m x m block"""
        return ExactMatrix(tuple(row[:m] for row in self.rows[:m]))

    def principal(self, subset: Sequence[int]) -> "ExactMatrix":
        """M[S,S] for a 1-based index subset S"""
        return ExactMatrix(tuple(
            tuple(self.rows[i - 1][k - 1] for k in subset) for i in subset
        ))

    def is_lower_hessenberg(self) -> bool:
        return all(
            self.rows[i][k] == 0
            for i in range(self.n) for k in range(i + 2, self.n)
        )

    def common_denominator(self) -> int:
        d = 1
        for row in self.rows:
            for x in row:
                d = d * x.denominator // math.gcd(d, x.denominator)
        return d

    def scaled_integer(self) -> Tuple[int, List[List[int]]]:
        """(D, D*M) with D the lcm of all denominators"""
        d = self.common_denominator()
        return d, [[int(x * d) for x in row] for row in self.rows]

    def to_json_dict(self) -> Dict[str, Any]:
        return {"n": self.n, "rows": [[encode_rational(x) for x in row] for row in self.rows]}


def build(spec: MatrixSpec) -> ExactMatrix:
    """Dense realization of a family member"""
    n = spec.order
    seq = spec.effective_source()
    if seq.last_index < n:
        needed = n - 1 if spec.deform is not None else n
        raise SpectraError(
            message=f"{spec.label} needs {needed} source entries, "
                    f"sequence has {spec.source.last_index}",
            error_type=ErrorType.INCOMPLETE_INPUT,
            context={"family": spec.family.value, "order": n, "deform": spec.deform},
        )
    s = [Fraction(0)] + [seq[i] for i in range(1, n + 1)]
    zero = Fraction(0)
    rows = []
    for i in range(1, n + 1):
        row = [zero] * n
        for k in range(1, i + 1):
            if spec.family == MatrixFamily.H and k == 1:
                row[0] = i * s[i]
            else:
                row[k - 1] = s[i - k + 1]
        if i < n:
            row[i] = Fraction(-i) if spec.family == MatrixFamily.J else Fraction(1)
        rows.append(tuple(row))
    return ExactMatrix(tuple(rows))


def bareiss_det(grid: List[List[int]]) -> int:
    """Fraction-free Gaussian elimination on an integer matrix"""
    n = len(grid)
    if n == 0:
        return 1
    m = [list(row) for row in grid]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = m[k][k]
        row_k = m[k]
        for i in range(k + 1, n):
            row_i = m[i]
            lead = row_i[k]
            for j in range(k + 1, n):
                # exact division is guaranteed by Sylvester's identity
                row_i[j] = (pivot * row_i[j] - lead * row_k[j]) // prev
            row_i[k] = 0
        prev = pivot
    return sign * m[n - 1][n - 1]


def det_exact(m: ExactMatrix) -> Fraction:
    """|M| over the rationals"""
    d, grid = m.scaled_integer()
    return Fraction(bareiss_det(grid), d ** m.n)


def verify_lemma22(h: ExactSeq, nmax: int, keep_rows: bool = True,
                   name: str = "determinant_identities") -> IdentityReport:
    """n! h_n = |J_n(j)| and j_n = (-1)^(n+1) |H_n(h)| for 1 <= n <= nmax, j = j_from_h(h)"""
    j = j_from_h(h, nmax)
    big_j = build(MatrixSpec(MatrixFamily.J, nmax, j))
    big_h = build(MatrixSpec(MatrixFamily.H, nmax, h))
    report = IdentityReport(name=name)
    rows = []
    for n in range(1, nmax + 1):
        det_j = det_exact(big_j.leading(n))
        det_h = det_exact(big_h.leading(n))
        lhs_j = math.factorial(n) * h[n]
        signed_h = (-1) ** (n + 1) * det_h
        j_ok = report.record(lhs_j == det_j, identity="n! h_n = |J_n(j)|", n=n,
                             lhs=lhs_j, rhs=det_j)
        h_ok = report.record(j[n] == signed_h, identity="j_n = (-1)^(n+1) |H_n(h)|", n=n,
                             lhs=j[n], rhs=signed_h)
        if keep_rows:
            rows.append({
                "n": n,
                "factorial_h": encode_rational(lhs_j),
                "det_J": encode_rational(det_j),
                "j": encode_rational(j[n]),
                "signed_det_H": encode_rational(signed_h),
                "J_identity": j_ok,
                "H_identity": h_ok,
            })
    if keep_rows:
        report.details["rows"] = rows
    report.details["nmax"] = nmax
    return report


def determinant_identity_trials(trials: int, nmax: int, seed: int = 0) -> IdentityReport:
    """Determinant identities on random integer H-role sequences"""
    rng = random.Random(seed)
    report = IdentityReport(name="determinant_identities_random")
    for trial in range(trials):
        sub = verify_lemma22(random_h_sequence(rng, nmax), nmax, keep_rows=False)
        report.record(sub.passed, trial=trial, seed=seed, failure=sub.first_failure)
    report.details.update({"trials": trials, "nmax": nmax, "seed": seed})
    return report


def check_deformation_consistency(family: MatrixFamily, source: ExactSeq,
                                  c: Scalar, nmax: int) -> IdentityReport:
    """Deformed build equals the build from the explicitly shifted sequence"""
    report = IdentityReport(name=f"deformation_{family.value}")
    shifted = source.deformed(c)
    for n in range(1, nmax + 1):
        deformed = build(MatrixSpec(family, n, source, deform=Fraction(c)))
        explicit = build(MatrixSpec(family, n, shifted))
        report.record(deformed == explicit, n=n, c=c)
        report.record(deformed.is_lower_hessenberg(), identity="lower Hessenberg", n=n)
    return report


def principal_subsets(n: int, k: int):
    """All k-subsets of {1..n} in lexicographic order"""
    return combinations(range(1, n + 1), k)
