"""
Newton-type convolution between an H-role sequence (h_0 = 1, h_1, ...) and a
J-role sequence (j_1, j_2, ...):

    n h_n = sum_{r=1}^{n} j_r h_{n-r}          (convolution form)
    t H'(t) = H(t) J(t)                         (generating-function form)

Both directions are solved with exact rationals.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, Any, Iterable, List, Sequence, Tuple, Union

from error_handler import ErrorType, IdentityReport, SpectraError
from exact_codec import encode_rational, decode_rational

logger = logging.getLogger(__name__)

Scalar = Union[int, Fraction]


class SeqRole(Enum):
    """H-role sequences start at index 0 with value 1; J-role start at index 1"""
    H = "H"
    J = "J"


@dataclass(frozen=True)
class ExactSeq:
    role: SeqRole
    values: Tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(Fraction(v) for v in self.values))
        if self.role == SeqRole.H and (not self.values or self.values[0] != 1):
            raise SpectraError(
                message="H-role sequence must start with h_0 = 1",
                error_type=ErrorType.ROLE_MISMATCH,
                context={"h0": self.values[0] if self.values else None},
            )

    @classmethod
    def h_role(cls, tail: Iterable[Scalar]) -> "ExactSeq":
        """H-role sequence (1, h_1, h_2, ...) from h_1, h_2, ..."""
        return cls(SeqRole.H, (Fraction(1),) + tuple(Fraction(v) for v in tail))

    @classmethod
    def j_role(cls, values: Iterable[Scalar]) -> "ExactSeq":
        return cls(SeqRole.J, tuple(Fraction(v) for v in values))

    @property
    def start(self) -> int:
        return 0 if self.role == SeqRole.H else 1

    @property
    def last_index(self) -> int:
        return self.start + len(self.values) - 1

    def __getitem__(self, index: int) -> Fraction:
        if index < self.start or index > self.last_index:
            raise SpectraError(
                message=f"{self.role.value}-sequence has no entry {index} "
                        f"(defined for {self.start}..{self.last_index})",
                error_type=ErrorType.INCOMPLETE_INPUT,
                context={"index": index, "last_index": self.last_index},
            )
        return self.values[index - self.start]

    def require(self, last: int, what: str = "operation"):
        if self.last_index < last:
            raise SpectraError(
                message=f"{what} needs {self.role.value}-sequence entries through {last}, "
                        f"have {self.last_index}",
                error_type=ErrorType.INCOMPLETE_INPUT,
                context={"needed": last, "last_index": self.last_index},
            )

    def tail(self) -> List[Fraction]:
        """Entries from index 1 on"""
        return list(self.values[1:] if self.role == SeqRole.H else self.values)

    def truncated(self, last: int) -> "ExactSeq":
        self.require(last, "truncation")
        return ExactSeq(self.role, self.values[: last - self.start + 1])

    def deformed(self, c: Scalar) -> "ExactSeq":
        """Sequence with c prepended at index 1: (c, s_1, s_2, ...)"""
        tail = [Fraction(c)] + self.tail()
        if self.role == SeqRole.H:
            return ExactSeq.h_role(tail)
        return ExactSeq.j_role(tail)

    @property
    def is_integral(self) -> bool:
        return all(v.denominator == 1 for v in self.values)

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "role": self.role.value,
            "entries": {str(self.start + i): encode_rational(v) for i, v in enumerate(self.values)},
        }

    @classmethod
    def from_json_dict(cls, data: Dict[str, Any]) -> "ExactSeq":
        role = SeqRole(data["role"])
        entries = sorted((int(k), decode_rational(v)) for k, v in data["entries"].items())
        return cls(role, tuple(v for _, v in entries))


def _require_role(seq: ExactSeq, role: SeqRole, what: str):
    if seq.role != role:
        raise SpectraError(
            message=f"{what} needs a {role.value}-role sequence, got {seq.role.value}",
            error_type=ErrorType.ROLE_MISMATCH,
        )


def j_from_h(h: ExactSeq, nmax: int) -> ExactSeq:
    """j_n = n h_n - sum_{r=1}^{n-1} j_r h_{n-r}"""
    _require_role(h, SeqRole.H, "j_from_h")
    h.require(nmax, "j_from_h")
    hs = h.values
    j: List[Fraction] = [Fraction(0)]  # j[0] unused
    for n in range(1, nmax + 1):
        acc = n * hs[n]
        for r in range(1, n):
            acc -= j[r] * hs[n - r]
        j.append(acc)
    return ExactSeq.j_role(j[1:])


def h_from_j(j: ExactSeq, nmax: int) -> ExactSeq:
    """h_0 = 1, h_n = (1/n) sum_{r=1}^{n} j_r h_{n-r}"""
    _require_role(j, SeqRole.J, "h_from_j")
    j.require(nmax, "h_from_j")
    js = (Fraction(0),) + j.values
    h: List[Fraction] = [Fraction(1)]
    for n in range(1, nmax + 1):
        acc = Fraction(0)
        for r in range(1, n + 1):
            acc += js[r] * h[n - r]
        h.append(acc / n)
    return ExactSeq(SeqRole.H, tuple(h))


def _series(seq: ExactSeq, order: int) -> List[Fraction]:
    """Dense coefficient list c_0..c_order of the sequence's generating function"""
    coeffs = [Fraction(0)] * (order + 1)
    for index in range(seq.start, min(order, seq.last_index) + 1):
        coeffs[index] = seq[index]
    return coeffs


def _truncated_product(a: Sequence[Fraction], b: Sequence[Fraction], order: int) -> List[Fraction]:
    out = [Fraction(0)] * (order + 1)
    for i, ai in enumerate(a[: order + 1]):
        if ai:
            for k, bk in enumerate(b[: order + 1 - i]):
                out[i + k] += ai * bk
    return out


def verify_d2(h: ExactSeq, j: ExactSeq, order: int) -> bool:
    """t H'(t) == H(t) J(t) through t^order, as formal power series"""
    _require_role(h, SeqRole.H, "verify_d2")
    _require_role(j, SeqRole.J, "verify_d2")
    h.require(order, "verify_d2")
    j.require(order, "verify_d2")
    hs = _series(h, order)
    js = _series(j, order)
    lhs = [n * c for n, c in enumerate(hs)]
    rhs = _truncated_product(hs, js, order)
    return lhs == rhs


def check_d_relation(h: ExactSeq, j: ExactSeq, nmax: int,
                     name: str = "d_relation") -> IdentityReport:
    """Convolution and generating-function forms, h_1 = j_1, integrality"""
    h.require(nmax, name)
    j.require(nmax, name)
    report = IdentityReport(name=name)
    hs = h.values
    js = (Fraction(0),) + j.values
    for n in range(1, nmax + 1):
        rhs = sum((js[r] * hs[n - r] for r in range(1, n + 1)), Fraction(0))
        report.record(n * hs[n] == rhs, identity="n h_n = sum j_r h_(n-r)", n=n,
                      lhs=n * hs[n], rhs=rhs)
    report.record(verify_d2(h, j, nmax), identity="t H' = H J", order=nmax)
    report.record(hs[1] == js[1], identity="h_1 = j_1", h1=hs[1], j1=js[1])
    if h.truncated(nmax).is_integral:
        report.record(j.truncated(nmax).is_integral, identity="integral h gives integral j")
    return report


def random_h_sequence(rng, nmax: int, low: int = -100, high: int = 100) -> ExactSeq:
    """Random integer H-role sequence with entries in [low, high]"""
    return ExactSeq.h_role(rng.randint(low, high) for _ in range(nmax))


def random_j_sequence(rng, nmax: int, low: int = -100, high: int = 100) -> ExactSeq:
    return ExactSeq.j_role(rng.randint(low, high) for _ in range(nmax))


def tau_p_as_h(values: Sequence[int]) -> ExactSeq:
    """h_0 = 1, h_n = tau_p(n)"""
    return ExactSeq.h_role(values)


def tau_p_as_j(values: Sequence[int]) -> ExactSeq:
    """j_n = tau_p(n)"""
    return ExactSeq.j_role(values)

