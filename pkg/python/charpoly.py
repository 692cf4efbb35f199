"""
Exact characteristic polynomials chi(M)(x) = |xI - M| of the matrix families.

Three independent routes:
  * leading-principal recurrence for lower Hessenberg matrices (one pass gives
    every order m <= n, since J_m / H_m are the top-left blocks of J_n / H_n)
  * Berkowitz' division-free algorithm (dense, any square matrix)
  * the closed form  a_{n,n-k} = (-1)^k k! C(n,k) h_k  for undeformed J_n(j)
    with j = j_from_h(h)

Rational matrices are scaled to integers by the lcm D of their denominators;
if q(y) = |yI - D M| then chi(M)(x) = D^-n q(D x).
"""

import logging
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Any, List, Optional, Sequence, Tuple, Union

from error_handler import ErrorType, IdentityReport, SpectraError
from exact_codec import encode_rational, decode_rationals, encode_rationals
from hess_matrices import (
    ExactMatrix, MatrixFamily, MatrixSpec, build, det_exact, principal_subsets,
)
from newton_d import ExactSeq, h_from_j, j_from_h, random_h_sequence, tau_p_as_h, tau_p_as_j
from seq_core import TauPrimeSeq

logger = logging.getLogger(__name__)

Scalar = Union[int, Fraction]

DEFAULT_ENUMERATION_BOUND = 12


@dataclass(frozen=True)
class ExactPoly:
    """Monic polynomial, coefficients ascending by power"""
    coeffs: Tuple[Fraction, ...]
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))
        if len(self.coeffs) < 2 or self.coeffs[-1] != 1:
            raise SpectraError(
                message=f"characteristic polynomial {self.label or ''} must be monic of degree >= 1",
                error_type=ErrorType.IDENTITY_FAILURE,
                context={"leading": self.coeffs[-1] if self.coeffs else None},
            )

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, power: int) -> Fraction:
        """Coefficient of x^power"""
        return self.coeffs[power]

    @property
    def constant_term(self) -> Fraction:
        return self.coeffs[0]

    def evaluate(self, x: Scalar) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __str__(self) -> str:
        terms = []
        for power in range(self.degree, -1, -1):
            c = self.coeffs[power]
            if c == 0:
                continue
            mono = "" if power == 0 else ("x" if power == 1 else f"x^{power}")
            if mono and abs(c) == 1:
                text = mono
            else:
                text = f"{abs(c)}{'*' if mono else ''}{mono}"
            terms.append(("- " if c < 0 else "+ ") + text)
        joined = " ".join(terms)
        return joined[2:] if joined.startswith("+ ") else "-" + joined[2:]

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "degree": self.degree,
            "label": self.label,
            "coefficients": encode_rationals(self.coeffs),
        }

    @classmethod
    def from_json_dict(cls, data: Dict[str, Any]) -> "ExactPoly":
        return cls(tuple(decode_rationals(data["coefficients"])), label=data.get("label", ""))


def _unscale(q: Sequence[int], d: int, label: str) -> ExactPoly:
    """Ascending integer coefficients of |yI - D M| -> chi(M)(x)"""
    m = len(q) - 1
    if d == 1:
        return ExactPoly(tuple(Fraction(c) for c in q), label=label)
    return ExactPoly(tuple(Fraction(c, d ** (m - k)) for k, c in enumerate(q)), label=label)


def _hessenberg_leading(grid: List[List[int]]) -> List[List[int]]:
    """|yI - N_m| for every leading block N_m of a lower Hessenberg integer matrix"""
    n = len(grid)
    polys: List[List[int]] = [[1]]
    for m in range(1, n + 1):
        prev = polys[m - 1]
        diag = grid[m - 1][m - 1]
        new = [0] + prev
        for t, c in enumerate(prev):
            new[t] -= diag * c
        chain = 1
        for i in range(m - 1, 0, -1):
            # chain = N_{i,i+1} N_{i+1,i+2} ... N_{m-1,m}
            chain *= grid[i - 1][i]
            if chain == 0:
                break
            weight = grid[m - 1][i - 1] * chain
            if weight:
                for t, c in enumerate(polys[i - 1]):
                    new[t] -= weight * c
        polys.append(new)
    return polys[1:]


def hessenberg_leading_charpolys(m: ExactMatrix, label: str = "") -> List[ExactPoly]:
    """chi of every leading block of a lower Hessenberg matrix, orders 1..n"""
    if not m.is_lower_hessenberg():
        raise SpectraError(
            message="leading-principal recurrence needs a lower Hessenberg matrix",
            error_type=ErrorType.INCOMPLETE_INPUT,
            context={"n": m.n},
        )
    d, grid = m.scaled_integer()
    return [
        _unscale(q, d, f"{label}_{order}" if label else "")
        for order, q in enumerate(_hessenberg_leading(grid), start=1)
    ]


def charpoly_family(template: MatrixSpec, nmax: int) -> List[ExactPoly]:
    """chi(M_m) for m = 1..nmax, M_m the order-m member of the template's family"""
    spec = template.with_order(nmax)
    matrix = build(spec)
    c = "" if spec.deform is None else f"^({spec.deform})"
    polys = hessenberg_leading_charpolys(matrix, label=f"{spec.family.value}{c}")
    logger.debug(f"charpoly family {spec.family.value}{c} computed through order {nmax}")
    return polys


def _berkowitz_stages(grid: List[List[int]]) -> List[List[int]]:
    """Descending coefficient vectors of |yI - A_r| for r = 1..n (division-free)"""
    n = len(grid)
    stages: List[List[int]] = []
    current = [1]
    for r in range(1, n + 1):
        a = grid[r - 1][r - 1]
        row = grid[r - 1][: r - 1]
        col = [grid[i][r - 1] for i in range(r - 1)]
        toeplitz = [1, -a]
        v = col
        for _ in range(r - 1):
            toeplitz.append(-sum(x * y for x, y in zip(row, v)))
            v = [sum(grid[i][k] * v[k] for k in range(r - 1)) for i in range(r - 1)]
        nxt = []
        for i in range(r + 1):
            acc = 0
            for j in range(max(0, i - len(toeplitz) + 1), min(i, r - 1) + 1):
                acc += toeplitz[i - j] * current[j]
            nxt.append(acc)
        current = nxt
        stages.append(current)
    return stages


def berkowitz_leading(m: ExactMatrix, label: str = "") -> List[ExactPoly]:
    """Berkowitz' leading-principal stages: chi of every top-left block"""
    d, grid = m.scaled_integer()
    return [
        _unscale(list(reversed(stage)), d, f"{label}_{order}" if label else "")
        for order, stage in enumerate(_berkowitz_stages(grid), start=1)
    ]


def charpoly_berkowitz(m: ExactMatrix, label: str = "") -> ExactPoly:
    """chi(M) by Berkowitz' algorithm"""
    return berkowitz_leading(m, label=label)[-1]


def closed_form_from_h(h: ExactSeq, n: int) -> ExactPoly:
    """sum_r C(n,r) r! h_r (-1)^r x^(n-r), the closed form of chi(J_n(j_from_h(h)))"""
    h.require(n, "closed-form characteristic polynomial")
    coeffs = [Fraction(0)] * (n + 1)
    for k in range(n + 1):
        coeffs[n - k] = (-1) ** k * math.factorial(k) * math.comb(n, k) * h[k]
    return ExactPoly(tuple(coeffs), label=f"closed_{n}")


def charpoly_closed_form(n: int, tau_p: TauPrimeSeq) -> ExactPoly:
    """Pi_n(x) from a_{n,n-k} = (-1)^k k! C(n,k) tau_p(k), tau_p(0) = 1"""
    return closed_form_from_h(tau_p_as_h(tau_p.values[:n]), n)


def principal_minor_sum(m: ExactMatrix, k: int,
                        bound: int = DEFAULT_ENUMERATION_BOUND) -> Fraction:
    """sum of |M[S,S]| over all #S = k"""
    _check_enumeration(m.n, bound)
    if k < 0 or k > m.n:
        raise SpectraError(
            message=f"subset size {k} outside 0..{m.n}",
            error_type=ErrorType.EMPTY_DOMAIN,
            context={"k": k, "n": m.n},
        )
    if k == 0:
        return Fraction(1)
    return sum((det_exact(m.principal(s)) for s in principal_subsets(m.n, k)), Fraction(0))


def _check_enumeration(n: int, bound: int):
    if n > bound:
        raise SpectraError(
            message=f"exhaustive principal-minor enumeration refused for n={n} (bound {bound})",
            error_type=ErrorType.ENUMERATION_LIMIT,
            context={"n": n, "bound": bound},
        )


def check_principal_minors(m: ExactMatrix, poly: Optional[ExactPoly] = None,
                           bound: int = DEFAULT_ENUMERATION_BOUND,
                           report: Optional[IdentityReport] = None) -> IdentityReport:
    """a_{n-k} = (-1)^k sum_{#S=k} |M[S,S]| for every k"""
    report = report or IdentityReport(name="principal_minors")
    poly = poly or charpoly_berkowitz(m)
    for k in range(m.n + 1):
        total = principal_minor_sum(m, k, bound)
        report.record(poly.coeff(m.n - k) == (-1) ** k * total,
                      identity="a_(n-k) = (-1)^k sum |M[S,S]|", n=m.n, k=k,
                      coefficient=poly.coeff(m.n - k), minor_sum=total)
    return report


@dataclass
class TooGoodReport:
    """Per-subset minors of J_n(j_tau_p) against both candidate targets"""
    n: int
    k: int
    minors: List[Tuple[Tuple[int, ...], Fraction]]
    target_plain: Fraction
    target_signed: Fraction
    minor_sum: Fraction
    expected_sum: Fraction
    mismatches: List[Tuple[int, ...]] = field(default_factory=list)

    @property
    def all_match_plain(self) -> bool:
        return all(v == self.target_plain for _, v in self.minors)

    @property
    def all_match_signed(self) -> bool:
        return all(v == self.target_signed for _, v in self.minors)

    @property
    def all_match_either(self) -> bool:
        return not self.mismatches

    @property
    def sum_ok(self) -> bool:
        return self.minor_sum == self.expected_sum

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "k": self.k,
            "minors": [{"subset": list(s), "value": encode_rational(v)} for s, v in self.minors],
            "target_plain": encode_rational(self.target_plain),
            "target_signed": encode_rational(self.target_signed),
            "all_match_plain": self.all_match_plain,
            "all_match_signed": self.all_match_signed,
            "all_match_either": self.all_match_either,
            "mismatches": [list(s) for s in self.mismatches],
            "minor_sum": encode_rational(self.minor_sum),
            "expected_sum": encode_rational(self.expected_sum),
            "sum_ok": self.sum_ok,
        }


def too_good_check(n: int, k: int, tau_p: TauPrimeSeq,
                   bound: int = DEFAULT_ENUMERATION_BOUND,
                   matrix: Optional[ExactMatrix] = None) -> TooGoodReport:
    """Does every #S = k principal minor of J_n(j_tau_p) equal +-k! tau_p(k)?"""
    _check_enumeration(n, bound)
    if matrix is None:
        h = tau_p_as_h(tau_p.values[:n])
        matrix = build(MatrixSpec(MatrixFamily.J, n, j_from_h(h, n)))
    h_k = Fraction(1) if k == 0 else Fraction(tau_p[k])
    target_plain = math.factorial(k) * h_k
    target_signed = (-1) ** k * target_plain
    minors = []
    mismatches = []
    for subset in principal_subsets(n, k):
        value = det_exact(matrix.principal(subset)) if k else Fraction(1)
        minors.append((subset, value))
        if value != target_plain and value != target_signed:
            mismatches.append(subset)
    minor_sum = sum((v for _, v in minors), Fraction(0))
    return TooGoodReport(
        n=n, k=k, minors=minors,
        target_plain=target_plain, target_signed=target_signed,
        minor_sum=minor_sum,
        expected_sum=math.factorial(k) * math.comb(n, k) * h_k,
        mismatches=mismatches,
    )


def find_too_good_counterexample(tau_p: TauPrimeSeq, max_n: int = 6) -> Optional[TooGoodReport]:
    """Smallest (n, k), n first, where some minor matches neither target"""
    h = tau_p_as_h(tau_p.values[:max_n])
    big = build(MatrixSpec(MatrixFamily.J, max_n, j_from_h(h, max_n)))
    for n in range(1, max_n + 1):
        for k in range(n + 1):
            report = too_good_check(n, k, tau_p, matrix=big.leading(n))
            if not report.all_match_either:
                logger.info(f"too-good counterexample: n={n}, k={k}, subsets {report.mismatches}")
                return report
    return None


def check_too_good(tau_p: TauPrimeSeq, max_n: int = 6) -> IdentityReport:
    """Subset-sum identity for every (n, k) plus the per-subset counterexample"""
    report = IdentityReport(name="too_good")
    h = tau_p_as_h(tau_p.values[:max_n])
    big = build(MatrixSpec(MatrixFamily.J, max_n, j_from_h(h, max_n)))
    for n in range(1, max_n + 1):
        for k in range(n + 1):
            sub = too_good_check(n, k, tau_p, matrix=big.leading(n))
            report.record(sub.sum_ok, identity="sum_{#S=k} |J[S,S]| = k! C(n,k) tau_p(k)",
                          n=n, k=k, minor_sum=sub.minor_sum, expected=sub.expected_sum)
    counterexample = find_too_good_counterexample(tau_p, max_n)
    report.record(counterexample is not None, identity="per-subset counterexample exists",
                  max_n=max_n)
    if counterexample is not None:
        report.details["counterexample"] = counterexample.to_json_dict()
    return report


def check_three_way(tau_p: TauPrimeSeq, nmax: int) -> IdentityReport:
    """Recurrence, Berkowitz and closed form agree; constant term is (-1)^n |J_n|"""
    report = IdentityReport(name="closed_form_three_way")
    h = tau_p_as_h(tau_p.values[:nmax])
    spec = MatrixSpec(MatrixFamily.J, nmax, j_from_h(h, nmax))
    family = charpoly_family(spec, nmax)
    big = build(spec)
    referee = berkowitz_leading(big)
    for n in range(1, nmax + 1):
        closed = closed_form_from_h(h, n)
        report.record(family[n - 1].coeffs == referee[n - 1].coeffs,
                      identity="recurrence = Berkowitz", n=n)
        report.record(family[n - 1].coeffs == closed.coeffs,
                      identity="recurrence = closed form", n=n)
        report.record(family[n - 1].constant_term == (-1) ** n * det_exact(big.leading(n)),
                      identity="chi(0) = (-1)^n |M|", n=n)
    report.details["nmax"] = nmax
    return report


def check_closed_form_random(trials: int, nmax: int, seed: int = 0) -> IdentityReport:
    """chi(J_n(j_from_h(h))) matches the closed form for random integer h"""
    rng = random.Random(seed)
    report = IdentityReport(name="closed_form_random")
    for trial in range(trials):
        h = random_h_sequence(rng, nmax)
        family = charpoly_family(MatrixSpec(MatrixFamily.J, nmax, j_from_h(h, nmax)), nmax)
        for n in range(1, nmax + 1):
            report.record(family[n - 1].coeffs == closed_form_from_h(h, n).coeffs,
                          trial=trial, n=n, seed=seed)
    report.details.update({"trials": trials, "nmax": nmax, "seed": seed})
    return report


def random_integer_matrix(rng, n: int, low: int = -9, high: int = 9) -> ExactMatrix:
    return ExactMatrix.from_rows([[rng.randint(low, high) for _ in range(n)] for _ in range(n)])


def check_principal_minors_random(trials: int, nmax: int = 8, seed: int = 0) -> IdentityReport:
    """Coefficients equal signed principal-minor sums on random dense matrices"""
    rng = random.Random(seed)
    report = IdentityReport(name="principal_minors_random")
    for trial in range(trials):
        n = rng.randint(1, nmax)
        check_principal_minors(random_integer_matrix(rng, n), report=report)
    report.details.update({"trials": trials, "nmax": nmax, "seed": seed})
    return report


def lehmer_check(nmax: int, tau_p: TauPrimeSeq, poly_nmax: Optional[int] = None) -> IdentityReport:
    """tau_p(n) != 0 for n <= nmax; Pi_n(0) = (-1)^n n! tau_p(n) for n <= poly_nmax.

    Also records |J_n(j)| = n! tau_p(n) (j from h = tau_p) and
    |H_n(h)| = (-1)^(n+1) tau_p(n) (h from j = tau_p): both matrices are
    singular exactly when tau_p(n) = 0.
    """
    report = IdentityReport(name="lehmer")
    zeros = [n for n in range(1, nmax + 1) if tau_p[n] == 0]
    for n in range(1, nmax + 1):
        if not report.record(tau_p[n] != 0, identity="tau(p_n) != 0", n=n, p=tau_p.primes[n - 1]):
            logger.critical(f"🚨 tau(p_{n}) = tau({tau_p.primes[n - 1]}) = 0")

    poly_nmax = min(nmax, poly_nmax if poly_nmax is not None else nmax)
    constant_terms = []
    if poly_nmax >= 1:
        values = tau_p.values[:poly_nmax]
        h = tau_p_as_h(values)
        pis = charpoly_family(MatrixSpec(MatrixFamily.J, poly_nmax, j_from_h(h, poly_nmax)), poly_nmax)
        h_rev = h_from_j(tau_p_as_j(values), poly_nmax)
        psis = charpoly_family(MatrixSpec(MatrixFamily.H, poly_nmax, h_rev), poly_nmax)
        for n in range(1, poly_nmax + 1):
            expected = (-1) ** n * math.factorial(n) * tau_p[n]
            pi0 = pis[n - 1].constant_term
            report.record(pi0 == expected, identity="Pi_n(0) = (-1)^n n! tau_p(n)", n=n,
                          lhs=pi0, rhs=expected)
            det_j = (-1) ** n * pi0
            det_h = (-1) ** n * psis[n - 1].constant_term
            report.record(det_h == (-1) ** (n + 1) * tau_p[n],
                          identity="|H_n(h)| = (-1)^(n+1) tau_p(n)", n=n, det_H=det_h)
            constant_terms.append({
                "n": n,
                "Pi_n(0)": encode_rational(pi0),
                "det_J": encode_rational(det_j),
                "det_H": encode_rational(det_h),
            })
    report.details.update({
        "nmax": nmax,
        "poly_nmax": poly_nmax,
        "zeros": zeros,
        "constant_terms": constant_terms,
    })
    if not zeros:
        logger.info(f"✅ no zero of tau(p_n) for n <= {nmax}")
    return report
