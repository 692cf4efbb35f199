"""
Multiprecision root finding for exact characteristic polynomials.

All complex roots come from Aberth-Ehrlich simultaneous iteration inside a
private mpmath context, one per task, with Gauss-Seidel updates. Values are
evaluated by compensated Horner: each step's product is formed exactly and its
rounding error is carried in a second Horner sweep.

The minimum modulus of a series of polynomials is certified by precision
escalation: solve at `start_bits`, double, and stop when two consecutive
levels agree to `target_digits`. Lower-precision roots seed the next level.
"""

import logging
import math
from concurrent.futures import Executor
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import mpmath

from charpoly import ExactPoly
from error_handler import ErrorType, SpectraError, error_handler
from exact_codec import decode_mpc, decode_mpf, encode_mpc, encode_mpf

logger = logging.getLogger(__name__)

DEFAULT_TARGET_DIGITS = 30
DEFAULT_START_BITS = 384
DEFAULT_CAP_BITS = 6144

# radians; keeps the first guess of every circle off the real axis
ANGLE_OFFSET = 0.4


def make_context(bits: int) -> mpmath.MPContext:
    ctx = mpmath.MPContext()
    ctx.prec = bits
    return ctx


@dataclass
class RootSet:
    """All roots of one polynomial at one working precision"""
    degree: int
    roots: List[Any]
    residuals: List[Any]
    precision_bits: int
    converged: bool
    iterations: int = 0

    def __post_init__(self):
        if len(self.roots) != self.degree:
            raise SpectraError(
                message=f"root set holds {len(self.roots)} roots for degree {self.degree}",
                error_type=ErrorType.CACHE_CORRUPTION,
                context={"degree": self.degree, "precision_bits": self.precision_bits},
            )

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "degree": self.degree,
            "precision_bits": self.precision_bits,
            "converged": self.converged,
            "iterations": self.iterations,
            "roots": [encode_mpc(z) for z in self.roots],
            "residuals": [encode_mpf(r) for r in self.residuals],
        }

    @classmethod
    def from_json_dict(cls, data: Dict[str, Any]) -> "RootSet":
        ctx = make_context(int(data["precision_bits"]))
        return cls(
            degree=int(data["degree"]),
            roots=[decode_mpc(ctx, z) for z in data["roots"]],
            residuals=[decode_mpf(ctx, r) for r in data["residuals"]],
            precision_bits=int(data["precision_bits"]),
            converged=bool(data["converged"]),
            iterations=int(data.get("iterations", 0)),
        )


@dataclass
class MinModResult:
    """Certified minimum modulus of the roots of the order-n polynomial"""
    n: int
    value: str
    log10_value: str
    precision_bits: int
    stable: bool
    vieta_residual: Optional[str] = None
    error: Optional[Dict[str, Any]] = None

    @property
    def is_finite(self) -> bool:
        return self.error is None and _finite_text(self.log10_value)

    def log10_decimal(self) -> Decimal:
        return Decimal(self.log10_value)

    def csv_row(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "min_modulus": self.value,
            "log10_min_modulus": self.log10_value,
            "precision_bits": self.precision_bits,
            "stable": self.stable,
        }

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            **self.csv_row(),
            "vieta_residual": self.vieta_residual,
            "error": self.error,
        }

    @classmethod
    def from_json_dict(cls, data: Dict[str, Any]) -> "MinModResult":
        return cls(
            n=int(data["n"]),
            value=data["min_modulus"],
            log10_value=data["log10_min_modulus"],
            precision_bits=int(data["precision_bits"]),
            stable=bool(data["stable"]),
            vieta_residual=data.get("vieta_residual"),
            error=data.get("error"),
        )


def _finite_text(text: str) -> bool:
    return text.lower() not in ("nan", "+inf", "-inf", "inf")


def _exact_to_mpf(ctx: mpmath.MPContext, value) -> Any:
    """int or Fraction, correctly rounded at ctx precision"""
    q = Fraction(value)
    return ctx.fdiv(q.numerator, q.denominator)


def _coefficients(ctx: mpmath.MPContext, poly: ExactPoly) -> List[Any]:
    """Descending coefficients rounded at ctx precision"""
    return [_exact_to_mpf(ctx, c) for c in reversed(poly.coeffs)]


def _horner(ctx: mpmath.MPContext, coeffs: Sequence[Any], z) -> Tuple[Any, Any]:
    """(p(z), p'(z)); p by compensated Horner, p' by plain Horner"""
    x, y = z.real, z.imag
    wide = 3 * ctx.prec
    sr, si = coeffs[0], ctx.zero
    cr, ci = ctx.zero, ctx.zero
    dr, di = ctx.zero, ctx.zero
    for a in coeffs[1:]:
        dr, di = dr * x - di * y + sr, dr * y + di * x + si
        tr = ctx.fadd(ctx.fsub(ctx.fmul(sr, x, exact=True), ctx.fmul(si, y, exact=True),
                               prec=wide), a, prec=wide)
        ti = ctx.fadd(ctx.fmul(sr, y, exact=True), ctx.fmul(si, x, exact=True), prec=wide)
        sr, si = +tr, +ti
        er, ei = ctx.fsub(tr, sr), ctx.fsub(ti, si)
        cr, ci = cr * x - ci * y + er, cr * y + ci * x + ei
    return ctx.mpc(sr + cr, si + ci), ctx.mpc(dr, di)


def _scale(ctx: mpmath.MPContext, coeffs: Sequence[Any], z) -> Any:
    """sum |a_k| |z|^k"""
    r = abs(z)
    acc = ctx.zero
    for a in coeffs:
        acc = acc * r + abs(a)
    return acc


def _newton_polygon_radii(ctx: mpmath.MPContext, coeffs: Sequence[Any]) -> List[Tuple[float, int]]:
    """(radius, root count) pairs from the upper hull of (k, log|a_k|), ascending power k"""
    n = len(coeffs) - 1
    points = []
    for k in range(n + 1):
        a = coeffs[n - k]
        if a != 0:
            points.append((k, float(ctx.log(abs(a)))))
    hull: List[Tuple[int, float]] = []
    for pt in points:
        while len(hull) >= 2:
            (k1, v1), (k2, v2) = hull[-2], hull[-1]
            # drop the middle point when it lies on or below the chord
            if (v2 - v1) * (pt[0] - k1) <= (pt[1] - v1) * (k2 - k1):
                hull.pop()
            else:
                break
        hull.append(pt)
    radii = []
    low = hull[0][0]
    if low > 0:
        # x^low divides p: park those guesses near the origin
        radii.append((None, low))
    for (k1, v1), (k2, v2) in zip(hull, hull[1:]):
        radii.append((math.exp((v1 - v2) / (k2 - k1)), k2 - k1))
    smallest = min((r for r, _ in radii if r is not None), default=1.0)
    return [(smallest * 2.0 ** -10 if r is None else r, count) for r, count in radii]


def initial_guesses(ctx: mpmath.MPContext, coeffs: Sequence[Any]) -> List[Any]:
    n = len(coeffs) - 1
    guesses = []
    for circle, (radius, count) in enumerate(_newton_polygon_radii(ctx, coeffs)):
        for j in range(count):
            angle = 2 * math.pi * j / count + 2 * math.pi * circle / n + ANGLE_OFFSET
            guesses.append(ctx.mpc(radius * math.cos(angle), radius * math.sin(angle)))
    return guesses


def roots_all(poly: ExactPoly, precision_bits: int,
              initial: Optional[Sequence[Any]] = None,
              max_iterations: Optional[int] = None) -> RootSet:
    """Every root of `poly` at `precision_bits`; converged=False keeps the best iterate"""
    ctx = make_context(precision_bits)
    n = poly.degree
    coeffs = _coefficients(ctx, poly)
    tolerance = ctx.ldexp(1, -(precision_bits // 2))

    if n == 1:
        root = ctx.mpc(-coeffs[1])
        return RootSet(degree=1, roots=[root], residuals=[ctx.zero],
                       precision_bits=precision_bits, converged=True)

    if initial is not None and len(initial) == n:
        z = [ctx.mpc(r) for r in initial]
    else:
        z = initial_guesses(ctx, coeffs)
    frozen = [False] * n
    max_iterations = max_iterations or 200 + n

    iterations = 0
    while iterations < max_iterations and not all(frozen):
        iterations += 1
        for i in range(n):
            if frozen[i]:
                continue
            value, slope = _horner(ctx, coeffs, z[i])
            if value == 0:
                frozen[i] = True
                continue
            repulsion = ctx.zero
            for k in range(n):
                if k != i:
                    gap = z[i] - z[k]
                    if gap != 0:
                        repulsion += 1 / gap
            if slope == 0:
                step = value / (1 - value * repulsion) if repulsion != 0 else ctx.mpc(tolerance, tolerance)
            else:
                ratio = value / slope
                step = ratio / (1 - ratio * repulsion)
            z[i] -= step
            size = abs(z[i])
            if abs(step) <= tolerance * (size if size > 1 else 1):
                frozen[i] = True

    residuals = []
    for root in z:
        value, _ = _horner(ctx, coeffs, root)
        scale = _scale(ctx, coeffs, root)
        residuals.append(abs(value) / scale if scale else abs(value))
    converged = all(frozen) and all(r <= tolerance for r in residuals)
    if not converged:
        logger.debug(f"degree {n} not converged at {precision_bits} bits after {iterations} sweeps")
    return RootSet(degree=n, roots=z, residuals=residuals,
                   precision_bits=precision_bits, converged=converged, iterations=iterations)


def vieta_residual(poly: ExactPoly, rs: RootSet) -> Any:
    """max relative error of sum and product of roots against -a_(n-1) and (-1)^n a_0"""
    ctx = make_context(rs.precision_bits)
    n = poly.degree
    total = ctx.fsum(rs.roots)
    product = ctx.one
    for z in rs.roots:
        product *= z
    want_sum = -_exact_to_mpf(ctx, poly.coeff(n - 1))
    want_product = (-1) ** n * _exact_to_mpf(ctx, poly.constant_term)
    sum_scale = max(ctx.fsum(abs(z) for z in rs.roots), abs(want_sum), ctx.one)
    product_scale = max(abs(want_product), ctx.ldexp(1, -rs.precision_bits))
    return max(abs(total - want_sum) / sum_scale, abs(product - want_product) / product_scale)


def conjugate_closed(rs: RootSet, tolerance: Optional[Any] = None) -> bool:
    """Real-coefficient roots pair up with their conjugates"""
    ctx = make_context(rs.precision_bits)
    tolerance = tolerance if tolerance is not None else ctx.ldexp(1, -(rs.precision_bits // 3))
    unmatched = list(rs.roots)
    while unmatched:
        z = unmatched.pop()
        bound = tolerance * max(abs(z), 1)
        if abs(z.imag) <= bound:
            continue
        target = z.conjugate()
        best = min(range(len(unmatched)), key=lambda k: abs(unmatched[k] - target), default=None)
        if best is None or abs(unmatched[best] - target) > bound:
            return False
        unmatched.pop(best)
    return True


def _smallest_modulus(rs: RootSet):
    return min(abs(z) for z in rs.roots)


def _agree(a, b, digits: int) -> bool:
    if a == b:
        return True
    ctx = make_context(max(a.context.prec, b.context.prec))
    return abs(a - b) <= ctx.mpf(10) ** (-digits) * max(abs(a), abs(b))


def min_modulus(rs: RootSet, target_digits: int = DEFAULT_TARGET_DIGITS,
                reference: Optional[RootSet] = None) -> MinModResult:
    """min |z| over the roots; stable when `reference` (another precision) agrees"""
    ctx = make_context(rs.precision_bits)
    value = _smallest_modulus(rs)
    stable = reference is not None and _agree(value, _smallest_modulus(reference), target_digits)
    log10_text = "-inf" if value == 0 else ctx.nstr(ctx.log10(value), target_digits)
    return MinModResult(
        n=rs.degree,
        value=ctx.nstr(value, target_digits),
        log10_value=log10_text,
        precision_bits=rs.precision_bits,
        stable=stable,
    )


PayloadLookup = Dict[int, Dict[str, Any]]


def certify_min_modulus(poly: ExactPoly, n: int,
                        target_digits: int = DEFAULT_TARGET_DIGITS,
                        start_bits: int = DEFAULT_START_BITS,
                        cap_bits: int = DEFAULT_CAP_BITS,
                        known: Optional[PayloadLookup] = None) -> Tuple[MinModResult, PayloadLookup]:
    """Escalate precision for one polynomial.

    `known` maps precision_bits to cached RootSet payloads; the second return
    value holds the payloads computed here (only the caller writes the cache).
    """
    known = known or {}
    fresh: PayloadLookup = {}
    bits = start_bits
    previous: Optional[RootSet] = None
    last_converged: Optional[RootSet] = None
    comparison: Optional[RootSet] = None
    while True:
        if bits in known:
            rs = RootSet.from_json_dict(known[bits])
        else:
            rs = roots_all(poly, bits, initial=previous.roots if previous else None)
            fresh[bits] = rs.to_json_dict()
        if rs.converged:
            if last_converged is not None and _agree(
                    _smallest_modulus(rs), _smallest_modulus(last_converged), target_digits):
                comparison = last_converged
                last_converged = rs
                break
            last_converged = rs
        previous = rs
        if bits * 2 > cap_bits:
            break
        logger.debug(f"🔄 n={n}: escalating {bits} -> {bits * 2} bits")
        bits *= 2

    if last_converged is None:
        error = SpectraError(
            message=f"root finder did not converge for n={n} up to {bits} bits",
            error_type=ErrorType.CONVERGENCE,
            context={"n": n, "cap_bits": cap_bits},
        )
        return MinModResult(
            n=n, value="nan", log10_value="nan", precision_bits=bits, stable=False,
            error=error_handler.create_error_response(error),
        ), fresh

    result = min_modulus(last_converged, target_digits, reference=comparison)
    result.n = n
    residual = vieta_residual(poly, last_converged)
    result.vieta_residual = mpmath.nstr(residual, 5)
    bound = make_context(last_converged.precision_bits).mpf(10) ** (-target_digits)
    if residual > bound:
        logger.warning(f"⚠️ n={n}: Vieta residual {result.vieta_residual} above 1e-{target_digits}")
        result.stable = False
    elif not result.stable:
        logger.warning(f"⚠️ n={n}: min modulus not stable below the {cap_bits}-bit cap")
    return result, fresh


def _series_task(args: Tuple[int, ExactPoly, int, int, int, PayloadLookup]):
    n, poly, target_digits, start_bits, cap_bits, known = args
    try:
        result, fresh = certify_min_modulus(poly, n, target_digits, start_bits, cap_bits, known)
    except Exception as e:
        error = error_handler.wrap(e, {"n": n})
        result = MinModResult(n=n, value="nan", log10_value="nan", precision_bits=start_bits,
                              stable=False, error=error_handler.create_error_response(error))
        fresh = {}
    return n, result.to_json_dict(), fresh


def min_modulus_series(polys: Sequence[ExactPoly],
                       target_digits: int = DEFAULT_TARGET_DIGITS,
                       start_bits: int = DEFAULT_START_BITS,
                       cap_bits: int = DEFAULT_CAP_BITS,
                       first_n: int = 1,
                       executor: Optional[Executor] = None,
                       known: Optional[Dict[int, PayloadLookup]] = None,
                       on_result: Optional[Callable[[int, MinModResult, PayloadLookup], None]] = None,
                       ) -> List[MinModResult]:
    """Certified min modulus for polys[i], reported as n = first_n + i.

    Each n is an independent task; with an executor they run concurrently and
    are merged back by n. `on_result` sees every finished task in the calling
    process, which is where cache writes belong.
    """
    known = known or {}
    tasks = [
        (first_n + i, poly, target_digits, start_bits, cap_bits, known.get(first_n + i, {}))
        for i, poly in enumerate(polys)
    ]
    if executor is None:
        outputs = map(_series_task, tasks)
    else:
        outputs = executor.map(_series_task, tasks)

    results: Dict[int, MinModResult] = {}
    for n, payload, fresh in outputs:
        result = MinModResult.from_json_dict(payload)
        if result.error is not None:
            logger.warning(f"⚠️ n={n}: {result.error.get('error')}")
        results[n] = result
        if on_result is not None:
            on_result(n, result, fresh)
    return [results[n] for n in sorted(results)]
