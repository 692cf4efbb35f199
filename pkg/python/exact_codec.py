"""
JSON encoding for exact and multiprecision values.

Integers travel as decimal strings, rationals as "num/den" strings in lowest
terms, and mpmath floats as exact (mantissa, exponent) pairs so that a cached
root reloads bit-for-bit.
"""

import json
from fractions import Fraction
from typing import Any, List, Sequence, Union

import mpmath

Rational = Union[int, Fraction]


def encode_int(value: int) -> str:
    return str(int(value))


def decode_int(text: str) -> int:
    return int(text)


def encode_rational(value: Rational) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def decode_rational(text: str) -> Fraction:
    """Parse "num/den" (or a bare integer) into a Fraction"""
    if "/" in text:
        numerator, denominator = text.split("/", 1)
        return Fraction(int(numerator), int(denominator))
    return Fraction(int(text))


def encode_rationals(values: Sequence[Rational]) -> List[str]:
    return [encode_rational(value) for value in values]


def decode_rationals(texts: Sequence[str]) -> List[Fraction]:
    return [decode_rational(text) for text in texts]


def encode_mpf(value: mpmath.mpf) -> List[str]:
    """Exact [mantissa, exponent] pair; special values keep their name"""
    if mpmath.isnan(value):
        return ["nan"]
    if mpmath.isinf(value):
        return ["+inf"] if value > 0 else ["-inf"]
    man = int(value.man)
    if value < 0:
        man = -man
    return [str(man), str(int(value.exp))]


def decode_mpf(ctx: mpmath.MPContext, pair: Sequence[str]) -> mpmath.mpf:
    """Rebuild an mpf inside `ctx` without rounding"""
    if len(pair) == 1:
        return ctx.mpf(pair[0])
    man, exp = int(pair[0]), int(pair[1])
    with ctx.workprec(max(ctx.prec, man.bit_length() + 8)):
        value = ctx.mpf((man, exp))
    return value


def encode_mpc(value: mpmath.mpc) -> List[List[str]]:
    return [encode_mpf(value.real), encode_mpf(value.imag)]


def decode_mpc(ctx: mpmath.MPContext, pair: Sequence[Sequence[str]]) -> mpmath.mpc:
    real = decode_mpf(ctx, pair[0])
    imag = decode_mpf(ctx, pair[1])
    with ctx.workprec(max(ctx.prec, 8 + max(_bits(real), _bits(imag)))):
        value = ctx.mpc(real, imag)
    return value


def _bits(value: mpmath.mpf) -> int:
    if not ctx_is_finite(value):
        return 0
    return int(value.man).bit_length()


def ctx_is_finite(value: mpmath.mpf) -> bool:
    return not (mpmath.isnan(value) or mpmath.isinf(value))


def dumps(obj: Any) -> str:
    """Canonical JSON: sorted keys, fixed indentation, trailing newline"""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def loads(text: str) -> Any:
    return json.loads(text)
