"""
Prime, Ramanujan tau, and tau-on-primes tables.

tau(n) is the coefficient of q^n in Delta = q * prod(1 - q^k)^24. The product
is built as (eta^3)^8 where eta^3 = prod(1 - q^k)^3 has Jacobi's sparse form
sum (-1)^k (2k+1) q^(k(k+1)/2); three exact squarings give the 24th power.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Any, Tuple

import numpy as np

from error_handler import ErrorType, IdentityReport, SpectraError
from exact_codec import encode_int, decode_int

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PrimeTable:
    """All primes <= limit, ascending; nth() is 1-based so nth(1) == 2"""
    limit: int
    primes: Tuple[int, ...]

    def __len__(self) -> int:
        return len(self.primes)

    def nth(self, n: int) -> int:
        if n < 1 or n > len(self.primes):
            raise SpectraError(
                message=f"p_{n} is not in the table (limit {self.limit}, {len(self.primes)} primes)",
                error_type=ErrorType.INCOMPLETE_INPUT,
                context={"n": n, "limit": self.limit},
            )
        return self.primes[n - 1]

    def to_json_dict(self) -> Dict[str, Any]:
        return {"limit": self.limit, "primes": [encode_int(p) for p in self.primes]}

    @classmethod
    def from_json_dict(cls, data: Dict[str, Any]) -> "PrimeTable":
        return cls(limit=int(data["limit"]), primes=tuple(decode_int(p) for p in data["primes"]))


@dataclass(frozen=True)
class TauTable:
    """Exact tau(n) for 1 <= n <= nmax"""
    nmax: int
    values: Tuple[int, ...]

    def __getitem__(self, n: int) -> int:
        if n < 1 or n > self.nmax:
            raise SpectraError(
                message=f"tau({n}) outside table range 1..{self.nmax}",
                error_type=ErrorType.INCOMPLETE_INPUT,
                context={"n": n, "nmax": self.nmax},
            )
        return self.values[n - 1]

    def to_json_dict(self) -> Dict[str, Any]:
        return {"nmax": self.nmax, "values": [encode_int(v) for v in self.values]}

    @classmethod
    def from_json_dict(cls, data: Dict[str, Any]) -> "TauTable":
        values = tuple(decode_int(v) for v in data["values"])
        return cls(nmax=int(data["nmax"]), values=values)


@dataclass(frozen=True)
class TauPrimeSeq:
    """tau(p_n) for 1 <= n <= nmax, with the primes it was read at"""
    nmax: int
    primes: Tuple[int, ...]
    values: Tuple[int, ...]

    def __getitem__(self, n: int) -> int:
        if n < 1 or n > self.nmax:
            raise SpectraError(
                message=f"tau_p({n}) outside sequence range 1..{self.nmax}",
                error_type=ErrorType.INCOMPLETE_INPUT,
                context={"n": n, "nmax": self.nmax},
            )
        return self.values[n - 1]

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "nmax": self.nmax,
            "primes": [encode_int(p) for p in self.primes],
            "values": [encode_int(v) for v in self.values],
        }

    @classmethod
    def from_json_dict(cls, data: Dict[str, Any]) -> "TauPrimeSeq":
        return cls(
            nmax=int(data["nmax"]),
            primes=tuple(decode_int(p) for p in data["primes"]),
            values=tuple(decode_int(v) for v in data["values"]),
        )


def _sieve(limit: int) -> np.ndarray:
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p: limit + 1: p] = False
    return np.flatnonzero(is_prime)


def primes_upto(limit: int) -> PrimeTable:
    """Sieve of Eratosthenes over [0, limit]"""
    if limit < 2:
        raise SpectraError(
            message=f"no primes <= {limit}",
            error_type=ErrorType.EMPTY_DOMAIN,
            context={"limit": limit},
        )
    primes = tuple(int(p) for p in _sieve(limit))
    return PrimeTable(limit=limit, primes=primes)


def nth_prime_upper_bound(n: int) -> int:
    """Rosser's bound p_n < n(ln n + ln ln n), valid for n >= 6"""
    if n < 6:
        return 13
    return int(n * (math.log(n) + math.log(math.log(n)))) + 1


def first_primes(count: int) -> PrimeTable:
    """Smallest table holding at least `count` primes"""
    if count < 1:
        raise SpectraError(
            message=f"need at least one prime, got count={count}",
            error_type=ErrorType.EMPTY_DOMAIN,
            context={"count": count},
        )
    table = primes_upto(nth_prime_upper_bound(count))
    limit = table.primes[count - 1]
    return PrimeTable(limit=limit, primes=table.primes[:count])


def _eta_cubed(length: int) -> Dict[int, int]:
    """Sparse prod(1 - q^k)^3 truncated below q^length"""
    terms: Dict[int, int] = {}
    k = 0
    while k * (k + 1) // 2 < length:
        terms[k * (k + 1) // 2] = (-1) ** k * (2 * k + 1)
        k += 1
    return terms


def _square_truncated(series: np.ndarray, length: int) -> np.ndarray:
    return np.convolve(series, series)[:length]


def tau_series(nmax: int) -> TauTable:
    """Exact tau(1..nmax) from the eta-product expansion"""
    if nmax < 1:
        raise SpectraError(
            message=f"tau_series needs nmax >= 1, got {nmax}",
            error_type=ErrorType.EMPTY_DOMAIN,
            context={"nmax": nmax},
        )
    # tau(n) is the coefficient of q^(n-1) in prod(1 - q^k)^24
    length = nmax
    eta3 = _eta_cubed(length)

    eta6 = np.zeros(length, dtype=object)
    exponents = sorted(eta3)
    for a in exponents:
        for b in exponents:
            if a + b >= length:
                break
            eta6[a + b] += eta3[a] * eta3[b]

    eta12 = _square_truncated(eta6, length)
    eta24 = _square_truncated(eta12, length)
    values = tuple(int(c) for c in eta24)
    logger.debug(f"tau series computed through n={nmax}")
    return TauTable(nmax=nmax, values=values)


def tau_p(nmax: int) -> TauPrimeSeq:
    """tau(p_n) for n = 1..nmax"""
    primes = first_primes(nmax)
    table = tau_series(primes.nth(nmax))
    values = tuple(table[p] for p in primes.primes)
    logger.info(f"✅ tau_p computed for n <= {nmax} (p_{nmax} = {primes.nth(nmax)})")
    return TauPrimeSeq(nmax=nmax, primes=primes.primes, values=values)


def sigma(n: int, power: int) -> int:
    """Divisor power sum sigma_power(n)"""
    total = 0
    d = 1
    while d * d <= n:
        if n % d == 0:
            total += d ** power
            if d * d != n:
                total += (n // d) ** power
        d += 1
    return total


def check_tau_table(table: TauTable, congruence_limit: int = 1000) -> IdentityReport:
    """Congruence mod 691, multiplicativity, prime squares, Deligne's bound"""
    report = IdentityReport(name="tau_table")
    nmax = table.nmax

    report.record(table[1] == 1, identity="tau(1) = 1", value=table[1])

    for n in range(1, min(nmax, congruence_limit) + 1):
        report.record(
            (table[n] - sigma(n, 11)) % 691 == 0,
            identity="tau(n) = sigma_11(n) mod 691", n=n, tau=table[n],
        )

    for a in range(2, nmax + 1):
        for b in range(a + 1, nmax // a + 1):
            if math.gcd(a, b) == 1:
                report.record(
                    table[a * b] == table[a] * table[b],
                    identity="tau(ab) = tau(a) tau(b)", a=a, b=b,
                )

    primes = primes_upto(max(2, nmax)).primes
    for p in primes:
        if p * p <= nmax:
            report.record(
                table[p * p] == table[p] ** 2 - p ** 11,
                identity="tau(p^2) = tau(p)^2 - p^11", p=p,
            )
        # |tau(p)| < 2 p^(11/2), squared to stay in integers
        report.record(
            table[p] ** 2 < 4 * p ** 11,
            identity="|tau(p)| < 2 p^(11/2)", p=p, tau=table[p],
        )

    report.details["nmax"] = nmax
    return report
