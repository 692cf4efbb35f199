"""
Prime / tau table tests
=======================

Spot values, an independent 24-fold product oracle, and the classical
identities checked by check_tau_table.
"""

import unittest

from error_handler import ErrorType, SpectraError
from seq_core import (
    PrimeTable, TauPrimeSeq, TauTable, check_tau_table, first_primes, nth_prime_upper_bound,
    primes_upto, sigma, tau_p, tau_series,
)


def _trial_division_primes(limit):
    return [n for n in range(2, limit + 1) if all(n % d for d in range(2, int(n ** 0.5) + 1))]


def _delta_oracle(nmax):
    """tau(1..nmax) by multiplying out prod (1 - q^k)^24 term by term"""
    coeffs = [0] * nmax
    coeffs[0] = 1
    for k in range(1, nmax):
        for _ in range(24):
            for i in range(nmax - 1, k - 1, -1):
                coeffs[i] -= coeffs[i - k]
    return coeffs


class TestPrimes(unittest.TestCase):
    """Sieve and nth-prime lookup."""

    def test_small_sieve(self):
        self.assertEqual(primes_upto(30).primes, (2, 3, 5, 7, 11, 13, 17, 19, 23, 29))

    def test_sieve_matches_trial_division(self):
        self.assertEqual(list(primes_upto(2000).primes), _trial_division_primes(2000))

    def test_limit_below_two_is_empty_domain(self):
        with self.assertRaises(SpectraError) as ctx:
            primes_upto(1)
        self.assertEqual(ctx.exception.error_type, ErrorType.EMPTY_DOMAIN)

    def test_first_primes(self):
        self.assertEqual(first_primes(1).primes, (2,))
        table = first_primes(400)
        self.assertEqual(len(table), 400)
        self.assertEqual(table.nth(400), 2741)
        self.assertEqual(table.limit, 2741)

    def test_upper_bound_holds(self):
        for n in (1, 5, 6, 10, 100, 400, 1000):
            self.assertGreaterEqual(nth_prime_upper_bound(n), primes_upto(8000).primes[n - 1])

    def test_nth_out_of_range(self):
        with self.assertRaises(SpectraError) as ctx:
            PrimeTable(limit=10, primes=(2, 3, 5, 7)).nth(5)
        self.assertEqual(ctx.exception.error_type, ErrorType.INCOMPLETE_INPUT)


class TestTau(unittest.TestCase):
    """Ramanujan tau values and identities."""

    def test_spot_values(self):
        table = tau_series(11)
        self.assertEqual(
            list(table.values),
            [1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920, 534612],
        )

    def test_matches_direct_product(self):
        self.assertEqual(list(tau_series(60).values), _delta_oracle(60))

    def test_tau_on_primes(self):
        seq = tau_p(5)
        self.assertEqual(seq.primes, (2, 3, 5, 7, 11))
        self.assertEqual(seq.values, (-24, 252, 4830, -16744, 534612))
        self.assertEqual(seq[3], 4830)

    def test_identities_hold_through_1000(self):
        report = check_tau_table(tau_series(1000))
        self.assertTrue(report.passed, report.first_failure)
        self.assertGreater(report.checked, 1000)

    def test_corrupted_value_is_caught(self):
        table = tau_series(100)
        values = list(table.values)
        values[4] += 1
        report = check_tau_table(TauTable(nmax=100, values=tuple(values)))
        self.assertFalse(report.passed)
        self.assertEqual(report.first_failure["identity"], "tau(n) = sigma_11(n) mod 691")
        self.assertEqual(report.first_failure["n"], "5")

    def test_sigma(self):
        self.assertEqual(sigma(6, 1), 12)
        self.assertEqual(sigma(1, 11), 1)
        self.assertEqual(sigma(4, 2), 1 + 4 + 16)

    def test_out_of_range_lookup(self):
        with self.assertRaises(SpectraError) as ctx:
            tau_series(5)[6]
        self.assertEqual(ctx.exception.error_type, ErrorType.INCOMPLETE_INPUT)
        with self.assertRaises(SpectraError):
            tau_series(0)

    def test_json_restores_sequence(self):
        seq = tau_p(8)
        self.assertEqual(TauPrimeSeq.from_json_dict(seq.to_json_dict()), seq)


def run_seq_core_tests():
    """Run all prime / tau tests."""
    test_suite = unittest.TestSuite()
    for test_class in [TestPrimes, TestTau]:
        test_suite.addTests(unittest.TestLoader().loadTestsFromTestCase(test_class))
    result = unittest.TextTestRunner(verbosity=2).run(test_suite)
    return result.wasSuccessful()


if __name__ == "__main__":
    unittest.main()
