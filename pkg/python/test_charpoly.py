"""
Characteristic polynomial tests: three computation routes, principal minors,
the per-subset minor counterexample and the nonvanishing scan.
"""

import random
import unittest
from fractions import Fraction

from charpoly import (
    ExactPoly, berkowitz_leading, charpoly_berkowitz, charpoly_closed_form, charpoly_family,
    check_closed_form_random, check_principal_minors, check_principal_minors_random,
    check_three_way, check_too_good, find_too_good_counterexample, hessenberg_leading_charpolys,
    lehmer_check, principal_minor_sum, random_integer_matrix, too_good_check,
)
from error_handler import ErrorType, SpectraError
from hess_matrices import ExactMatrix, MatrixFamily, MatrixSpec, build, det_exact
from newton_d import ExactSeq, h_from_j, j_from_h, tau_p_as_h
from seq_core import TauPrimeSeq, tau_p


def char_det(m, t):
    """|tI - M| straight from the determinant"""
    return det_exact(ExactMatrix.from_rows([
        [(t if i == k else 0) - m.rows[i][k] for k in range(m.n)] for i in range(m.n)
    ]))


class TestExactPoly(unittest.TestCase):

    def test_must_be_monic(self):
        with self.assertRaises(SpectraError) as ctx:
            ExactPoly((1, 2))
        self.assertEqual(ctx.exception.error_type, ErrorType.IDENTITY_FAILURE)
        with self.assertRaises(SpectraError):
            ExactPoly((1,))

    def test_text_and_evaluation(self):
        self.assertEqual(str(ExactPoly((504, 48, 1))), "x^2 + 48*x + 504")
        self.assertEqual(str(ExactPoly((-23, -2, 1))), "x^2 - 2*x - 23")
        self.assertEqual(ExactPoly((504, 48, 1)).evaluate(1), 553)

    def test_json_restores_rationals(self):
        poly = ExactPoly((Fraction(-1, 3), 0, 1), label="H_2")
        self.assertEqual(ExactPoly.from_json_dict(poly.to_json_dict()), poly)


class TestFamilies(unittest.TestCase):

    def setUp(self):
        self.tau = tau_p(20)
        self.h = tau_p_as_h(self.tau.values)
        self.j = j_from_h(self.h, 20)

    def test_first_orders(self):
        polys = charpoly_family(MatrixSpec(MatrixFamily.J, 2, self.j), 2)
        self.assertEqual(polys[0].coeffs, (24, 1))
        self.assertEqual(polys[1].coeffs, (504, 48, 1))
        self.assertEqual(polys[1].label, "J_2")

    def test_deformed_order_two(self):
        polys = charpoly_family(MatrixSpec(MatrixFamily.J, 2, self.j, deform=1), 2)
        self.assertEqual(polys[0].coeffs, (-1, 1))
        self.assertEqual(polys[1].coeffs, (-23, -2, 1))

    def test_closed_form(self):
        self.assertEqual(charpoly_closed_form(3, self.tau).coeffs, (-6 * 4830, 6 * 252, 72, 1))

    def test_three_routes_agree(self):
        report = check_three_way(self.tau, 20)
        self.assertTrue(report.passed, report.first_failure)
        self.assertEqual(report.checked, 60)

    def test_three_routes_agree_through_60(self):
        report = check_three_way(tau_p(60), 60)
        self.assertTrue(report.passed, report.first_failure)
        self.assertEqual(report.checked, 180)

    def test_h_family_constant_terms(self):
        h = h_from_j(ExactSeq.j_role(self.tau.values[:4]), 4)
        polys = charpoly_family(MatrixSpec(MatrixFamily.H, 4, h), 4)
        for n, poly in enumerate(polys, start=1):
            det_h = (-1) ** n * poly.constant_term
            self.assertEqual(det_h, (-1) ** (n + 1) * self.tau[n])

    def test_rational_matrix_routes_agree(self):
        h = h_from_j(ExactSeq.j_role([1, 2, 3, 5]), 4)
        matrix = build(MatrixSpec(MatrixFamily.H, 4, h, deform=Fraction(1, 2)))
        recurrence = hessenberg_leading_charpolys(matrix)
        self.assertEqual([p.coeffs for p in recurrence],
                         [p.coeffs for p in berkowitz_leading(matrix)])
        for t in range(5):
            self.assertEqual(recurrence[-1].evaluate(t), char_det(matrix, t))

    def test_recurrence_needs_hessenberg(self):
        with self.assertRaises(SpectraError) as ctx:
            hessenberg_leading_charpolys(ExactMatrix.from_rows([[1, 2, 3], [4, 5, 6], [7, 8, 9]]))
        self.assertEqual(ctx.exception.error_type, ErrorType.INCOMPLETE_INPUT)


class TestBerkowitz(unittest.TestCase):

    def test_matches_determinant_on_dense_matrices(self):
        rng = random.Random(17)
        for n in range(1, 7):
            m = random_integer_matrix(rng, n)
            poly = charpoly_berkowitz(m)
            self.assertEqual(poly.degree, n)
            for t in range(n + 1):
                self.assertEqual(poly.evaluate(t), char_det(m, t))

    def test_known_matrix(self):
        poly = charpoly_berkowitz(ExactMatrix.from_rows([[2, 1], [1, 2]]))
        self.assertEqual(poly.coeffs, (3, -4, 1))


class TestPrincipalMinors(unittest.TestCase):

    def test_coefficients_are_minor_sums(self):
        m = ExactMatrix.from_rows([[1, 2, 0], [3, -1, 4], [0, 5, 2]])
        report = check_principal_minors(m)
        self.assertTrue(report.passed, report.first_failure)
        self.assertEqual(principal_minor_sum(m, 1), 2)
        self.assertEqual(principal_minor_sum(m, 3), det_exact(m))
        self.assertEqual(principal_minor_sum(m, 0), 1)

    def test_random_matrices(self):
        report = check_principal_minors_random(10, nmax=6, seed=2)
        self.assertTrue(report.passed, report.first_failure)

    def test_enumeration_bound(self):
        m = random_integer_matrix(random.Random(0), 13)
        with self.assertRaises(SpectraError) as ctx:
            principal_minor_sum(m, 2)
        self.assertEqual(ctx.exception.error_type, ErrorType.ENUMERATION_LIMIT)
        with self.assertRaises(SpectraError) as ctx:
            principal_minor_sum(m.leading(3), 4)
        self.assertEqual(ctx.exception.error_type, ErrorType.EMPTY_DOMAIN)


class TestTooGood(unittest.TestCase):

    def setUp(self):
        self.tau = tau_p(6)

    def test_small_orders_match(self):
        self.assertTrue(too_good_check(2, 1, self.tau).all_match_plain)
        self.assertTrue(too_good_check(3, 1, self.tau).all_match_either)

    def test_first_counterexample(self):
        report = find_too_good_counterexample(self.tau)
        self.assertIsNotNone(report)
        self.assertEqual((report.n, report.k), (3, 2))
        self.assertEqual(report.mismatches, [(1, 3), (2, 3)])
        values = dict(report.minors)
        self.assertEqual(values[(1, 2)], 504)
        self.assertEqual(values[(1, 3)], 576)
        self.assertEqual(values[(2, 3)], 432)
        self.assertEqual((report.target_plain, report.target_signed), (504, 504))
        self.assertTrue(report.sum_ok)
        self.assertEqual(report.minor_sum, 1512)

    def test_suite_passes(self):
        report = check_too_good(self.tau, 6)
        self.assertTrue(report.passed, report.first_failure)
        self.assertEqual(report.details["counterexample"]["n"], 3)

    def test_enumeration_bound(self):
        with self.assertRaises(SpectraError) as ctx:
            too_good_check(13, 2, tau_p(13))
        self.assertEqual(ctx.exception.error_type, ErrorType.ENUMERATION_LIMIT)


class TestRandomAndLehmer(unittest.TestCase):

    def test_closed_form_random(self):
        report = check_closed_form_random(5, 10, seed=1)
        self.assertTrue(report.passed, report.first_failure)
        self.assertEqual(report.checked, 50)

    def test_no_zero_through_400(self):
        report = lehmer_check(400, tau_p(400), poly_nmax=60)
        self.assertTrue(report.passed, report.first_failure)
        self.assertEqual(report.details["zeros"], [])
        self.assertEqual(report.details["constant_terms"][1]["Pi_n(0)"], "504/1")
        self.assertEqual(len(report.details["constant_terms"]), 60)

    def test_zero_is_reported_critically(self):
        fake = TauPrimeSeq(nmax=3, primes=(2, 3, 5), values=(-24, 0, 4830))
        with self.assertLogs("charpoly", level="CRITICAL"):
            report = lehmer_check(3, fake)
        self.assertFalse(report.passed)
        self.assertEqual(report.first_failure["n"], "2")
        self.assertEqual(report.details["zeros"], [2])


def run_charpoly_tests():
    test_suite = unittest.TestSuite()
    for test_class in [TestExactPoly, TestFamilies, TestBerkowitz, TestPrincipalMinors,
                       TestTooGood, TestRandomAndLehmer]:
        test_suite.addTests(unittest.TestLoader().loadTestsFromTestCase(test_class))
    return unittest.TextTestRunner(verbosity=2).run(test_suite).wasSuccessful()


if __name__ == "__main__":
    unittest.main()
