"""
Envelope, residue table and block structure tests.
"""

import tempfile
import unittest
from decimal import Decimal
from pathlib import Path

import pandas as pd

from envelope_analysis import (
    REFERENCE_TABLES, EnvelopeReport, block_structure, block_summary, compare_reference,
    envelope_report, format_table, format_window_sweep, lower_envelope, residue_table,
    run_length_encode, scan_envelope, window_sweep, write_residue_csv,
)
from error_handler import ErrorType, SpectraError


def series_of(values, first=1):
    return list(enumerate(values, start=first))


def abscissas_for(residues, start, modulus=4):
    """Points whose residues reproduce `residues`: +4 keeps a residue, +5 advances it"""
    points = [start]
    for a, b in zip(residues, residues[1:]):
        points.append(points[-1] + (modulus if a == b else modulus + 1))
    return points


def valley_series(abscissas):
    """Distance to the nearest abscissa: strict minima exactly at the abscissas for w = 1"""
    last = abscissas[-1] + 2
    return [(n, float(min(abs(n - a) for a in abscissas))) for n in range(1, last + 1)]


class TestScan(unittest.TestCase):

    def test_interior_minima(self):
        self.assertEqual(lower_envelope(series_of([3, 1, 2, 0, 5])), [2, 4])

    def test_monotone_series_keeps_last_point(self):
        self.assertEqual(lower_envelope(series_of([5, 4, 3, 2, 1])), [5])

    def test_ties_go_to_smaller_n(self):
        scan = scan_envelope(series_of([3, 1, 1, 4]))
        self.assertEqual(scan.abscissas, [2])
        self.assertEqual(scan.ties, [(2, 3)])

    def test_nan_points_are_left_out(self):
        series = [(1, Decimal(3)), (2, float("nan")), (3, Decimal(1)), (4, Decimal(2))]
        with self.assertLogs("envelope_analysis", level="WARNING"):
            scan = scan_envelope(series)
        self.assertEqual(scan.excluded, [{"n": 2, "reason": "not finite"}])
        # n = 1 only has n = 2 as a neighbor, and that one is gone
        self.assertEqual(scan.abscissas, [1, 3])

    def test_unstable_points_are_left_out(self):
        scan = scan_envelope(series_of([3, 1, 2, 0, 5]), unstable=[4])
        self.assertEqual(scan.abscissas, [2, 5])
        self.assertEqual(scan.excluded, [{"n": 4, "reason": "unstable"}])

    def test_wider_window_thins(self):
        series = series_of([5, 1, 4, 2, 6, 0, 7])
        self.assertEqual(lower_envelope(series, 1), [2, 4, 6])
        self.assertEqual(lower_envelope(series, 2), [2, 6])
        for w in range(1, 6):
            self.assertTrue(set(lower_envelope(series, w + 1)) <= set(lower_envelope(series, w)))

    def test_bad_inputs(self):
        with self.assertRaises(SpectraError) as ctx:
            scan_envelope(series_of([1, 2]), window=0)
        self.assertEqual(ctx.exception.error_type, ErrorType.CONFIG_ERROR)
        with self.assertRaises(SpectraError) as ctx:
            scan_envelope([(1, 1.0), (3, 2.0)])
        self.assertEqual(ctx.exception.error_type, ErrorType.INCOMPLETE_INPUT)


class TestResidues(unittest.TestCase):

    def test_residue_tables(self):
        self.assertEqual(residue_table([5, 9, 13]).residues, [1, 1, 1])
        self.assertEqual(residue_table([4, 8, 12]).residues, [0, 0, 0])
        self.assertEqual(residue_table([4, 9, 14], modulus=5).residues, [4, 4, 4])

    def test_modulus_must_be_at_least_two(self):
        with self.assertRaises(SpectraError) as ctx:
            residue_table([1, 2], modulus=1)
        self.assertEqual(ctx.exception.error_type, ErrorType.CONFIG_ERROR)

    def test_abscissas_must_increase(self):
        with self.assertRaises(SpectraError):
            EnvelopeReport(source="x", window=1, modulus=4, abscissas=[3, 3],
                           residues=[3, 3], blocks=[(3, 2)])

    def test_blocks_and_cycle(self):
        report = residue_table([5, 9, 14, 18, 23, 28])
        self.assertEqual(report.residues, [1, 1, 2, 2, 3, 0])
        self.assertEqual(block_summary(report), [(1, 2), (2, 2), (3, 1), (0, 1)])
        self.assertEqual(report.cycle, [1, 2, 3, 0])
        self.assertEqual(report.differences, [4, 5, 4, 5, 5])

    def test_format_table(self):
        self.assertEqual(format_table([1, 2, 3]), " 1  2  3\n")
        text = format_table(list(range(10)))
        self.assertEqual(text.splitlines()[1], " 9")

    def test_csv(self):
        report = residue_table([5, 9, 14])
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "residues.csv"
            write_residue_csv(report, path)
            frame = pd.read_csv(path)
        self.assertEqual(list(frame.columns), ["abscissa", "residue"])
        self.assertEqual(frame["residue"].tolist(), [1, 1, 2])


class TestReferenceTables(unittest.TestCase):

    def test_j_table_blocks(self):
        blocks = run_length_encode(REFERENCE_TABLES["J"])
        self.assertEqual(len(REFERENCE_TABLES["J"]), 96)
        self.assertEqual(blocks[0], (1, 10))
        self.assertEqual([r for r, _ in blocks[1:-1]], [2, 3, 0, 1, 2, 3, 0, 1, 2])
        self.assertEqual({length for _, length in blocks[1:-1]}, {9})
        self.assertEqual(blocks[-1], (3, 5))

    def test_h_table_blocks(self):
        self.assertEqual(run_length_encode(REFERENCE_TABLES["H"]), [
            (0, 2), (2, 2), (3, 5), (0, 5), (1, 6), (2, 5), (3, 6), (0, 5), (1, 6), (2, 7), (3, 3),
        ])

    def test_reproducing_the_j_table(self):
        reference = list(REFERENCE_TABLES["J"])
        points = abscissas_for(reference, start=5)
        report = envelope_report(valley_series(points), source="J^(1)")
        self.assertEqual(report.abscissas, points)
        self.assertEqual(report.residues, reference)
        structure = block_structure(report)
        self.assertEqual(structure["first_block"], 10)
        self.assertEqual(structure["interior_blocks"], [9])
        self.assertEqual(structure["last_block"], 5)
        self.assertEqual(structure["differences"], [4, 5])
        self.assertTrue(structure["cycle_regular"])
        comparison = compare_reference(report, "J")
        self.assertEqual(comparison["common_prefix"], 96)
        self.assertTrue(comparison["consistent"])

    def test_partial_agreement(self):
        report = residue_table([4, 8])
        comparison = compare_reference(report, "J")
        self.assertEqual(comparison["common_prefix"], 0)
        self.assertFalse(comparison["consistent"])

    def test_window_sweep(self):
        points = abscissas_for(list(REFERENCE_TABLES["J"][:30]), start=5)
        reports = window_sweep(valley_series(points), [1, 2, 3])
        self.assertEqual([r.window for r in reports], [1, 2, 3])
        self.assertEqual(reports[0].abscissas, points)
        for narrow, wide in zip(reports, reports[1:]):
            self.assertTrue(set(wide.abscissas) <= set(narrow.abscissas))
        text = format_window_sweep(reports)
        self.assertTrue(text.startswith("window"))
        self.assertEqual(len(text.splitlines()), 4)

    def test_json_shape(self):
        data = residue_table([5, 9, 14], source="J^(1)").to_json_dict()
        self.assertEqual(data["blocks"], [[1, 2], [2, 1]])
        self.assertEqual(data["cycle"], [1, 2])
        self.assertEqual(data["window"], 1)


def run_envelope_analysis_tests():
    test_suite = unittest.TestSuite()
    for test_class in [TestScan, TestResidues, TestReferenceTables]:
        test_suite.addTests(unittest.TestLoader().loadTestsFromTestCase(test_class))
    return unittest.TextTestRunner(verbosity=2).run(test_suite).wasSuccessful()


if __name__ == "__main__":
    unittest.main()
