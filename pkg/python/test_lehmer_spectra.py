"""
Command line tests: exit codes and emitted files.
"""

import io
import json
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

import pandas as pd

from lehmer_spectra import build_parser, main

SMALL_VERIFY = ["verify", "--nmax", "6", "--poly-nmax", "8", "--lehmer-nmax", "20", "--trials", "3"]


class TestCli(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def run_cli(self, *argv):
        out, err = io.StringIO(), io.StringIO()
        with redirect_stdout(out), redirect_stderr(err):
            code = main(["--quiet", "--cache-dir", str(self.dir / "cache"), *argv])
        return code, out.getvalue(), err.getvalue()

    def test_tau_csv(self):
        target = self.dir / "tau.csv"
        code, _, _ = self.run_cli("tau", "--nmax", "5", "--out", str(target))
        self.assertEqual(code, 0)
        lines = target.read_text().splitlines()
        self.assertEqual(lines[:2], ["n,p_n,tau_p", "1,2,-24"])
        self.assertEqual(len(lines), 6)

    def test_tau_json_to_stdout(self):
        code, out, _ = self.run_cli("tau", "--nmax", "3", "--format", "json")
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(out)["values"], ["-24", "252", "4830"])

    def test_verify_exit_codes(self):
        report_path = self.dir / "verify.json"
        code, out, _ = self.run_cli(*SMALL_VERIFY, "--out", str(report_path))
        self.assertEqual(code, 0)
        self.assertIn("PASS  tau_table", out)
        self.assertTrue(json.loads(report_path.read_text())["passed"])
        code, out, _ = self.run_cli(*SMALL_VERIFY, "--corrupt-tau-index", "5")
        self.assertEqual(code, 1)
        self.assertIn("FAIL  tau_table", out)

    def test_series_csv(self):
        target = self.dir / "series.csv"
        code, _, _ = self.run_cli("series", "--preset", "fig2", "--nmax", "4", "--workers", "1",
                                  "--out", str(target))
        self.assertEqual(code, 0)
        frame = pd.read_csv(target)
        self.assertEqual(list(frame.columns),
                         ["n", "min_modulus", "log10_min_modulus", "precision_bits", "stable"])
        self.assertEqual(frame["n"].tolist(), [2, 3, 4])

    def test_envelope_report(self):
        target = self.dir / "envelope.json"
        code, out, _ = self.run_cli("envelope", "--preset", "fig1", "--nmax", "12", "--workers", "1",
                                    "--window-sweep", "1,2", "--out", str(target))
        self.assertEqual(code, 0)
        self.assertIn("envelope of fig1", out)
        data = json.loads(target.read_text())
        self.assertEqual(data["modulus"], 4)
        self.assertEqual(len(data["sweep"]), 2)

    def test_figure_outputs(self):
        out_dir = self.dir / "figs"
        code, out, _ = self.run_cli("--no-cache", "figure", "--which", "2", "--nmax", "6",
                                    "--workers", "1", "--out", str(out_dir))
        self.assertEqual(code, 0)
        self.assertTrue((out_dir / "fig2.svg").exists())
        self.assertIn("fig2_series.csv", out)

    def test_bad_configuration_exits_2(self):
        code, _, err = self.run_cli("series", "--nmax", "0")
        self.assertEqual(code, 2)
        self.assertIn('"error_type": "empty_domain"', err)

    def test_parser_defaults(self):
        args = build_parser().parse_args(["figure", "--which", "1"])
        self.assertEqual((args.which, args.out, args.preset), (1, "results", "fig1"))
        with redirect_stderr(io.StringIO()), self.assertRaises(SystemExit):
            build_parser().parse_args(["envelope", "--window-sweep", "1,x"])


def run_lehmer_spectra_tests():
    test_suite = unittest.TestLoader().loadTestsFromTestCase(TestCli)
    return unittest.TextTestRunner(verbosity=2).run(test_suite).wasSuccessful()


if __name__ == "__main__":
    unittest.main()
