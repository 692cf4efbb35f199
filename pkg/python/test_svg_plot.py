"""
SVG plot tests
"""

import unittest

from svg_plot import two_panel_svg


class TestTwoPanelSvg(unittest.TestCase):

    def test_gap_breaks_the_line(self):
        raw = [(1, 2.0), (2, 1.0), (3, float("nan")), (4, 3.0), (5, 2.5)]
        logs = [(n, v) for n, v in raw]
        with self.assertLogs("svg_plot", level="WARNING"):
            svg = two_panel_svg("gap", raw, logs)
        self.assertEqual(svg.count("<polyline"), 4)

    def test_envelope_marks_and_escaping(self):
        raw = [(n, float(10 - n)) for n in range(1, 6)]
        svg = two_panel_svg("J & H", raw, raw, envelope=[2, 4, 9])
        self.assertEqual(svg.count("<circle"), 2)
        self.assertIn("J &amp; H", svg)
        self.assertTrue(svg.endswith("</svg>\n"))

    def test_same_input_same_text(self):
        raw = [(n, 1.0 / n) for n in range(1, 20)]
        self.assertEqual(two_panel_svg("t", raw, raw, [3]), two_panel_svg("t", raw, raw, [3]))

    def test_empty_panel(self):
        svg = two_panel_svg("empty", [(1, None)], [(1, None)])
        self.assertEqual(svg.count("no data"), 2)


def run_svg_plot_tests():
    test_suite = unittest.TestLoader().loadTestsFromTestCase(TestTwoPanelSvg)
    return unittest.TextTestRunner(verbosity=2).run(test_suite).wasSuccessful()


if __name__ == "__main__":
    unittest.main()
