import json
import os
import tempfile
import unittest
from unittest import mock

import contrast_forensics.recover_hist as target
from contrast_forensics.image_io import write_image
from contrast_forensics.synthesis import CurveSpec, SynthSpec, synth_image
from contrast_forensics.transforms import gamma_curve
from contrast_forensics.util import InputError, write_json


class TestRecoverHist(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmpdir.cleanup)
        spec = SynthSpec(width=64, height=64, curve=CurveSpec("gamma", (1.5,)), seed=4)
        _, out, curve = synth_image(spec)
        self.image = self.path("enhanced.pgm")
        write_image(out, self.image)
        self.curve = self.path("curve.json")
        write_json(self.curve, curve.to_dict())

    def path(self, name):
        return os.path.join(self.tmpdir.name, name)

    def test_build_argument_parser(self):
        args = target.build_argument_parser().parse_args(["--input", "a.pgm", "--curve", "c.json"])
        self.assertEqual(args.curve, "c.json")
        self.assertEqual(args.sigma, 0.01)
        with mock.patch("sys.stderr"):
            with self.assertRaises(SystemExit):
                target.build_argument_parser().parse_args(["--input", "a.pgm"])

    def test_load_curve(self):
        self.assertEqual(target.load_curve(self.curve), gamma_curve(1.5, 255))
        wrapped = self.path("wrapped.json")
        write_json(wrapped, {"curve": gamma_curve(0.5, 15).to_dict(), "spec": {}})
        self.assertEqual(target.load_curve(wrapped), gamma_curve(0.5, 15))

    def test_load_curve_invalid(self):
        for data in ([1, 2], {"n": 3, "phi": [0, 2, 1, 3]}, {"phi": [0, 1]}):
            path = self.path("bad.json")
            write_json(path, data)
            with self.assertRaises(InputError, msg=str(data)):
                target.load_curve(path)

    def test_main(self):
        out, report = self.path("hist.json"), self.path("report.json")
        argv = ["--input", self.image, "--curve", self.curve, "--out", out, "--json", report]
        with mock.patch("builtins.print") as mock_print:
            self.assertEqual(target.main(argv), 0)
            self.assertIn("objective", mock_print.call_args[0][0])
        with open(out) as f:
            data = json.load(f)
        self.assertEqual(data["h_star"]["bits"], 8)
        self.assertAlmostEqual(sum(data["h_star"]["values"]), 1.0, delta=1e-9)
        self.assertLessEqual(data["w1_term"], 1e-6)
        self.assertEqual(data["trace"][-1], data["objective"])
        with open(report) as f:
            self.assertEqual(json.load(f)["provenance"]["command"], "recover-hist")

    def test_main_size_mismatch(self):
        curve = self.path("small.json")
        write_json(curve, gamma_curve(1.5, 15).to_dict())
        with mock.patch("builtins.print") as mock_print:
            self.assertEqual(target.main(["--input", self.image, "--curve", curve]), 2)
            self.assertIn("size mismatch", mock_print.call_args[0][0])

    def test_main_bad_lambda(self):
        argv = ["--input", self.image, "--curve", self.curve, "--lambda", "-1"]
        with mock.patch("builtins.print"):
            self.assertEqual(target.main(argv), 2)


if __name__ == "__main__":
    unittest.main()
