import json
import os
import tempfile
import unittest
from unittest import mock

import contrast_forensics.synth as target
from contrast_forensics.image_io import read_image
from contrast_forensics.transforms import gamma_curve


class TestSynth(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmpdir.cleanup)

    def path(self, name):
        return os.path.join(self.tmpdir.name, name)

    def test_build_argument_parser(self):
        parser = target.build_argument_parser()
        args = parser.parse_args(["--out", "x.pgm"])
        self.assertEqual(args.out, "x.pgm")
        self.assertIsNone(args.curve)
        self.assertIsNone(args.seed)

    def test_build_argument_parser_requires_out(self):
        parser = target.build_argument_parser()
        with mock.patch("sys.stderr"):
            with self.assertRaises(SystemExit):
                parser.parse_args([])

    def test_build_argument_parser_help_message(self):
        help_text = target.build_argument_parser().format_help()
        self.assertIn("Enhanced image", help_text)
        self.assertIn("usage:", help_text)

    def test_spec_from_args_defaults(self):
        args = target.build_argument_parser().parse_args(["--out", "x.pgm"])
        spec = target.spec_from_args(args)
        self.assertEqual((spec.bits, spec.width, spec.height, spec.sigma), (8, 256, 256, 0.0))
        self.assertEqual(spec.curve.family, "identity")

    def test_spec_from_args_spline(self):
        args = target.build_argument_parser().parse_args(
            ["--out", "x.pgm", "--curve", "spline", "--control-points", "64:72,128:140"]
        )
        spec = target.spec_from_args(args)
        self.assertEqual(spec.curve.control_points, ((64, 72), (128, 140)))

    def test_main_writes_outputs(self):
        out, pre = self.path("out.pgm"), self.path("pre.pgm")
        curve_out, report = self.path("curve.json"), self.path("report.json")
        argv = [
            "--curve", "gamma", "--params", "1.4", "--width", "16", "--height", "8",
            "--seed", "1", "--out", out, "--pre", pre, "--curve-out", curve_out,
            "--json", report,
        ]
        with mock.patch("builtins.print") as mock_print:
            self.assertEqual(target.main(argv), 0)
            mock_print.assert_called_once_with(
                f"{out}: 16x8 8-bit image, curve gamma, sigma 0"
            )
        image = read_image(out)
        self.assertEqual((image.width, image.height, image.bits), (16, 8, 8))
        self.assertEqual(read_image(pre).pixels.shape, (8, 16))
        with open(curve_out) as f:
            self.assertEqual(json.load(f)["phi"], gamma_curve(1.4, 255).phi.tolist())
        with open(report) as f:
            data = json.load(f)
        self.assertEqual(data["provenance"]["command"], "synth")
        self.assertEqual(data["spec"]["seed"], 1)

    def test_main_spec_file_with_override(self):
        spec = self.path("spec.yaml")
        with open(spec, "w") as f:
            f.write(
                "bits: 6\nwidth: 10\nheight: 10\n"
                "curve:\n  family: sigmoid\n  params: [0.2, 0.4]\n"
            )
        out = self.path("out.pgm")
        with mock.patch("builtins.print"):
            self.assertEqual(target.main(["--spec", spec, "--width", "12", "--out", out]), 0)
        image = read_image(out)
        self.assertEqual((image.width, image.height, image.bits), (12, 10, 6))

    def test_main_unknown_spec_key(self):
        spec = self.path("spec.json")
        with open(spec, "w") as f:
            json.dump({"colour": True}, f)
        with mock.patch("builtins.print") as mock_print:
            self.assertEqual(target.main(["--spec", spec, "--out", self.path("o.pgm")]), 2)
            self.assertIn("colour", mock_print.call_args[0][0])

    def test_main_missing_params(self):
        with mock.patch("builtins.print"):
            self.assertEqual(
                target.main(["--curve", "gamma", "--out", self.path("o.pgm")]), 2
            )

    def test_main_unwritable_output(self):
        out = self.path(os.path.join("missing", "o.pgm"))
        with mock.patch("builtins.print"):
            self.assertEqual(target.main(["--width", "4", "--height", "4", "--out", out]), 2)


if __name__ == "__main__":
    unittest.main()
