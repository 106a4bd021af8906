import json
import os
import tempfile
import unittest
from unittest import mock

import contrast_forensics.estimate_gamma as target
from contrast_forensics.image_io import write_image
from contrast_forensics.synthesis import CurveSpec, SynthSpec, synth_image
from contrast_forensics.util import NumericalError


class TestEstimateGamma(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmpdir.cleanup)
        spec = SynthSpec(width=64, height=64, curve=CurveSpec("gamma", (1.4,)), seed=2)
        self.image = self.path("enhanced.pgm")
        write_image(synth_image(spec)[1], self.image)

    def path(self, name):
        return os.path.join(self.tmpdir.name, name)

    def test_build_argument_parser(self):
        args = target.build_argument_parser().parse_args(["--input", "a.pgm"])
        self.assertEqual(args.family, "gamma")
        self.assertEqual(args.grid, "0.1:0.01:2.5")
        self.assertEqual(args.sigma, 0.01)
        self.assertFalse(args.no_dedupe)
        self.assertIsNone(args.lam)

    def test_build_argument_parser_help_message(self):
        help_text = target.build_argument_parser().format_help()
        self.assertIn("--landscape", help_text)
        self.assertIn("--lambda", help_text)

    def test_main_gamma(self):
        report, landscape = self.path("gamma.json"), self.path("landscape.csv")
        argv = ["--input", self.image, "--grid", "1.3,1.4,1.5", "--json", report, "--landscape", landscape]
        with mock.patch("builtins.print") as mock_print:
            self.assertEqual(target.main(argv), 0)
            self.assertIn("best gamma 1.4 ", mock_print.call_args[0][0])
        with open(report) as f:
            data = json.load(f)
        self.assertEqual(data["best_param"], [1.4])
        self.assertEqual(data["provenance"]["command"], "estimate-gamma")
        self.assertEqual(len(data["landscape"]), 3)
        with open(landscape) as f:
            lines = f.read().splitlines()
        self.assertEqual(lines[0], "param,objective")
        self.assertEqual(len(lines), 4)
        self.assertTrue(lines[2].startswith("1.4,"))

    def test_main_sigmoid_landscape(self):
        landscape = self.path("landscape.csv")
        argv = [
            "--input", self.image, "--family", "sigmoid", "--alphas", "0.2",
            "--mus", "0.4,0.5", "--landscape", landscape, "--no-dedupe",
        ]
        with mock.patch("builtins.print"):
            self.assertEqual(target.main(argv), 0)
        with open(landscape) as f:
            lines = f.read().splitlines()
        self.assertEqual(lines[0], "alpha,mu,objective")
        self.assertEqual(len(lines), 3)

    def test_main_config(self):
        config = self.path("settings.yaml")
        with open(config, "w") as f:
            f.write("solver:\n  lambda: 0.5\n  outer_max: 5\n")
        argv = ["--input", self.image, "--grid", "1.4", "--config", config, "--rho", "2"]
        with mock.patch(
            "contrast_forensics.estimate_gamma.estimate_parametric",
            wraps=target.estimate_parametric,
        ) as mock_estimate, mock.patch("builtins.print"):
            self.assertEqual(target.main(argv), 0)
        cfg = mock_estimate.call_args[0][3]
        self.assertEqual((cfg.lam, cfg.rho, cfg.outer_max), (0.5, 2.0, 5))

    def test_main_unknown_config_key(self):
        config = self.path("settings.json")
        with open(config, "w") as f:
            json.dump({"solver": {"lamda": 0.5}}, f)
        with mock.patch("builtins.print") as mock_print:
            self.assertEqual(target.main(["--input", self.image, "--config", config]), 2)
            self.assertIn("lamda", mock_print.call_args[0][0])

    def test_main_missing_input(self):
        with mock.patch("builtins.print"):
            self.assertEqual(target.main(["--input", self.path("missing.pgm"), "--grid", "1.0"]), 2)

    def test_main_bad_grid(self):
        with mock.patch("builtins.print"):
            self.assertEqual(target.main(["--input", self.image, "--grid", "2:0.1:1"]), 2)

    @mock.patch("contrast_forensics.estimate_gamma.estimate_parametric")
    def test_main_numerical_error(self, mock_estimate):
        mock_estimate.side_effect = NumericalError("objective became non-finite", [1.0])
        with mock.patch("builtins.print") as mock_print:
            self.assertEqual(target.main(["--input", self.image, "--grid", "1.0"]), 3)
            mock_print.assert_called_once_with(f"{self.image}: objective became non-finite")


if __name__ == "__main__":
    unittest.main()
