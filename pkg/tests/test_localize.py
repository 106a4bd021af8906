import json
import os
import tempfile
import unittest
from unittest import mock

import numpy as np

import contrast_forensics.localize as target
from contrast_forensics.image_io import GrayImage, read_mask, write_image, write_mask


class TestLocalize(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmpdir.cleanup)
        self.image = self.path("flat.pgm")
        write_image(GrayImage.from_array(np.full((100, 100), 128), 8), self.image)

    def path(self, name):
        return os.path.join(self.tmpdir.name, name)

    def test_build_argument_parser(self):
        args = target.build_argument_parser().parse_args(["--input", "a.pgm", "--json", "r.json"])
        self.assertEqual(args.report, "r.json")
        self.assertIsNone(args.stride)
        self.assertIsNone(args.block)

    def test_params_from_args(self):
        args = target.build_argument_parser().parse_args(["--input", "a.pgm", "--stride", "25"])
        config = {
            "detector": {"beta": 0.2, "stride": 5},
            "nonparametric": {"xi": 4},
            "solver": {"lambda": 0.5},
        }
        params = target.params_from_args(args, config)
        self.assertEqual((params.beta, params.stride, params.block_size), (0.2, 25, 50))
        self.assertEqual(params.nonparam.xi, 4)
        self.assertEqual(params.lam, 0.5)

    def test_params_from_args_defaults(self):
        args = target.build_argument_parser().parse_args(["--input", "a.pgm"])
        params = target.params_from_args(args, {})
        self.assertEqual((params.beta, params.sigma, params.em_max), (0.1, 0.01, 10))

    def test_main_flat_image(self):
        truth = np.zeros((100, 100), dtype=bool)
        truth[:, :50] = True
        truth_path, mask, report = self.path("truth.pgm"), self.path("mask.pgm"), self.path("r.json")
        write_mask(truth, truth_path)
        argv = [
            "--input", self.image, "--stride", "25", "--em-max", "2",
            "--mask", mask, "--truth", truth_path, "--report", report,
        ]
        with mock.patch("builtins.print") as mock_print:
            self.assertEqual(target.main(argv), 0)
            message = mock_print.call_args[0][0]
        self.assertIn("0.0% of pixels flagged", message)
        self.assertIn("(single label", message)
        self.assertIn("DE 0.000, FP 0.000", message)
        self.assertFalse(read_mask(mask).any())
        with open(report) as f:
            data = json.load(f)
        self.assertEqual(len(data["labels"]), 9)
        self.assertEqual(data["scores"], {"de": 0.0, "fp": 0.0})
        self.assertEqual(data["curve0"], data["curve1"])
        self.assertTrue(data["diagnostics"]["degenerate"])
        self.assertEqual(data["provenance"]["command"], "localize")

    def test_main_image_too_small(self):
        small = self.path("small.pgm")
        write_image(GrayImage.from_array(np.zeros((60, 60)), 8), small)
        with mock.patch("builtins.print") as mock_print:
            self.assertEqual(target.main(["--input", small]), 2)
            self.assertIn("block size", mock_print.call_args[0][0])

    def test_main_truth_shape_mismatch(self):
        truth = self.path("truth.pgm")
        write_mask(np.ones((10, 10), dtype=bool), truth)
        argv = ["--input", self.image, "--stride", "25", "--em-max", "1", "--truth", truth]
        with mock.patch("builtins.print") as mock_print:
            self.assertEqual(target.main(argv), 2)
            self.assertIn("mask shapes differ", mock_print.call_args[0][0])

    def test_main_bad_beta(self):
        with mock.patch("builtins.print"):
            self.assertEqual(target.main(["--input", self.image, "--beta", "-1"]), 2)


if __name__ == "__main__":
    unittest.main()
