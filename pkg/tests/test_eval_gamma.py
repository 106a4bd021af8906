import json
import os
import tempfile
import unittest
from unittest import mock

import contrast_forensics.eval_gamma as target
from contrast_forensics.evaluation import EvalReport
from contrast_forensics.util import InputError


def fake_report(**kwargs):
    return EvalReport("gamma", [], {"sigma=0.01": {"accuracy": 0.5}})


class TestEvalGamma(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmpdir.cleanup)

    def test_build_argument_parser(self):
        args = target.build_argument_parser().parse_args([])
        self.assertEqual(args.family, "gamma")
        self.assertEqual(args.gammas, "0.4,0.7,1.3,1.8,2.2")
        self.assertEqual((args.images, args.sigmas, args.eps), (20, "0.01", 0.05))
        self.assertFalse(args.timing)

    def test_parse_sigmoids(self):
        self.assertEqual(target.parse_sigmoids("0.1:0.5,0.2:0.4"), [(0.1, 0.5), (0.2, 0.4)])
        for text in ("0.1", "0.1:0.2:0.3", "a:b"):
            with self.assertRaises(InputError, msg=text):
                target.parse_sigmoids(text)

    @mock.patch("contrast_forensics.eval_gamma.run_gamma_eval", side_effect=fake_report)
    def test_main_gamma(self, mock_run):
        argv = ["--gammas", "1.3,1.8", "--grid", "1.0:0.5:2.0", "--sigmas", "0,0.01", "--images", "3"]
        with mock.patch("builtins.print") as mock_print:
            self.assertEqual(target.main(argv), 0)
            mock_print.assert_called_once_with("eval-gamma: sigma=0.01: accuracy 0.500 at eps 0.05")
        kwargs = mock_run.call_args[1]
        self.assertEqual(kwargs["truths"], [(1.3,), (1.8,)])
        self.assertEqual(kwargs["grid"].values, ((1.0,), (1.5,), (2.0,)))
        self.assertEqual(kwargs["sigmas"], [0.0, 0.01])
        self.assertEqual(kwargs["images"], 3)

    @mock.patch("contrast_forensics.eval_gamma.run_gamma_eval", side_effect=fake_report)
    def test_main_sigmoid(self, mock_run):
        argv = ["--family", "sigmoid", "--alphas", "0.1,0.2", "--mus", "0.4,0.5"]
        with mock.patch("builtins.print"):
            self.assertEqual(target.main(argv), 0)
        kwargs = mock_run.call_args[1]
        self.assertEqual(kwargs["truths"], [(0.1, 0.5), (0.2, 0.4)])
        self.assertEqual(kwargs["grid"].family, "sigmoid")
        self.assertEqual(len(kwargs["grid"]), 4)

    def test_main_small_run(self):
        report = os.path.join(self.tmpdir.name, "gamma.json")
        argv = [
            "--gammas", "1.4", "--grid", "1.3:0.1:1.5", "--sigmas", "0",
            "--images", "1", "--pixels", "4096", "--workers", "1", "--json", report,
        ]
        with mock.patch("builtins.print") as mock_print:
            self.assertEqual(target.main(argv), 0)
            mock_print.assert_called_once_with("eval-gamma: sigma=0: accuracy 1.000 at eps 0.05")
        with open(report) as f:
            data = json.load(f)
        self.assertEqual(data["provenance"]["command"], "eval-gamma")
        self.assertEqual(len(data["cases"]), 1)

    def test_main_bad_gammas(self):
        with mock.patch("builtins.print") as mock_print:
            self.assertEqual(target.main(["--gammas", "x"]), 2)
            self.assertTrue(mock_print.call_args[0][0].startswith("eval-gamma: "))


if __name__ == "__main__":
    unittest.main()
