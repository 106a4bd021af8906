import os
import tempfile
import unittest

import numpy as np

import contrast_forensics.synthesis as target
from contrast_forensics.image_io import GrayImage, write_image
from contrast_forensics.transforms import TransformCurve, gamma_curve
from contrast_forensics.util import InputError


def gamma_spec(gamma, **kwargs):
    return target.SynthSpec(curve=target.CurveSpec("gamma", (gamma,)), **kwargs)


class TestSpecs(unittest.TestCase):
    def test_import(self):
        self.assertIsNotNone(target)

    def test_curve_spec_validation(self):
        with self.assertRaises(InputError):
            target.CurveSpec("cubic")
        with self.assertRaises(InputError):
            target.CurveSpec("gamma")
        with self.assertRaises(InputError):
            target.CurveSpec("sigmoid", (0.1,))
        with self.assertRaises(InputError):
            target.CurveSpec("spline")

    def test_curve_spec_build(self):
        self.assertEqual(target.CurveSpec().build(15), TransformCurve.identity(15))
        self.assertEqual(target.CurveSpec("gamma", (2.0,)).build(255), gamma_curve(2.0, 255))
        with self.assertRaises(InputError):
            target.CurveSpec("equalize").build(255)

    def test_synth_spec_from_mapping(self):
        spec = target.SynthSpec.from_mapping(
            {"bits": 6, "curve": {"family": "sigmoid", "params": [0.2, 0.4]}, "seed": 4}
        )
        self.assertEqual(spec.n, 63)
        self.assertEqual(spec.curve, target.CurveSpec("sigmoid", (0.2, 0.4)))
        with self.assertRaises(InputError):
            target.SynthSpec.from_mapping({"colour": True})
        with self.assertRaises(InputError):
            target.SynthSpec.from_mapping({"curve": {"family": "gamma", "gamma": 2}})

    def test_synth_spec_validation(self):
        for values in (
            {"bits": 0},
            {"width": 0},
            {"base": "image"},
            {"sigma": -1.0},
            {"curve": "gamma"},
        ):
            with self.assertRaises(InputError, msg=str(values)):
                target.SynthSpec(**values)

    def test_region(self):
        self.assertEqual(target.Region.parse("1,2,3,4"), target.Region(1, 2, 3, 4))
        for text in ("1,2,3", "a,b,c,d"):
            with self.assertRaises(InputError):
                target.Region.parse(text)
        mask = target.Region(1, 0, 2, 1).mask(4, 2)
        np.testing.assert_array_equal(mask, [[False, True, True, False], [False] * 4])
        with self.assertRaises(InputError):
            target.Region(3, 0, 2, 1).mask(4, 2)

    def test_parse_control_points(self):
        self.assertEqual(
            target.parse_control_points("64:72, 128:140"), ((64, 72), (128, 140))
        )
        with self.assertRaises(InputError):
            target.parse_control_points("64-72")

    def test_curve_from_text(self):
        self.assertEqual(target.curve_from_text("gamma", "0.6"), target.CurveSpec("gamma", (0.6,)))
        self.assertEqual(
            target.curve_from_text("sigmoid", "0.2,0.4"), target.CurveSpec("sigmoid", (0.2, 0.4))
        )
        spline = target.curve_from_text("spline", "64:112,192:224")
        self.assertEqual(spline.control_points, ((64, 112), (192, 224)))
        self.assertEqual(target.curve_from_text("equalize", "1.4"), target.CurveSpec("equalize"))
        with self.assertRaises(InputError):
            target.curve_from_text("gamma", "")
        with self.assertRaises(InputError):
            target.curve_from_text("spline", "")


class TestSynthesis(unittest.TestCase):
    def test_smooth_random_histogram(self):
        h = target.smooth_random_histogram(8, 3)
        self.assertTrue(np.all(h.values > 0))
        self.assertEqual(h, target.smooth_random_histogram(8, 3))
        self.assertNotEqual(h, target.smooth_random_histogram(8, 4))
        flat = target.smooth_random_histogram(8, 3, amplitude=0.0)
        np.testing.assert_allclose(flat.values, np.full(256, 1 / 256))

    def test_identity_leaves_pixels(self):
        pre, out, curve = target.synth_image(target.SynthSpec(width=32, height=16, seed=1))
        self.assertEqual(pre, out)
        self.assertEqual(curve, TransformCurve.identity(255))
        self.assertEqual((out.width, out.height, out.bits), (32, 16, 8))

    def test_gamma_image(self):
        pre, out, curve = target.synth_image(gamma_spec(1.4, width=16, height=16, seed=2))
        np.testing.assert_array_equal(out.pixels, curve.phi[pre.pixels])

    def test_deterministic(self):
        spec = gamma_spec(0.7, width=20, height=10, sigma=1.0, seed=5)
        self.assertEqual(target.synth_image(spec)[1], target.synth_image(spec)[1])
        other = gamma_spec(0.7, width=20, height=10, sigma=1.0, seed=6)
        self.assertNotEqual(target.synth_image(spec)[1], target.synth_image(other)[1])

    def test_noise_changes_pixels(self):
        clean = target.synth_image(gamma_spec(1.2, width=32, height=32, seed=7))[1]
        noisy = target.synth_image(gamma_spec(1.2, width=32, height=32, sigma=2.0, seed=7))[1]
        self.assertNotEqual(clean, noisy)
        self.assertLess(np.abs(clean.pixels.astype(int) - noisy.pixels.astype(int)).mean(), 4)

    def test_equalize(self):
        spec = target.SynthSpec(curve=target.CurveSpec("equalize"), width=64, height=64, seed=8)
        pre, out, curve = target.synth_image(spec)
        self.assertEqual(curve.phi[-1], 255)
        np.testing.assert_array_equal(out.pixels, curve.phi[pre.pixels])

    def test_base_image(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "base.pgm")
            write_image(GrayImage.from_array(np.full((4, 4), 7), 8), path)
            spec = target.SynthSpec(width=8, height=8, base="image", base_path=path)
            pre, _, _ = target.synth_image(spec)
            self.assertTrue(np.all(pre.pixels == 7))
            spec = target.SynthSpec(bits=6, base="image", base_path=path)
            with self.assertRaises(InputError):
                target.synth_image(spec)


class TestComposite(unittest.TestCase):
    def setUp(self):
        self.spec0 = gamma_spec(1.4, width=40, height=20, seed=9)
        self.spec1 = gamma_spec(0.6, width=40, height=20, seed=9)

    def test_empty_region(self):
        image, mask = target.synth_composite(self.spec0, self.spec1, target.Region(0, 0, 0, 0))
        self.assertFalse(mask.any())
        self.assertEqual(image, target.synth_image(self.spec0)[1])

    def test_full_region(self):
        image, mask = target.synth_composite(self.spec0, self.spec1, target.Region(0, 0, 40, 20))
        self.assertTrue(mask.all())
        self.assertEqual(image, target.synth_image(self.spec1)[1])

    def test_quarter_region(self):
        image, mask = target.synth_composite(self.spec0, self.spec1, target.Region(0, 0, 20, 10))
        self.assertEqual(mask.mean(), 0.25)
        out0 = target.synth_image(self.spec0)[1].pixels
        out1 = target.synth_image(self.spec1)[1].pixels
        np.testing.assert_array_equal(image.pixels, np.where(mask, out1, out0))

    def test_mask_region(self):
        mask = np.zeros((20, 40), dtype=bool)
        mask[::2] = True
        _, returned = target.synth_composite(self.spec0, self.spec1, mask)
        np.testing.assert_array_equal(returned, mask)
        with self.assertRaises(InputError):
            target.synth_composite(self.spec0, self.spec1, np.zeros((40, 20), dtype=bool))

    def test_errors(self):
        with self.assertRaises(InputError):
            target.synth_composite(self.spec0, self.spec1, target.Region(30, 0, 20, 10))
        with self.assertRaises(InputError):
            target.synth_composite(self.spec0, gamma_spec(0.6, width=20, height=20), target.Region(0, 0, 1, 1))


if __name__ == "__main__":
    unittest.main()
