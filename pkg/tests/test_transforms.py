import unittest

import numpy as np

import contrast_forensics.transforms as target
from contrast_forensics.histogram_core import PixelHistogram, empty_bin_count, from_pixels, w1_distance
from contrast_forensics.noise_model import NoiseSpec, apply_noise, gaussian_noise_matrix
from contrast_forensics.util import InputError


def random_histogram(rng, bits=8, zero_share=0.3):
    """Histogram from integer counts with a share of exactly empty bins."""
    counts = rng.integers(1, 20, size=2**bits).astype(float)
    counts[rng.random(2**bits) < zero_share] = 0
    counts[rng.integers(0, 2**bits)] += 1
    return PixelHistogram(bits, counts / counts.sum())


def random_curve(rng, n):
    return target.TransformCurve(n, np.sort(rng.integers(0, n + 1, size=n + 1)))


class TestTransformCurve(unittest.TestCase):
    def test_import(self):
        self.assertIsNotNone(target)

    def test_identity(self):
        curve = target.TransformCurve.identity(3)
        np.testing.assert_array_equal(curve.phi, [0, 1, 2, 3])
        self.assertFalse(curve.phi.flags.writeable)

    def test_invalid(self):
        for n, phi in ((3, [0, 2, 1, 3]), (3, [0, 1, 2]), (3, [0, 1, 2, 4]), (3, [0, 0.5, 1, 3])):
            with self.assertRaises(InputError, msg=str(phi)):
                target.TransformCurve(n, phi)

    def test_dict_record(self):
        curve = target.TransformCurve(3, [0, 0, 2, 3])
        self.assertEqual(curve.to_dict(), {"n": 3, "phi": [0, 0, 2, 3]})
        self.assertEqual(target.TransformCurve.from_dict(curve.to_dict()), curve)
        with self.assertRaises(InputError):
            target.TransformCurve.from_dict({"phi": [0, 1]})

    def test_round_half_away(self):
        np.testing.assert_array_equal(
            target.round_half_away([0.5, 1.5, 2.5, -0.5, 2.49]), [1, 2, 3, -1, 2]
        )


class TestCurveFamilies(unittest.TestCase):
    def test_gamma_curve(self):
        np.testing.assert_array_equal(target.gamma_curve(1.0, 255).phi, np.arange(256))
        self.assertEqual(target.gamma_curve(2.0, 255).phi[128], 64)
        self.assertEqual(target.gamma_curve(0.5, 255).phi[64], 128)
        curve = target.gamma_curve(1.7, 4095)
        self.assertEqual((curve.phi[0], curve.phi[-1]), (0, 4095))

    def test_gamma_curve_invalid(self):
        for gamma in (0.0, -1.0, np.nan):
            with self.assertRaises(InputError):
                target.gamma_curve(gamma, 255)

    def test_sigmoid_curve(self):
        for alpha, mu in ((0.05, 0.1), (0.25, 0.5), (0.5, 0.9), (0.1, 0.0), (0.1, 1.0)):
            phi = target.sigmoid_curve(alpha, mu, 255).phi
            self.assertEqual(phi[0], 0)
            self.assertEqual(phi[-1], 255)
            self.assertTrue(np.all(np.diff(phi) >= 0))
        self.assertEqual(target.sigmoid_curve(0.25, 0.5, 255).phi[128], 128)

    def test_sigmoid_curve_invalid(self):
        with self.assertRaises(InputError):
            target.sigmoid_curve(0.0, 0.5, 255)
        with self.assertRaises(InputError):
            target.sigmoid_curve(0.2, 1.5, 255)

    def test_hist_eq_curve(self):
        uniform = PixelHistogram(8, np.full(256, 1 / 256))
        expected = target.round_half_away(255 * (np.arange(256) + 1) / 256)
        np.testing.assert_array_equal(target.hist_eq_curve(uniform).phi, expected)
        point = np.zeros(256)
        point[0] = 1.0
        np.testing.assert_array_equal(
            target.hist_eq_curve(PixelHistogram(8, point)).phi, np.full(256, 255)
        )

    def test_spline_identity(self):
        np.testing.assert_array_equal(
            target.spline_curve([(0, 0), (255, 255)], 255).phi, np.arange(256)
        )
        np.testing.assert_array_equal(target.spline_curve([(128, 128)], 255).phi, np.arange(256))

    def test_spline_follows_gamma(self):
        gamma = target.gamma_curve(2.0, 255).phi
        knots = np.round(np.linspace(0, 255, 9)).astype(int)
        spline = target.spline_curve([(i, int(gamma[i])) for i in knots], 255).phi
        self.assertLessEqual(int(np.abs(spline - gamma).max()), 2)

    def test_spline_random_controls_are_monotone(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            xs = np.sort(rng.choice(np.arange(1, 255), size=5, replace=False))
            ys = np.sort(rng.integers(0, 256, size=5))
            phi = target.spline_curve(list(zip(xs, ys)), 255).phi
            self.assertTrue(np.all(np.diff(phi) >= 0))
            self.assertTrue(0 <= phi.min() and phi.max() <= 255)

    def test_spline_invalid(self):
        with self.assertRaises(InputError):
            target.spline_curve([(10, 50), (20, 40)], 255)
        with self.assertRaises(InputError):
            target.spline_curve([(20, 50), (10, 60)], 255)
        with self.assertRaises(InputError):
            target.spline_curve([(10, 300)], 255)


class TestApply(unittest.TestCase):
    def test_apply_identity(self):
        h = PixelHistogram(2, [0.1, 0.2, 0.3, 0.4])
        self.assertEqual(target.apply_to_histogram(target.TransformCurve.identity(3), h), h)

    def test_apply_all_to_one(self):
        h = PixelHistogram(2, [0.1, 0.2, 0.3, 0.4])
        out = target.apply_to_histogram(target.TransformCurve(3, [2, 2, 2, 2]), h)
        np.testing.assert_allclose(out.values, [0, 0, 1, 0])

    def test_apply_scatter(self):
        h = PixelHistogram(2, [0.1, 0.2, 0.3, 0.4])
        out = target.apply_to_histogram(target.TransformCurve(3, [0, 0, 3, 3]), h)
        np.testing.assert_allclose(out.values, [0.3, 0, 0, 0.7])

    def test_apply_size_mismatch(self):
        with self.assertRaises(InputError):
            target.apply_to_histogram(
                target.TransformCurve.identity(7), PixelHistogram(1, [0.5, 0.5])
            )

    def test_transfer_adjoint(self):
        rng = np.random.default_rng(6)
        transfer = random_curve(rng, 63).transfer_matrix()
        x, y = rng.normal(size=64), rng.normal(size=64)
        self.assertAlmostEqual(float(transfer.apply(x) @ y), float(x @ transfer.adjoint(y)))

    def test_empty_bins_never_decrease(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            h = random_histogram(rng)
            out = target.apply_to_histogram(random_curve(rng, 255), h)
            self.assertGreaterEqual(empty_bin_count(out, 0.0), empty_bin_count(h, 0.0))
            self.assertAlmostEqual(out.values.sum(), 1.0, delta=1e-12)
            self.assertTrue(np.all(out.values >= 0))

    def test_apply_to_pixels_identity(self):
        pixels = np.array([[0, 5], [255, 17]], dtype=np.uint16)
        out = target.apply_to_pixels(target.TransformCurve.identity(255), pixels)
        np.testing.assert_array_equal(out, pixels)
        self.assertEqual(out.dtype, np.uint16)

    def test_apply_to_pixels_zero_noise(self):
        curve = target.gamma_curve(1.5, 255)
        pixels = np.arange(256)
        np.testing.assert_array_equal(
            target.apply_to_pixels(curve, pixels, NoiseSpec(0.0), seed=1), curve.phi
        )

    def test_apply_to_pixels_seeded(self):
        curve = target.gamma_curve(0.8, 255)
        pixels = np.arange(256).repeat(10)
        a = target.apply_to_pixels(curve, pixels, NoiseSpec(2.0), seed=9)
        b = target.apply_to_pixels(curve, pixels, NoiseSpec(2.0), seed=9)
        np.testing.assert_array_equal(a, b)
        self.assertTrue(0 <= a.min() and a.max() <= 255)

    def test_apply_to_pixels_out_of_range(self):
        with self.assertRaises(InputError):
            target.apply_to_pixels(target.TransformCurve.identity(255), [256])

    def test_sampled_histogram_matches_model(self):
        rng = np.random.default_rng(8)
        h = PixelHistogram(8, rng.dirichlet(np.full(256, 5.0)))
        curve = target.gamma_curve(1.5, 255)
        model = apply_noise(gaussian_noise_matrix(1.0, 255), target.apply_to_histogram(curve, h))
        distances = []
        for count in (10_000, 1_000_000):
            pixels = rng.choice(256, size=count, p=h.values)
            out = target.apply_to_pixels(curve, pixels, NoiseSpec(1.0), seed=count)
            distances.append(w1_distance(from_pixels(out, 8), model))
        self.assertLess(distances[1], distances[0])
        self.assertLess(distances[1], 0.5)


class TestDistinguishableGammas(unittest.TestCase):
    n = 255

    def test_gamma_interval_interior(self):
        rng = np.random.default_rng(10)
        for _ in range(100):
            i, j = (int(v) for v in rng.integers(1, self.n, size=2))
            lower, upper = target.gamma_interval(i, j, self.n)
            self.assertLess(lower, upper)
            for share in (0.25, 0.5, 0.75):
                gamma = lower + share * (upper - lower)
                self.assertEqual(target.gamma_curve(gamma, self.n).phi[i], j)

    def test_gamma_interval_boundaries(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            i, j = (int(v) for v in rng.integers(1, self.n, size=2))
            lower, upper = target.gamma_interval(i, j, self.n)
            above = target.gamma_curve(upper * (1 + 1e-6), self.n).phi[i]
            below = target.gamma_curve(lower * (1 - 1e-6), self.n).phi[i]
            self.assertEqual(above, j - 1)
            self.assertEqual(below, j + 1)

    def test_gamma_interval_edges(self):
        lower, upper = target.gamma_interval(100, 0, self.n)
        self.assertEqual(upper, np.inf)
        lower, _ = target.gamma_interval(100, self.n, self.n)
        self.assertEqual(lower, 0.0)
        with self.assertRaises(InputError):
            target.gamma_interval(0, 5, self.n)
        with self.assertRaises(InputError):
            target.gamma_interval(5, self.n + 1, self.n)

    def test_interval_count_bound(self):
        intervals = target.distinguishable_gammas(self.n, 2.5)
        self.assertLessEqual(len(intervals), (self.n - 1) ** 2)
        self.assertEqual(intervals[0][0], 0.0)
        self.assertEqual(intervals[-1][1], 2.5)
        for (_, hi), (lo, _) in zip(intervals[:-1], intervals[1:]):
            self.assertEqual(hi, lo)

    def test_curve_constant_inside_intervals(self):
        intervals = target.distinguishable_gammas(self.n, 2.5)
        rng = np.random.default_rng(12)
        wide = [(lo, hi) for lo, hi in intervals if hi - lo > 1e-9]
        for k in rng.choice(len(wide), size=100, replace=False):
            lo, hi = wide[k]
            a = target.gamma_curve(lo + 0.25 * (hi - lo), self.n)
            b = target.gamma_curve(lo + 0.75 * (hi - lo), self.n)
            self.assertEqual(a, b)

    def test_distinct_curves_bounded_by_intervals(self):
        n = 16
        intervals = target.distinguishable_gammas(n, 2.5)
        curves = {target.gamma_curve(g, n).phi.tobytes() for g in np.arange(0.001, 2.5, 0.001)}
        self.assertLessEqual(len(curves), len(intervals))
        self.assertLessEqual(len(intervals), (n - 1) ** 2)

    def test_small_n_invalid(self):
        with self.assertRaises(InputError):
            target.gamma_breakpoints(1)


class TestHistogramMatching(unittest.TestCase):
    def test_example(self):
        curve = target.histogram_matching_transform([0.5, 0.5, 0, 0], [0, 0, 0.5, 0.5])
        np.testing.assert_array_equal(curve.phi, [2, 3, 3, 3])

    def test_same_histogram(self):
        h = [0.25, 0, 0.5, 0.25]
        phi = target.histogram_matching_transform(h, h).phi
        for i in (0, 2, 3):
            self.assertEqual(phi[i], i)

    def test_recovers_realizable_curve(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            source = rng.uniform(0.5, 1.5, size=256)
            source = PixelHistogram(8, source / source.sum())
            curve = random_curve(rng, 255)
            matched = target.histogram_matching_transform(
                source, target.apply_to_histogram(curve, source)
            )
            self.assertEqual(matched, curve)

    def test_monotone_output(self):
        rng = np.random.default_rng(14)
        for _ in range(50):
            a, b = rng.dirichlet(np.ones(64), size=2)
            phi = target.histogram_matching_transform(a, b).phi
            self.assertTrue(np.all(np.diff(phi) >= 0))
            self.assertTrue(0 <= phi.min() and phi.max() <= 63)

    def test_length_mismatch(self):
        with self.assertRaises(InputError):
            target.histogram_matching_transform([0.5, 0.5], [0.25] * 4)


if __name__ == "__main__":
    unittest.main()
