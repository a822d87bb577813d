import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from centrafit.data import (
    Histogram,
    WeightedSample,
    dct_abs_histogram,
    exponential_draws,
    histogram_to_sample,
    read_histogram_csv,
    read_pgm,
    synth_exponential,
    write_histogram_csv,
    write_pgm,
)
from centrafit.errors import EmptyHistogram, ImageTooSmall


class TestHistogramToSample:
    def test_uniform_two_bins(self):
        s = histogram_to_sample(Histogram([0, 1, 2], [1, 1]))
        np.testing.assert_allclose(s.points, [0.5, 1.5])
        np.testing.assert_allclose(s.weights, [0.5, 0.5])
        np.testing.assert_allclose(s.densities, [0.5, 0.5])

    def test_single_bin_density_integrates_to_one(self):
        s = histogram_to_sample(Histogram([0, 1], [4]))
        np.testing.assert_allclose(s.points, [0.5])
        np.testing.assert_allclose(s.weights, [1.0])
        np.testing.assert_allclose(s.densities, [1.0])

    def test_unequal_widths(self):
        # by hand: counts / (total * width) = 2/(4*1), 2/(4*2)
        s = histogram_to_sample(Histogram([0, 1, 3], [2, 2]))
        np.testing.assert_allclose(s.densities, [0.5, 0.25])

    def test_zero_count_bins_dropped(self):
        s = histogram_to_sample(Histogram([0, 1, 2, 3], [3, 0, 1]))
        np.testing.assert_allclose(s.points, [0.5, 2.5])
        np.testing.assert_allclose(s.weights, [0.75, 0.25])

    def test_zero_total_count_rejected(self):
        with pytest.raises(EmptyHistogram):
            Histogram([0, 1, 2], [0, 0])

    @given(
        widths=st.lists(st.floats(0.01, 10.0), min_size=1, max_size=30),
        counts=st.lists(st.integers(0, 1000), min_size=1, max_size=30),
        left=st.floats(0.0, 5.0),
    )
    @settings(max_examples=200)
    def test_sample_invariants(self, widths, counts, left):
        n = min(len(widths), len(counts))
        widths, counts = widths[:n], counts[:n]
        if sum(counts) == 0:
            counts[0] = 1
        edges = left + np.concatenate([[0.0], np.cumsum(widths)])
        s = histogram_to_sample(Histogram(edges, counts))
        assert abs(s.weights.sum() - 1.0) <= 1e-12
        assert np.all(np.isfinite(s.points))
        assert np.all(s.weights > 0)
        kept = np.asarray(counts)[np.asarray(counts) > 0]
        widths_kept = np.asarray(widths)[np.asarray(counts) > 0]
        assert abs(np.sum(s.densities * widths_kept) - 1.0) <= 1e-10


class TestWeightedSample:
    def test_rejects_unnormalized_weights(self):
        with pytest.raises(ValueError):
            WeightedSample(np.array([1.0, 2.0]), np.array([0.5, 0.6]))

    def test_rejects_misaligned_densities(self):
        with pytest.raises(ValueError):
            WeightedSample(
                np.array([1.0, 2.0]), np.array([0.5, 0.5]), np.array([1.0])
            )

    def test_rejects_nonfinite_points(self):
        with pytest.raises(ValueError):
            WeightedSample(np.array([1.0, np.inf]), np.array([0.5, 0.5]))


class TestSynthExponential:
    def test_deterministic(self):
        a = synth_exponential(1.0, 1000, seed=7)
        b = synth_exponential(1.0, 1000, seed=7)
        np.testing.assert_array_equal(a.counts, b.counts)
        np.testing.assert_array_equal(a.bin_edges, b.bin_edges)

    def test_single_draw_total(self):
        assert synth_exponential(2.0, 1, seed=5).total == 1

    def test_draw_mean_matches_rate(self):
        draws = exponential_draws(1.0, 100_000, seed=11)
        assert abs(draws.mean() - 1.0) < 0.01

    def test_regenerated_draws_within_three_standard_errors(self):
        theta = 0.7
        draws = exponential_draws(theta, 50_000, seed=3)
        se = (1.0 / theta) / math.sqrt(draws.size)
        assert abs(draws.mean() - 1.0 / theta) < 3 * se

    def test_contamination_adds_tail_mass(self):
        clean = exponential_draws(1.0, 50_000, seed=1)
        dirty = exponential_draws(1.0, 50_000, contamination=0.2, outlier_scale=20.0, seed=1)
        assert dirty.mean() > clean.mean() * 2

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            synth_exponential(0.0, 10)
        with pytest.raises(ValueError):
            synth_exponential(1.0, 0)
        with pytest.raises(ValueError):
            synth_exponential(1.0, 10, contamination=1.0)


def brute_force_dct2(block):
    """Textbook orthonormal type-II 2-D DCT, double cosine sum."""
    n = block.shape[0]
    out = np.zeros_like(block, dtype=float)
    for u in range(n):
        for v in range(n):
            cu = math.sqrt(1.0 / n) if u == 0 else math.sqrt(2.0 / n)
            cv = math.sqrt(1.0 / n) if v == 0 else math.sqrt(2.0 / n)
            acc = 0.0
            for m in range(n):
                for k in range(n):
                    acc += (
                        block[m, k]
                        * math.cos(math.pi * (2 * m + 1) * u / (2 * n))
                        * math.cos(math.pi * (2 * k + 1) * v / (2 * n))
                    )
            out[u, v] = cu * cv * acc
    return out


class TestDctHistogram:
    def test_constant_image_mass_in_first_bin(self):
        img = np.full((16, 16), 100, dtype=np.uint8)
        hist = dct_abs_histogram(img, exclude_dc=True)
        assert hist.counts[0] == hist.total

    def test_impulse_dc_coefficient(self):
        img = np.zeros((8, 8), dtype=np.uint8)
        img[0, 0] = 200
        oracle = brute_force_dct2(img.astype(float))
        dc = 200 / 8  # orthonormal transform scales the block sum by 1/block
        assert oracle[0, 0] == pytest.approx(dc)
        incl = dct_abs_histogram(img, bins=16, exclude_dc=False)
        excl = dct_abs_histogram(img, bins=16, exclude_dc=True)
        # ranges agree (the largest magnitude is an AC term), so dropping the
        # DC removes exactly one count from the bin containing it
        np.testing.assert_array_equal(incl.bin_edges, excl.bin_edges)
        dc_bin = np.searchsorted(incl.bin_edges, dc, side="right") - 1
        diff = incl.counts - excl.counts
        assert diff[dc_bin] == 1
        assert diff.sum() == 1

    def test_matches_brute_force_block_transform(self):
        rng = np.random.default_rng(0)
        img = rng.integers(0, 256, size=(8, 8)).astype(np.uint8)
        oracle = np.abs(brute_force_dct2(img.astype(float)))
        hist = dct_abs_histogram(img, bins=32, exclude_dc=False)
        expected, _ = np.histogram(
            oracle.ravel(), bins=32, range=(0.0, oracle.max())
        )
        np.testing.assert_array_equal(hist.counts, expected)

    def test_total_counts(self):
        rng = np.random.default_rng(1)
        img = rng.integers(0, 256, size=(20, 17)).astype(np.uint8)
        blocks = (20 // 8) * (17 // 8)
        assert dct_abs_histogram(img, exclude_dc=True).total == blocks * 63
        assert dct_abs_histogram(img, exclude_dc=False).total == blocks * 64

    def test_too_small_image(self):
        with pytest.raises(ImageTooSmall):
            dct_abs_histogram(np.zeros((4, 20), dtype=np.uint8))


class TestPgm:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(2)
        img = rng.integers(0, 256, size=(12, 9)).astype(np.uint8)
        path = tmp_path / "img.pgm"
        write_pgm(path, img)
        np.testing.assert_array_equal(read_pgm(path), img)

    def test_header_comments(self, tmp_path):
        img = np.arange(16, dtype=np.uint8).reshape(4, 4)
        path = tmp_path / "img.pgm"
        raw = b"P5\n# a comment\n4 4\n# another\n255\n" + img.tobytes()
        path.write_bytes(raw)
        np.testing.assert_array_equal(read_pgm(path), img)

    def test_rejects_wrong_magic(self, tmp_path):
        path = tmp_path / "img.pgm"
        path.write_bytes(b"P2\n2 2\n255\n....")
        with pytest.raises(ValueError):
            read_pgm(path)

    def test_rejects_truncated_raster(self, tmp_path):
        path = tmp_path / "img.pgm"
        path.write_bytes(b"P5\n4 4\n255\nshort")
        with pytest.raises(ValueError):
            read_pgm(path)


class TestHistogramCsv:
    def test_round_trip(self, tmp_path):
        hist = synth_exponential(1.0, 500, seed=9, bins=10)
        path = tmp_path / "h.csv"
        write_histogram_csv(path, hist)
        back = read_histogram_csv(path)
        np.testing.assert_array_equal(back.bin_edges, hist.bin_edges)
        np.testing.assert_array_equal(back.counts, hist.counts)

    def test_rejects_bad_header(self, tmp_path):
        path = tmp_path / "h.csv"
        path.write_text("a,b,c\n0,1,2\n")
        with pytest.raises(ValueError):
            read_histogram_csv(path)

    def test_rejects_gap_between_bins(self, tmp_path):
        path = tmp_path / "h.csv"
        path.write_text("bin_left,bin_right,count\n0.0,1.0,2\n1.5,2.0,3\n")
        with pytest.raises(ValueError):
            read_histogram_csv(path)

    def test_rejects_non_numeric(self, tmp_path):
        path = tmp_path / "h.csv"
        path.write_text("bin_left,bin_right,count\n0.0,one,2\n")
        with pytest.raises(ValueError):
            read_histogram_csv(path)
