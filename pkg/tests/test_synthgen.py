import numpy as np
import pytest

from hyperband.cube_io import QuantizationConfig, labels_series, load_cube, load_ground_truth, quantize_band
from hyperband.infotheory import entropy, joint_mi, mutual_information
from hyperband.synthgen import (
    DuplicateBand,
    InformativeBand,
    NoiseBand,
    SynthSpec,
    XorBand,
    duplicate_spec,
    generate,
    write_dataset,
    xor_contrast_spec,
    xor_spec,
)

CFG = QuantizationConfig()


class TestSpecValidation:
    def test_empty_plan(self):
        with pytest.raises(ValueError, match="at least one band"):
            SynthSpec(plan=())

    def test_single_xor_band(self):
        with pytest.raises(ValueError, match="xor"):
            SynthSpec(plan=(XorBand(),), n_classes=2)

    def test_xor_needs_two_classes(self):
        with pytest.raises(ValueError, match="n_classes=2"):
            SynthSpec(plan=(XorBand(), XorBand()), n_classes=4)

    def test_duplicate_must_reference_earlier(self):
        with pytest.raises(ValueError, match="earlier"):
            SynthSpec(plan=(DuplicateBand(of=0),))
        with pytest.raises(ValueError, match="earlier"):
            SynthSpec(plan=(NoiseBand(), DuplicateBand(of=1)))

    def test_unknown_transform(self):
        with pytest.raises(ValueError, match="transform"):
            InformativeBand(transform="cubed")


class TestGenerate:
    def test_deterministic(self):
        spec = duplicate_spec(5)
        c1, g1, _ = generate(spec)
        c2, g2, _ = generate(spec)
        assert np.array_equal(c1.values, c2.values)
        assert np.array_equal(g1.labels, g2.labels)

    def test_duplicate_plan_expectation(self):
        cube, gt, expected = generate(duplicate_spec(0))
        assert expected.redundant >= {1}
        assert 0 in expected.minimal
        assert np.array_equal(cube.band(0), cube.band(1))

    def test_simple_informative_duplicate_noise_expectation(self):
        spec = SynthSpec(plan=(InformativeBand(scale=100.0),
                               DuplicateBand(of=0),
                               NoiseBand()))
        _, _, expected = generate(spec)
        assert expected.minimal == {0}
        assert expected.redundant == {1}
        assert expected.noise == {2}

    def test_informative_band_has_positive_mi(self):
        cube, gt, _ = generate(duplicate_spec(0))
        series = quantize_band(cube, 0, gt, CFG)
        assert mutual_information(series, labels_series(gt)) > 0.5

    def test_noise_band_mi_below_finite_sample_epsilon(self):
        # 100x100 grid = 10000 labeled pixels; plug-in bias stays tiny
        cube, gt, expected = generate(duplicate_spec(0))
        labels = labels_series(gt)
        for band in expected.noise:
            series = quantize_band(cube, band, gt, CFG)
            assert mutual_information(series, labels) < 0.05

    def test_xor_pair_structure(self):
        cube, gt, expected = generate(xor_spec(0))
        assert expected.minimal == {0, 1}
        labels = labels_series(gt)
        a = quantize_band(cube, 0, gt, CFG)
        b = quantize_band(cube, 1, gt, CFG)
        h_gt = entropy(labels)
        assert mutual_information(a, labels) < 0.05
        assert mutual_information(b, labels) < 0.05
        assert joint_mi(a, b, labels) > 0.9 * h_gt

    def test_xor_contrast_weak_band(self):
        cube, gt, _ = generate(xor_contrast_spec(0))
        labels = labels_series(gt)
        weak = quantize_band(cube, 2, gt, CFG)
        weak_mi = mutual_information(weak, labels)
        assert 0.05 < weak_mi < 0.9

    def test_unlabeled_fraction(self):
        spec = SynthSpec(plan=(InformativeBand(),), n_rows=30, n_cols=30,
                         unlabeled_fraction=0.4, seed=1)
        _, gt, _ = generate(spec)
        assert 0 < gt.labeled_count < 900

    def test_values_stay_in_u16(self):
        spec = SynthSpec(plan=(InformativeBand(scale=30000.0, jitter=30000),),
                         n_classes=4, seed=2)
        cube, _, _ = generate(spec)
        assert cube.values.dtype == np.uint16


class TestWriteDataset:
    def test_round_trip_through_cube_io(self, tmp_path):
        paths = write_dataset(duplicate_spec(3), tmp_path)
        cube = load_cube(paths["cube"])
        gt = load_ground_truth(paths["gt"], cube.n_rows, cube.n_cols)
        direct_cube, direct_gt, _ = generate(duplicate_spec(3))
        assert np.array_equal(cube.values, direct_cube.values)
        assert np.array_equal(gt.labels, direct_gt.labels)
