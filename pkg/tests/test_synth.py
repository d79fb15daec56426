import numpy as np
import pytest

from elastica_denoise.grid import grad_forward, magnitude
from elastica_denoise.synth import (
    DEFAULT_INTENSITIES,
    DEFAULT_RADII,
    NoiseSpec,
    RingSpec,
    add_gaussian_noise,
    gaussian_field,
    make_rings,
)

from _oracles import gaussian_sample, splitmix64


class TestRingSpec:
    def test_default_geometry(self):
        spec = RingSpec.default()
        assert spec.size == (512, 512)
        assert spec.radii == DEFAULT_RADII
        assert spec.intensities == DEFAULT_INTENSITIES

    def test_default_scales_with_size(self):
        spec = RingSpec.default(256)
        assert spec.size == (256, 256)
        assert spec.radii == tuple(r / 2 for r in DEFAULT_RADII)

    @pytest.mark.parametrize("kwargs", [
        dict(radii=(10.0, 5.0), intensities=(0.1, 0.2, 0.3)),
        dict(radii=(10.0, 10.0), intensities=(0.1, 0.2, 0.3)),
        dict(radii=(-1.0,), intensities=(0.1, 0.2)),
        dict(radii=(10.0,), intensities=(0.1,)),
        dict(radii=(10.0,), intensities=(0.1, 1.2)),
        dict(radii=(), intensities=(0.5,)),
    ])
    def test_invalid_specs_rejected(self, kwargs):
        with pytest.raises(ValueError):
            RingSpec(size=(32, 32), **kwargs)


class TestMakeRings:
    def test_single_huge_radius_gives_constant(self):
        spec = RingSpec(size=(8, 8), radii=(100.0,), intensities=(0.8, 0.2))
        assert np.all(make_rings(spec) == 0.8)

    def test_center_pixel_takes_inner_intensity(self):
        spec = RingSpec(size=(9, 9), radii=(2.0,), intensities=(0.3, 0.9))
        img = make_rings(spec)
        assert img[4, 4] == 0.3

    def test_histogram_contains_exactly_the_specified_levels(self):
        img = make_rings(RingSpec.default(128))
        assert set(np.unique(img)) == set(DEFAULT_INTENSITIES)

    def test_piecewise_constant_gradient_sparsity(self):
        img = make_rings(RingSpec.default(512))
        g = magnitude(grad_forward(img))
        assert np.mean(g != 0.0) < 0.05

    def test_explicit_center(self):
        spec = RingSpec(size=(8, 8), center=(0.0, 0.0), radii=(1.5,), intensities=(1.0, 0.0))
        img = make_rings(spec)
        assert img[0, 0] == 1.0 and img[0, 1] == 1.0 and img[3, 3] == 0.0


class TestNoise:
    def test_zero_variance_is_identity(self):
        u = make_rings(RingSpec.default(16))
        out = add_gaussian_noise(u, NoiseSpec(0.0, 123))
        assert np.array_equal(out, u)
        assert out is not u

    def test_seeded_reproducibility(self):
        u = make_rings(RingSpec.default(32))
        a = add_gaussian_noise(u, NoiseSpec(0.01, 42))
        b = add_gaussian_noise(u, NoiseSpec(0.01, 42))
        assert np.array_equal(a, b)

    def test_different_seeds_differ(self):
        u = np.zeros((16, 16))
        a = add_gaussian_noise(u, NoiseSpec(0.01, 1))
        b = add_gaussian_noise(u, NoiseSpec(0.01, 2))
        assert not np.array_equal(a, b)

    def test_not_clamped(self):
        u = np.ones((64, 64))
        noisy = add_gaussian_noise(u, NoiseSpec(0.01, 7))
        assert noisy.max() > 1.0

    def test_negative_variance_rejected(self):
        with pytest.raises(ValueError):
            NoiseSpec(-0.01, 0)

    def test_sample_variance_and_mean(self):
        u = np.zeros((512, 512))
        noise = add_gaussian_noise(u, NoiseSpec(0.01, 42))
        assert 0.0093 <= noise.var() <= 0.0107
        assert abs(noise.mean()) <= 4.0 * np.sqrt(0.01 / noise.size)


class TestGeneratorAgainstScalarReference:
    def test_integer_stream_matches_reference(self):
        from elastica_denoise.synth import _splitmix64

        counters = np.arange(32, dtype=np.uint64)
        got = _splitmix64(counters, 987654321)
        for t in range(32):
            assert int(got[t]) == splitmix64(987654321, t)

    def test_gaussian_field_matches_scalar_reference(self):
        field = gaussian_field((3, 5), 2024)
        for idx in range(15):
            expected = gaussian_sample(2024, idx)
            assert field.flat[idx] == pytest.approx(expected, rel=1e-12, abs=1e-12)

    def test_seed_masking_to_64_bits(self):
        a = gaussian_field((4, 4), 5)
        b = gaussian_field((4, 4), 5 + (1 << 64))
        assert np.array_equal(a, b)
