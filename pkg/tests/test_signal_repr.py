import numpy as np
import pytest

from fsvdd.signal_repr import (
    AnalyticSignal,
    IFSignal,
    Standardizer,
    analytic,
    analytic_signal,
    fit_standardizer,
    instantaneous_amplitude,
    instantaneous_amplitude_array,
    standardize,
)

from _oracles import hilbert_direct


def make(samples, label="healthy", **meta):
    return IFSignal(samples=np.asarray(samples, dtype=float), label=label,
                    meta=meta)


class TestStandardizer:
    def test_constant_corpus_is_an_error(self):
        sigs = [make(np.full(10, 5.0)) for _ in range(3)]
        with pytest.raises(ValueError):
            fit_standardizer(sigs)

    def test_empty_input_is_an_error(self):
        with pytest.raises(ValueError):
            fit_standardizer([])

    def test_two_value_population(self):
        sigs = [make(np.zeros(8)), make(np.full(8, 2.0))]
        s = fit_standardizer(sigs)
        assert s.mean == 1.0
        assert s.std == 1.0

    def test_recovers_population_parameters(self):
        rng = np.random.default_rng(42)
        sigs = [make(rng.normal(3.0, 2.0, 1000)) for _ in range(100)]
        s = fit_standardizer(sigs)
        assert abs(s.mean - 3.0) < 0.05
        assert abs(s.std - 2.0) < 0.05

    def test_standardize_at_mean_gives_zeros(self):
        s = Standardizer(mean=4.0, std=2.0)
        out = standardize(make(np.full(6, 4.0)), s)
        assert np.all(out.samples == 0.0)

    def test_identity_when_mean0_std1(self):
        s = Standardizer(mean=0.0, std=1.0)
        x = make([0.5, -1.5, 2.0])
        assert np.array_equal(standardize(x, s).samples, x.samples)

    def test_substitution(self):
        s = Standardizer(mean=1.0, std=2.0)
        out = standardize(make([1.0, 3.0]), s)
        assert np.array_equal(out.samples, [0.0, 1.0])

    def test_label_and_meta_preserved(self):
        s = Standardizer(mean=0.0, std=2.0)
        x = make([1.0, 2.0], label="abnormal", scan=3)
        out = standardize(x, s)
        assert out.label == "abnormal"
        assert out.meta == {"scan": 3}

    def test_round_trip(self):
        rng = np.random.default_rng(0)
        x = rng.normal(2.0, 0.7, 50)
        s = Standardizer(mean=1.3, std=0.9)
        back = s.invert(s.apply(x))
        np.testing.assert_allclose(back, x, rtol=0, atol=1e-12)

    def test_per_bin_variant(self):
        rng = np.random.default_rng(1)
        sigs = [make(rng.normal([0.0, 5.0, -2.0], [1.0, 2.0, 0.5]))
                for _ in range(4000)]
        s = fit_standardizer(sigs, per_bin=True)
        np.testing.assert_allclose(s.mean, [0.0, 5.0, -2.0], atol=0.1)
        np.testing.assert_allclose(s.std, [1.0, 2.0, 0.5], atol=0.1)

    def test_std_must_be_positive(self):
        with pytest.raises(ValueError):
            Standardizer(mean=0.0, std=0.0)


class TestAnalytic:
    @pytest.mark.parametrize("L", [1500, 1501, 64, 65])
    def test_cosine_becomes_phasor(self, L):
        rng = np.random.default_rng(L)
        for _ in range(5):
            k = int(rng.integers(1, (L - 1) // 2))
            t = np.arange(L)
            x = np.cos(2 * np.pi * k * t / L)
            xh = analytic_signal(x)
            expected = np.exp(1j * 2 * np.pi * k * t / L)
            assert np.max(np.abs(xh - expected)) < 1e-9

    def test_sine_quadrature_identity(self):
        L, k = 128, 9
        t = np.arange(L)
        xh = analytic_signal(np.sin(2 * np.pi * k * t / L))
        expected = -1j * np.exp(1j * 2 * np.pi * k * t / L)
        assert np.max(np.abs(xh - expected)) < 1e-9

    @pytest.mark.parametrize("L", [64, 65])
    def test_matches_direct_convolution_oracle(self, L):
        rng = np.random.default_rng(7 + L)
        x = rng.standard_normal(L)
        xh = analytic_signal(x)
        np.testing.assert_allclose(xh.imag, hilbert_direct(x), rtol=0, atol=1e-6)

    @pytest.mark.parametrize("L", [64, 65, 256, 257])
    def test_real_part_identity_and_dead_negative_bins(self, L):
        rng = np.random.default_rng(L)
        x = rng.standard_normal(L)
        xh = analytic_signal(x)
        assert np.max(np.abs(xh.real - x)) < 1e-9
        spec = np.fft.fft(xh)
        neg = spec[(L + 1) // 2 + (1 if L % 2 == 0 else 0):] if L % 2 == 0 \
            else spec[(L + 1) // 2:]
        assert np.max(np.abs(neg)) < 1e-9 * np.linalg.norm(x)

    def test_batch_rows_match_single(self):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((4, 33))
        batch = analytic_signal(X)
        for i in range(4):
            np.testing.assert_array_equal(batch[i], analytic_signal(X[i]))

    def test_too_short_rejected(self):
        with pytest.raises(ValueError):
            analytic_signal(np.ones(1))

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            analytic_signal(np.array([1.0, np.nan, 2.0]))

    def test_wrapper_keeps_metadata(self):
        x = make(np.cos(np.linspace(0, 6, 32)), label="abnormal", pos=1)
        xh = analytic(x)
        assert isinstance(xh, AnalyticSignal)
        assert xh.label == "abnormal" and xh.meta == {"pos": 1}


class TestAmplitude:
    def test_unit_phasor(self):
        t = np.arange(50)
        xh = np.exp(1j * 0.3 * t)
        np.testing.assert_allclose(instantaneous_amplitude_array(xh), 1.0,
                                   atol=1e-12)

    def test_zero_signal(self):
        assert np.all(instantaneous_amplitude_array(np.zeros(10, complex)) == 0.0)

    def test_scaled_phasor(self):
        t = np.arange(50)
        xh = 2.5 * np.exp(1j * (0.3 * t + 0.7))
        np.testing.assert_allclose(instantaneous_amplitude_array(xh), 2.5,
                                   atol=1e-12)

    def test_nonnegative_and_rotation_invariant(self):
        rng = np.random.default_rng(5)
        z = rng.standard_normal(100) + 1j * rng.standard_normal(100)
        amp = instantaneous_amplitude_array(z)
        assert np.all(amp >= 0.0)
        rotated = instantaneous_amplitude_array(z * np.exp(1j * 1.234))
        np.testing.assert_allclose(rotated, amp, rtol=0, atol=1e-12)

    def test_wrapper(self):
        xh = AnalyticSignal(samples=np.exp(1j * np.arange(8)), label="healthy")
        amp = instantaneous_amplitude(xh)
        assert isinstance(amp, IFSignal)
        np.testing.assert_allclose(amp.samples, 1.0, atol=1e-12)


class TestIFSignal:
    def test_rejects_bad_label(self):
        with pytest.raises(ValueError):
            IFSignal(samples=np.ones(4), label="weird")

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            IFSignal(samples=np.array([1.0, np.inf]))

    def test_rejects_matrix(self):
        with pytest.raises(ValueError):
            IFSignal(samples=np.ones((2, 2)))
