import numpy as np
import pytest

from fsvdd import complex_nn, svdd
from fsvdd.complex_nn import Activation, ComplexAutoencoder, DenseLayer
from fsvdd.errors import DegenerateResiduals
from fsvdd.focus_svdd import (
    decide_m,
    decide_m_batch,
    decide_r,
    decide_r_batch,
    fit_focus,
    fit_focus_with_gamma_search,
    focus_from_dict,
    focus_to_dict,
    load_focus,
    norm_baseline,
    norm_threshold,
    residual,
    residual_norms,
    save_focus,
)


def identity_ae(dim):
    layer = DenseLayer(weights=np.eye(dim, dtype=complex),
                       bias=np.zeros(dim, complex),
                       activation=Activation("linear"))
    return ComplexAutoencoder(layers=[layer], input_dim=dim)


def zero_ae(dim):
    layer = DenseLayer(weights=np.zeros((dim, dim), complex),
                       bias=np.zeros(dim, complex),
                       activation=Activation("linear"))
    return ComplexAutoencoder(layers=[layer], input_dim=dim)


def scaling_ae(dim, factor=0.5):
    layer = DenseLayer(weights=factor * np.eye(dim, dtype=complex),
                       bias=np.zeros(dim, complex),
                       activation=Activation("linear"))
    return ComplexAutoencoder(layers=[layer], input_dim=dim)


class TestResidual:
    def test_perfect_reconstruction_gives_zero(self):
        ae = identity_ae(4)
        r = residual(np.arange(4.0), ae)
        assert np.all(r == 0)

    def test_zero_output_gives_input(self):
        ae = zero_ae(4)
        x = np.arange(4.0) + 1.0
        np.testing.assert_array_equal(residual(x, ae).real, x)

    def test_matches_forward_then_subtract(self):
        rng = np.random.default_rng(0)
        ae = complex_nn.build_autoencoder(6, activation="ead", hidden=(5, 5),
                                          seed=1)
        x = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        np.testing.assert_array_equal(residual(x, ae),
                                      x - complex_nn.forward(ae, x))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            residual(np.ones(5), identity_ae(4))


class TestFitFocus:
    def test_same_validation_makes_correction_a_noop(self):
        rng = np.random.default_rng(1)
        X = rng.standard_normal((20, 5))
        ae = scaling_ae(5)
        fm = fit_focus(X, X, ae, gamma=0.5, C=1.0)
        assert fm.m_T == fm.m_V
        assert fm.svdd.corrected_limit == fm.svdd.density_limit

    def test_correction_identity_holds_exactly(self):
        rng = np.random.default_rng(2)
        for trial in range(5):
            X_T = rng.standard_normal((15, 4))
            X_V = rng.standard_normal((10, 4))
            fm = fit_focus(X_T, X_V, scaling_ae(4), gamma=0.8, C=1.0)
            lhs = fm.svdd.corrected_limit - fm.svdd.density_limit
            assert abs(lhs - (fm.m_V - fm.m_T)) < 1e-12

    def test_shifted_validation_relaxes_limit(self):
        rng = np.random.default_rng(3)
        X_T = rng.standard_normal((25, 4))
        X_V = rng.standard_normal((15, 4)) + 4.0  # residuals shift away too
        fm = fit_focus(X_T, X_V, scaling_ae(4), gamma=0.5, C=1.0)
        assert fm.m_V < fm.m_T
        assert fm.svdd.corrected_limit < fm.svdd.density_limit

    def test_degenerate_residuals_rejected(self):
        rng = np.random.default_rng(4)
        X = rng.standard_normal((10, 4))
        with pytest.raises(DegenerateResiduals):
            fit_focus(X, X, identity_ae(4), gamma=1.0, C=1.0)

    def test_empty_validation_rejected(self):
        rng = np.random.default_rng(5)
        X = rng.standard_normal((10, 4))
        with pytest.raises(ValueError):
            fit_focus(X, np.zeros((0, 4)), scaling_ae(4), gamma=1.0, C=1.0)

    def test_complex_residual_representation(self):
        rng = np.random.default_rng(6)
        Z = rng.standard_normal((12, 4)) + 1j * rng.standard_normal((12, 4))
        ae = complex_nn.build_autoencoder(4, activation="crelu", hidden=(6,),
                                          seed=0)
        fm = fit_focus(Z, Z, ae, gamma=0.1, C=1.0,
                       representation_tag="analytic")
        assert np.iscomplexobj(fm.svdd.support_vectors)
        assert fm.representation_tag == "analytic"


class TestDecide:
    def setup_method(self):
        rng = np.random.default_rng(7)
        self.X_T = rng.standard_normal((30, 5))
        self.X_V = rng.standard_normal((12, 5))
        self.ae = scaling_ae(5, factor=0.3)
        self.fm = fit_focus(self.X_T, self.X_V, self.ae, gamma=0.4, C=1.0)
        self.queries = rng.standard_normal((100, 5)) * 1.5

    def test_training_points_healthy(self):
        assert decide_r_batch(self.fm, self.X_T).sum() == 0

    def test_far_query_abnormal(self):
        far = np.full((1, 5), 40.0)
        assert decide_r(self.fm, far[0]) == 1
        assert decide_m(self.fm, far[0]) == 1

    def test_composition_with_plain_decide(self):
        r = residual(self.queries, self.fm.autoencoder)
        expected = np.array([svdd.decide(self.fm.svdd, row) for row in r])
        np.testing.assert_array_equal(decide_r_batch(self.fm, self.queries),
                                      expected)

    def test_equal_limits_make_decisions_identical(self):
        fm = fit_focus(self.X_T, self.X_T, self.ae, gamma=0.4, C=1.0)
        np.testing.assert_array_equal(decide_r_batch(fm, self.queries),
                                      decide_m_batch(fm, self.queries))

    def test_threshold_monotonicity(self):
        fm = self.fm
        original = fm.svdd.corrected_limit
        try:
            fm.svdd.corrected_limit = fm.svdd.density_limit * 0.5
            relaxed = decide_m_batch(fm, self.queries)
            strict_r = decide_r_batch(fm, self.queries)
            assert np.all(relaxed <= strict_r)  # healthy superset
            fm.svdd.corrected_limit = min(fm.svdd.density_limit * 2.0, 1.0)
            tightened = decide_m_batch(fm, self.queries)
            assert np.all(tightened >= strict_r)  # healthy subset
        finally:
            fm.svdd.corrected_limit = original

    def test_flag_count_monotone_in_limit(self):
        fm = self.fm
        original = fm.svdd.corrected_limit
        try:
            counts = []
            for limit in np.linspace(0.0, 1.0, 7):
                fm.svdd.corrected_limit = limit
                counts.append(int(decide_m_batch(fm, self.queries).sum()))
            assert all(b >= a for a, b in zip(counts, counts[1:]))
        finally:
            fm.svdd.corrected_limit = original

    def test_missing_corrected_limit(self):
        fm = fit_focus(self.X_T, self.X_V, self.ae, gamma=0.4, C=1.0)
        fm.svdd.corrected_limit = None
        with pytest.raises(ValueError):
            decide_m(fm, self.queries[0])


class TestNormBaseline:
    def setup_method(self):
        rng = np.random.default_rng(8)
        self.X_V = rng.standard_normal((50, 6))
        self.ae = scaling_ae(6, factor=0.2)

    def test_zero_epsilon_flags_nothing_below_max(self):
        queries = self.X_V * 0.9
        flags = norm_baseline(self.ae, self.X_V, queries, epsilon=0.0)
        assert flags.sum() == 0

    def test_tie_at_threshold_is_healthy(self):
        thr = norm_threshold(self.ae, self.X_V, epsilon=0.1)
        norms = residual_norms(self.X_V, self.ae)
        tie_row = self.X_V[np.argmin(np.abs(norms - thr))]
        flags = norm_baseline(self.ae, self.X_V, tie_row[None, :], epsilon=0.1)
        assert flags[0] == 0

    def test_validation_flag_fraction_tracks_epsilon(self):
        for eps in (0.0, 0.1, 0.3):
            flags = norm_baseline(self.ae, self.X_V, self.X_V, epsilon=eps)
            assert flags.mean() <= eps
            assert flags.mean() >= eps - 1.0 / len(self.X_V) - 1e-12

    def test_recall_grows_with_epsilon(self):
        rng = np.random.default_rng(9)
        healthy_q = rng.standard_normal((200, 6))
        abnormal_q = rng.standard_normal((200, 6)) + 1.1
        recalls = []
        for eps in (0.02, 0.1, 0.3, 0.6):
            flags = norm_baseline(self.ae, self.X_V, abnormal_q, epsilon=eps)
            recalls.append(flags.mean())
        assert all(b >= a for a, b in zip(recalls, recalls[1:]))
        assert recalls[-1] > recalls[0]
        del healthy_q

    def test_empty_validation_rejected(self):
        with pytest.raises(ValueError):
            norm_baseline(self.ae, np.zeros((0, 6)), self.X_V, epsilon=0.1)

    def test_bad_epsilon_rejected(self):
        with pytest.raises(ValueError):
            norm_baseline(self.ae, self.X_V, self.X_V, epsilon=1.0)


class TestPersistence:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(10)
        X_T = rng.standard_normal((15, 4))
        X_V = rng.standard_normal((8, 4))
        ae = complex_nn.build_autoencoder(4, activation="modrelu", hidden=(6,),
                                          seed=2)
        fm = fit_focus(X_T, X_V, ae, gamma=0.3, C=1.0,
                       representation_tag="real")
        path = tmp_path / "focus.json"
        save_focus(path, fm, extra={"norm_threshold": 1.25})
        loaded, extras = load_focus(path)
        assert extras == {"norm_threshold": 1.25}
        assert loaded.m_T == fm.m_T and loaded.m_V == fm.m_V
        assert loaded.svdd.corrected_limit == fm.svdd.corrected_limit
        q = rng.standard_normal((20, 4))
        np.testing.assert_array_equal(decide_m_batch(loaded, q),
                                      decide_m_batch(fm, q))

    def test_dict_round_trip(self):
        rng = np.random.default_rng(11)
        X = rng.standard_normal((10, 3))
        fm = fit_focus(X, X, scaling_ae(3), gamma=0.7, C=1.0)
        again = focus_from_dict(focus_to_dict(fm))
        assert again.svdd.density_limit == fm.svdd.density_limit


class TestGammaSearchHelper:
    def test_search_then_fit_consistency(self):
        rng = np.random.default_rng(12)
        X_T = rng.standard_normal((25, 5))
        X_V = rng.standard_normal((12, 5))
        ae = scaling_ae(5, factor=0.4)
        fm, gamma = fit_focus_with_gamma_search(X_T, X_V, ae, epsilon=0.2,
                                                grid=[0.125, 0.5, 2.0], C=1.0)
        direct = fit_focus(X_T, X_V, ae, gamma=gamma, C=1.0)
        assert fm.svdd.density_limit == direct.svdd.density_limit
        assert fm.svdd.corrected_limit == direct.svdd.corrected_limit
