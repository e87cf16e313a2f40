"""VAE tests: posterior contracts, reparameterization, KL, training fixtures."""

import numpy as np
import pytest

from utg.errors import DivergenceError, ShapeError, UtgError
from utg.nn import Tensor, exp, grad_check, square
from utg.synth import make_cluster_dataset
from utg.tabular import normalize, normalize_rows
from utg.vae import (
    LatentGaussian,
    VaeConfig,
    decode,
    encode,
    generate_standard,
    kl_to_prior,
    load_vae,
    reparameterize,
    save_vae,
    train_vae,
)


class TestEncode:
    def test_untrained_model_reports_prior(self, cluster_ds):
        # output heads are zero-initialized: mu = 0, log sigma^2 = 0
        cfg = VaeConfig(latent_dim=3, epochs=1, seed=0)
        from utg.vae import VaeModel, _init_store

        model = VaeModel(cfg, _init_store(cfg, cluster_ds.coded_width), cluster_ds.schema, cluster_ds.norm_stats, cluster_ds.coded_width)
        lat = encode(model, normalize(cluster_ds)[0])
        assert np.all(lat.mean == 0.0)
        assert np.all(lat.log_var == 0.0)
        assert np.all(lat.std == 1.0)

    def test_deterministic(self, cluster_vae, cluster_ds):
        x = normalize(cluster_ds)[3]
        a, b = encode(cluster_vae, x), encode(cluster_vae, x)
        assert np.array_equal(a.mean, b.mean) and np.array_equal(a.log_var, b.log_var)

    def test_clusters_separate_in_latent_space(self, cluster_vae, cluster_ds):
        z = normalize(cluster_ds)
        labels = (cluster_ds.rows[:, 0] > 0).astype(int)
        lat = encode(cluster_vae, z)
        gap = np.linalg.norm(lat.mean[labels == 0].mean(axis=0) - lat.mean[labels == 1].mean(axis=0))
        assert gap >= 1.0

    def test_width_mismatch(self, cluster_vae):
        with pytest.raises(ShapeError):
            encode(cluster_vae, np.zeros(5))


class TestReparameterize:
    def test_zero_noise_returns_mean(self):
        lat = LatentGaussian(np.array([1.0, -2.0]), np.array([0.3, -0.1]))
        assert np.array_equal(reparameterize(lat, np.zeros(2)), lat.mean)

    def test_unit_gaussian_passes_noise_through(self):
        noise = np.array([0.7, -1.2, 0.1])
        lat = LatentGaussian(np.zeros(3), np.zeros(3))
        assert np.array_equal(reparameterize(lat, noise), noise)

    def test_gradients_match_finite_differences(self):
        eps = np.array([0.4, -0.8])

        def fragment(p):
            z = p["mu"] + exp(p["log_var"] * 0.5) * Tensor(eps)
            return square(z).sum()

        report = grad_check(fragment, {"mu": np.array([0.3, -0.5]), "log_var": np.array([0.2, -0.4])})
        assert report.passed, str(report)

    def test_shape_mismatch(self):
        lat = LatentGaussian(np.zeros(3), np.zeros(3))
        with pytest.raises(ShapeError):
            reparameterize(lat, np.zeros(2))


class TestKl:
    def test_prior_matches_posterior(self):
        assert kl_to_prior(LatentGaussian(np.zeros(4), np.zeros(4))) == 0.0

    def test_unit_mean_case(self):
        assert kl_to_prior(LatentGaussian(np.array([1.0]), np.array([0.0]))) == pytest.approx(0.5)

    def test_nonnegative_on_random_latents(self):
        rng = np.random.default_rng(3)
        for _ in range(300):
            lat = LatentGaussian(rng.normal(0, 3, 5), rng.normal(0, 2, 5))
            assert kl_to_prior(lat) >= 0.0

    def test_zero_iff_standard_normal(self):
        lat = LatentGaussian(np.array([1e-3, 0.0]), np.array([0.0, 1e-3]))
        assert kl_to_prior(lat) > 0.0

    def test_gradient_matches_finite_differences(self):
        def fragment(p):
            return ((square(p["mu"]) + exp(p["lv"]) - 1.0 - p["lv"]).sum()) * 0.5

        report = grad_check(fragment, {"mu": np.array([0.5, -1.0, 0.2]), "lv": np.array([0.1, -0.3, 0.6])})
        assert report.passed, str(report)


class TestDecode:
    def test_deterministic(self, cluster_vae):
        z = np.array([0.5, -0.5])
        assert np.array_equal(decode(cluster_vae, z), decode(cluster_vae, z))

    def test_cluster_member_decodes_near_center(self, cluster_vae, cluster_ds):
        z = normalize(cluster_ds)
        labels = (cluster_ds.rows[:, 0] > 0).astype(int)
        width = cluster_ds.rows.shape[1]
        centers = normalize_rows(cluster_ds, np.array([[-2.0] * width, [2.0] * width]))
        for c in (0, 1):
            member = z[labels == c][0]
            rec = decode(cluster_vae, encode(cluster_vae, member).mean)
            assert np.abs(rec - centers[c]).max() < 0.5

    def test_prior_mean_decodes_near_centroid_of_unimodal_data(self):
        ds = make_cluster_dataset(200, seed=1, centers=((1.0, 2.0, 3.0, -1.0),), spread=0.5)
        model = train_vae(ds, VaeConfig(latent_dim=2, epochs=40, seed=7))
        # the centroid is 0 in normalized space
        assert np.abs(decode(model, np.zeros(2))).max() < 1.0

    def test_latent_width_mismatch(self, cluster_vae):
        with pytest.raises(ShapeError):
            decode(cluster_vae, np.zeros(9))


class TestTraining:
    def test_bit_identical_given_seed(self, cluster_ds):
        cfg = VaeConfig(latent_dim=2, epochs=3, seed=11)
        m1, m2 = train_vae(cluster_ds, cfg), train_vae(cluster_ds, cfg)
        for name in m1.store.names():
            assert np.array_equal(m1.store.arrays()[name], m2.store.arrays()[name])
        assert m1.loss_history == m2.loss_history

    def test_two_cluster_loss_drops_to_fifth(self, cluster_vae):
        history = cluster_vae.loss_history
        assert history[-1] < 0.2 * history[0]

    def test_loss_history_finite(self, cluster_vae):
        assert np.isfinite(cluster_vae.loss_history).all()

    def test_divergent_learning_rate_raises(self, cluster_ds):
        with np.errstate(over="ignore", invalid="ignore"):
            with pytest.raises(DivergenceError):
                train_vae(cluster_ds, VaeConfig(latent_dim=2, epochs=60, learning_rate=1e4, seed=0))

    def test_config_validation(self):
        with pytest.raises(UtgError):
            VaeConfig(latent_dim=0)
        with pytest.raises(UtgError):
            VaeConfig(encoder_widths=(0,))


class TestGenerateStandard:
    def test_empty(self, cluster_vae):
        assert generate_standard(cluster_vae, 0).shape == (0, cluster_vae.input_width)

    def test_deterministic(self, cluster_vae):
        assert np.array_equal(generate_standard(cluster_vae, 20, seed=4), generate_standard(cluster_vae, 20, seed=4))

    def test_column_means_match_training_data(self, cluster_vae):
        g = generate_standard(cluster_vae, 2000, seed=5)
        # training data is z-scored, so its column means are 0
        assert np.abs(g.mean(axis=0)).max() < 0.3


class TestElboGradients:
    def test_full_elbo_micro_batch(self):
        # 4-sample micro batch through encoder-reparam-decoder with the
        # closed-form KL, as one scalar loss
        rng = np.random.default_rng(12)
        x = rng.normal(size=(4, 3))
        eps = rng.normal(size=(4, 2))

        def fragment(p):
            from utg.nn import dense, relu

            h = relu(dense(Tensor(x), p["ew"], p["eb"]))
            mu = dense(h, p["mw"], p["mb"])
            lv = dense(h, p["lw"], p["lb"])
            z = mu + exp(lv * 0.5) * Tensor(eps)
            xh = dense(relu(dense(z, p["dw"], p["db"])), p["ow"], p["ob"])
            recon = square(xh - Tensor(x)).sum(axis=1)
            kl = (square(mu) + exp(lv) - 1.0 - lv).sum(axis=1) * 0.5
            return (recon + kl).mean()

        params = {
            "ew": rng.normal(size=(3, 5)) * 0.5, "eb": rng.normal(size=5) * 0.1,
            "mw": rng.normal(size=(5, 2)) * 0.5, "mb": rng.normal(size=2) * 0.1,
            "lw": rng.normal(size=(5, 2)) * 0.5, "lb": rng.normal(size=2) * 0.1,
            "dw": rng.normal(size=(2, 5)) * 0.5, "db": rng.normal(size=5) * 0.1,
            "ow": rng.normal(size=(5, 3)) * 0.5, "ob": rng.normal(size=3) * 0.1,
        }
        report = grad_check(fragment, params)
        assert report.passed, str(report)


class TestPersistence:
    def test_save_load_round_trip(self, cluster_vae, tmp_path):
        path = tmp_path / "vae.utgm"
        save_vae(cluster_vae, path)
        loaded = load_vae(path)
        z = np.array([0.3, -0.7])
        # float32 storage reproduces float32 training params exactly
        assert np.array_equal(decode(loaded, z), decode(cluster_vae, z))
        assert loaded.schema.names == cluster_vae.schema.names
        assert np.array_equal(loaded.norm_stats.mean, cluster_vae.norm_stats.mean)

    def test_kind_check(self, tmp_path, cluster_vae):
        from utg.nn import save_model

        path = tmp_path / "x.utgm"
        save_model(path, {"kind": "vqvae"}, {})
        with pytest.raises(UtgError, match="vae"):
            load_vae(path)
