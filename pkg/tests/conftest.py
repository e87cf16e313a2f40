"""Shared fixtures: small trained models reused across test modules."""

import numpy as np
import pytest

from utg.synth import make_cluster_dataset, make_two_pattern_images
from utg.vae import VaeConfig, train_vae


@pytest.fixture(scope="session")
def cluster_ds():
    return make_cluster_dataset(200, seed=0)


@pytest.fixture(scope="session")
def cluster_vae(cluster_ds):
    return train_vae(cluster_ds, VaeConfig(latent_dim=2, epochs=80, seed=42))


@pytest.fixture(scope="session")
def pattern_ds():
    return make_two_pattern_images(128, seed=0)
