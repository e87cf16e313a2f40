"""Dense variational autoencoder for tabular data.

The encoder maps a normalized row to a diagonal Gaussian (mean, log-variance)
over the latent space; the decoder maps latents back to normalized rows. The
latent prior is standard normal. Training maximizes the evidence lower bound
with per-sample sum-of-squares reconstruction plus the closed-form KL term.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError, UtgError
from .nn import ParamStore, Tensor, adam_step, dense, exp, load_model, relu, save_model, square
from .schema import Schema
from .tabular import NormStats, TabularDataset, normalize


@dataclass(frozen=True)
class VaeConfig:
    latent_dim: int = 8
    encoder_widths: tuple = (64, 64)
    decoder_widths: tuple = (64, 64)
    epochs: int = 60
    batch_size: int = 32
    learning_rate: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.latent_dim < 1:
            raise UtgError(f"latent_dim must be >= 1, got {self.latent_dim}")
        if any(w < 1 for w in self.encoder_widths) or any(w < 1 for w in self.decoder_widths):
            raise UtgError("hidden widths must be >= 1")
        if self.epochs < 1 or self.batch_size < 1 or self.learning_rate <= 0:
            raise UtgError("epochs, batch_size must be >= 1 and learning_rate > 0")


@dataclass
class LatentGaussian:
    """Encoder output: mean and log-variance of a diagonal Gaussian."""

    mean: np.ndarray
    log_var: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.log_var = np.asarray(self.log_var, dtype=np.float64)
        if self.mean.shape != self.log_var.shape:
            raise ShapeError("mean and log_var shapes differ")
        if not (np.isfinite(self.mean).all() and np.isfinite(self.log_var).all()):
            raise UtgError("latent distribution has non-finite parameters")

    @property
    def std(self) -> np.ndarray:
        return np.exp(0.5 * self.log_var)


class VaeModel:
    """Trained encoder/decoder pair bound to its schema and normalization stats."""

    def __init__(self, config: VaeConfig, store: ParamStore, schema: Schema, norm_stats: NormStats, input_width: int):
        self.config = config
        self.store = store
        self.schema = schema
        self.norm_stats = norm_stats
        self.input_width = input_width
        self.loss_history: list[float] = []

    @property
    def latent_dim(self) -> int:
        return self.config.latent_dim


def _init_store(cfg: VaeConfig, input_width: int) -> ParamStore:
    rng = np.random.default_rng(cfg.seed)
    store = ParamStore()

    def he(fan_in, fan_out):
        return (rng.standard_normal((fan_in, fan_out)) * np.sqrt(2.0 / fan_in)).astype(np.float32)

    prev = input_width
    for i, width in enumerate(cfg.encoder_widths):
        store.add(f"enc.{i}.w", he(prev, width))
        store.add(f"enc.{i}.b", np.zeros(width, dtype=np.float32))
        prev = width
    # zero-initialized heads: an untrained encoder reports exactly the prior
    store.add("enc.mu.w", np.zeros((prev, cfg.latent_dim), dtype=np.float32))
    store.add("enc.mu.b", np.zeros(cfg.latent_dim, dtype=np.float32))
    store.add("enc.logvar.w", np.zeros((prev, cfg.latent_dim), dtype=np.float32))
    store.add("enc.logvar.b", np.zeros(cfg.latent_dim, dtype=np.float32))

    prev = cfg.latent_dim
    for i, width in enumerate(cfg.decoder_widths):
        store.add(f"dec.{i}.w", he(prev, width))
        store.add(f"dec.{i}.b", np.zeros(width, dtype=np.float32))
        prev = width
    store.add("dec.out.w", np.zeros((prev, input_width), dtype=np.float32))
    store.add("dec.out.b", np.zeros(input_width, dtype=np.float32))
    return store


def _encoder_graph(model: VaeModel, x: Tensor) -> tuple[Tensor, Tensor]:
    store = model.store
    h = x
    for i in range(len(model.config.encoder_widths)):
        h = relu(dense(h, store[f"enc.{i}.w"], store[f"enc.{i}.b"]))
    mu = dense(h, store["enc.mu.w"], store["enc.mu.b"])
    log_var = dense(h, store["enc.logvar.w"], store["enc.logvar.b"])
    return mu, log_var


def _decoder_graph(model: VaeModel, z: Tensor) -> Tensor:
    store = model.store
    h = z
    for i in range(len(model.config.decoder_widths)):
        h = relu(dense(h, store[f"dec.{i}.w"], store[f"dec.{i}.b"]))
    return dense(h, store["dec.out.w"], store["dec.out.b"])


def _as_batch(x, width, what) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    batch = np.atleast_2d(arr)
    if batch.shape[1] != width:
        raise ShapeError(f"{what} width {batch.shape[1]} does not match model width {width}")
    return batch, single


def encode(model: VaeModel, x) -> LatentGaussian:
    """Posterior parameters for one normalized row or a batch of them."""
    batch, single = _as_batch(x, model.input_width, "input")
    mu, log_var = _encoder_graph(model, Tensor(batch.astype(np.float32)))
    mean, lv = mu.data.astype(np.float64), log_var.data.astype(np.float64)
    if single:
        mean, lv = mean[0], lv[0]
    return LatentGaussian(mean, lv)


def reparameterize(lat: LatentGaussian, noise) -> np.ndarray:
    """z = mean + std * noise for standard-normal noise of matching shape."""
    noise = np.asarray(noise, dtype=np.float64)
    if noise.shape != lat.mean.shape:
        raise ShapeError(f"noise shape {noise.shape} does not match latent shape {lat.mean.shape}")
    return lat.mean + lat.std * noise


def kl_to_prior(lat: LatentGaussian):
    """KL(q || N(0, I)) = 0.5 * sum(mu^2 + sigma^2 - 1 - log sigma^2); >= 0.

    Scalar for a single latent, per-sample vector for a batch.
    """
    var = np.exp(lat.log_var)
    per_dim = 0.5 * (lat.mean**2 + var - 1.0 - lat.log_var)
    total = per_dim.sum(axis=-1)
    return float(total) if total.ndim == 0 else total


def decode(model: VaeModel, z) -> np.ndarray:
    """Decode latents to normalized rows (single vector or batch)."""
    batch, single = _as_batch(z, model.latent_dim, "latent")
    out = _decoder_graph(model, Tensor(batch.astype(np.float32))).data.astype(np.float64)
    return out[0] if single else out


def train_vae(ds: TabularDataset, cfg: VaeConfig | None = None) -> VaeModel:
    """Train on the normalized coded view; records per-epoch mean loss."""
    if cfg is None:
        cfg = VaeConfig()
    data = normalize(ds).astype(np.float32)
    n, width = data.shape
    store = _init_store(cfg, width)
    model = VaeModel(cfg, store, ds.schema, ds.norm_stats, width)
    rng = np.random.default_rng(cfg.seed + 1)

    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            x = Tensor(data[idx])
            eps = rng.standard_normal((idx.size, cfg.latent_dim)).astype(np.float32)

            mu, log_var = _encoder_graph(model, x)
            z = mu + exp(log_var * 0.5) * Tensor(eps)
            x_hat = _decoder_graph(model, z)

            recon = square(x_hat - x).sum(axis=1)
            kl = (square(mu) + exp(log_var) - 1.0 - log_var).sum(axis=1) * 0.5
            loss = (recon + kl).mean()

            store.zero_grad()
            loss.backward()
            adam_step(store, lr=cfg.learning_rate)
            epoch_loss += loss.item() * idx.size
        model.loss_history.append(epoch_loss / n)
    return model


def generate_standard(model: VaeModel, n: int, seed: int = 0) -> np.ndarray:
    """Decode n draws from the standard-normal latent prior; (n, width) normalized rows."""
    if n < 0:
        raise UtgError(f"n must be >= 0, got {n}")
    if n == 0:
        return np.empty((0, model.input_width))
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, model.latent_dim))
    return decode(model, z)


# ---------------------------------------------------------------------------
# persistence

def save_vae(model: VaeModel, path):
    config = {
        "kind": "vae",
        "config": {
            "latent_dim": model.config.latent_dim,
            "encoder_widths": list(model.config.encoder_widths),
            "decoder_widths": list(model.config.decoder_widths),
            "epochs": model.config.epochs,
            "batch_size": model.config.batch_size,
            "learning_rate": model.config.learning_rate,
            "seed": model.config.seed,
        },
        "schema": model.schema.to_obj(),
        "norm_mean": model.norm_stats.mean.tolist(),
        "norm_std": model.norm_stats.std.tolist(),
        "input_width": model.input_width,
        "loss_history": model.loss_history,
    }
    save_model(path, config, model.store.arrays())


def vae_config_from_obj(obj: dict) -> VaeConfig:
    return VaeConfig(
        latent_dim=obj.get("latent_dim", 8),
        encoder_widths=tuple(obj.get("encoder_widths", (64, 64))),
        decoder_widths=tuple(obj.get("decoder_widths", (64, 64))),
        epochs=obj.get("epochs", 60),
        batch_size=obj.get("batch_size", 32),
        learning_rate=obj.get("learning_rate", 1e-3),
        seed=obj.get("seed", 0),
    )


def load_vae(path) -> VaeModel:
    config, params = load_model(path)
    if config.get("kind") != "vae":
        raise UtgError(f"{path} holds a {config.get('kind')!r} model, expected 'vae'")
    cfg = vae_config_from_obj(config["config"])
    schema = Schema.from_obj(config["schema"])
    stats = NormStats(np.array(config["norm_mean"]), np.array(config["norm_std"]))
    store = _init_store(cfg, config["input_width"])
    store.load_arrays(params)
    model = VaeModel(cfg, store, schema, stats, config["input_width"])
    model.loss_history = list(config.get("loss_history", []))
    return model
