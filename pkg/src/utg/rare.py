"""Rare-latent acquisition: bimodal rarity density, samplers, categorical manipulation.

The rarity density places the two halves of a normal bell at +/-mu_u so that
draws land in the low-probability region of the standard-normal latent prior.
``mu_u = 0, sigma_u = 1`` recovers the prior exactly, which is the baseline
every exploration session starts from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from .errors import UtgError

_SQRT2 = math.sqrt(2.0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _std_normal_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / _SQRT2))


@dataclass(frozen=True)
class RarityParams:
    """Knobs controlling how improbable the acquired latents are.

    Only |mu_u| enters the density, so the sign of ``mu_u`` is irrelevant;
    ``sigma_u`` must be positive.
    """

    mu_u: float
    sigma_u: float

    def __post_init__(self):
        if not math.isfinite(self.mu_u):
            raise UtgError(f"mu_u must be finite, got {self.mu_u}")
        if not (math.isfinite(self.sigma_u) and self.sigma_u > 0):
            raise UtgError(f"sigma_u must be positive and finite, got {self.sigma_u}")


@dataclass(frozen=True)
class ThresholdParam:
    """Clamp threshold for categorical manipulation; t = 1 is the identity."""

    t: float

    def __post_init__(self):
        if not (0.0 < self.t <= 1.0):
            raise UtgError(f"t must lie in (0, 1], got {self.t}")


@dataclass(frozen=True)
class ChainConfig:
    """Tuning for the Metropolis sampler.

    ``proposal_scale`` defaults to sigma_u of the target. ``reflect_prob`` is
    the probability of proposing the sign-flipped state instead of a local
    step; without it a random walk cannot hop between the +/-mu_u modes once
    mu_u/sigma_u is large (the valley at 0 is exp(-(mu/sigma)^2/2) deep).
    """

    proposal_scale: float | None = None
    burn_in: int = 1000
    thinning: int = 10
    seed: int = 0
    reflect_prob: float = 0.5

    def __post_init__(self):
        if self.thinning < 1:
            raise UtgError(f"thinning must be >= 1, got {self.thinning}")
        if self.burn_in < 0:
            raise UtgError(f"burn_in must be >= 0, got {self.burn_in}")
        if not (0.0 <= self.reflect_prob < 1.0):
            raise UtgError(f"reflect_prob must lie in [0, 1), got {self.reflect_prob}")


class CategoricalDist:
    """Probability vector over the V codebook indices."""

    __slots__ = ("probs",)

    def __init__(self, probs):
        probs = np.asarray(probs, dtype=np.float64)
        if probs.ndim != 1 or probs.size < 1:
            raise UtgError("categorical distribution must be a non-empty vector")
        if np.any(probs < 0):
            raise UtgError("categorical entries must be >= 0")
        total = float(probs.sum())
        if abs(total - 1.0) > 1e-9:
            raise UtgError(f"categorical entries must sum to 1, got {total!r}")
        self.probs = probs

    def __len__(self):
        return self.probs.size

    def entropy(self) -> float:
        """Shannon entropy in nats; 0 log 0 taken as 0."""
        p = self.probs[self.probs > 0]
        return float(-(p * np.log(p)).sum())

    def __repr__(self):
        return f"CategoricalDist({self.probs!r})"


def normalizing_constant(p: RarityParams) -> float:
    """Normalizer of the rarity density, in closed form.

    Splitting a normal bell at its mean and shifting the halves to +/-|mu_u|
    leaves total mass 2 * (1 - Phi(-|mu_u|/sigma_u)) = 2 * Phi(|mu_u|/sigma_u),
    which lies in [1, 2) and depends only on the ratio mu_u/sigma_u.
    """
    r = abs(p.mu_u) / p.sigma_u
    return 2.0 * _std_normal_cdf(r)


def density_f(x, p: RarityParams):
    """Rarity density at ``x`` (scalar or array).

    Equals Normal(x; +|mu_u|, sigma_u)/A for x >= 0 and
    Normal(x; -|mu_u|, sigma_u)/A for x < 0; both branches collapse to
    Normal(|x|; |mu_u|, sigma_u)/A, strictly positive and even in x.
    """
    a = normalizing_constant(p)
    xv = np.asarray(x, dtype=np.float64)
    dev = (np.abs(xv) - abs(p.mu_u)) / p.sigma_u
    out = np.exp(-0.5 * dev * dev) / (p.sigma_u * _SQRT_2PI * a)
    if np.isscalar(x) or xv.ndim == 0:
        return float(out)
    return out


def sample_exact_oracle(p: RarityParams, n: int, seed: int) -> np.ndarray:
    """Exact i.i.d. draws from the rarity density.

    Each half-line carries mass 1/2 and is a normal truncated at 0, so a
    uniform sign times a truncated-normal magnitude is an exact sample. Kept
    deliberately independent of the Metropolis path so the two can be cross
    checked against each other.
    """
    if n < 0:
        raise UtgError(f"n must be >= 0, got {n}")
    rng = np.random.default_rng(seed)
    mu, sigma = abs(p.mu_u), p.sigma_u
    lower = (0.0 - mu) / sigma
    mag = stats.truncnorm.rvs(lower, np.inf, loc=mu, scale=sigma, size=n, random_state=rng)
    sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    return sign * mag


def sample_metropolis(p: RarityParams, n: int, cfg: ChainConfig | None = None) -> np.ndarray:
    """Random-walk Metropolis chain targeting the rarity density.

    The proposal mixes a Gaussian step with a sign-flip-plus-Gaussian step
    (probability ``cfg.reflect_prob``); both kernels are symmetric, so the
    plain Metropolis acceptance ratio applies and the normalizer cancels.
    States are recorded after ``burn_in`` steps, keeping every
    ``thinning``-th one.
    """
    if n < 0:
        raise UtgError(f"n must be >= 0, got {n}")
    if cfg is None:
        cfg = ChainConfig()
    if n == 0:
        return np.empty(0, dtype=np.float64)

    mu = abs(p.mu_u)
    scale = cfg.proposal_scale if cfg.proposal_scale is not None else p.sigma_u
    inv2s2 = 0.5 / (p.sigma_u * p.sigma_u)
    steps = cfg.burn_in + n * cfg.thinning

    rng = np.random.default_rng(cfg.seed)
    incs = rng.normal(0.0, scale, steps).tolist()
    log_us = np.log(rng.random(steps)).tolist()
    flips = (rng.random(steps) < cfg.reflect_prob).tolist()

    out = np.empty(n, dtype=np.float64)
    x = mu  # start at a mode
    log_fx = 0.0
    kept = 0
    countdown = cfg.burn_in + cfg.thinning
    for i in range(steps):
        base = -x if flips[i] else x
        y = base + incs[i]
        d = abs(y) - mu
        log_fy = -d * d * inv2s2
        if log_us[i] < log_fy - log_fx:
            x = y
            log_fx = log_fy
        countdown -= 1
        if countdown == 0:
            out[kept] = x
            kept += 1
            countdown = cfg.thinning
    return out


def acquire_rare_latent(
    k: int,
    p: RarityParams,
    sampler: str = "metropolis",
    seed: int | None = None,
    cfg: ChainConfig | None = None,
) -> np.ndarray:
    """One latent vector with components drawn independently from the rarity density."""
    if k < 1:
        raise UtgError(f"latent dimension must be >= 1, got {k}")
    return acquire_rare_latents(1, k, p, sampler=sampler, seed=seed, cfg=cfg)[0]


def acquire_rare_latents(
    n: int,
    k: int,
    p: RarityParams,
    sampler: str = "metropolis",
    seed: int | None = None,
    cfg: ChainConfig | None = None,
) -> np.ndarray:
    """(n, k) matrix of rare latents; all n*k components come from one stream.

    With the Metropolis sampler this is a single long chain carved into
    vectors after burn-in and thinning. An explicit ``seed`` overrides the
    one in ``cfg``.
    """
    if n < 0:
        raise UtgError(f"n must be >= 0, got {n}")
    total = n * k
    if sampler == "metropolis":
        if cfg is None:
            cfg = ChainConfig(seed=0 if seed is None else seed)
        elif seed is not None:
            cfg = replace(cfg, seed=seed)
        draws = sample_metropolis(p, total, cfg)
    elif sampler == "exact":
        if seed is None:
            seed = cfg.seed if cfg is not None else 0
        draws = sample_exact_oracle(p, total, seed)
    else:
        raise UtgError(f"unknown sampler {sampler!r}; expected 'metropolis' or 'exact'")
    return draws.reshape(n, k)


def manipulate_categorical(d: CategoricalDist, t: ThresholdParam | float) -> CategoricalDist:
    """Clamp entries above t and spread the excess evenly over all V entries.

    Entries strictly above the threshold are reduced to t; the removed mass is
    totaled and v-th of it added back to every entry (clamped ones included),
    so the total is preserved and rare indices gain probability. Identity
    whenever max(d) <= t. Redistributed entries may end up above t again;
    that is intentional.
    """
    if not isinstance(t, ThresholdParam):
        t = ThresholdParam(float(t))
    probs = d.probs
    clamped = np.minimum(probs, t.t)
    excess = float((probs - clamped).sum())
    if excess == 0.0:
        return CategoricalDist(probs.copy())
    out = clamped + excess / probs.size
    return CategoricalDist(out)
