"""Synthetic stand-in corpora and test fixtures.

Real source datasets cannot be redistributed with the package, so the
protocol-scale runs use generated stand-ins: a housing-style table following
the bundled 14-column schema, and stroke-rendered digit images in the 28x28
grayscale format. Both are deterministic functions of a seed.
"""

from __future__ import annotations

from importlib import resources

import numpy as np
from scipy import ndimage

from .idx import ImageDataset
from .schema import Schema, round_discrete
from .tabular import TabularDataset, save_csv


def house_schema() -> Schema:
    with resources.files("utg.data").joinpath("house_sales.schema.json").open() as fh:
        import json

        return Schema.from_obj(json.load(fh))


def make_house_rows(n: int, seed: int = 0) -> np.ndarray:
    """Housing-style rows with plausible correlations between attributes."""
    rng = np.random.default_rng(seed)
    bedrooms = rng.integers(1, 7, n).astype(np.float64)
    bathrooms = np.clip(bedrooms * 0.5 + rng.normal(0.25, 0.5, n), 0.75, 4.5)
    living = np.exp(rng.normal(7.3, 0.35, n) + 0.08 * bedrooms)
    lot = living * np.exp(rng.normal(1.2, 0.7, n))
    floors = rng.choice([1.0, 1.5, 2.0, 2.5, 3.0], n, p=[0.45, 0.1, 0.35, 0.05, 0.05])
    waterfront = (rng.random(n) < 0.015).astype(np.float64)
    view = np.where(rng.random(n) < 0.85, 0, rng.integers(1, 5, n)).astype(np.float64)
    condition = np.clip(np.round(rng.normal(3.4, 0.65, n)), 1, 5)
    grade = np.clip(np.round(5.5 + 1.8 * (np.log(living) - 7.5) + rng.normal(0, 0.9, n)), 1, 13)
    above_frac = np.clip(rng.beta(6, 2, n), 0.4, 1.0)
    above = living * above_frac
    basement = living - above
    yr_built = rng.integers(1900, 2016, n).astype(np.float64)
    living15 = living * rng.uniform(0.7, 1.3, n)
    lot15 = lot * rng.uniform(0.6, 1.4, n)
    rows = np.column_stack(
        [bedrooms, bathrooms, living, lot, floors, waterfront, view,
         condition, grade, above, basement, yr_built, living15, lot15]
    )
    rows = round_discrete(rows, house_schema())
    # rare flags (waterfront, view) can come out constant at small n, which a
    # loader would reject; force at least two distinct values per column
    if n >= 2:
        for j, col in enumerate(house_schema()):
            if np.all(rows[:, j] == rows[0, j]):
                bump = col.step if col.kind == "stepped" else 1.0
                rows[0, j] = rows[0, j] + bump if col.kind != "binary" else 1.0 - rows[0, j]
    return rows


def make_house_dataset(n: int = 3000, seed: int = 0) -> TabularDataset:
    return TabularDataset(house_schema(), make_house_rows(n, seed))


def write_house_csv(path, n: int = 3000, seed: int = 0):
    save_csv(path, house_schema(), make_house_rows(n, seed))


def make_cluster_dataset(n: int = 200, seed: int = 0, centers=((-2.0,) * 12, (2.0,) * 12), spread: float = 0.2) -> TabularDataset:
    """Small continuous table drawn from isotropic Gaussian clusters.

    With the default two well-separated centers this is the encoder/decoder
    separation fixture; pass one center for a unimodal table.
    """
    rng = np.random.default_rng(seed)
    centers = np.asarray(centers, dtype=np.float64)
    assignments = rng.integers(0, centers.shape[0], n)
    rows = centers[assignments] + rng.normal(0.0, spread, (n, centers.shape[1]))
    schema = Schema.from_obj(
        [{"name": f"x{j}", "kind": "continuous"} for j in range(centers.shape[1])]
    )
    return TabularDataset(schema, rows)


# ---------------------------------------------------------------------------
# digit-style images

# strokes per digit as segments between (x, y) points in a unit box,
# y growing downward; roughly seven-segment with diagonals
_DIGIT_STROKES = {
    0: [((0.2, 0.1), (0.8, 0.1)), ((0.8, 0.1), (0.8, 0.9)), ((0.8, 0.9), (0.2, 0.9)), ((0.2, 0.9), (0.2, 0.1))],
    1: [((0.5, 0.1), (0.5, 0.9)), ((0.3, 0.25), (0.5, 0.1))],
    2: [((0.2, 0.2), (0.8, 0.1)), ((0.8, 0.1), (0.8, 0.5)), ((0.8, 0.5), (0.2, 0.9)), ((0.2, 0.9), (0.8, 0.9))],
    3: [((0.2, 0.1), (0.8, 0.1)), ((0.8, 0.1), (0.8, 0.9)), ((0.2, 0.9), (0.8, 0.9)), ((0.35, 0.5), (0.8, 0.5))],
    4: [((0.7, 0.9), (0.7, 0.1)), ((0.7, 0.1), (0.2, 0.6)), ((0.2, 0.6), (0.85, 0.6))],
    5: [((0.8, 0.1), (0.2, 0.1)), ((0.2, 0.1), (0.2, 0.5)), ((0.2, 0.5), (0.8, 0.5)), ((0.8, 0.5), (0.8, 0.9)), ((0.8, 0.9), (0.2, 0.9))],
    6: [((0.8, 0.1), (0.3, 0.4)), ((0.3, 0.4), (0.2, 0.7)), ((0.2, 0.7), (0.5, 0.9)), ((0.5, 0.9), (0.8, 0.7)), ((0.8, 0.7), (0.2, 0.6))],
    7: [((0.2, 0.1), (0.8, 0.1)), ((0.8, 0.1), (0.4, 0.9))],
    8: [((0.2, 0.1), (0.8, 0.1)), ((0.8, 0.1), (0.2, 0.5)), ((0.2, 0.5), (0.8, 0.9)), ((0.8, 0.9), (0.2, 0.9)), ((0.2, 0.9), (0.8, 0.5)), ((0.8, 0.5), (0.2, 0.1))],
    9: [((0.8, 0.4), (0.5, 0.1)), ((0.5, 0.1), (0.2, 0.3)), ((0.2, 0.3), (0.5, 0.5)), ((0.5, 0.5), (0.8, 0.4)), ((0.8, 0.4), (0.7, 0.9))],
}


def _segment_distance(px, py, seg):
    (x0, y0), (x1, y1) = seg
    dx, dy = x1 - x0, y1 - y0
    length2 = dx * dx + dy * dy
    t = np.clip(((px - x0) * dx + (py - y0) * dy) / length2, 0.0, 1.0)
    cx, cy = x0 + t * dx, y0 + t * dy
    return np.hypot(px - cx, py - cy)


def render_digit(digit: int, rng: np.random.Generator, size: int = 28) -> np.ndarray:
    """One jittered stroke rendering of a digit, float32 in [0, 1]."""
    coords = (np.arange(size) + 0.5) / size
    py, px = np.meshgrid(coords, coords, indexing="ij")
    thickness = rng.uniform(0.045, 0.075)
    ink = np.zeros((size, size))
    for seg in _DIGIT_STROKES[digit]:
        d = _segment_distance(px, py, seg)
        ink = np.maximum(ink, np.clip(1.0 - d / thickness, 0.0, 1.0))

    angle = rng.uniform(-12.0, 12.0)
    zoom = rng.uniform(0.85, 1.1)
    shift = rng.uniform(-1.5, 1.5, size=2)
    theta = np.deg2rad(angle)
    rot = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]]) / zoom
    center = (size - 1) / 2.0
    offset = np.array([center, center]) - rot @ np.array([center + shift[0], center + shift[1]])
    ink = ndimage.affine_transform(ink, rot, offset=offset, order=1, mode="constant")
    ink = ndimage.gaussian_filter(ink, sigma=rng.uniform(0.4, 0.7))
    peak = ink.max()
    if peak > 0:
        ink = ink / peak * rng.uniform(0.85, 1.0)
    return np.clip(ink, 0.0, 1.0).astype(np.float32)


def make_digit_images(n: int, seed: int = 0, size: int = 28):
    """(images uint8 (n, size, size), labels (n,)) of stroke-rendered digits."""
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 10, n)
    images = np.empty((n, size, size), dtype=np.uint8)
    for i in range(n):
        images[i] = np.round(render_digit(int(labels[i]), rng, size) * 255).astype(np.uint8)
    return images, labels.astype(np.uint8)


def make_digit_dataset(n: int, seed: int = 0, size: int = 28) -> ImageDataset:
    images, labels = make_digit_images(n, seed, size)
    return ImageDataset(images.astype(np.float32) / 255.0, labels)


def make_two_pattern_images(n: int = 128, seed: int = 0, size: int = 8) -> ImageDataset:
    """Vertical-stripe vs horizontal-stripe images; the VQ-VAE training fixture."""
    rng = np.random.default_rng(seed)
    images = np.empty((n, size, size), dtype=np.float32)
    labels = rng.integers(0, 2, n)
    stripes = (np.arange(size) % 2).astype(np.float32)
    for i in range(n):
        base = np.tile(stripes, (size, 1)) if labels[i] == 0 else np.tile(stripes[:, None], (1, size))
        amp = rng.uniform(0.75, 1.0)
        noise = rng.normal(0.0, 0.03, (size, size))
        images[i] = np.clip(base * amp + noise, 0.0, 1.0)
    return ImageDataset(images, labels.astype(np.int64))
