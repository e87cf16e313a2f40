"""IDX image/label file loading (the MNIST binary layout), bit-exact big-endian."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import DataLoadError

IMAGES_MAGIC = 0x00000803  # unsigned bytes, 3 dimensions
LABELS_MAGIC = 0x00000801  # unsigned bytes, 1 dimension


class ImageDataset:
    """Grayscale images as float32 intensities in [0, 1], with optional labels."""

    def __init__(self, images, labels=None):
        images = np.asarray(images, dtype=np.float32)
        if images.ndim != 3 or images.shape[0] == 0:
            raise DataLoadError("images must be a non-empty N x H x W array")
        if images.shape[1] < 1 or images.shape[2] < 1:
            raise DataLoadError("image height and width must be positive")
        if images.min() < 0.0 or images.max() > 1.0:
            raise DataLoadError("intensities must lie in [0, 1]")
        images.flags.writeable = False
        self.images = images
        if labels is not None:
            labels = np.asarray(labels, dtype=np.int64)
            if labels.shape != (images.shape[0],):
                raise DataLoadError(
                    f"label count {labels.shape} does not match image count {images.shape[0]}"
                )
            labels.flags.writeable = False
        self.labels = labels

    @property
    def n_images(self) -> int:
        return self.images.shape[0]

    @property
    def height(self) -> int:
        return self.images.shape[1]

    @property
    def width(self) -> int:
        return self.images.shape[2]


def _read_header(data: bytes, path, expected_magic: int, n_dims: int):
    header_len = 4 * (1 + n_dims)
    if len(data) < header_len:
        raise DataLoadError(f"{path}: truncated header")
    magic = struct.unpack(">I", data[:4])[0]
    if magic != expected_magic:
        raise DataLoadError(f"{path}: magic 0x{magic:08x} does not match expected 0x{expected_magic:08x}")
    dims = struct.unpack(f">{n_dims}I", data[4:header_len])
    return dims, data[header_len:]


def load_idx(images_path, labels_path=None) -> ImageDataset:
    """Read an IDX image file (and optionally its label file) into [0, 1] floats.

    The payload length must equal the product of the header dimensions
    exactly; any mismatch (truncated or padded) is rejected.
    """
    images_path = Path(images_path)
    if not images_path.exists():
        raise DataLoadError(f"file not found: {images_path}")
    (n, h, w), payload = _read_header(images_path.read_bytes(), images_path, IMAGES_MAGIC, 3)
    if len(payload) != n * h * w:
        raise DataLoadError(
            f"{images_path}: header promises {n * h * w} bytes ({n}x{h}x{w}), payload has {len(payload)}"
        )
    images = np.frombuffer(payload, dtype=np.uint8).reshape(n, h, w).astype(np.float32) / 255.0

    labels = None
    if labels_path is not None:
        labels_path = Path(labels_path)
        if not labels_path.exists():
            raise DataLoadError(f"file not found: {labels_path}")
        (n_labels,), label_payload = _read_header(labels_path.read_bytes(), labels_path, LABELS_MAGIC, 1)
        if len(label_payload) != n_labels:
            raise DataLoadError(
                f"{labels_path}: header promises {n_labels} bytes, payload has {len(label_payload)}"
            )
        if n_labels != n:
            raise DataLoadError(f"{labels_path}: {n_labels} labels for {n} images")
        labels = np.frombuffer(label_payload, dtype=np.uint8).astype(np.int64)
    return ImageDataset(images, labels)


def save_idx(images_uint8, images_path, labels=None, labels_path=None):
    """Write 8-bit grayscale images (and optional labels) in the IDX layout."""
    images_uint8 = np.ascontiguousarray(images_uint8, dtype=np.uint8)
    if images_uint8.ndim != 3:
        raise DataLoadError("expected an N x H x W uint8 array")
    n, h, w = images_uint8.shape
    with Path(images_path).open("wb") as fh:
        fh.write(struct.pack(">IIII", IMAGES_MAGIC, n, h, w))
        fh.write(images_uint8.tobytes())
    if labels is not None:
        if labels_path is None:
            raise DataLoadError("labels given without a labels_path")
        labels = np.ascontiguousarray(labels, dtype=np.uint8)
        if labels.shape != (n,):
            raise DataLoadError(f"label count {labels.shape} does not match image count {n}")
        with Path(labels_path).open("wb") as fh:
            fh.write(struct.pack(">II", LABELS_MAGIC, n))
            fh.write(labels.tobytes())
