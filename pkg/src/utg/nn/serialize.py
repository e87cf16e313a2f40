"""Versioned flat binary model files.

Layout: magic "UTGM" | u32 version | u32 config length | config JSON (utf-8)
| named little-endian float32 arrays in the order listed under
config["params"] as {"name", "shape"} entries.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import ModelFormatError

MAGIC = b"UTGM"
VERSION = 1


def save_model(path, config: dict, params: dict[str, np.ndarray]):
    config = dict(config)
    config["params"] = [{"name": name, "shape": list(np.asarray(a).shape)} for name, a in params.items()]
    blob = json.dumps(config, sort_keys=True).encode("utf-8")
    with Path(path).open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(blob)))
        fh.write(blob)
        for a in params.values():
            fh.write(np.ascontiguousarray(a, dtype="<f4").tobytes())


def load_model(path) -> tuple[dict, dict[str, np.ndarray]]:
    path = Path(path)
    if not path.exists():
        raise ModelFormatError(f"model file not found: {path}")
    data = path.read_bytes()
    if len(data) < 12 or data[:4] != MAGIC:
        raise ModelFormatError(f"{path}: not a model file (bad magic)")
    version, config_len = struct.unpack("<II", data[4:12])
    if version != VERSION:
        raise ModelFormatError(f"{path}: unsupported format version {version}")
    if len(data) < 12 + config_len:
        raise ModelFormatError(f"{path}: truncated config block")
    try:
        config = json.loads(data[12 : 12 + config_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ModelFormatError(f"{path}: corrupt config block: {e}") from e

    params = {}
    offset = 12 + config_len
    for entry in config.get("params", []):
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        nbytes = 4 * count
        if offset + nbytes > len(data):
            raise ModelFormatError(f"{path}: truncated parameter {entry['name']!r}")
        params[entry["name"]] = (
            np.frombuffer(data, dtype="<f4", count=count, offset=offset).reshape(shape).copy()
        )
        offset += nbytes
    if offset != len(data):
        raise ModelFormatError(f"{path}: {len(data) - offset} trailing bytes")
    return config, params
