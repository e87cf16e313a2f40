"""Named parameter store with Adam state."""

from __future__ import annotations

import numpy as np

from ..errors import DivergenceError, ShapeError
from .tensor import Tensor


class ParamStore:
    """Ordered named parameters plus per-parameter first/second moments.

    Single-writer: training mutates parameters in place through adam_step;
    readers should treat a store handed to them as frozen.
    """

    def __init__(self):
        self.params: dict[str, Tensor] = {}
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}
        self.step_count = 0

    def add(self, name: str, values) -> Tensor:
        if name in self.params:
            raise ShapeError(f"duplicate parameter name {name!r}")
        t = Tensor(np.asarray(values), requires_grad=True)
        self.params[name] = t
        self._m[name] = np.zeros(t.shape, dtype=np.float32)
        self._v[name] = np.zeros(t.shape, dtype=np.float32)
        return t

    def __getitem__(self, name: str) -> Tensor:
        return self.params[name]

    def __contains__(self, name: str) -> bool:
        return name in self.params

    def names(self):
        return list(self.params)

    def arrays(self) -> dict[str, np.ndarray]:
        return {name: t.data for name, t in self.params.items()}

    def zero_grad(self):
        for t in self.params.values():
            t.grad = None

    def load_arrays(self, arrays: dict[str, np.ndarray]):
        for name, values in arrays.items():
            if name not in self.params:
                raise ShapeError(f"unknown parameter {name!r}")
            t = self.params[name]
            values = np.asarray(values, dtype=t.dtype)
            if values.shape != t.shape:
                raise ShapeError(f"parameter {name!r}: shape {values.shape} != {t.shape}")
            t.data = values


def adam_step(
    store: ParamStore,
    grads: dict[str, np.ndarray] | None = None,
    lr: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> ParamStore:
    """One bias-corrected adaptive update over every parameter in the store.

    Gradients default to the ones accumulated on the parameters by
    backward(). Non-finite gradients abort with a divergence error before
    any parameter is touched.
    """
    if grads is None:
        grads = {}
        for name, t in store.params.items():
            if t.grad is not None:
                grads[name] = t.grad
    for name, g in grads.items():
        if not np.isfinite(g).all():
            raise DivergenceError(f"non-finite gradient for parameter {name!r}")

    store.step_count += 1
    t = store.step_count
    bias1 = 1.0 - beta1**t
    bias2 = 1.0 - beta2**t
    for name, g in grads.items():
        p = store.params[name]
        g = g.astype(np.float32, copy=False)
        m = store._m[name]
        v = store._v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * (g * g)
        update = (m / bias1) / (np.sqrt(v / bias2) + eps)
        p.data = p.data - np.float32(lr) * update
    return store
