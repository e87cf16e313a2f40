"""Reverse-mode autodiff over numpy arrays.

Training runs in float32 with float64 accumulation inside matrix products
and large reductions; gradient checking builds the same graphs in float64.
Every op result is checked for NaN/Inf so a diverging run fails loudly
instead of silently corrupting parameters.
"""

from __future__ import annotations

import numpy as np

from ..errors import DivergenceError, ShapeError

DEFAULT_DTYPE = np.float32

_FINITE_CHECKS = True


def set_finite_checks(enabled: bool) -> bool:
    """Toggle the per-op NaN/Inf guard; returns the previous setting."""
    global _FINITE_CHECKS
    previous = _FINITE_CHECKS
    _FINITE_CHECKS = bool(enabled)
    return previous


def matmul_acc(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product accumulated in float64, rounded back to the operand dtype."""
    out_dtype = np.result_type(a.dtype, b.dtype)
    prod = a.astype(np.float64, copy=False) @ b.astype(np.float64, copy=False)
    return prod.astype(out_dtype, copy=False)


def _coerce_dtype(data) -> np.ndarray:
    arr = np.asarray(data)
    if arr.dtype not in (np.float32, np.float64):
        arr = arr.astype(DEFAULT_DTYPE)
    return arr


class Tensor:
    """A node in the computation tape."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward_fn")

    def __init__(self, data, requires_grad=False, _parents=(), _backward_fn=None):
        self.data = _coerce_dtype(data)
        if _FINITE_CHECKS and not np.isfinite(self.data).all():
            raise DivergenceError("non-finite value produced")
        self.grad = None
        self.requires_grad = bool(requires_grad) or any(p.requires_grad for p in _parents)
        self._parents = _parents if self.requires_grad else ()
        self._backward_fn = _backward_fn if self.requires_grad else None

    # -- basic introspection ------------------------------------------------

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        return float(self.data)

    def __repr__(self):
        return f"Tensor(shape={self.shape}, dtype={self.dtype.name}, grad={self.requires_grad})"

    # -- autodiff -----------------------------------------------------------

    def detach(self) -> "Tensor":
        """Same values, no gradient path (the stop-gradient primitive)."""
        return Tensor(self.data, requires_grad=False)

    def backward(self):
        if self.data.size != 1:
            raise ShapeError("backward() requires a scalar output")
        order = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if id(node) in seen:
                continue
            if expanded:
                seen.add(id(node))
                order.append(node)
            else:
                stack.append((node, True))
                for parent in node._parents:
                    if id(parent) not in seen and parent.requires_grad:
                        stack.append((parent, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(order):
            if node._backward_fn is None or node.grad is None:
                continue
            for parent, grad in zip(node._parents, node._backward_fn(node.grad)):
                if grad is None or not parent.requires_grad:
                    continue
                grad = grad.astype(parent.data.dtype, copy=False)
                # accumulation always allocates, so sharing a view here is safe
                parent.grad = grad if parent.grad is None else parent.grad + grad

    def zero_grad(self):
        self.grad = None

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = _as_tensor(other, self.dtype)
        out_data = self.data + other.data
        return Tensor(
            out_data,
            _parents=(self, other),
            _backward_fn=lambda g: (_unbroadcast(g, self.shape), _unbroadcast(g, other.shape)),
        )

    __radd__ = __add__

    def __neg__(self):
        return Tensor(-self.data, _parents=(self,), _backward_fn=lambda g: (-g,))

    def __sub__(self, other):
        other = _as_tensor(other, self.dtype)
        return Tensor(
            self.data - other.data,
            _parents=(self, other),
            _backward_fn=lambda g: (_unbroadcast(g, self.shape), _unbroadcast(-g, other.shape)),
        )

    def __rsub__(self, other):
        return _as_tensor(other, self.dtype) - self

    def __mul__(self, other):
        other = _as_tensor(other, self.dtype)
        return Tensor(
            self.data * other.data,
            _parents=(self, other),
            _backward_fn=lambda g: (
                _unbroadcast(g * other.data, self.shape),
                _unbroadcast(g * self.data, other.shape),
            ),
        )

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if isinstance(scalar, Tensor) or not np.isscalar(scalar):
            raise ShapeError("division only supported by python scalars")
        return self * (1.0 / scalar)

    def __matmul__(self, other):
        other = _as_tensor(other)
        if self.ndim != 2 or other.ndim != 2:
            raise ShapeError(f"matmul expects 2-D operands, got {self.shape} @ {other.shape}")
        if self.shape[1] != other.shape[0]:
            raise ShapeError(f"matmul inner dimensions disagree: {self.shape} @ {other.shape}")
        return Tensor(
            matmul_acc(self.data, other.data),
            _parents=(self, other),
            _backward_fn=lambda g: (matmul_acc(g, other.data.T), matmul_acc(self.data.T, g)),
        )

    # -- shape and reductions -----------------------------------------------

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        old = self.shape
        return Tensor(
            self.data.reshape(shape),
            _parents=(self,),
            _backward_fn=lambda g: (g.reshape(old),),
        )

    def transpose(self, *axes):
        inverse = np.argsort(axes)
        return Tensor(
            self.data.transpose(axes),
            _parents=(self,),
            _backward_fn=lambda g: (g.transpose(inverse),),
        )

    def sum(self, axis=None):
        out = self.data.sum(axis=axis, dtype=np.float64).astype(self.dtype)
        shape, dt = self.shape, self.dtype

        def backward(g):
            if axis is None:
                return (np.broadcast_to(g, shape).astype(dt),)
            expanded = np.expand_dims(g, axis)
            return (np.broadcast_to(expanded, shape).astype(dt),)

        return Tensor(out, _parents=(self,), _backward_fn=backward)

    def mean(self, axis=None):
        count = self.size if axis is None else self.shape[axis]
        return self.sum(axis=axis) / count


def _as_tensor(value, dtype=None) -> Tensor:
    if isinstance(value, Tensor):
        return value
    if dtype is not None and np.isscalar(value):
        return Tensor(np.asarray(value, dtype=dtype))
    return Tensor(value)


def _unbroadcast(grad: np.ndarray, shape) -> np.ndarray:
    """Reduce a broadcast gradient back down to the original operand shape."""
    if grad.shape == tuple(shape):
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)
