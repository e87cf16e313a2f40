"""Differentiable layers and activations: dense, 2-D conv (optionally masked),
nearest-neighbor upsampling, elementwise nonlinearities, softmax losses."""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from ..errors import ShapeError
from .tensor import Tensor, matmul_acc


def dense(x: Tensor, w: Tensor, b: Tensor | None = None) -> Tensor:
    """y = x @ w (+ b). x: (batch, in), w: (in, out), b: (out,)."""
    y = x @ w
    return y + b if b is not None else y


def relu(x: Tensor) -> Tensor:
    out = np.maximum(x.data, 0)
    return Tensor(out, _parents=(x,), _backward_fn=lambda g: (g * (x.data > 0),))


def sigmoid(x: Tensor) -> Tensor:
    out = expit(x.data)
    return Tensor(out, _parents=(x,), _backward_fn=lambda g: (g * out * (1 - out),))


def tanh(x: Tensor) -> Tensor:
    out = np.tanh(x.data)
    return Tensor(out, _parents=(x,), _backward_fn=lambda g: (g * (1 - out * out),))


def exp(x: Tensor) -> Tensor:
    # overflow surfaces as Inf and trips the tensor finite guard
    with np.errstate(over="ignore"):
        out = np.exp(x.data)
    return Tensor(out, _parents=(x,), _backward_fn=lambda g: (g * out,))


def log(x: Tensor) -> Tensor:
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(x.data)
    return Tensor(out, _parents=(x,), _backward_fn=lambda g: (g / x.data,))


def square(x: Tensor) -> Tensor:
    return x * x


# ---------------------------------------------------------------------------
# convolution

def mask_a(kh: int, kw: int) -> np.ndarray:
    """Raster-causal kernel mask excluding the center tap."""
    m = np.zeros((kh, kw), dtype=np.float32)
    m[: kh // 2, :] = 1.0
    m[kh // 2, : kw // 2] = 1.0
    return m


def mask_b(kh: int, kw: int) -> np.ndarray:
    """Raster-causal kernel mask including the center tap."""
    m = mask_a(kh, kw)
    m[kh // 2, kw // 2] = 1.0
    return m


def _im2col(xp: np.ndarray, kh: int, kw: int, stride: int):
    n, c, hp, wp = xp.shape
    oh = (hp - kh) // stride + 1
    ow = (wp - kw) // stride + 1
    windows = np.lib.stride_tricks.sliding_window_view(xp, (kh, kw), axis=(2, 3))
    windows = windows[:, :, ::stride, ::stride]  # (n, c, oh, ow, kh, kw)
    cols = windows.transpose(0, 2, 3, 1, 4, 5).reshape(n * oh * ow, c * kh * kw)
    return np.ascontiguousarray(cols), oh, ow


def _col2im(dcols: np.ndarray, xp_shape, kh: int, kw: int, stride: int, oh: int, ow: int):
    n, c, hp, wp = xp_shape
    dxp = np.zeros(xp_shape, dtype=np.float64)
    blocks = dcols.reshape(n, oh, ow, c, kh, kw).transpose(0, 3, 1, 2, 4, 5)
    for i in range(kh):
        for j in range(kw):
            dxp[:, :, i : i + stride * oh : stride, j : j + stride * ow : stride] += blocks[:, :, :, :, i, j]
    return dxp


def conv2d(
    x: Tensor,
    w: Tensor,
    b: Tensor | None = None,
    stride: int = 1,
    padding: int = 0,
    mask: np.ndarray | None = None,
) -> Tensor:
    """2-D convolution (cross-correlation) over NCHW input.

    ``mask`` is an optional binary (kh, kw) array applied to the kernel on
    both the forward and weight-gradient paths, so masked taps neither see
    input nor receive gradient.
    """
    if x.ndim != 4 or w.ndim != 4:
        raise ShapeError(f"conv2d expects NCHW input and FCKK kernel, got {x.shape}, {w.shape}")
    n, c, h, wd = x.shape
    f, cw, kh, kw = w.shape
    if cw != c:
        raise ShapeError(f"kernel expects {cw} input channels, input has {c}")
    if mask is not None and mask.shape != (kh, kw):
        raise ShapeError(f"mask shape {mask.shape} does not match kernel {kh}x{kw}")

    weights = w.data * mask if mask is not None else w.data
    xp = np.pad(x.data, ((0, 0), (0, 0), (padding, padding), (padding, padding))) if padding else x.data
    cols, oh, ow = _im2col(xp, kh, kw, stride)
    wmat = weights.reshape(f, -1)
    out = matmul_acc(cols, wmat.T)
    out = out.reshape(n, oh, ow, f).transpose(0, 3, 1, 2)
    if b is not None and b.shape != (f,):
        raise ShapeError(f"bias shape {b.shape} does not match {f} filters")

    def backward(g):
        gmat = np.ascontiguousarray(g.transpose(0, 2, 3, 1)).reshape(n * oh * ow, f)
        dw = matmul_acc(gmat.T, cols).reshape(w.shape)
        if mask is not None:
            dw = dw * mask
        dcols = matmul_acc(gmat, wmat)
        dxp = _col2im(dcols, xp.shape, kh, kw, stride, oh, ow)
        dx = dxp[:, :, padding : padding + h, padding : padding + wd] if padding else dxp
        return dx, dw

    out_t = Tensor(out, _parents=(x, w), _backward_fn=backward)
    return out_t + b.reshape(1, f, 1, 1) if b is not None else out_t


def upsample2x(x: Tensor) -> Tensor:
    """Nearest-neighbor 2x spatial upsampling of NCHW input."""
    n, c, h, w = x.shape
    out = x.data.repeat(2, axis=2).repeat(2, axis=3)

    def backward(g):
        return (g.reshape(n, c, h, 2, w, 2).sum(axis=(3, 5)),)

    return Tensor(out, _parents=(x,), _backward_fn=backward)


# ---------------------------------------------------------------------------
# categorical heads

def softmax(logits: np.ndarray) -> np.ndarray:
    """Float64 softmax over the last axis, explicitly renormalized."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    p = e / e.sum(axis=-1, keepdims=True)
    return p / p.sum(axis=-1, keepdims=True)


def softmax_cross_entropy(logits: Tensor, targets: np.ndarray) -> Tensor:
    """Mean negative log-likelihood of integer targets under softmax(logits).

    logits: (batch, classes); targets: (batch,) ints.
    """
    if logits.ndim != 2:
        raise ShapeError(f"logits must be 2-D, got {logits.shape}")
    targets = np.asarray(targets)
    if targets.shape != (logits.shape[0],):
        raise ShapeError(f"targets shape {targets.shape} does not match batch {logits.shape[0]}")
    batch = logits.shape[0]
    z = logits.data.astype(np.float64)
    z = z - z.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1))
    nll = lse - z[np.arange(batch), targets]
    loss = nll.mean()

    def backward(g):
        p = np.exp(z - lse[:, None])
        p[np.arange(batch), targets] -= 1.0
        return (g * p / batch,)

    return Tensor(np.float64(loss), _parents=(logits,), _backward_fn=backward)


def gather_rows(table: Tensor, idx: np.ndarray) -> Tensor:
    """Select rows of a (V, K) table; gradients scatter-add back into rows."""
    if table.ndim != 2:
        raise ShapeError(f"gather_rows expects a 2-D table, got {table.shape}")
    idx = np.asarray(idx)
    if idx.ndim != 1:
        raise ShapeError("row indices must be a flat vector")
    if idx.min(initial=0) < 0 or (idx.size and idx.max() >= table.shape[0]):
        raise ShapeError(f"row index out of range for table with {table.shape[0]} rows")

    def backward(g):
        dtable = np.zeros(table.shape, dtype=np.float64)
        np.add.at(dtable, idx, g)
        return (dtable,)

    return Tensor(table.data[idx], _parents=(table,), _backward_fn=backward)
