"""Layer specs with forward/backward passes.

Each layer is an immutable description. ``init`` draws parameters,
``forward(params, x)`` returns ``(out, cache)`` and
``backward(params, cache, dout)`` returns ``(dx, grads)`` with ``grads``
keyed like ``params``. Activations are ``(N, H, W, C)`` until flattened.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels


class ShapeError(ValueError):
    """A layer cannot accept the incoming shape."""


def _uniform(rng, fan_in, shape):
    lim = np.sqrt(3.0 / fan_in)
    return rng.uniform(-lim, lim, size=shape)


@dataclass(frozen=True)
class Conv2D:
    filters: int
    kernel_h: int
    kernel_w: int

    def out_shape(self, s):
        if len(s) != 3:
            raise ShapeError(f"conv2d expects (H, W, C), got {s}")
        h, w, _ = s
        if self.kernel_h > h or self.kernel_w > w:
            raise ShapeError(f"{self.kernel_h}x{self.kernel_w} kernel larger than {h}x{w} input")
        return (h - self.kernel_h + 1, w - self.kernel_w + 1, self.filters)

    def init(self, s, rng):
        c = s[2]
        shape = (self.kernel_h, self.kernel_w, c, self.filters)
        return {"W": _uniform(rng, self.kernel_h * self.kernel_w * c, shape), "b": np.zeros(self.filters)}

    def forward(self, p, x):
        return kernels.conv2d_forward(x, p["W"], p["b"]), x

    def backward(self, p, x, dout):
        dx, dk, db = kernels.conv2d_backward(x, p["W"], np.ascontiguousarray(dout))
        return dx, {"W": dk, "b": db}


def conv2d_forward(x, kernels_, bias):
    """Valid 2-D convolution (cross-correlation), stride 1."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 3:
        x = x[None]
    if kernels_.shape[0] > x.shape[1] or kernels_.shape[1] > x.shape[2]:
        raise ShapeError("kernel larger than input")
    return kernels.conv2d_forward(x, np.asarray(kernels_, float), np.asarray(bias, float))


def conv2d_backward(x, kernels_, dout):
    return kernels.conv2d_backward(np.asarray(x, float), np.asarray(kernels_, float), np.asarray(dout, float))


@dataclass(frozen=True)
class MaxPool:
    pool_h: int
    pool_w: int

    def out_shape(self, s):
        h, w, c = s
        if self.pool_h > h or self.pool_w > w:
            raise ShapeError(f"{self.pool_h}x{self.pool_w} pool larger than {h}x{w} input")
        return (h // self.pool_h, w // self.pool_w, c)

    def init(self, s, rng):
        return {}

    def forward(self, p, x):
        out, arg = kernels.maxpool_forward(x, self.pool_h, self.pool_w)
        return out, (arg, x.shape)

    def backward(self, p, cache, dout):
        arg, shape = cache
        return kernels.maxpool_backward(np.ascontiguousarray(dout), arg, shape, self.pool_h, self.pool_w), {}


@dataclass(frozen=True)
class AvgPool:
    pool_h: int
    pool_w: int

    def out_shape(self, s):
        h, w, c = s
        if self.pool_h > h or self.pool_w > w:
            raise ShapeError(f"{self.pool_h}x{self.pool_w} pool larger than {h}x{w} input")
        return (h // self.pool_h, w // self.pool_w, c)

    def init(self, s, rng):
        return {}

    def forward(self, p, x):
        n, h, w, c = x.shape
        ho, wo = h // self.pool_h, w // self.pool_w
        blocks = x[:, : ho * self.pool_h, : wo * self.pool_w].reshape(n, ho, self.pool_h, wo, self.pool_w, c)
        return blocks.mean(axis=(2, 4)), x.shape

    def backward(self, p, shape, dout):
        ph, pw = self.pool_h, self.pool_w
        n, ho, wo, c = dout.shape
        dx = np.zeros(shape)
        spread = np.repeat(np.repeat(dout, ph, axis=1), pw, axis=2) / (ph * pw)
        dx[:, : ho * ph, : wo * pw] = spread
        return dx, {}


@dataclass(frozen=True)
class InsertZeroColumns:
    """Insert all-zero columns before the given indices of the width axis.

    Indices refer to the incoming feature map.
    """

    positions: tuple[int, ...]

    def out_shape(self, s):
        h, w, c = s
        if any(p < 0 or p > w for p in self.positions):
            raise ShapeError(f"zero-column positions {self.positions} outside width {w}")
        return (h, w + len(self.positions), c)

    def init(self, s, rng):
        return {}

    def _keep(self, w):
        # output column index of every input column
        shift = np.zeros(w, dtype=int)
        for p in self.positions:
            shift[p:] += 1
        return np.arange(w) + shift

    def forward(self, p, x):
        n, h, w, c = x.shape
        out = np.zeros((n, h, w + len(self.positions), c))
        keep = self._keep(w)
        out[:, :, keep] = x
        return out, keep

    def backward(self, p, keep, dout):
        return dout[:, :, keep], {}


@dataclass(frozen=True)
class Flatten:
    def out_shape(self, s):
        return (int(np.prod(s)),)

    def init(self, s, rng):
        return {}

    def forward(self, p, x):
        return x.reshape(x.shape[0], -1), x.shape

    def backward(self, p, shape, dout):
        return dout.reshape(shape), {}


@dataclass(frozen=True)
class Dense:
    units: int

    def out_shape(self, s):
        if len(s) != 1:
            raise ShapeError(f"dense expects a flat input, got {s}")
        return (self.units,)

    def init(self, s, rng):
        return {"W": _uniform(rng, s[0], (s[0], self.units)), "b": np.zeros(self.units)}

    def forward(self, p, x):
        return x @ p["W"] + p["b"], x

    def backward(self, p, x, dout):
        return dout @ p["W"].T, {"W": x.T @ dout, "b": dout.sum(axis=0)}


@dataclass(frozen=True)
class Activation:
    fn: str = "relu"

    def __post_init__(self):
        if self.fn not in ("relu", "tanh"):
            raise ValueError(f"unknown activation {self.fn!r}")

    def out_shape(self, s):
        return s

    def init(self, s, rng):
        return {}

    def forward(self, p, x):
        if self.fn == "relu":
            out = np.maximum(x, 0.0)
            return out, x > 0
        out = np.tanh(x)
        return out, out

    def backward(self, p, cache, dout):
        if self.fn == "relu":
            return dout * cache, {}
        return dout * (1.0 - cache * cache), {}


@dataclass(frozen=True)
class Softmax:
    def out_shape(self, s):
        if len(s) != 1:
            raise ShapeError("softmax expects a flat input")
        return s

    def init(self, s, rng):
        return {}

    def forward(self, p, x):
        out = softmax(x)
        return out, out

    def backward(self, p, prob, dout):
        inner = (dout * prob).sum(axis=1, keepdims=True)
        return prob * (dout - inner), {}


def softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def softmax_cross_entropy(logits, y):
    """Mean cross-entropy of integer labels ``y``; returns (loss, dlogits, prob)."""
    n = logits.shape[0]
    z = logits - logits.max(axis=1, keepdims=True)
    logsum = np.log(np.exp(z).sum(axis=1))
    loss = float((logsum - z[np.arange(n), y]).mean())
    prob = np.exp(z - logsum[:, None])
    d = prob.copy()
    d[np.arange(n), y] -= 1.0
    return loss, d / n, prob


def dense_forward(x, W, b):
    return np.asarray(x, float) @ W + b


def maxpool(x, ph, pw):
    out, _ = kernels.maxpool_forward(np.asarray(x, float), ph, pw)
    return out


def avgpool(x, ph, pw):
    return AvgPool(ph, pw).forward({}, np.asarray(x, float))[0]
