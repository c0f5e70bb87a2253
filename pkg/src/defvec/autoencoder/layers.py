"""From-scratch layer primitives: 3x3 stride-1 pad-1 (transposed) convolution,
2x2 average pooling, 2x nearest-neighbor upsampling and activations.

Forward passes cache what the backward passes need; backward passes are exact
analytic adjoints, verified against central finite differences in the tests.
All reductions happen in a fixed order so results are independent of any
outer parallelism.
"""

from __future__ import annotations

import math

import numpy as np

KERNEL = 3  # fixed 3x3, stride 1, padding 1


def relu(x):
    return np.maximum(x, 0)


def sigmoid(x):
    # Split by sign for stability in float32.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _apply_activation(pre, activation):
    if activation == "relu":
        return relu(pre)
    if activation == "sigmoid":
        return sigmoid(pre)
    if activation == "none":
        return pre
    raise ValueError(f"unknown activation '{activation}'")


def _activation_grad(grad_out, pre, out, activation):
    if activation == "relu":
        return grad_out * (pre > 0)
    if activation == "sigmoid":
        return grad_out * out * (1.0 - out)
    if activation == "none":
        return grad_out
    raise ValueError(f"unknown activation '{activation}'")


def _im2col(xp, height, width):
    """(B, C, H+2, W+2) padded input -> (B, C*9, H*W) patch matrix.

    Column index is c*9 + u*3 + v, matching weights reshaped as (O, C*9).
    """
    batch, chans = xp.shape[:2]
    cols = np.empty((batch, chans, 9, height * width), dtype=xp.dtype)
    for u in range(KERNEL):
        for v in range(KERNEL):
            cols[:, :, u * KERNEL + v, :] = xp[
                :, :, u : u + height, v : v + width
            ].reshape(batch, chans, height * width)
    return cols.reshape(batch, chans * 9, height * width)


def _col2im(grad_cols, batch, chans, height, width):
    """Adjoint of _im2col: scatter-add patch gradients back to padded input."""
    gc = grad_cols.reshape(batch, chans, 9, height * width)
    gxp = np.zeros((batch, chans, height + 2, width + 2), dtype=grad_cols.dtype)
    for u in range(KERNEL):
        for v in range(KERNEL):
            gxp[:, :, u : u + height, v : v + width] += gc[
                :, :, u * KERNEL + v, :
            ].reshape(batch, chans, height, width)
    return gxp


class ConvLayer:
    """3x3, stride-1, padding-1 convolution or transposed convolution with a
    fused activation. A transposed convolution at these hyperparameters is a
    convolution with the spatially flipped kernel, which is how it is run.
    """

    def __init__(self, in_ch, out_ch, kind="conv", activation="relu", rng=None,
                 dtype=np.float32):
        if kind not in ("conv", "conv_transpose"):
            raise ValueError(f"unknown layer kind '{kind}'")
        self.in_ch = in_ch
        self.out_ch = out_ch
        self.kind = kind
        self.activation = activation
        k = 1.0 / math.sqrt(in_ch * 9)
        if rng is None:
            rng = np.random.default_rng(0)
        self.weights = rng.uniform(-k, k, (out_ch, in_ch, KERNEL, KERNEL)).astype(dtype)
        self.bias = rng.uniform(-k, k, out_ch).astype(dtype)
        self.grad_weights = np.zeros_like(self.weights)
        self.grad_bias = np.zeros_like(self.bias)
        self._cache = None

    def _effective_weights(self):
        if self.kind == "conv_transpose":
            return self.weights[:, :, ::-1, ::-1]
        return self.weights

    def forward(self, x):
        if x.ndim != 4 or x.shape[1] != self.in_ch:
            raise ValueError(
                f"input shape {x.shape} incompatible with layer "
                f"({self.in_ch} -> {self.out_ch})"
            )
        batch, _, height, width = x.shape
        xp = np.zeros((batch, self.in_ch, height + 2, width + 2), dtype=x.dtype)
        xp[:, :, 1:-1, 1:-1] = x
        cols = _im2col(xp, height, width)
        w2 = np.ascontiguousarray(self._effective_weights()).reshape(
            self.out_ch, self.in_ch * 9
        )
        pre = np.matmul(w2, cols).reshape(batch, self.out_ch, height, width)
        pre += self.bias[None, :, None, None]
        out = _apply_activation(pre, self.activation)
        self._cache = (cols, pre, out, (batch, height, width))
        return out

    def backward(self, grad_out):
        cols, pre, out, (batch, height, width) = self._cache
        if grad_out.shape != pre.shape:
            raise ValueError(
                f"grad shape {grad_out.shape} does not match output {pre.shape}"
            )
        g_pre = _activation_grad(grad_out, pre, out, self.activation)
        g2 = g_pre.reshape(batch, self.out_ch, height * width)
        self.grad_bias = g2.sum(axis=(0, 2))
        gw2 = np.matmul(g2, cols.transpose(0, 2, 1)).sum(axis=0)
        gw = gw2.reshape(self.out_ch, self.in_ch, KERNEL, KERNEL)
        if self.kind == "conv_transpose":
            gw = np.ascontiguousarray(gw[:, :, ::-1, ::-1])
        self.grad_weights = gw
        w2 = np.ascontiguousarray(self._effective_weights()).reshape(
            self.out_ch, self.in_ch * 9
        )
        grad_cols = np.matmul(w2.T, g2)
        gxp = _col2im(grad_cols, batch, self.in_ch, height, width)
        return gxp[:, :, 1:-1, 1:-1]

    def parameters(self):
        return [self.weights, self.bias]

    def gradients(self):
        return [self.grad_weights, self.grad_bias]


class AvgPool2:
    """2x2 mean pooling, stride 2; requires even spatial dims."""

    def forward(self, x):
        batch, chans, height, width = x.shape
        if height % 2 or width % 2:
            raise ValueError(f"odd spatial dims {height}x{width} for 2x2 pooling")
        self._in_shape = x.shape
        return x.reshape(batch, chans, height // 2, 2, width // 2, 2).mean(axis=(3, 5))

    def backward(self, grad_out):
        batch, chans, height, width = self._in_shape
        g = np.repeat(np.repeat(grad_out, 2, axis=2), 2, axis=3)
        return (g * np.asarray(0.25, dtype=g.dtype)).reshape(batch, chans, height, width)


class Upsample2:
    """2x nearest-neighbor upsampling; backward sums each 2x2 block."""

    def forward(self, x):
        self._in_shape = x.shape
        return np.repeat(np.repeat(x, 2, axis=2), 2, axis=3)

    def backward(self, grad_out):
        batch, chans, height, width = self._in_shape
        return grad_out.reshape(batch, chans, height, 2, width, 2).sum(axis=(3, 5))
