"""Layers with hand-written reverse-mode gradients.

Every layer caches what its backward pass needs during forward, so a
network instance is single-threaded; distinct instances share nothing.
Data is either a 2-D batch (n, features) or a 3-D sequence batch
(n, timesteps, channels); Flatten and the internal SeqFromVec adapters
convert between the two.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ACTIVATIONS = ("relu", "sigmoid", "linear")


@dataclass(frozen=True)
class LayerSpec:
    """Declarative description of one layer.

    ``units`` doubles as the filter count for conv1d and the cell count
    for lstm; it is ignored for avgpool1d/dropout/flatten.
    """

    kind: str
    units: int = 0
    kernel_size: int = 0
    pool_size: int = 0
    activation: str = "linear"
    rate: float = 0.0

    def __post_init__(self):
        if self.kind not in ("dense", "conv1d", "avgpool1d", "lstm", "dropout", "flatten"):
            raise ValueError(f"unknown layer kind {self.kind!r}")
        if self.kind in ("dense", "conv1d", "lstm") and self.units < 1:
            raise ValueError(f"{self.kind} needs units >= 1")
        if self.kind == "conv1d" and self.kernel_size < 1:
            raise ValueError("conv1d needs kernel_size >= 1")
        if self.kind == "avgpool1d" and self.pool_size < 1:
            raise ValueError("avgpool1d needs pool_size >= 1")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if not 0.0 <= self.rate < 1.0:
            raise ValueError("dropout rate must lie in [0, 1)")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind, "units": self.units, "kernel_size": self.kernel_size,
            "pool_size": self.pool_size, "activation": self.activation, "rate": self.rate,
        }


def sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _activate(name, z):
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "sigmoid":
        return sigmoid(z)
    return z


def _activation_grad(name, out):
    """d(activation)/d(pre-activation), expressed through the output."""
    if name == "relu":
        return (out > 0).astype(out.dtype)
    if name == "sigmoid":
        return out * (1.0 - out)
    return np.ones_like(out)


def glorot_uniform(rng, shape, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Layer:
    def forward(self, x, train=False, rng=None):
        raise NotImplementedError

    def backward(self, grad):
        raise NotImplementedError

    def params(self):
        return []

    def grads(self):
        return []


class Dense(Layer):
    def __init__(self, in_dim, units, activation="linear", rng=None):
        rng = rng or np.random.default_rng(0)
        self.activation = activation
        self.w = glorot_uniform(rng, (in_dim, units), in_dim, units)
        self.b = np.zeros(units)
        self.dw = np.zeros_like(self.w)
        self.db = np.zeros_like(self.b)
        self._x = None
        self._out = None

    def forward(self, x, train=False, rng=None):
        self._x = x
        self._out = _activate(self.activation, x @ self.w + self.b)
        return self._out

    def backward(self, grad):
        dz = grad * _activation_grad(self.activation, self._out)
        self.dw[...] = self._x.T @ dz
        self.db[...] = dz.sum(axis=0)
        return dz @ self.w.T

    def params(self):
        return [self.w, self.b]

    def grads(self):
        return [self.dw, self.db]


class Conv1D(Layer):
    """Valid cross-correlation along the time axis; weight shape (k, c_in, filters)."""

    def __init__(self, in_channels, filters, kernel_size, activation="linear", rng=None):
        rng = rng or np.random.default_rng(0)
        self.activation = activation
        self.kernel_size = kernel_size
        fan_in = kernel_size * in_channels
        fan_out = kernel_size * filters
        self.w = glorot_uniform(rng, (kernel_size, in_channels, filters), fan_in, fan_out)
        self.b = np.zeros(filters)
        self.dw = np.zeros_like(self.w)
        self.db = np.zeros_like(self.b)
        self._windows = None
        self._in_shape = None
        self._out = None

    def forward(self, x, train=False, rng=None):
        if x.shape[1] < self.kernel_size:
            raise ValueError(
                f"sequence length {x.shape[1]} shorter than kernel {self.kernel_size}"
            )
        # windows: (n, T-k+1, channels, k)
        self._windows = np.lib.stride_tricks.sliding_window_view(
            x, self.kernel_size, axis=1
        )
        self._in_shape = x.shape
        z = np.einsum("ntck,kcf->ntf", self._windows, self.w) + self.b
        self._out = _activate(self.activation, z)
        return self._out

    def backward(self, grad):
        dz = grad * _activation_grad(self.activation, self._out)
        self.dw[...] = np.einsum("ntck,ntf->kcf", self._windows, dz)
        self.db[...] = dz.sum(axis=(0, 1))
        dx = np.zeros(self._in_shape)
        out_len = dz.shape[1]
        for dk in range(self.kernel_size):
            dx[:, dk:dk + out_len, :] += dz @ self.w[dk].T
        return dx

    def params(self):
        return [self.w, self.b]

    def grads(self):
        return [self.dw, self.db]


class AvgPool1D(Layer):
    """Non-overlapping average pooling; a trailing remainder is dropped."""

    def __init__(self, pool_size):
        self.pool_size = pool_size
        self._in_shape = None

    def forward(self, x, train=False, rng=None):
        n, t, c = x.shape
        out_len = t // self.pool_size
        if out_len == 0:
            raise ValueError(f"sequence length {t} shorter than pool {self.pool_size}")
        self._in_shape = x.shape
        trimmed = x[:, : out_len * self.pool_size, :]
        return trimmed.reshape(n, out_len, self.pool_size, c).mean(axis=2)

    def backward(self, grad):
        dx = np.zeros(self._in_shape)
        covered = grad.shape[1] * self.pool_size
        dx[:, :covered, :] = np.repeat(grad, self.pool_size, axis=1) / self.pool_size
        return dx


class LSTM(Layer):
    """Standard LSTM cell unrolled over time; emits the final hidden state.

    Gate layout inside the fused weight matrices is input, forget,
    candidate, output. Initial hidden and cell states are zero.
    """

    def __init__(self, in_dim, units, rng=None):
        rng = rng or np.random.default_rng(0)
        self.units = units
        self.wx = glorot_uniform(rng, (in_dim, 4 * units), in_dim, units)
        self.wh = glorot_uniform(rng, (units, 4 * units), units, units)
        self.b = np.zeros(4 * units)
        self.dwx = np.zeros_like(self.wx)
        self.dwh = np.zeros_like(self.wh)
        self.db = np.zeros_like(self.b)
        self._steps = None
        self._in_shape = None

    def _gates(self, z):
        u = self.units
        return (
            sigmoid(z[:, :u]), sigmoid(z[:, u:2 * u]),
            np.tanh(z[:, 2 * u:3 * u]), sigmoid(z[:, 3 * u:]),
        )

    def forward(self, x, train=False, rng=None):
        n, t, _ = x.shape
        h = np.zeros((n, self.units))
        c = np.zeros((n, self.units))
        self._in_shape = x.shape
        self._steps = []
        for step in range(t):
            xt = x[:, step, :]
            z = xt @ self.wx + h @ self.wh + self.b
            i, f, g, o = self._gates(z)
            c_prev = c
            c = f * c_prev + i * g
            tc = np.tanh(c)
            self._steps.append((xt, h, i, f, g, o, c_prev, tc))
            h = o * tc
        return h

    def backward(self, grad):
        dx = np.zeros(self._in_shape)
        self.dwx[...] = 0.0
        self.dwh[...] = 0.0
        self.db[...] = 0.0
        dh = grad
        dc = np.zeros_like(grad)
        for step in range(len(self._steps) - 1, -1, -1):
            xt, h_prev, i, f, g, o, c_prev, tc = self._steps[step]
            do = dh * tc
            dc = dc + dh * o * (1.0 - tc * tc)
            di = dc * g
            df = dc * c_prev
            dg = dc * i
            dz = np.concatenate(
                [
                    di * i * (1.0 - i),
                    df * f * (1.0 - f),
                    dg * (1.0 - g * g),
                    do * o * (1.0 - o),
                ],
                axis=1,
            )
            self.dwx += xt.T @ dz
            self.dwh += h_prev.T @ dz
            self.db += dz.sum(axis=0)
            dx[:, step, :] = dz @ self.wx.T
            dh = dz @ self.wh.T
            dc = dc * f
        return dx

    def params(self):
        return [self.wx, self.wh, self.b]

    def grads(self):
        return [self.dwx, self.dwh, self.db]


class Dropout(Layer):
    """Inverted dropout: train-time scaling by 1/(1-rate), inference is identity."""

    def __init__(self, rate):
        self.rate = rate
        self._mask = None

    def forward(self, x, train=False, rng=None):
        if not train or self.rate == 0.0:
            self._mask = None
            return x
        if rng is None:
            raise ValueError("train-mode dropout needs an RNG")
        keep = 1.0 - self.rate
        self._mask = (rng.random(x.shape) < keep) / keep
        return x * self._mask

    def backward(self, grad):
        if self._mask is None:
            return grad
        return grad * self._mask


class Flatten(Layer):
    def __init__(self):
        self._in_shape = None

    def forward(self, x, train=False, rng=None):
        self._in_shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad):
        return grad.reshape(self._in_shape)


class SeqFromVec(Layer):
    """Adapter giving a 2-D batch the 3-D layout a sequence layer expects.

    ``as_time``: each feature becomes one timestep of a 1-channel sequence
    (convolution over the feature axis). Otherwise the whole row becomes a
    single timestep carrying all features (recurrent nets).
    """

    def __init__(self, as_time):
        self.as_time = as_time

    def forward(self, x, train=False, rng=None):
        n, d = x.shape
        return x.reshape(n, d, 1) if self.as_time else x.reshape(n, 1, d)

    def backward(self, grad):
        return grad.reshape(grad.shape[0], -1)
