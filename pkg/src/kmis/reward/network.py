"""Feed-forward tanh network with a Gaussian (mean, log-variance) head.

Parameters live in a flat list ``[W_1, b_1, ..., W_out, b_out]`` so the
optimizer, the early-stopping snapshot, and serialization all treat them the
same way. Backpropagation is written out by hand; ``backward`` also returns the
gradient with respect to the inputs, which the gradient check relies on.

Dependencies: numerics.types
Wired in: reward/model.py
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Final

import numpy as np

from kmis.numerics.types import FloatArray

LOGVAR_MIN: Final[float] = -10.0
LOGVAR_MAX: Final[float] = 10.0
_LOG_2PI: Final[float] = math.log(2.0 * math.pi)


@dataclass
class ForwardCache:
    """Intermediate activations kept for the backward pass."""

    layer_inputs: list[FloatArray]
    activations: list[FloatArray]
    masks: list[FloatArray | None]
    raw_logvar: FloatArray


@dataclass
class GaussianMLP:
    """Dense tanh layers followed by a linear two-unit head."""

    params: list[FloatArray]

    @classmethod
    def initialize(
        cls, input_dim: int, hidden_sizes: tuple[int, ...], rng: np.random.Generator
    ) -> GaussianMLP:
        """Glorot-uniform weights, zero biases."""
        sizes = [input_dim, *hidden_sizes, 2]
        params: list[FloatArray] = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:], strict=True):
            limit = math.sqrt(6.0 / (fan_in + fan_out))
            params.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            params.append(np.zeros(fan_out))
        return cls(params=params)

    @property
    def n_hidden(self) -> int:
        return len(self.params) // 2 - 1

    @property
    def input_dim(self) -> int:
        return int(self.params[0].shape[0])

    def copy_params(self) -> list[FloatArray]:
        return [p.copy() for p in self.params]

    def hidden_weights(self) -> list[FloatArray]:
        return [self.params[2 * k] for k in range(self.n_hidden)]

    def forward(
        self,
        x: FloatArray,
        *,
        dropout: float = 0.0,
        rng: np.random.Generator | None = None,
    ) -> tuple[FloatArray, FloatArray, ForwardCache]:
        """Return ``(mean, logvar, cache)``; dropout is applied only when ``rng`` is given."""
        h = x
        cache = ForwardCache(layer_inputs=[], activations=[], masks=[], raw_logvar=np.empty(0))
        for k in range(self.n_hidden):
            weight, bias = self.params[2 * k], self.params[2 * k + 1]
            cache.layer_inputs.append(h)
            activation = np.tanh(h @ weight + bias)
            cache.activations.append(activation)
            mask: FloatArray | None = None
            if rng is not None and dropout > 0.0:
                mask = (rng.random(activation.shape) >= dropout) / (1.0 - dropout)
                h = activation * mask
            else:
                h = activation
            cache.masks.append(mask)
        cache.layer_inputs.append(h)
        out = h @ self.params[-2] + self.params[-1]
        cache.raw_logvar = out[:, 1]
        return out[:, 0], np.clip(out[:, 1], LOGVAR_MIN, LOGVAR_MAX), cache

    def backward(
        self, cache: ForwardCache, grad_mean: FloatArray, grad_logvar: FloatArray
    ) -> tuple[list[FloatArray], FloatArray]:
        """Backpropagate head gradients; returns ``(param_grads, input_grad)``."""
        in_range = (cache.raw_logvar > LOGVAR_MIN) & (cache.raw_logvar < LOGVAR_MAX)
        d_out = np.column_stack([grad_mean, np.where(in_range, grad_logvar, 0.0)])
        grads: list[FloatArray] = [np.empty(0)] * len(self.params)
        grads[-2] = cache.layer_inputs[-1].T @ d_out
        grads[-1] = d_out.sum(axis=0)
        d_h = d_out @ self.params[-2].T
        for k in reversed(range(self.n_hidden)):
            mask = cache.masks[k]
            if mask is not None:
                d_h = d_h * mask
            d_pre = d_h * (1.0 - cache.activations[k] ** 2)
            grads[2 * k] = cache.layer_inputs[k].T @ d_pre
            grads[2 * k + 1] = d_pre.sum(axis=0)
            d_h = d_pre @ self.params[2 * k].T
        return grads, d_h


def gaussian_nll(target: FloatArray, mean: FloatArray, logvar: FloatArray) -> FloatArray:
    """Per-sample negative log-likelihood of ``target`` under ``N(mean, exp(logvar))``."""
    return 0.5 * (_LOG_2PI + logvar + (target - mean) ** 2 * np.exp(-logvar))


def nll_gradients(
    target: FloatArray, mean: FloatArray, logvar: FloatArray
) -> tuple[FloatArray, FloatArray]:
    """Gradients of the batch-mean NLL with respect to mean and log-variance."""
    n = target.shape[0]
    precision = np.exp(-logvar)
    residual = target - mean
    return -residual * precision / n, 0.5 * (1.0 - residual**2 * precision) / n


@dataclass
class Adam:
    """Adaptive moment estimation over a flat parameter list."""

    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    _first: list[FloatArray] = field(default_factory=list[FloatArray])
    _second: list[FloatArray] = field(default_factory=list[FloatArray])

    def step(self, params: list[FloatArray], grads: list[FloatArray]) -> None:
        """Update ``params`` in place."""
        if not self._first:
            self._first = [np.zeros_like(p) for p in params]
            self._second = [np.zeros_like(p) for p in params]
        self.step_count += 1
        correction1 = 1.0 - self.beta1**self.step_count
        correction2 = 1.0 - self.beta2**self.step_count
        for param, grad, m, v in zip(params, grads, self._first, self._second, strict=True):
            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * grad * grad
            param -= self.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + self.eps)
