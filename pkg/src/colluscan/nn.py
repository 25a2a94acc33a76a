"""Small shared pieces for the hand-rolled trainers.

Everything runs in float64 numpy so analytic gradients can be checked
against central finite differences at tight tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

Params = dict[str, np.ndarray]


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def softmax(scores: np.ndarray) -> np.ndarray:
    """Row-wise normalized exponential; invariant to per-row constant shifts."""
    shifted = scores - scores.max(axis=-1, keepdims=True)
    ex = np.exp(shifted)
    return ex / ex.sum(axis=-1, keepdims=True)


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int,
                   shape=None) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    if shape is None:
        shape = (fan_out, fan_in)
    return rng.uniform(-limit, limit, size=shape)


def orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    a = rng.standard_normal((n, n))
    q, r = np.linalg.qr(a)
    return q * np.sign(np.diag(r))


class Adam:
    """Plain Adam over a named-parameter dict."""

    def __init__(self, params: Params, lr: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: Params, grads: Params) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        lr_t = self.lr * np.sqrt(1.0 - b2 ** self.t) / (1.0 - b1 ** self.t)
        for k, g in grads.items():
            self.m[k] = b1 * self.m[k] + (1 - b1) * g
            self.v[k] = b2 * self.v[k] + (1 - b2) * g * g
            params[k] -= lr_t * self.m[k] / (np.sqrt(self.v[k]) + self.eps)


def flatten_params(params: Params) -> np.ndarray:
    keys = sorted(params)
    return np.concatenate([params[k].ravel() for k in keys])


def unflatten_params(vec: np.ndarray, template: Params) -> Params:
    keys = sorted(template)
    out, pos = {}, 0
    for k in keys:
        size = template[k].size
        out[k] = vec[pos:pos + size].reshape(template[k].shape).copy()
        pos += size
    return out


def param_count(params: Params) -> int:
    return sum(v.size for v in params.values())


@dataclass
class Standardizer:
    """Per-feature z-score fitted on training data only."""

    mean: np.ndarray = field(default_factory=lambda: np.zeros(0))
    std: np.ndarray = field(default_factory=lambda: np.ones(0))

    @classmethod
    def fit(cls, x: np.ndarray) -> "Standardizer":
        x = np.asarray(x, dtype=float)
        mean = x.mean(axis=0)
        std = x.std(axis=0)
        std = np.where(std > 0, std, 1.0)
        return cls(mean=mean, std=std)

    def transform(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.mean) / self.std

    def to_obj(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_obj(cls, obj: dict) -> "Standardizer":
        return cls(mean=np.asarray(obj["mean"], dtype=float),
                   std=np.asarray(obj["std"], dtype=float))


def grad_check(loss_fn, params: Params, rng: np.random.Generator,
               n_coords: int = 30, step: float = 1e-5):
    """Compare analytic gradients with central finite differences.

    ``loss_fn(params) -> (loss, grads)``. Returns the max relative error
    over ``n_coords`` randomly sampled parameter coordinates.
    """
    _, grads = loss_fn(params)
    flat = flatten_params(params)
    gflat = flatten_params(grads)
    worst = 0.0
    for idx in rng.choice(flat.size, size=min(n_coords, flat.size), replace=False):
        bumped = flat.copy()
        bumped[idx] += step
        up, _ = loss_fn(unflatten_params(bumped, params))
        bumped[idx] -= 2 * step
        down, _ = loss_fn(unflatten_params(bumped, params))
        fd = (up - down) / (2 * step)
        denom = max(abs(fd), abs(gflat[idx]), 1e-8)
        worst = max(worst, abs(fd - gflat[idx]) / denom)
    return worst
