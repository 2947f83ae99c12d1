"""Dense action-value network in plain numpy with hand-written backprop."""
from __future__ import annotations

import numpy as np


def relu(x):
    return np.maximum(x, 0.0)


class QNetwork:
    """Affine layers with ReLU between them and a linear output layer.

    ``params`` holds ``[W0, b0, W1, b1, ...]`` with ``W`` shaped (fan_in, fan_out).
    ``target`` is a frozen copy that only changes through :meth:`sync_target`.
    """

    def __init__(self, sizes, rng: np.random.Generator | None = None, params=None):
        self.sizes = tuple(int(s) for s in sizes)
        if len(self.sizes) < 2:
            raise ValueError("need at least input and output sizes")
        if params is None:
            rng = np.random.default_rng(0) if rng is None else rng
            params = []
            for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
                params.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), (fan_in, fan_out)))
                params.append(np.zeros(fan_out))
        self.params = [np.array(p, dtype=float) for p in params]
        self._check(self.params)
        self.target = [p.copy() for p in self.params]

    def _check(self, params):
        if len(params) != 2 * (len(self.sizes) - 1):
            raise ValueError("parameter count does not match layer sizes")
        for k, (fi, fo) in enumerate(zip(self.sizes[:-1], self.sizes[1:])):
            if params[2 * k].shape != (fi, fo) or params[2 * k + 1].shape != (fo,):
                raise ValueError(f"layer {k} parameter shape mismatch")

    @property
    def n_inputs(self):
        return self.sizes[0]

    @property
    def n_outputs(self):
        return self.sizes[-1]

    def sync_target(self) -> None:
        self.target = [p.copy() for p in self.params]

    def forward(self, x, target: bool = False) -> np.ndarray:
        out, _ = self.forward_cached(x, self.target if target else self.params)
        return out

    def forward_cached(self, x, params=None):
        params = self.params if params is None else params
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        x = np.atleast_2d(x)
        if x.shape[1] != self.n_inputs:
            raise ValueError(f"state width {x.shape[1]} != network input {self.n_inputs}")
        acts = [x]
        pre = []
        h = x
        n_layers = len(params) // 2
        for k in range(n_layers):
            z = h @ params[2 * k] + params[2 * k + 1]
            pre.append(z)
            h = relu(z) if k < n_layers - 1 else z
            acts.append(h)
        out = h[0] if single else h
        return out, (acts, pre)

    def backward(self, cache, dout) -> list[np.ndarray]:
        """Gradients of sum(dout * output) with respect to ``params``."""
        acts, pre = cache
        n_layers = len(pre)
        grads = [None] * (2 * n_layers)
        delta = np.atleast_2d(dout)
        for k in reversed(range(n_layers)):
            grads[2 * k] = acts[k].T @ delta
            grads[2 * k + 1] = delta.sum(axis=0)
            if k:
                delta = (delta @ self.params[2 * k].T) * (pre[k - 1] > 0)
        return grads

    def flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.params])

    def set_flat(self, v) -> None:
        i = 0
        for p in self.params:
            p[...] = np.reshape(v[i:i + p.size], p.shape)
            i += p.size


class Sgd:
    def __init__(self, lr: float):
        self.lr = lr

    def step(self, params, grads):
        for p, g in zip(params, grads):
            p -= self.lr * g

    def state_dict(self):
        return {}

    def load_state_dict(self, d):
        pass


class Adam:
    def __init__(self, lr: float, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = None
        self.v = None
        self.t = 0

    def step(self, params, grads):
        if self.m is None:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1, c2 = 1 - b1**self.t, 1 - b2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)

    def state_dict(self):
        if self.m is None:
            return {"t": self.t}
        d = {"t": self.t}
        for i, (m, v) in enumerate(zip(self.m, self.v)):
            d[f"m{i}"], d[f"v{i}"] = m, v
        return d

    def load_state_dict(self, d):
        self.t = int(d["t"])
        n = sum(1 for k in d if k.startswith("m"))
        if n:
            self.m = [np.array(d[f"m{i}"]) for i in range(n)]
            self.v = [np.array(d[f"v{i}"]) for i in range(n)]


def make_optimizer(name: str, lr: float):
    if name == "sgd":
        return Sgd(lr)
    if name == "adam":
        return Adam(lr)
    raise ValueError(f"unknown optimizer {name!r}")
