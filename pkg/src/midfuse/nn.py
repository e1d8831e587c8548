"""Feed-forward binary classifiers in plain numpy.

Two architectures share the same building block, a dense layer followed by
ReLU and (inverted) dropout:

* ``early``: input -> hidden stack -> linear -> sigmoid.
* ``mid``: one hidden stack per view, the stack outputs are concatenated and
  passed through one shared hidden layer of the same width, then
  linear -> sigmoid. All parameters are trained jointly.

Gradients are derived by hand; training uses binary cross-entropy and Adam.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, List, Sequence

import numpy as np
from numba import njit
from scipy.special import expit

from .errors import DimensionMismatch

EPOCHS = (25, 50)
BATCH_SIZES = (16, 32)
DROPOUT_RATES = (0.0, 0.5, 0.75)
LAYERS = (1, 2)
WIDTHS = (16, 32, 64, 256, 512)
LEARNING_RATE = 0.001
PROB_CLAMP = 1e-12


@dataclass(frozen=True)
class MLPConfig:
    architecture: str
    view_dims: tuple
    layers_per_stack: int = 1
    width: int = 16
    dropout_rate: float = 0.0
    epochs: int = 25
    batch_size: int = 16
    learning_rate: float = LEARNING_RATE

    def __post_init__(self):
        object.__setattr__(self, "view_dims", tuple(int(d) for d in self.view_dims))
        if self.architecture not in ("early", "mid"):
            raise ValueError(f"unknown architecture {self.architecture!r}")
        if not self.view_dims or min(self.view_dims) < 1:
            raise ValueError("view dimensions must be positive")
        if self.architecture == "early" and len(self.view_dims) != 1:
            raise ValueError("early fusion takes a single input block")
        if self.layers_per_stack not in LAYERS:
            raise ValueError(f"layers_per_stack must be one of {LAYERS}")
        if self.width not in WIDTHS:
            raise ValueError(f"width must be one of {WIDTHS}")
        if float(self.dropout_rate) not in DROPOUT_RATES:
            raise ValueError(f"dropout_rate must be one of {DROPOUT_RATES}")
        if self.epochs not in EPOCHS:
            raise ValueError(f"epochs must be one of {EPOCHS}")
        if self.batch_size not in BATCH_SIZES:
            raise ValueError(f"batch_size must be one of {BATCH_SIZES}")
        if self.learning_rate != LEARNING_RATE:
            raise ValueError(f"learning_rate is fixed at {LEARNING_RATE}")

    @property
    def n_views(self) -> int:
        return len(self.view_dims)

    def layer_shapes(self) -> Dict[str, tuple]:
        """Ordered ``name -> (fan_in, fan_out)`` for every dense layer."""
        w = self.width
        shapes = {}
        if self.architecture == "early":
            fan_in = self.view_dims[0]
            for l in range(self.layers_per_stack):
                shapes[f"hidden{l}"] = (fan_in, w)
                fan_in = w
        else:
            for v, dv in enumerate(self.view_dims):
                fan_in = dv
                for l in range(self.layers_per_stack):
                    shapes[f"view{v}.{l}"] = (fan_in, w)
                    fan_in = w
            shapes["shared"] = (w * self.n_views, w)
            fan_in = w
        shapes["out"] = (fan_in, 1)
        return shapes


@dataclass
class NNModel:
    config: MLPConfig
    params: Dict[str, np.ndarray]
    loss_trace: List[float] = field(default_factory=list)

    def n_parameters(self) -> int:
        return sum(p.size for p in self.params.values())

    def to_dict(self) -> dict:
        cfg = {k: getattr(self.config, k) for k in self.config.__dataclass_fields__}
        cfg["view_dims"] = list(cfg["view_dims"])
        return {
            "config": cfg,
            "manifest": {k: list(v.shape) for k, v in self.params.items()},
            "params": {k: v.ravel().tolist() for k, v in self.params.items()},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NNModel":
        config = MLPConfig(**data["config"])
        params = {k: np.asarray(data["params"][k], dtype=float).reshape(shape)
                  for k, shape in data["manifest"].items()}
        return cls(config, params)


def init_model(config: MLPConfig, seed: int, dtype=np.float64) -> NNModel:
    """He-normal weights, zero biases."""
    rng = np.random.default_rng(seed)
    params = {}
    for name, (fan_in, fan_out) in config.layer_shapes().items():
        params[f"{name}.W"] = (rng.standard_normal((fan_in, fan_out)) * np.sqrt(2.0 / fan_in)).astype(dtype)
        params[f"{name}.b"] = np.zeros(fan_out, dtype=dtype)
    return NNModel(config, params)


def _as_inputs(config, inputs) -> List[np.ndarray]:
    if isinstance(inputs, np.ndarray) or not isinstance(inputs, (list, tuple)):
        inputs = [inputs]
    inputs = [np.asarray(X) for X in inputs]
    if len(inputs) != config.n_views:
        raise DimensionMismatch(f"model expects {config.n_views} input blocks, got {len(inputs)}")
    for X, dv in zip(inputs, config.view_dims):
        if X.ndim != 2 or X.shape[1] != dv:
            raise DimensionMismatch(f"expected {dv} features, got shape {X.shape}")
    return inputs


def _dense_relu(x, params, name, rate, rng, tape):
    z = x @ params[name + ".W"] + params[name + ".b"]
    h = np.maximum(z, 0.0)
    mask = None
    if rng is not None and rate > 0.0:
        keep = rng.random(h.shape) >= rate
        mask = keep.astype(h.dtype) / (1.0 - rate)
        h = h * mask
    tape.append((name, x, z, mask))
    return h


def _forward(model: NNModel, inputs, rng):
    """Return sigmoid outputs, logits and the tape needed for backprop.

    ``rng`` is None in inference mode (no dropout).
    """
    cfg, params = model.config, model.params
    rate = float(cfg.dropout_rate)
    tape = []
    if cfg.architecture == "early":
        h = inputs[0]
        for l in range(cfg.layers_per_stack):
            h = _dense_relu(h, params, f"hidden{l}", rate, rng, tape)
    else:
        outs = []
        for v, X in enumerate(inputs):
            h = X
            for l in range(cfg.layers_per_stack):
                h = _dense_relu(h, params, f"view{v}.{l}", rate, rng, tape)
            outs.append(h)
        h = _dense_relu(np.concatenate(outs, axis=1), params, "shared", rate, rng, tape)
    logits = (h @ params["out.W"] + params["out.b"])[:, 0]
    probs = expit(logits)
    return probs, h, tape


def forward(model: NNModel, inputs, train_mode: bool = False, dropout_seed: int = 0) -> np.ndarray:
    """Class-1 probabilities. Dropout is only active with ``train_mode``."""
    inputs = _as_inputs(model.config, inputs)
    rng = np.random.default_rng(dropout_seed) if train_mode else None
    return _forward(model, inputs, rng)[0]


def predict_proba(model: NNModel, inputs) -> np.ndarray:
    return forward(model, inputs, train_mode=False)


def _bce(p, y):
    # float64 so the clamp bounds are representable for float32 models
    pc = np.clip(np.asarray(p, dtype=np.float64), PROB_CLAMP, 1.0 - PROB_CLAMP)
    y = np.asarray(y, dtype=np.float64)
    return float(-np.mean(y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc)))


def _backward(model, probs, h_last, tape, y, out=None):
    """Gradients of the mean BCE; written into ``out`` buffers when given."""
    cfg, params = model.config, model.params
    B = y.size
    p64 = probs.astype(np.float64)
    unclamped = (p64 > PROB_CLAMP) & (p64 < 1.0 - PROB_CLAMP)
    g = ((probs - y) * unclamped / B)[:, None].astype(probs.dtype)
    grads = {} if out is None else out

    def put(name, x, dz):
        if out is None:
            grads[name + ".W"] = x.T @ dz
            grads[name + ".b"] = dz.sum(axis=0)
        else:
            np.matmul(x.T, dz, out=out[name + ".W"])
            np.sum(dz, axis=0, out=out[name + ".b"])

    put("out", h_last, g)
    dh = g @ params["out.W"].T

    def back(dh, entry):
        name, x, z, mask = entry
        if mask is not None:
            dh = dh * mask
        dz = dh * (z > 0)
        put(name, x, dz)
        return dz @ params[name + ".W"].T

    entries = list(tape)
    if cfg.architecture == "early":
        for entry in reversed(entries):
            dh = back(dh, entry)
    else:
        dcat = back(dh, entries[-1])
        L = cfg.layers_per_stack
        w = cfg.width
        for v in range(cfg.n_views):
            dv = dcat[:, v * w:(v + 1) * w]
            for entry in reversed(entries[v * L:(v + 1) * L]):
                dv = back(dv, entry)
    return {k: grads[k] for k in params}


def loss_and_gradients(model: NNModel, inputs, y, dropout_seed=None):
    """Binary cross-entropy on a batch and its exact parameter gradients.

    ``dropout_seed=None`` disables dropout; an integer seeds the mask, an
    ``np.random.Generator`` is used as is.
    """
    inputs = _as_inputs(model.config, inputs)
    y = np.asarray(y, dtype=inputs[0].dtype)
    if y.size == 0:
        raise ValueError("empty batch")
    if dropout_seed is None:
        rng = None
    elif isinstance(dropout_seed, np.random.Generator):
        rng = dropout_seed
    else:
        rng = np.random.default_rng(dropout_seed)
    probs, h_last, tape = _forward(model, inputs, rng)
    return _bce(probs, y), _backward(model, probs, h_last, tape, y)


@dataclass
class AdamState:
    m: Dict[str, np.ndarray]
    v: Dict[str, np.ndarray]
    t: int = 0
    learning_rate: float = LEARNING_RATE
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros_like(cls, params, learning_rate=LEARNING_RATE) -> "AdamState":
        return cls({k: np.zeros_like(p) for k, p in params.items()},
                   {k: np.zeros_like(p) for k, p in params.items()}, 0, learning_rate)


def adam_step(params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray], state: AdamState):
    """One bias-corrected Adam update; returns new ``(params, state)``."""
    t = state.t + 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** t
    c2 = 1.0 - b2 ** t
    new_params, m_new, v_new = {}, {}, {}
    for k, p in params.items():
        g = grads[k]
        m = b1 * state.m[k] + (1.0 - b1) * g
        v = b2 * state.v[k] + (1.0 - b2) * g * g
        new_params[k] = p - state.learning_rate * (m / c1) / (np.sqrt(v / c2) + state.eps)
        m_new[k], v_new[k] = m, v
    return new_params, replace(state, m=m_new, v=v_new, t=t)


@njit(cache=True)
def _adam_kernel(p, g, m, v, step, b1, b2, inv_sqrt_c2, eps):
    for i in range(p.size):
        gi = g[i]
        mi = b1 * m[i] + (1.0 - b1) * gi
        vi = b2 * v[i] + (1.0 - b2) * gi * gi
        m[i] = mi
        v[i] = vi
        p[i] -= step * mi / (np.sqrt(vi) * inv_sqrt_c2 + eps)


def _flat_buffers(params):
    """Copy ``params`` into one flat array; return it and per-name views."""
    flat = np.concatenate([p.ravel() for p in params.values()])
    views, offset = {}, 0
    for k, p in params.items():
        views[k] = flat[offset:offset + p.size].reshape(p.shape)
        offset += p.size
    return flat, views


def train(config: MLPConfig, data, y, seed: int, dtype=np.float64) -> NNModel:
    """Mini-batch Adam on binary cross-entropy.

    ``data`` is one matrix for the early architecture or a list of view
    matrices for the mid architecture; ``y`` holds 0/1 labels. Batches are
    reshuffled every epoch from a generator seeded by ``seed``.
    """
    inputs = [np.ascontiguousarray(X, dtype=dtype) for X in _as_inputs(config, data)]
    y = np.asarray(y, dtype=dtype)
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0/1")
    n = y.size
    model = init_model(config, seed, dtype=dtype)
    # one contiguous buffer per quantity so Adam is a single fused pass
    flat, model.params = _flat_buffers(model.params)
    gflat, grads = _flat_buffers(model.params)
    m = np.zeros_like(flat)
    v = np.zeros_like(flat)
    b1, b2, eps, lr = 0.9, 0.999, 1e-8, config.learning_rate
    t = 0
    rng = np.random.default_rng((seed, 1))
    trace = []
    for _ in range(config.epochs):
        perm = rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            idx = perm[start:start + config.batch_size]
            batch = [X[idx] for X in inputs]
            yb = y[idx]
            probs, h_last, tape = _forward(model, batch, rng)
            total += _bce(probs, yb) * idx.size
            _backward(model, probs, h_last, tape, yb, out=grads)
            t += 1
            _adam_kernel(flat, gflat, m, v, lr / (1.0 - b1 ** t), b1, b2, 1.0 / np.sqrt(1.0 - b2 ** t), eps)
        trace.append(total / n)
    model.loss_trace = trace
    return model


def predict(model: NNModel, inputs, threshold: float = 0.5) -> np.ndarray:
    return (predict_proba(model, inputs) >= threshold).astype(int)


def concat_views(views: Sequence[np.ndarray]) -> np.ndarray:
    return np.concatenate([np.asarray(X) for X in views], axis=1)
