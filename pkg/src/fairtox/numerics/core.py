"""Dense numeric primitives shared by every trainable model.

All randomness flows through :func:`rng`, which pins numpy's PCG64 bit
generator so shuffles and initializations reproduce bit-for-bit across runs
for a given seed. Matrix products delegate to BLAS through numpy; results
are deterministic for a fixed build and thread count. Gradient checks and
unit tests run in 64-bit floats; training may opt into 32-bit.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from typing import BinaryIO, Callable

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from ..errors import FairtoxError, ShapeError

Params = dict[str, np.ndarray]

LOSS_CLAMP_EPS = 1e-12


def rng(seed: int) -> np.random.Generator:
    """The repo-wide seeded generator (PCG64)."""
    return np.random.Generator(np.random.PCG64(seed))


def glorot_uniform(gen: np.random.Generator, shape: tuple[int, ...], fan_in: int, fan_out: int, dtype=np.float64) -> np.ndarray:
    """Uniform init on +-sqrt(6 / (fan_in + fan_out))."""
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return gen.uniform(-limit, limit, size=shape).astype(dtype)


def affine(x, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """x @ w + b for dense or CSR-sparse x."""
    if x.shape[1] != w.shape[0]:
        raise ShapeError(f"affine inner dimensions differ: x is {x.shape}, w is {w.shape}")
    if b.shape != (w.shape[1],):
        raise ShapeError(f"bias shape {b.shape} does not match weight columns {w.shape[1]}")
    out = x @ w
    if sp.issparse(out):
        out = np.asarray(out.todense())
    return out + b


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def sigmoid(x: np.ndarray) -> np.ndarray:
    return expit(x)


def tanh(x: np.ndarray) -> np.ndarray:
    return np.tanh(x)


def softmax_rows(x: np.ndarray) -> np.ndarray:
    """Row-wise softmax, stabilized by row-max subtraction."""
    shifted = x - x.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def bce_loss(p: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean binary cross-entropy and its gradient with respect to p.

    Probabilities are clamped to [eps, 1 - eps] with eps = 1e-12 before the
    logs; the returned gradient is of the clamped objective.
    """
    p = np.asarray(p, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if p.shape != y.shape:
        raise ShapeError(f"probability shape {p.shape} != label shape {y.shape}")
    n = p.size
    pc = np.clip(p, LOSS_CLAMP_EPS, 1.0 - LOSS_CLAMP_EPS)
    loss = -float(np.mean(y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc)))
    grad = (pc - y) / (pc * (1.0 - pc) * n)
    return loss, grad


def softmax_xent(scores: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean softmax cross-entropy over class scores; returns dL/dscores."""
    if scores.ndim != 2:
        raise ShapeError(f"scores must be 2-D, got shape {scores.shape}")
    n = scores.shape[0]
    if y.shape != (n,):
        raise ShapeError(f"labels shape {y.shape} does not match {n} score rows")
    p = softmax_rows(scores)
    picked = p[np.arange(n), y.astype(np.int64)]
    loss = -float(np.mean(np.log(np.clip(picked, LOSS_CLAMP_EPS, None))))
    grad = p.copy()
    grad[np.arange(n), y.astype(np.int64)] -= 1.0
    return loss, grad / n


@dataclass
class OptimizerState:
    """SGD or Adam state; moment buffers are allocated lazily per parameter."""

    kind: str
    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    m: Params = field(default_factory=dict)
    v: Params = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer kind {self.kind!r}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


def optimizer_step(state: OptimizerState, params: Params, grads: Params) -> tuple[Params, OptimizerState]:
    """Apply one update in place; returns the same params/state for chaining."""
    for name, p in params.items():
        if name not in grads:
            raise ShapeError(f"missing gradient for parameter {name!r}")
        if grads[name].shape != p.shape:
            raise ShapeError(f"gradient shape {grads[name].shape} != parameter shape {p.shape} for {name!r}")
    state.step_count += 1
    lr = state.learning_rate
    if state.kind == "sgd":
        for name, p in params.items():
            p -= lr * grads[name]
        return params, state
    t = state.step_count
    for name, p in params.items():
        g = grads[name]
        if name not in state.m:
            state.m[name] = np.zeros_like(p)
            state.v[name] = np.zeros_like(p)
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        m_hat = m / (1.0 - state.beta1**t)
        v_hat = v / (1.0 - state.beta2**t)
        p -= lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return params, state


def grad_check(f: Callable[[Params], tuple[float, Params]], params: Params, h: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``f`` maps parameters to (scalar loss, analytic gradients). The relative
    error at each coordinate is |analytic - numeric| / max(1e-8,
    |analytic| + |numeric|).
    """
    if h <= 0:
        raise ValueError("h must be positive")
    loss0, grads = f(params)
    if not np.isfinite(loss0):
        raise FairtoxError(f"non-finite loss {loss0} in gradient check")
    worst = 0.0
    for name, arr in params.items():
        flat = arr.reshape(-1)
        gflat = grads[name].reshape(-1)
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + h
            lp = f(params)[0]
            flat[idx] = orig - h
            lm = f(params)[0]
            flat[idx] = orig
            if not (np.isfinite(lp) and np.isfinite(lm)):
                raise FairtoxError("non-finite loss during finite differencing")
            numeric = (lp - lm) / (2.0 * h)
            analytic = float(gflat[idx])
            err = abs(analytic - numeric) / max(1e-8, abs(analytic) + abs(numeric))
            if err > worst:
                worst = err
    return worst


# Parameter blobs: magic, version, entry count, then per entry the name,
# the shape header, and row-major float64 data (little-endian).
_PARAMS_MAGIC = b"FTXP"
_PARAMS_VERSION = 1


def write_params(fh: BinaryIO, params: Params) -> None:
    fh.write(_PARAMS_MAGIC)
    fh.write(struct.pack("<II", _PARAMS_VERSION, len(params)))
    for name in sorted(params):
        arr = np.ascontiguousarray(params[name], dtype="<f8")
        encoded = name.encode("utf-8")
        fh.write(struct.pack("<H", len(encoded)))
        fh.write(encoded)
        fh.write(struct.pack("<B", arr.ndim))
        fh.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        fh.write(arr.tobytes(order="C"))


def read_params(fh: BinaryIO) -> Params:
    magic = fh.read(4)
    if magic != _PARAMS_MAGIC:
        raise FairtoxError(f"bad parameter blob magic {magic!r}")
    version, count = struct.unpack("<II", fh.read(8))
    if version != _PARAMS_VERSION:
        raise FairtoxError(f"unsupported parameter blob version {version}")
    params: Params = {}
    for _ in range(count):
        (name_len,) = struct.unpack("<H", fh.read(2))
        name = fh.read(name_len).decode("utf-8")
        (ndim,) = struct.unpack("<B", fh.read(1))
        shape = struct.unpack(f"<{ndim}Q", fh.read(8 * ndim))
        n_items = int(np.prod(shape)) if ndim else 1
        data = np.frombuffer(fh.read(8 * n_items), dtype="<f8").reshape(shape)
        params[name] = data.astype(np.float64)
    return params
