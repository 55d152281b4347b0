"""Logistic regression and fully connected networks with manual backprop.

The logistic model trains a single sigmoid output against binary
cross-entropy. The networks compute two class scores through one or two
ReLU hidden layers and train against softmax cross-entropy. Both accept
dense or CSR-sparse feature matrices.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..errors import DivergenceError, ShapeError
from ..metrics import confusion, precision_recall_f1
from ..numerics import (
    OptimizerState,
    Params,
    bce_loss,
    glorot_uniform,
    optimizer_step,
    relu,
    rng,
    sigmoid,
    softmax_rows,
    softmax_xent,
)
from .base import TrainedModel, classify


@dataclass
class GradientModelConfig:
    architecture: str  # "logistic" or "mlp"
    input_dim: int
    hidden: tuple[int, ...] = ()
    learning_rate: float = 1e-5
    batch_size: int = 512
    epochs: int = 10
    seed: int = 0
    optimizer: str = "sgd"
    threshold: float = 0.5  # used for validation F1 during model selection

    def __post_init__(self):
        self.hidden = tuple(self.hidden)
        if self.architecture not in ("logistic", "mlp"):
            raise ValueError(f"unknown architecture {self.architecture!r}")
        if self.architecture == "logistic" and self.hidden:
            raise ValueError("logistic model takes no hidden layers")
        if self.architecture == "mlp" and not self.hidden:
            raise ValueError("mlp needs at least one hidden layer size")
        if any(h <= 0 for h in self.hidden):
            raise ValueError(f"hidden sizes must be positive, got {self.hidden}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.input_dim <= 0 or self.batch_size <= 0 or self.epochs < 0:
            raise ValueError("input_dim and batch_size must be positive, epochs >= 0")


def init_gradient_params(config: GradientModelConfig) -> Params:
    gen = rng(config.seed)
    params: Params = {}
    if config.architecture == "logistic":
        params["w"] = glorot_uniform(gen, (config.input_dim,), config.input_dim, 1)
        params["b"] = np.zeros(1, dtype=np.float64)
        return params
    dims = (config.input_dim, *config.hidden, 2)
    for i in range(len(dims) - 1):
        params[f"w{i}"] = glorot_uniform(gen, (dims[i], dims[i + 1]), dims[i], dims[i + 1])
        params[f"b{i}"] = np.zeros(dims[i + 1], dtype=np.float64)
    return params


def _check_features(X, config: GradientModelConfig):
    if X.shape[1] != config.input_dim:
        raise ShapeError(f"feature matrix has {X.shape[1]} columns, config says {config.input_dim}")


def logistic_loss_and_grads(params: Params, X, y: np.ndarray) -> tuple[float, Params]:
    z = X @ params["w"] + params["b"][0]
    p = sigmoid(z)
    loss, _ = bce_loss(p, y)
    dz = (p - y) / y.size
    gw = X.T @ dz
    if sp.issparse(gw):
        gw = np.asarray(gw.todense()).ravel()
    return loss, {"w": np.asarray(gw, dtype=np.float64), "b": np.array([dz.sum()])}


def mlp_loss_and_grads(params: Params, X, y: np.ndarray, n_layers: int) -> tuple[float, Params]:
    pre = []
    act = [X]
    h = X
    for i in range(n_layers):
        z = h @ params[f"w{i}"] + params[f"b{i}"]
        if i < n_layers - 1:
            h = relu(z)
        pre.append(z)
        act.append(h)
    scores = pre[-1]
    loss, dscores = softmax_xent(scores, y)
    grads: Params = {}
    delta = dscores
    for i in range(n_layers - 1, -1, -1):
        gw = act[i].T @ delta
        if sp.issparse(gw):
            gw = np.asarray(gw.todense())
        grads[f"w{i}"] = np.asarray(gw, dtype=np.float64)
        grads[f"b{i}"] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ params[f"w{i}"].T) * (pre[i - 1] > 0)
    return loss, grads


def _loss_and_grads(config: GradientModelConfig, params: Params, X, y: np.ndarray) -> tuple[float, Params]:
    if config.architecture == "logistic":
        return logistic_loss_and_grads(params, X, y)
    return mlp_loss_and_grads(params, X, y, n_layers=len(config.hidden) + 1)


def _forward_proba(config: GradientModelConfig, params: Params, X) -> np.ndarray:
    if config.architecture == "logistic":
        return sigmoid(X @ params["w"] + params["b"][0])
    h = X
    n_layers = len(config.hidden) + 1
    for i in range(n_layers):
        z = h @ params[f"w{i}"] + params[f"b{i}"]
        h = relu(z) if i < n_layers - 1 else z
    return softmax_rows(h)[:, 1]


def fit_gradient_model(config: GradientModelConfig, X, y, validation=None) -> TrainedModel:
    """Mini-batch training with a seeded shuffle each epoch.

    ``validation`` is an optional (X_val, y_val) pair; when present, the
    per-epoch validation F1 picks the retained parameters (ties go to the
    earliest epoch).
    """
    _check_features(X, config)
    y = np.asarray(y, dtype=np.float64)
    if X.shape[0] != y.size:
        raise ShapeError(f"{X.shape[0]} feature rows but {y.size} labels")
    gen = rng(config.seed)
    params = init_gradient_params(config)
    opt = OptimizerState(kind=config.optimizer, learning_rate=config.learning_rate)
    history: list[dict] = []
    best: tuple[float, int, Params] | None = None
    n = X.shape[0]
    for epoch in range(config.epochs):
        order = gen.permutation(n)
        total_loss = 0.0
        for batch_index, start in enumerate(range(0, n, config.batch_size)):
            idx = order[start : start + config.batch_size]
            loss, grads = _loss_and_grads(config, params, X[idx], y[idx])
            if not np.isfinite(loss):
                raise DivergenceError(epoch, batch_index)
            optimizer_step(opt, params, grads)
            total_loss += loss * idx.size
        entry = {"epoch": epoch, "loss": total_loss / n}
        if validation is not None:
            p_val = _forward_proba(config, params, validation[0])
            counts = confusion(np.asarray(validation[1], dtype=np.int64), classify(p_val, config.threshold))
            entry["val_f1"] = precision_recall_f1(counts)[2]
            if best is None or entry["val_f1"] > best[0]:
                best = (entry["val_f1"], epoch, copy.deepcopy(params))
        history.append(entry)
    selected = None
    if best is not None:
        selected = best[1]
        params = best[2]
    elif history:
        selected = len(history) - 1
    return TrainedModel(
        kind=config.architecture,
        params=params,
        config=config,
        history=history,
        selected_epoch=selected,
    )


def gradient_predict_proba(model: TrainedModel, X) -> np.ndarray:
    _check_features(X, model.config)
    return _forward_proba(model.config, model.params, X)
