"""Two-layer bidirectional LSTM classifier with manual backpropagation.

Pipeline per batch of embedded sequences (batch x max_len x embed_dim):

    spatial dropout on embedding channels (training only)
    -> bidirectional LSTM layer 1 -> concat directions
    -> bidirectional LSTM layer 2 -> concat directions
    -> per-feature max pool + mean pool over valid timesteps, concatenated
    -> affine -> ReLU -> affine -> sigmoid

Padding rows (timestep >= true length) are zeroed on entry and excluded
from both pools, so the output never depends on padding content. The
backward direction runs the same cell over the time-reversed sequence.

The per-timestep gate math runs through :mod:`fairtox.numerics.kernels`
(compiled extension or numpy fallback); everything else is batched numpy.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np

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
)
from ..numerics.kernels import lstm_pointwise_backward, lstm_pointwise_forward
from .base import TrainedModel, classify


@dataclass
class BiLstmConfig:
    embed_dim: int = 25
    max_len: int = 200
    hidden_units: int = 128  # per direction
    layers: int = 2
    spatial_dropout_rate: float = 0.3
    batch_size: int = 512
    learning_rate: float = 1e-5
    epochs: int = 10
    head_hidden: int = 128
    seed: int = 0
    optimizer: str = "adam"
    dtype: str = "float32"  # training precision; gradient checks use float64

    def __post_init__(self):
        for name in ("embed_dim", "max_len", "hidden_units", "layers", "batch_size", "head_hidden"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.spatial_dropout_rate < 1.0:
            raise ValueError("spatial_dropout_rate must lie in [0, 1)")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.dtype not in ("float32", "float64"):
            raise ValueError(f"dtype must be float32 or float64, got {self.dtype!r}")

    @property
    def np_dtype(self):
        return np.float32 if self.dtype == "float32" else np.float64

    def layer_input_dims(self) -> list[int]:
        return [self.embed_dim] + [2 * self.hidden_units] * (self.layers - 1)


_DIRECTIONS = ("fw", "bw")


def init_bilstm_params(config: BiLstmConfig) -> Params:
    """Glorot-uniform weights, zero biases with the forget-gate block at 1."""
    gen = rng(config.seed)
    dtype = config.np_dtype
    hidden = config.hidden_units
    params: Params = {}
    for layer, in_dim in enumerate(config.layer_input_dims()):
        for direction in _DIRECTIONS:
            key = f"l{layer}{direction}"
            params[f"{key}_wx"] = glorot_uniform(gen, (in_dim, 4 * hidden), in_dim, 4 * hidden, dtype)
            params[f"{key}_wh"] = glorot_uniform(gen, (hidden, 4 * hidden), hidden, 4 * hidden, dtype)
            bias = np.zeros(4 * hidden, dtype=dtype)
            bias[hidden : 2 * hidden] = 1.0  # forget gate open at init
            params[f"{key}_b"] = bias
    pooled_dim = 4 * hidden  # max pool and mean pool over 2*hidden features each
    params["head_w1"] = glorot_uniform(gen, (pooled_dim, config.head_hidden), pooled_dim, config.head_hidden, dtype)
    params["head_b1"] = np.zeros(config.head_hidden, dtype=dtype)
    params["head_w2"] = glorot_uniform(gen, (config.head_hidden, 1), config.head_hidden, 1, dtype)
    params["head_b2"] = np.zeros(1, dtype=dtype)
    return params


def _dropout_mask(shape, rate: float, dropout_rng: np.random.Generator, dtype) -> np.ndarray:
    keep = 1.0 - rate
    mask = (dropout_rng.random(shape) < keep).astype(dtype)
    return mask / np.asarray(keep, dtype=dtype)


def _run_direction(x, params: Params, key: str, hidden: int, reverse: bool):
    """One direction of one layer; returns the full hidden sequence + cache."""
    batch, steps, _ = x.shape
    seq = x[:, ::-1, :] if reverse else x
    dtype = x.dtype
    # Input contribution for all timesteps in one matmul.
    zx = np.ascontiguousarray(seq.reshape(batch * steps, -1) @ params[f"{key}_wx"] + params[f"{key}_b"]).reshape(
        batch, steps, 4 * hidden
    )
    wh = params[f"{key}_wh"]
    h = np.zeros((batch, hidden), dtype=dtype)
    c = np.zeros((batch, hidden), dtype=dtype)
    a_all = np.empty((batch, steps, 4 * hidden), dtype=dtype)
    c_all = np.empty((batch, steps, hidden), dtype=dtype)
    h_all = np.empty((batch, steps, hidden), dtype=dtype)
    for t in range(steps):
        z = zx[:, t, :] + h @ wh
        a, c_new, h_new = lstm_pointwise_forward(np.ascontiguousarray(z), c)
        a_all[:, t] = a
        c_all[:, t] = c_new
        h_all[:, t] = h_new
        h, c = h_new, c_new
    out = h_all[:, ::-1, :] if reverse else h_all
    cache = {"seq": seq, "a": a_all, "c": c_all, "h": h_all, "key": key, "reverse": reverse}
    return out, cache


def _backprop_direction(d_out, cache, params: Params, grads: Params, hidden: int, need_dx: bool):
    """BPTT through one direction; accumulates parameter grads, returns dx."""
    key = cache["key"]
    seq, a_all, c_all, h_all = cache["seq"], cache["a"], cache["c"], cache["h"]
    batch, steps, _ = seq.shape
    dtype = seq.dtype
    d_h_seq = d_out[:, ::-1, :] if cache["reverse"] else d_out
    wh = params[f"{key}_wh"]
    dz_all = np.empty((batch, steps, 4 * hidden), dtype=dtype)
    dh_rec = np.zeros((batch, hidden), dtype=dtype)
    dc = np.zeros((batch, hidden), dtype=dtype)
    zeros = np.zeros((batch, hidden), dtype=dtype)
    for t in range(steps - 1, -1, -1):
        dh_total = np.ascontiguousarray(d_h_seq[:, t, :] + dh_rec)
        c_prev = c_all[:, t - 1] if t > 0 else zeros
        dz, dc = lstm_pointwise_backward(dh_total, dc, np.ascontiguousarray(a_all[:, t]), np.ascontiguousarray(c_prev), np.ascontiguousarray(c_all[:, t]))
        dz_all[:, t] = dz
        dh_rec = dz @ wh.T
    flat_dz = dz_all.reshape(batch * steps, 4 * hidden)
    grads[f"{key}_wx"] = seq.reshape(batch * steps, -1).T @ flat_dz
    h_prev = np.concatenate([np.zeros((batch, 1, hidden), dtype=dtype), h_all[:, :-1]], axis=1)
    grads[f"{key}_wh"] = h_prev.reshape(batch * steps, hidden).T @ flat_dz
    grads[f"{key}_b"] = flat_dz.sum(axis=0)
    if not need_dx:
        return None
    dseq = (flat_dz @ params[f"{key}_wx"].T).reshape(batch, steps, -1)
    return dseq[:, ::-1, :] if cache["reverse"] else dseq


def _forward(config: BiLstmConfig, params: Params, x, lengths, train_mode: bool, dropout_rng):
    batch, steps, embed = x.shape
    if embed != config.embed_dim:
        raise ShapeError(f"embedding dim {embed} != config embed_dim {config.embed_dim}")
    if steps != config.max_len:
        raise ShapeError(f"sequence length {steps} != config max_len {config.max_len}")
    lengths = np.asarray(lengths, dtype=np.int64)
    if lengths.shape != (batch,):
        raise ShapeError(f"lengths shape {lengths.shape} does not match batch {batch}")
    dtype = params["head_w2"].dtype
    hidden = config.hidden_units
    valid = (np.arange(steps)[None, :] < lengths[:, None]).astype(dtype)  # (B, T)
    x = np.asarray(x, dtype=dtype) * valid[:, :, None]
    channel_mask = None
    if train_mode and config.spatial_dropout_rate > 0.0:
        if dropout_rng is None:
            raise ValueError("training-mode forward needs a dropout generator")
        channel_mask = _dropout_mask((batch, 1, embed), config.spatial_dropout_rate, dropout_rng, dtype)
        x = x * channel_mask

    layer_caches = []
    inputs = x
    for layer in range(config.layers):
        outs = []
        caches = []
        for direction in _DIRECTIONS:
            out, cache = _run_direction(inputs, params, f"l{layer}{direction}", hidden, direction == "bw")
            outs.append(out)
            caches.append(cache)
        layer_out = np.concatenate(outs, axis=2)  # (B, T, 2H)
        layer_caches.append({"caches": caches, "input": inputs})
        inputs = layer_out

    feats = inputs  # (B, T, 2H)
    # Max pool over valid timesteps (padding forced to -inf); empty rows pool to 0.
    neg = np.where(valid[:, :, None] > 0, feats, np.array(-np.inf, dtype=dtype))
    argmax_t = neg.argmax(axis=1)  # (B, 2H)
    nonempty = (lengths > 0).astype(dtype)[:, None]
    max_pool = np.take_along_axis(feats, argmax_t[:, None, :], axis=1)[:, 0, :] * nonempty
    denom = np.maximum(lengths, 1).astype(dtype)[:, None]
    mean_pool = (feats * valid[:, :, None]).sum(axis=1) / denom
    pooled = np.concatenate([max_pool, mean_pool], axis=1)  # (B, 4H)

    z1 = pooled @ params["head_w1"] + params["head_b1"]
    h1 = relu(z1)
    logits = (h1 @ params["head_w2"] + params["head_b2"]).ravel()
    probs = sigmoid(logits.astype(np.float64))
    cache = {
        "layers": layer_caches,
        "feats": feats,
        "valid": valid,
        "argmax_t": argmax_t,
        "nonempty": nonempty,
        "denom": denom,
        "pooled": pooled,
        "z1": z1,
        "h1": h1,
        "channel_mask": channel_mask,
        "lengths": lengths,
    }
    return probs, cache


def _backward(config: BiLstmConfig, params: Params, cache, dlogits) -> Params:
    dtype = params["head_w2"].dtype
    hidden = config.hidden_units
    grads: Params = {}
    dlogits = np.asarray(dlogits, dtype=dtype)[:, None]  # (B, 1)
    grads["head_w2"] = cache["h1"].T @ dlogits
    grads["head_b2"] = dlogits.sum(axis=0)
    dh1 = (dlogits @ params["head_w2"].T) * (cache["z1"] > 0)
    grads["head_w1"] = cache["pooled"].T @ dh1
    grads["head_b1"] = dh1.sum(axis=0)
    dpooled = dh1 @ params["head_w1"].T  # (B, 4H)

    feats = cache["feats"]
    batch, steps, width = feats.shape
    dmax = dpooled[:, :width] * cache["nonempty"]
    dmean = dpooled[:, width:]
    dfeats = (dmean / cache["denom"])[:, None, :] * cache["valid"][:, :, None]
    scatter = np.zeros_like(dfeats)
    np.put_along_axis(scatter, cache["argmax_t"][:, None, :], dmax[:, None, :], axis=1)
    dfeats = dfeats + scatter

    d_layer_out = dfeats
    for layer in range(config.layers - 1, -1, -1):
        entry = cache["layers"][layer]
        need_dx = layer > 0  # embeddings are frozen inputs, no gradient needed below layer 0
        dx_sum = None
        for d_idx, direction in enumerate(_DIRECTIONS):
            d_dir = np.ascontiguousarray(d_layer_out[:, :, d_idx * hidden : (d_idx + 1) * hidden])
            dx = _backprop_direction(d_dir, entry["caches"][d_idx], params, grads, hidden, need_dx)
            if need_dx:
                dx_sum = dx if dx_sum is None else dx_sum + dx
        d_layer_out = dx_sum
    return grads


def bilstm_forward(
    config: BiLstmConfig,
    params: Params,
    x: np.ndarray,
    lengths: np.ndarray,
    train_mode: bool = False,
    dropout_seed: int | None = None,
) -> np.ndarray:
    """Probabilities for a batch of embedded sequences.

    In training mode a seeded generator drives the spatial dropout mask;
    inference mode applies no dropout and is fully deterministic.
    """
    dropout_rng = rng(dropout_seed) if dropout_seed is not None else None
    probs, _ = _forward(config, params, x, lengths, train_mode, dropout_rng)
    return probs


def bilstm_loss_and_grads(
    config: BiLstmConfig,
    params: Params,
    x: np.ndarray,
    lengths: np.ndarray,
    y: np.ndarray,
    train_mode: bool = False,
    dropout_rng=None,
) -> tuple[float, Params]:
    """Mean BCE loss plus analytic gradients for every parameter."""
    probs, cache = _forward(config, params, x, lengths, train_mode, dropout_rng)
    y = np.asarray(y, dtype=np.float64)
    loss, _ = bce_loss(probs, y)
    dlogits = (probs - y) / y.size  # fused sigmoid + BCE gradient
    grads = _backward(config, params, cache, dlogits)
    return loss, grads


def fit_bilstm(config: BiLstmConfig, train, validation) -> TrainedModel:
    """Adam-trained BiLSTM with per-epoch validation F1 model selection.

    ``train`` and ``validation`` are (x, lengths, labels) triples;
    validation must be non-empty since it drives best-model retention.
    """
    x, lengths, y = train
    if validation is None or len(validation[2]) == 0:
        raise ValueError("fit_bilstm requires a non-empty validation set")
    y = np.asarray(y, dtype=np.float64)
    n = x.shape[0]
    gen = rng(config.seed)
    params = init_bilstm_params(config)
    opt = OptimizerState(kind=config.optimizer, learning_rate=config.learning_rate)
    history: list[dict] = []
    best: tuple[float, int, Params] | None = None
    for epoch in range(config.epochs):
        order = gen.permutation(n)
        total = 0.0
        for batch_index, start in enumerate(range(0, n, config.batch_size)):
            idx = order[start : start + config.batch_size]
            dropout_rng = rng(_dropout_seed(config.seed, epoch, batch_index))
            loss, grads = bilstm_loss_and_grads(
                config, params, x[idx], lengths[idx], y[idx], train_mode=True, dropout_rng=dropout_rng
            )
            if not np.isfinite(loss):
                raise DivergenceError(epoch, batch_index)
            optimizer_step(opt, params, grads)
            total += loss * idx.size
        p_val = _predict_batched(config, params, validation[0], validation[1])
        counts = confusion(np.asarray(validation[2], dtype=np.int64), classify(p_val, 0.5))
        val_f1 = precision_recall_f1(counts)[2]
        history.append({"epoch": epoch, "loss": total / n, "val_f1": val_f1})
        if best is None or val_f1 > best[0]:
            best = (val_f1, epoch, copy.deepcopy(params))
    selected = None
    if best is not None:
        selected = best[1]
        params = best[2]
    return TrainedModel(kind="bilstm", params=params, config=config, history=history, selected_epoch=selected)


def _dropout_seed(seed: int, epoch: int, batch_index: int) -> int:
    # Stable derivation so every (run, epoch, batch) triple reuses its mask.
    return int(np.random.SeedSequence([seed, epoch, batch_index]).generate_state(1, np.uint64)[0])


def _predict_batched(config: BiLstmConfig, params: Params, x, lengths) -> np.ndarray:
    outs = []
    for start in range(0, x.shape[0], config.batch_size):
        stop = start + config.batch_size
        probs, _ = _forward(config, params, x[start:stop], lengths[start:stop], False, None)
        outs.append(probs)
    return np.concatenate(outs) if outs else np.zeros(0)


def bilstm_predict_proba(model: TrainedModel, x, lengths) -> np.ndarray:
    params = model.params
    dtype = model.config.np_dtype
    params = {k: np.asarray(v, dtype=dtype) for k, v in params.items()}
    return _predict_batched(model.config, params, x, lengths)
