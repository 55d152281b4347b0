"""Shared trained-model container, artifact format, and prediction API."""

from __future__ import annotations

import dataclasses
import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Any, BinaryIO

import numpy as np

from ..errors import FairtoxError, ShapeError
from ..numerics import Params, read_params, write_params

_MODEL_MAGIC = b"FTXM"
_MODEL_VERSION = 1

KINDS = ("naive_bayes", "logistic", "mlp", "bilstm")


@dataclass
class TrainedModel:
    """A fitted classifier: parameters plus its config and training history.

    ``history`` holds one dict per epoch with keys ``epoch``, ``loss`` and
    (when a validation set was supplied) ``val_f1``. ``selected_epoch`` is
    the 0-based epoch whose parameters were retained: the first epoch
    attaining the best validation F1, or the last epoch without validation.
    """

    kind: str
    params: Params
    config: Any
    history: list[dict]
    selected_epoch: int | None = None

    def config_dict(self) -> dict:
        if dataclasses.is_dataclass(self.config):
            return dataclasses.asdict(self.config)
        return dict(self.config)


def save_model(model: TrainedModel, path: str | Path) -> None:
    with open(path, "wb") as fh:
        _write_model(fh, model)


def _write_model(fh: BinaryIO, model: TrainedModel) -> None:
    header = {
        "format": "fairtox-model-v1",
        "kind": model.kind,
        "config": model.config_dict(),
        "history": model.history,
        "selected_epoch": model.selected_epoch,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    fh.write(_MODEL_MAGIC)
    fh.write(struct.pack("<II", _MODEL_VERSION, len(blob)))
    fh.write(blob)
    write_params(fh, model.params)


def load_model(path: str | Path) -> TrainedModel:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MODEL_MAGIC:
            raise FairtoxError(f"not a model artifact: bad magic {magic!r}")
        version, header_len = struct.unpack("<II", fh.read(8))
        if version != _MODEL_VERSION:
            raise FairtoxError(f"unsupported model artifact version {version}")
        header = json.loads(fh.read(header_len).decode("utf-8"))
        params = read_params(fh)
    kind = header["kind"]
    if kind not in KINDS:
        raise FairtoxError(f"unknown model kind {kind!r}")
    config = _rebuild_config(kind, header["config"])
    return TrainedModel(
        kind=kind,
        params=params,
        config=config,
        history=header["history"],
        selected_epoch=header["selected_epoch"],
    )


def _rebuild_config(kind: str, payload: dict):
    from .bilstm import BiLstmConfig
    from .gradient import GradientModelConfig

    if kind in ("logistic", "mlp"):
        payload = dict(payload)
        payload["hidden"] = tuple(payload.get("hidden", ()))
        return GradientModelConfig(**payload)
    if kind == "bilstm":
        return BiLstmConfig(**payload)
    return payload


def predict_proba(model: TrainedModel, features) -> np.ndarray:
    """Probability of the toxic class for each input row.

    ``features`` must match the model kind: a count matrix for Naive Bayes,
    a feature matrix for logistic/MLP, and an ``(x, lengths)`` pair of
    embedded sequences for the BiLSTM.
    """
    if model.kind == "naive_bayes":
        from .naive_bayes import nb_predict_proba

        return nb_predict_proba(model, features)
    if model.kind in ("logistic", "mlp"):
        from .gradient import gradient_predict_proba

        return gradient_predict_proba(model, features)
    if model.kind == "bilstm":
        from .bilstm import bilstm_predict_proba

        if not (isinstance(features, tuple) and len(features) == 2):
            raise ShapeError("bilstm prediction needs an (x, lengths) pair")
        return bilstm_predict_proba(model, features[0], features[1])
    raise FairtoxError(f"unknown model kind {model.kind!r}")


def classify(probabilities: np.ndarray, threshold: float = 0.5) -> np.ndarray:
    """Binary labels: 1 wherever probability >= threshold."""
    p = np.asarray(probabilities, dtype=np.float64)
    return (p >= threshold).astype(np.int64)
