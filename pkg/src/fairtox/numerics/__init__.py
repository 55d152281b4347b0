"""Numeric kernel package: dense primitives plus the recurrent-cell core.

The hot recurrent-cell pointwise math lives in a compiled extension with a
pure-numpy fallback; see :mod:`fairtox.numerics.kernels` for the selection
rules and ``benchmarks/bench_kernels.py`` for a speed comparison.
"""

from .core import (
    OptimizerState,
    Params,
    affine,
    bce_loss,
    glorot_uniform,
    grad_check,
    optimizer_step,
    read_params,
    relu,
    rng,
    sigmoid,
    softmax_rows,
    softmax_xent,
    tanh,
    write_params,
)
from .kernels import BACKEND, backend_name, lstm_pointwise_backward, lstm_pointwise_forward

__all__ = [
    "OptimizerState",
    "Params",
    "affine",
    "bce_loss",
    "glorot_uniform",
    "grad_check",
    "optimizer_step",
    "read_params",
    "relu",
    "rng",
    "sigmoid",
    "softmax_rows",
    "softmax_xent",
    "tanh",
    "write_params",
    "BACKEND",
    "backend_name",
    "lstm_pointwise_forward",
    "lstm_pointwise_backward",
]
