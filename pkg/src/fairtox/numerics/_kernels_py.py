"""Pure-numpy fallback for the recurrent-cell pointwise kernels.

Gate layout along the last axis of the preactivation matrix ``z`` (B x 4H)
is four contiguous blocks: input gate, forget gate, candidate, output gate.
The compiled extension implements the same contract; either backend may be
active at runtime.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit


def lstm_pointwise_forward(z: np.ndarray, c_prev: np.ndarray):
    """Activate the gate preactivations and advance the cell state.

    Returns (a, c, h): activated gates (B x 4H, same block layout as z),
    the new cell state, and the new hidden state.
    """
    hidden = c_prev.shape[1]
    a = np.empty_like(z)
    a[:, : 2 * hidden] = expit(z[:, : 2 * hidden])
    a[:, 2 * hidden : 3 * hidden] = np.tanh(z[:, 2 * hidden : 3 * hidden])
    a[:, 3 * hidden :] = expit(z[:, 3 * hidden :])
    i = a[:, :hidden]
    f = a[:, hidden : 2 * hidden]
    g = a[:, 2 * hidden : 3 * hidden]
    o = a[:, 3 * hidden :]
    c = f * c_prev + i * g
    h = o * np.tanh(c)
    return a, c, h


def lstm_pointwise_backward(dh: np.ndarray, dc_in: np.ndarray, a: np.ndarray, c_prev: np.ndarray, c: np.ndarray):
    """Backprop through one cell step's pointwise math.

    ``dh``/``dc_in`` are the gradients arriving at this step's hidden and
    cell outputs. Returns (dz, dc_prev) where dz matches the gate block
    layout of the forward preactivations.
    """
    hidden = c_prev.shape[1]
    i = a[:, :hidden]
    f = a[:, hidden : 2 * hidden]
    g = a[:, 2 * hidden : 3 * hidden]
    o = a[:, 3 * hidden :]
    tc = np.tanh(c)
    dc = dc_in + dh * o * (1.0 - tc * tc)
    dz = np.empty_like(a)
    dz[:, :hidden] = (dc * g) * i * (1.0 - i)
    dz[:, hidden : 2 * hidden] = (dc * c_prev) * f * (1.0 - f)
    dz[:, 2 * hidden : 3 * hidden] = (dc * i) * (1.0 - g * g)
    dz[:, 3 * hidden :] = (dh * tc) * o * (1.0 - o)
    dc_prev = dc * f
    return dz, dc_prev
