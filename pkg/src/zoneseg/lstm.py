"""BiLSTM over per-line embeddings, with hand-derived backpropagation.

One LSTM direction keeps weights stacked by gate: ``wx`` is (4H, D),
``wh`` is (4H, H), ``b`` is (4H,), with rows ordered [input, forget,
candidate, output]. The standard recurrence applies::

    i = sigmoid(zi)   f = sigmoid(zf)   g = tanh(zg)   o = sigmoid(zo)
    c = f * c_prev + i * g
    h = o * tanh(c)

``bilstm_forward`` concatenates the forward and backward hidden states
per position, applies inverted dropout to the concatenation in train
mode (kept activations scaled by 1/(1 - rate); inference is
dropout-free and deterministic), and projects to per-label scores.

The ``params`` argument everywhere is any object exposing the tensors
``lstm_fw_wx``, ``lstm_fw_wh``, ``lstm_fw_b``, ``lstm_bw_wx``,
``lstm_bw_wh``, ``lstm_bw_b``, ``proj_w``, ``proj_b`` plus the scalars
``hidden`` and ``dropout_rate``.
"""

from __future__ import annotations

import numpy as np

from .exceptions import ValidationError


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def lstm_cell_forward(wx, wh, b, x, h_prev, c_prev):
    """One LSTM step; returns (h, c, cache) with pre-activations cached."""
    hidden = wh.shape[1]
    if wx.shape[0] != 4 * hidden or wx.shape[1] != x.shape[0]:
        raise ValidationError(
            f"cell shapes disagree: wx {wx.shape}, x {x.shape}, hidden {hidden}"
        )
    z = wx @ x + wh @ h_prev + b
    i = _sigmoid(z[:hidden])
    f = _sigmoid(z[hidden : 2 * hidden])
    g = np.tanh(z[2 * hidden : 3 * hidden])
    o = _sigmoid(z[3 * hidden :])
    c = f * c_prev + i * g
    tanh_c = np.tanh(c)
    h = o * tanh_c
    cache = (x, h_prev, c_prev, i, f, g, o, tanh_c)
    return h, c, cache


def lstm_cell_backward(wx, wh, cache, dh, dc):
    """Backprop one step given dL/dh and the dL/dc flowing in from t+1.

    Returns (dwx, dwh, db, dh_prev, dc_prev).
    """
    x, h_prev, c_prev, i, f, g, o, tanh_c = cache
    hidden = h_prev.shape[0]
    do = dh * tanh_c
    dc_total = dc + dh * o * (1.0 - tanh_c * tanh_c)
    di = dc_total * g
    df = dc_total * c_prev
    dg = dc_total * i
    dc_prev = dc_total * f
    dz = np.empty(4 * hidden)
    dz[:hidden] = di * i * (1.0 - i)
    dz[hidden : 2 * hidden] = df * f * (1.0 - f)
    dz[2 * hidden : 3 * hidden] = dg * (1.0 - g * g)
    dz[3 * hidden :] = do * o * (1.0 - o)
    dwx = np.outer(dz, x)
    dwh = np.outer(dz, h_prev)
    dh_prev = wh.T @ dz
    return dwx, dwh, dz, dh_prev, dc_prev


def _run_direction(wx, wh, b, inputs, reverse: bool):
    length = inputs.shape[0]
    hidden = wh.shape[1]
    hs = np.zeros((length, hidden))
    caches = [None] * length
    h = np.zeros(hidden)
    c = np.zeros(hidden)
    order = range(length - 1, -1, -1) if reverse else range(length)
    for t in order:
        h, c, caches[t] = lstm_cell_forward(wx, wh, b, inputs[t], h, c)
        hs[t] = h
    return hs, caches


def bilstm_forward_cached(params, inputs, train_mode: bool, rng=None):
    """Emission scores plus the cache needed for the backward pass."""
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim != 2:
        raise ValidationError("inputs must be a 2-D (L, D) array")
    if inputs.shape[0] < 1:
        raise ValidationError("inputs must cover at least one line")
    if inputs.shape[1] != params.lstm_fw_wx.shape[1]:
        raise ValidationError(
            f"input dim {inputs.shape[1]} does not match model input dim "
            f"{params.lstm_fw_wx.shape[1]}"
        )
    hs_f, caches_f = _run_direction(
        params.lstm_fw_wx, params.lstm_fw_wh, params.lstm_fw_b, inputs, reverse=False
    )
    hs_b, caches_b = _run_direction(
        params.lstm_bw_wx, params.lstm_bw_wh, params.lstm_bw_b, inputs, reverse=True
    )
    concat = np.hstack([hs_f, hs_b])

    rate = params.dropout_rate
    if train_mode and rate > 0.0:
        if rng is None:
            raise ValidationError("train-mode forward pass requires an rng for dropout")
        keep_scale = (rng.random(concat.shape) >= rate) / (1.0 - rate)
        dropped = concat * keep_scale
    else:
        keep_scale = None
        dropped = concat

    emissions = dropped @ params.proj_w + params.proj_b
    cache = (caches_f, caches_b, dropped, keep_scale)
    return emissions, cache


def bilstm_forward(params, inputs, train_mode: bool = False, rng=None) -> np.ndarray:
    """Per-line label scores, shape (L, K)."""
    emissions, _ = bilstm_forward_cached(params, inputs, train_mode, rng)
    return emissions


def bilstm_backward(params, cache, d_emissions) -> dict[str, np.ndarray]:
    """Gradients of a scalar loss w.r.t. all BiLSTM and projection tensors.

    ``d_emissions`` is dL/d(emission scores) for the forward pass that
    produced ``cache``. Keys match the model's tensor names.
    """
    caches_f, caches_b, dropped, keep_scale = cache
    hidden = params.lstm_fw_wh.shape[1]
    length = d_emissions.shape[0]

    d_proj_w = dropped.T @ d_emissions
    d_proj_b = d_emissions.sum(axis=0)
    d_dropped = d_emissions @ params.proj_w.T
    d_concat = d_dropped * keep_scale if keep_scale is not None else d_dropped

    grads = {
        "lstm_fw_wx": np.zeros_like(params.lstm_fw_wx),
        "lstm_fw_wh": np.zeros_like(params.lstm_fw_wh),
        "lstm_fw_b": np.zeros_like(params.lstm_fw_b),
        "lstm_bw_wx": np.zeros_like(params.lstm_bw_wx),
        "lstm_bw_wh": np.zeros_like(params.lstm_bw_wh),
        "lstm_bw_b": np.zeros_like(params.lstm_bw_b),
        "proj_w": d_proj_w,
        "proj_b": d_proj_b,
    }

    # Forward direction: state flows t-1 -> t, so gradient walks backwards.
    dh_carry = np.zeros(hidden)
    dc_carry = np.zeros(hidden)
    for t in range(length - 1, -1, -1):
        dh = d_concat[t, :hidden] + dh_carry
        dwx, dwh, db, dh_carry, dc_carry = lstm_cell_backward(
            params.lstm_fw_wx, params.lstm_fw_wh, caches_f[t], dh, dc_carry
        )
        grads["lstm_fw_wx"] += dwx
        grads["lstm_fw_wh"] += dwh
        grads["lstm_fw_b"] += db

    # Backward direction: state flows t+1 -> t, so gradient walks forwards.
    dh_carry = np.zeros(hidden)
    dc_carry = np.zeros(hidden)
    for t in range(length):
        dh = d_concat[t, hidden:] + dh_carry
        dwx, dwh, db, dh_carry, dc_carry = lstm_cell_backward(
            params.lstm_bw_wx, params.lstm_bw_wh, caches_b[t], dh, dc_carry
        )
        grads["lstm_bw_wx"] += dwx
        grads["lstm_bw_wh"] += dwh
        grads["lstm_bw_b"] += db
    return grads
