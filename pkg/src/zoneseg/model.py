"""Trainable parameters of the line labeler, plus model file I/O.

Model file layout: one UTF-8 JSON header line ::

    {"format": "zoneseg-model", "version": 1, "input_dim": int,
     "hidden": int, "K": int, "taxonomy": str, "encoder_kind": str,
     "dropout_rate": float}

terminated by LF, followed by a binary section holding every tensor in
the fixed order of ``TENSOR_ORDER``. Each tensor record is::

    name_len u32 LE | name bytes (UTF-8) | ndim u32 LE |
    dims (ndim x u64 LE) | data (float64 LE, C order)

A trained ``ModelParams`` is treated as immutable: ``predict`` never
writes to it and is safe to call concurrently. Only the training loop
mutates parameters, on its single private copy.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .crf import crf_viterbi
from .exceptions import ValidationError
from .lstm import bilstm_forward

FORMAT_NAME = "zoneseg-model"
FORMAT_VERSION = 1

TENSOR_ORDER = (
    "lstm_fw_wx",
    "lstm_fw_wh",
    "lstm_fw_b",
    "lstm_bw_wx",
    "lstm_bw_wh",
    "lstm_bw_b",
    "proj_w",
    "proj_b",
    "crf_trans",
    "crf_start",
    "crf_end",
)


@dataclass
class ModelParams:
    """All trainable tensors plus the frozen configuration they assume."""

    input_dim: int
    hidden: int
    n_labels: int
    dropout_rate: float
    taxonomy_name: str
    encoder_kind: str
    lstm_fw_wx: np.ndarray
    lstm_fw_wh: np.ndarray
    lstm_fw_b: np.ndarray
    lstm_bw_wx: np.ndarray
    lstm_bw_wh: np.ndarray
    lstm_bw_b: np.ndarray
    proj_w: np.ndarray
    proj_b: np.ndarray
    crf_trans: np.ndarray
    crf_start: np.ndarray
    crf_end: np.ndarray

    def __post_init__(self):
        expected = self._expected_shapes()
        for name in TENSOR_ORDER:
            arr = getattr(self, name)
            if arr.shape != expected[name]:
                raise ValidationError(
                    f"tensor {name} has shape {arr.shape}, expected {expected[name]}"
                )
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"tensor {name} contains non-finite values")

    def _expected_shapes(self) -> dict[str, tuple[int, ...]]:
        d, h, k = self.input_dim, self.hidden, self.n_labels
        return {
            "lstm_fw_wx": (4 * h, d),
            "lstm_fw_wh": (4 * h, h),
            "lstm_fw_b": (4 * h,),
            "lstm_bw_wx": (4 * h, d),
            "lstm_bw_wh": (4 * h, h),
            "lstm_bw_b": (4 * h,),
            "proj_w": (2 * h, k),
            "proj_b": (k,),
            "crf_trans": (k, k),
            "crf_start": (k,),
            "crf_end": (k,),
        }

    def tensors(self) -> list[tuple[str, np.ndarray]]:
        return [(name, getattr(self, name)) for name in TENSOR_ORDER]

    def copy(self) -> "ModelParams":
        return replace(self, **{name: getattr(self, name).copy() for name in TENSOR_ORDER})


def init_params(
    input_dim: int,
    n_labels: int,
    rng: np.random.Generator,
    hidden: int = 64,
    dropout_rate: float = 0.25,
    taxonomy_name: str = "",
    encoder_kind: str = "",
) -> ModelParams:
    """Fresh parameters: uniform in [-1/sqrt(hidden), +1/sqrt(hidden)],
    except the LSTM forget-gate bias (1.0) and the CRF tensors (0.0).

    Tensors are drawn in ``TENSOR_ORDER`` so a given generator state
    always produces the same model.
    """
    if input_dim < 1 or n_labels < 1 or hidden < 1:
        raise ValidationError("input_dim, n_labels, and hidden must be positive")
    if not (0.0 <= dropout_rate < 1.0):
        raise ValidationError("dropout_rate must lie in [0, 1)")
    bound = 1.0 / np.sqrt(hidden)

    def uniform(shape):
        return rng.uniform(-bound, bound, size=shape)

    def lstm_bias():
        b = uniform((4 * hidden,))
        b[hidden : 2 * hidden] = 1.0
        return b

    k = n_labels
    return ModelParams(
        input_dim=input_dim,
        hidden=hidden,
        n_labels=n_labels,
        dropout_rate=dropout_rate,
        taxonomy_name=taxonomy_name,
        encoder_kind=encoder_kind,
        lstm_fw_wx=uniform((4 * hidden, input_dim)),
        lstm_fw_wh=uniform((4 * hidden, hidden)),
        lstm_fw_b=lstm_bias(),
        lstm_bw_wx=uniform((4 * hidden, input_dim)),
        lstm_bw_wh=uniform((4 * hidden, hidden)),
        lstm_bw_b=lstm_bias(),
        proj_w=uniform((2 * hidden, k)),
        proj_b=uniform((k,)),
        crf_trans=np.zeros((k, k)),
        crf_start=np.zeros(k),
        crf_end=np.zeros(k),
    )


def save_model(params: ModelParams, path: str | Path) -> None:
    """Serialize to the model file format, atomically."""
    header = json.dumps(
        {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "input_dim": params.input_dim,
            "hidden": params.hidden,
            "K": params.n_labels,
            "taxonomy": params.taxonomy_name,
            "encoder_kind": params.encoder_kind,
            "dropout_rate": params.dropout_rate,
        },
        ensure_ascii=False,
        separators=(",", ":"),
    )
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header.encode("utf-8") + b"\n")
            for name, arr in params.tensors():
                name_bytes = name.encode("utf-8")
                fh.write(struct.pack("<I", len(name_bytes)))
                fh.write(name_bytes)
                fh.write(struct.pack("<I", arr.ndim))
                fh.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
                fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_model(path: str | Path) -> ModelParams:
    path = Path(path)
    blob = path.read_bytes()
    newline = blob.find(b"\n")
    if newline < 0:
        raise ValidationError(f"{path}: missing model header line")
    try:
        header = json.loads(blob[:newline].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ValidationError(f"{path}: bad model header ({e})") from e
    if header.get("format") != FORMAT_NAME:
        raise ValidationError(f"{path}: not a {FORMAT_NAME} file")
    if header.get("version") != FORMAT_VERSION:
        raise ValidationError(f"{path}: unsupported version {header.get('version')!r}")

    tensors: dict[str, np.ndarray] = {}
    offset = newline + 1
    for expected_name in TENSOR_ORDER:
        try:
            (name_len,) = struct.unpack_from("<I", blob, offset)
            offset += 4
            name = blob[offset : offset + name_len].decode("utf-8")
            offset += name_len
            (ndim,) = struct.unpack_from("<I", blob, offset)
            offset += 4
            shape = struct.unpack_from(f"<{ndim}Q", blob, offset)
            offset += 8 * ndim
            size = int(np.prod(shape)) if ndim else 1
            data = np.frombuffer(blob, dtype="<f8", count=size, offset=offset)
            offset += 8 * size
        except (struct.error, ValueError) as e:
            raise ValidationError(f"{path}: truncated tensor section ({e})") from e
        if name != expected_name:
            raise ValidationError(
                f"{path}: tensor {name!r} out of order, expected {expected_name!r}"
            )
        tensors[name] = data.reshape(shape).astype(np.float64)
    if offset != len(blob):
        raise ValidationError(f"{path}: {len(blob) - offset} trailing bytes")

    return ModelParams(
        input_dim=int(header["input_dim"]),
        hidden=int(header["hidden"]),
        n_labels=int(header["K"]),
        dropout_rate=float(header["dropout_rate"]),
        taxonomy_name=header.get("taxonomy", ""),
        encoder_kind=header.get("encoder_kind", ""),
        **tensors,
    )


def predict(params: ModelParams, embeddings: np.ndarray, use_crf: bool = True) -> list[int]:
    """Label indices for one email's line embeddings.

    Runs the BiLSTM at inference (no dropout) and decodes with Viterbi;
    with ``use_crf=False`` the transition structure is ignored and each
    position takes its own argmax (ties to the lower index).
    """
    emissions = bilstm_forward(params, embeddings, train_mode=False)
    if use_crf:
        labels, _ = crf_viterbi(emissions, params.crf_trans, params.crf_start, params.crf_end)
        return labels
    return [int(i) for i in np.argmax(emissions, axis=1)]
