"""Layer pooling: turn per-token, per-layer vectors into one line embedding.

For every token we concatenate its vectors from the last four
transformer layers (deepest layer last), then average those
concatenations over all tokens of the line. A base model with 768-wide
layers therefore yields 3072-dimension line embeddings.

"Last four layers" means the final four transformer blocks; the
embedding layer's output is never pooled. Sequence-boundary special
tokens participate in the average like any other token; this keeps
pooling deterministic and is advertised in the service health payload.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

LAYERS_USED = 4

POOLING_NOTE = (
    "concatenate last 4 transformer layers per token (deepest last), "
    "average over all tokens including special tokens"
)


@dataclass(frozen=True)
class PoolingConfig:
    """Shape contract of the pooled output for a given layer width."""

    layer_width: int
    layers_used: int = LAYERS_USED

    def __post_init__(self):
        if self.layer_width < 1:
            raise ValueError("layer_width must be positive")
        if self.layers_used != LAYERS_USED:
            raise ValueError(f"pooling is defined over exactly {LAYERS_USED} layers")

    @property
    def output_dim(self) -> int:
        return self.layers_used * self.layer_width


def pool_line(token_layer_vectors: Sequence[Sequence[np.ndarray]]) -> np.ndarray:
    """Pool one line given, per token, its vectors from the last 4 layers.

    ``token_layer_vectors[t][l]`` is token ``t``'s vector from the l-th of
    the four layers, ordered shallowest to deepest. Raises ``ValueError``
    on zero tokens or inconsistent widths.
    """
    if len(token_layer_vectors) == 0:
        raise ValueError("cannot pool a line with zero tokens")
    concats = []
    width = None
    for layers in token_layer_vectors:
        if len(layers) != LAYERS_USED:
            raise ValueError(f"expected {LAYERS_USED} layer vectors per token, got {len(layers)}")
        vecs = [np.asarray(v, dtype=np.float32).reshape(-1) for v in layers]
        widths = {v.shape[0] for v in vecs}
        if width is None:
            if len(widths) != 1:
                raise ValueError("layer vectors must all have the same width")
            width = widths.pop()
        elif widths != {width}:
            raise ValueError("layer vectors must all have the same width")
        concats.append(np.concatenate(vecs))
    return np.mean(np.stack(concats), axis=0, dtype=np.float32)
