"""Frozen transformer wrapper producing one pooled embedding per line.

The backbone's weights are never updated here: the model runs in eval
mode under ``torch.no_grad``, so embedding the same line twice yields
bit-identical float32 vectors. Each line is run through the model on
its own (no cross-line padding), which keeps the output independent of
how callers batch their requests.

Lines longer than the model's maximum sequence length are truncated;
the embedder counts truncations so exports can report them.
"""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np
import torch
from transformers import AutoModel, AutoTokenizer

from .pooling import LAYERS_USED, PoolingConfig

log = logging.getLogger("zoneseg_exporter")

_UNBOUNDED_MAX_LENGTH = 10**6

DEFAULT_MODEL = "xlm-roberta-base"


class LineEmbedder:
    def __init__(self, model_name_or_path: str = DEFAULT_MODEL):
        self.model_name = str(model_name_or_path)
        self.tokenizer = AutoTokenizer.from_pretrained(model_name_or_path)
        self.model = AutoModel.from_pretrained(model_name_or_path)
        self.model.eval()
        config = self.model.config
        if config.num_hidden_layers < LAYERS_USED:
            raise ValueError(
                f"model has {config.num_hidden_layers} layers; pooling needs "
                f"at least {LAYERS_USED}"
            )
        self.pooling = PoolingConfig(layer_width=config.hidden_size)
        max_length = getattr(self.tokenizer, "model_max_length", None) or 0
        if max_length <= 0 or max_length > _UNBOUNDED_MAX_LENGTH:
            max_length = int(getattr(config, "max_position_embeddings", 512))
        self.max_length = int(max_length)
        self.truncated_lines = 0

    @property
    def dim(self) -> int:
        return self.pooling.output_dim

    def _embed_one(self, line: str) -> np.ndarray:
        full_ids = self.tokenizer(line, truncation=False)["input_ids"]
        if len(full_ids) > self.max_length:
            self.truncated_lines += 1
        encoded = self.tokenizer(
            line, truncation=True, max_length=self.max_length, return_tensors="pt"
        )
        with torch.no_grad():
            output = self.model(**encoded, output_hidden_states=True)
        # hidden_states[0] is the embedding layer; keep the deepest 4 blocks.
        last_layers = output.hidden_states[-LAYERS_USED:]
        stacked = torch.cat(last_layers, dim=-1)[0]  # (tokens, 4 * width)
        pooled = stacked.mean(dim=0)
        return pooled.to(torch.float32).cpu().numpy()

    def embed_lines(self, lines: Sequence[str]) -> np.ndarray:
        """Embed a batch of lines; returns float32 (n_lines, dim).

        An empty string still embeds: it tokenizes to its
        sequence-boundary special tokens, which are pooled like any
        other token sequence.
        """
        if len(lines) == 0:
            raise ValueError("embed_lines requires at least one line")
        rows = np.stack([self._embed_one(line) for line in lines])
        if rows.shape != (len(lines), self.dim):
            raise RuntimeError(
                f"pooled output shape {rows.shape} disagrees with dim {self.dim}"
            )
        return rows
