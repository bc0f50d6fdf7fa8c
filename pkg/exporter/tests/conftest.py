from __future__ import annotations

import json
import os

import pytest
import torch

os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")

from zoneseg_exporter import LineEmbedder

TINY_WIDTH = 16
TINY_LAYERS = 5


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    """A small randomly initialized BERT saved locally; no network needed."""
    from transformers import BertConfig, BertModel

    workdir = tmp_path_factory.mktemp("tiny-model")
    vocab = (
        ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
        + list("abcdefghijklmnopqrstuvwxyz0123456789")
        + ["##" + c for c in "abcdefghijklmnopqrstuvwxyz"]
    )
    (workdir / "vocab.txt").write_text("\n".join(vocab) + "\n", encoding="utf-8")
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=TINY_WIDTH,
        num_hidden_layers=TINY_LAYERS,
        num_attention_heads=2,
        intermediate_size=32,
        max_position_embeddings=24,
    )
    torch.manual_seed(1234)
    BertModel(config).save_pretrained(workdir)
    return workdir


@pytest.fixture(scope="session")
def embedder(tiny_model_dir) -> LineEmbedder:
    return LineEmbedder(str(tiny_model_dir))


def make_corpus_file(path, emails):
    header = {"format": "zoneseg-corpus", "version": 1, "taxonomy": "gmane15"}
    records = [json.dumps(header)]
    for email_id, lines in emails:
        records.append(
            json.dumps(
                {
                    "id": email_id,
                    "lang": "en",
                    "lines": list(lines),
                    "zones": ["paragraph"] * len(lines),
                    "annotator": None,
                },
                ensure_ascii=False,
            )
        )
    path.write_text("\n".join(records) + "\n", encoding="utf-8")
    return path
