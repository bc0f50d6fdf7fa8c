#!/usr/bin/env python3
"""Precomputed embeddings: write an embedding file, read it back, train on it.

The sentence encoder that produces real embeddings is frozen, so its
vectors are constants; once exported to a file the labeler never needs
the encoder again. Here the rows come from the feature encoder to keep
the demo self-contained; service-produced files behave identically.
"""

import tempfile
from pathlib import Path

from zoneseg import (
    FeatureEncoder,
    TrainConfig,
    builtin_taxonomy,
    generate_synthetic_corpus,
    load_embedding_file,
    make_encoder,
    train_on_corpora,
    write_embedding_file,
)

gmane15 = builtin_taxonomy("gmane15")
corpus = generate_synthetic_corpus(16, gmane15, seed=3)
feature_encoder = FeatureEncoder()

workdir = Path(tempfile.mkdtemp(prefix="zoneseg-demo-"))
path = workdir / "corpus.lemb"
entries = [(a.email.id, feature_encoder.encode_email(a.email)) for a in corpus.emails]
write_embedding_file(path, entries)
print(f"wrote {path} and sidecar {path}.idx.jsonl")

loaded = load_embedding_file(path)
print(f"header: dim={loaded.dim} count={loaded.count}, {len(loaded.index)} emails indexed")
first_id = corpus.emails[0].email.id
print(f"rows for {first_id}: shape {loaded.email_rows(first_id).shape}")

file_encoder = make_encoder(f"file:{path}")
result = train_on_corpora(corpus, corpus, file_encoder, TrainConfig(epochs=10, patience=10, seed=0))
print(f"trained from the file backend: dev accuracy {result.best_dev_accuracy:.3f}")
