#!/usr/bin/env python3
"""End to end: synthesize a corpus, train the labeler, evaluate held-out mail.

Uses the native feature encoder so it runs in seconds with no extra
dependencies. Swap in an embedding file or service encoder for the
transformer-based setup.
"""

from zoneseg import (
    AnnotatedEmail,
    Corpus,
    FeatureEncoder,
    SplitSpec,
    TrainConfig,
    builtin_taxonomy,
    evaluate,
    generate_synthetic_corpus,
    render_eval_report,
    split_corpus,
    train_on_corpora,
)
from zoneseg.model import predict

gmane15 = builtin_taxonomy("gmane15")
encoder = FeatureEncoder()

corpus = generate_synthetic_corpus(120, gmane15, seed=42)
train_part, dev_part, test_part = split_corpus(corpus, SplitSpec(0.7, 0.15, 0.15, seed=1))
print(f"split: {len(train_part)} train / {len(dev_part)} dev / {len(test_part)} test emails")

config = TrainConfig(epochs=60, patience=10, seed=0)
result = train_on_corpora(train_part, dev_part, encoder, config)
print(
    f"trained {len(result.epochs)} epochs; best dev accuracy "
    f"{result.best_dev_accuracy:.4f} at epoch {result.best_epoch}"
)

predicted = []
for a in test_part.emails:
    labels = predict(result.params, encoder.encode_email(a.email))
    predicted.append(
        AnnotatedEmail(email=a.email, zones=tuple(gmane15.zones[i] for i in labels))
    )
pred_corpus = Corpus(name="predictions", taxonomy=gmane15, emails=tuple(predicted))

report = evaluate(test_part.emails, pred_corpus.emails, gmane15)
print()
print(render_eval_report(report))

# Show a labeled email, model vs gold.
sample_gold = test_part.emails[0]
sample_pred = pred_corpus.by_id()[sample_gold.email.id]
print(f"\nemail {sample_gold.email.id} ({sample_gold.email.lang}):")
for line, gold, pred in zip(sample_gold.email.lines, sample_gold.zones, sample_pred.zones):
    marker = " " if gold == pred else "!"
    print(f" {marker} {pred:>18} | {line}")
