"""Training loop: per-email RMSprop on the CRF negative log-likelihood.

Emails are visited one at a time (batch size 1) in a freshly shuffled,
seeded order each epoch; the loss for an email is the summed NLL of its
line sequence and no gradient clipping is applied (both choices are
recorded in the training log). After every epoch the dev set is scored
by line accuracy; the best-on-dev parameters are returned, with early
stopping after ``patience`` epochs without improvement.

Training is single-threaded and fully deterministic: one seeded
generator drives initialization, epoch shuffling, and dropout masks, so
the same seed and data always reproduce the same model bit for bit.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .corpus import Corpus
from .crf import crf_nll_and_grad
from .encoders import Encoder, encode_email
from .exceptions import ValidationError
from .lstm import bilstm_backward, bilstm_forward_cached
from .model import ModelParams, init_params, predict
from .optim import init_opt_state, rmsprop_step

Example = tuple[np.ndarray, np.ndarray]  # (embeddings (L, D), label indices (L,))


@dataclass(frozen=True)
class TrainConfig:
    hidden: int = 64
    dropout_rate: float = 0.25
    learning_rate: float = 0.001
    rms_decay: float = 0.9
    rms_epsilon: float = 1e-8
    epochs: int = 500
    patience: int = 20
    seed: int = 0
    use_crf: bool = True


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    train_nll_sum: float
    train_nll_mean: float
    dev_accuracy: float


@dataclass
class TrainResult:
    params: ModelParams
    epochs: list[EpochStats]
    best_epoch: int
    best_dev_accuracy: float
    stopped_early: bool
    config: TrainConfig

    def log_dict(self) -> dict:
        return {
            "config": asdict(self.config),
            "loss_aggregation": "sum over lines, per email",
            "gradient_clipping": "none",
            "epochs": [asdict(e) for e in self.epochs],
            "best_epoch": self.best_epoch,
            "best_dev_accuracy": self.best_dev_accuracy,
            "stopped_early": self.stopped_early,
        }


def encode_labeled(encoder: Encoder, corpus: Corpus) -> list[Example]:
    """Encode a corpus into (embeddings, label indices) training pairs."""
    lookup = {z: i for i, z in enumerate(corpus.taxonomy.zones)}
    out = []
    for a in corpus.emails:
        matrix = encode_email(encoder, a.email)
        labels = np.asarray([lookup[z] for z in a.zones], dtype=np.intp)
        out.append((matrix, labels))
    return out


def _softmax_nll_and_grad(emissions: np.ndarray, gold: np.ndarray):
    # Per-position cross-entropy; used when the CRF layer is disabled.
    shifted = emissions - emissions.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    rows = np.arange(len(gold))
    loss = float(-log_probs[rows, gold].sum())
    d_emissions = np.exp(log_probs)
    d_emissions[rows, gold] -= 1.0
    return loss, d_emissions


def _email_loss_and_grads(params: ModelParams, example: Example, use_crf: bool, rng):
    x, gold = example
    emissions, cache = bilstm_forward_cached(params, x, train_mode=True, rng=rng)
    if use_crf:
        loss, d_em, d_trans, d_start, d_end = crf_nll_and_grad(
            emissions, params.crf_trans, params.crf_start, params.crf_end, gold
        )
    else:
        loss, d_em = _softmax_nll_and_grad(emissions, gold)
    grads = bilstm_backward(params, cache, d_em)
    if use_crf:
        grads["crf_trans"] = d_trans
        grads["crf_start"] = d_start
        grads["crf_end"] = d_end
    return loss, grads


def dataset_accuracy(params: ModelParams, data: Sequence[Example], use_crf: bool = True) -> float:
    """Pooled line accuracy of the model over encoded examples."""
    correct = 0
    total = 0
    for x, gold in data:
        labels = predict(params, x, use_crf=use_crf)
        correct += int(np.sum(np.asarray(labels) == gold))
        total += len(gold)
    return correct / total if total else 0.0


def train(
    train_data: Sequence[Example],
    dev_data: Sequence[Example],
    n_labels: int,
    config: TrainConfig = TrainConfig(),
    taxonomy_name: str = "",
    encoder_kind: str = "",
) -> TrainResult:
    """Fit the labeler; returns the best-on-dev parameters and the log."""
    if not train_data or not dev_data:
        raise ValidationError("train and dev sets must be non-empty")
    input_dim = train_data[0][0].shape[1]
    for x, y in list(train_data) + list(dev_data):
        if x.shape[1] != input_dim:
            raise ValidationError(
                f"inconsistent embedding dims: {x.shape[1]} vs {input_dim}; "
                "all emails must be encoded with one backend"
            )
        if x.shape[0] != y.shape[0]:
            raise ValidationError("embeddings and labels disagree on line count")
        if np.any(y < 0) or np.any(y >= n_labels):
            raise ValidationError("label index out of range for the taxonomy")

    rng = np.random.default_rng(config.seed)
    params = init_params(
        input_dim=input_dim,
        n_labels=n_labels,
        rng=rng,
        hidden=config.hidden,
        dropout_rate=config.dropout_rate,
        taxonomy_name=taxonomy_name,
        encoder_kind=encoder_kind,
    )
    opt = init_opt_state(
        params,
        learning_rate=config.learning_rate,
        decay=config.rms_decay,
        epsilon=config.rms_epsilon,
        seed=config.seed,
    )

    best_params = params.copy()
    best_accuracy = -1.0
    best_epoch = 0
    epochs_log: list[EpochStats] = []
    since_best = 0
    stopped_early = False

    n_lines = sum(len(y) for _, y in train_data)
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(train_data))
        epoch_loss = 0.0
        for idx in order:
            loss, grads = _email_loss_and_grads(params, train_data[idx], config.use_crf, rng)
            rmsprop_step(opt, params, grads)
            epoch_loss += loss
        if not np.isfinite(epoch_loss):
            raise ValidationError(f"training diverged at epoch {epoch} (non-finite loss)")

        dev_accuracy = dataset_accuracy(params, dev_data, use_crf=config.use_crf)
        epochs_log.append(
            EpochStats(
                epoch=epoch,
                train_nll_sum=epoch_loss,
                train_nll_mean=epoch_loss / n_lines,
                dev_accuracy=dev_accuracy,
            )
        )
        if dev_accuracy > best_accuracy:
            best_accuracy = dev_accuracy
            best_params = params.copy()
            best_epoch = epoch
            since_best = 0
        else:
            since_best += 1
        if best_accuracy >= 1.0:
            break
        if since_best >= config.patience:
            stopped_early = True
            break

    return TrainResult(
        params=best_params,
        epochs=epochs_log,
        best_epoch=best_epoch,
        best_dev_accuracy=best_accuracy,
        stopped_early=stopped_early,
        config=config,
    )


def train_on_corpora(
    train_corpus: Corpus,
    dev_corpus: Corpus,
    encoder: Encoder,
    config: TrainConfig = TrainConfig(),
    dev_encoder: Encoder | None = None,
) -> TrainResult:
    """Convenience wrapper: encode both corpora, then train.

    ``dev_encoder`` lets the dev corpus read from its own embedding file;
    it must produce the same dimension as ``encoder``.
    """
    if train_corpus.taxonomy.name != dev_corpus.taxonomy.name:
        raise ValidationError(
            f"train and dev corpora use different taxonomies: "
            f"{train_corpus.taxonomy.name!r} vs {dev_corpus.taxonomy.name!r}"
        )
    train_data = encode_labeled(encoder, train_corpus)
    dev_data = encode_labeled(dev_encoder or encoder, dev_corpus)
    return train(
        train_data,
        dev_data,
        n_labels=len(train_corpus.taxonomy.zones),
        config=config,
        taxonomy_name=train_corpus.taxonomy.name,
        encoder_kind=encoder.kind,
    )
