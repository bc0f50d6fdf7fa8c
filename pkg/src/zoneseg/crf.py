"""Linear-chain CRF: scoring, log-partition, marginals, NLL gradient, Viterbi.

A label sequence y over L positions with K labels is scored as::

    score(y) = start[y_0] + sum_t emissions[t, y_t]
             + sum_{t<L-1} trans[y_t, y_{t+1}] + end[y_{L-1}]

All computations run in log space with max-shifted log-sum-exp, in double
precision. Everything here is a pure function of its ndarray arguments.
"""

from __future__ import annotations

import numpy as np

from .exceptions import ValidationError


def _logsumexp(x: np.ndarray, axis: int | None = None) -> np.ndarray:
    m = np.max(x, axis=axis, keepdims=True)
    out = m + np.log(np.sum(np.exp(x - m), axis=axis, keepdims=True))
    return np.squeeze(out, axis=axis) if axis is not None else out.reshape(())


def _check_shapes(emissions, trans, start, end):
    emissions = np.asarray(emissions, dtype=np.float64)
    trans = np.asarray(trans, dtype=np.float64)
    start = np.asarray(start, dtype=np.float64)
    end = np.asarray(end, dtype=np.float64)
    if emissions.ndim != 2:
        raise ValidationError("emissions must be a 2-D (L, K) array")
    length, n_labels = emissions.shape
    if length < 1:
        raise ValidationError("emissions must cover at least one position")
    if trans.shape != (n_labels, n_labels):
        raise ValidationError(f"trans must be ({n_labels}, {n_labels}), got {trans.shape}")
    if start.shape != (n_labels,) or end.shape != (n_labels,):
        raise ValidationError(f"start/end must be ({n_labels},) vectors")
    return emissions, trans, start, end


def crf_score(emissions, trans, start, end, labels: np.ndarray) -> float:
    """Score of one concrete label sequence."""
    emissions, trans, start, end = _check_shapes(emissions, trans, start, end)
    labels = np.asarray(labels, dtype=np.intp)
    length, n_labels = emissions.shape
    if labels.shape != (length,):
        raise ValidationError(f"labels must be ({length},), got {labels.shape}")
    if np.any(labels < 0) or np.any(labels >= n_labels):
        raise ValidationError("label index out of range")
    total = start[labels[0]] + end[labels[-1]] + emissions[np.arange(length), labels].sum()
    if length > 1:
        total += trans[labels[:-1], labels[1:]].sum()
    return float(total)


def _forward(emissions, trans, start):
    length, n_labels = emissions.shape
    log_alpha = np.empty((length, n_labels))
    log_alpha[0] = start + emissions[0]
    for t in range(1, length):
        # log_alpha[t, j] = em[t, j] + LSE_i(log_alpha[t-1, i] + trans[i, j])
        log_alpha[t] = emissions[t] + _logsumexp(log_alpha[t - 1][:, None] + trans, axis=0)
    return log_alpha


def _backward(emissions, trans, end):
    length, n_labels = emissions.shape
    log_beta = np.empty((length, n_labels))
    log_beta[length - 1] = end
    for t in range(length - 2, -1, -1):
        # log_beta[t, i] = LSE_j(trans[i, j] + em[t+1, j] + log_beta[t+1, j])
        log_beta[t] = _logsumexp(trans + (emissions[t + 1] + log_beta[t + 1])[None, :], axis=1)
    return log_beta


def crf_log_partition(emissions, trans, start, end) -> float:
    """log of the sum of exp(score) over all K^L label sequences."""
    emissions, trans, start, end = _check_shapes(emissions, trans, start, end)
    log_alpha = _forward(emissions, trans, start)
    return float(_logsumexp(log_alpha[-1] + end))


def crf_marginals(emissions, trans, start, end):
    """Forward-backward marginals.

    Returns ``(unary, pairwise, log_z)`` where ``unary[t, j]`` is
    P(y_t = j), ``pairwise[t, i, j]`` is P(y_t = i, y_{t+1} = j)
    (shape (L-1, K, K), empty for L = 1), and ``log_z`` is the
    log-partition. Each unary row sums to 1.
    """
    emissions, trans, start, end = _check_shapes(emissions, trans, start, end)
    length, n_labels = emissions.shape
    log_alpha = _forward(emissions, trans, start)
    log_beta = _backward(emissions, trans, end)
    log_z = float(_logsumexp(log_alpha[-1] + end))
    unary = np.exp(log_alpha + log_beta - log_z)
    if length > 1:
        pairwise = np.exp(
            log_alpha[:-1, :, None]
            + trans[None, :, :]
            + (emissions[1:] + log_beta[1:])[:, None, :]
            - log_z
        )
    else:
        pairwise = np.zeros((0, n_labels, n_labels))
    return unary, pairwise, log_z


def crf_nll_and_grad(emissions, trans, start, end, gold):
    """Negative log-likelihood of ``gold`` and its analytic gradients.

    Returns ``(loss, d_emissions, d_trans, d_start, d_end)`` with
    ``loss = log_partition - score(gold)``. Gradients are expectation
    minus observation: unary marginals against the one-hot gold labels,
    pairwise marginals against the observed transitions.
    """
    emissions, trans, start, end = _check_shapes(emissions, trans, start, end)
    gold = np.asarray(gold, dtype=np.intp)
    length, n_labels = emissions.shape
    if gold.shape != (length,):
        raise ValidationError(f"gold must be ({length},), got {gold.shape}")
    if np.any(gold < 0) or np.any(gold >= n_labels):
        raise ValidationError("gold label index out of range")

    unary, pairwise, log_z = crf_marginals(emissions, trans, start, end)
    loss = log_z - crf_score(emissions, trans, start, end, gold)

    d_emissions = unary.copy()
    d_emissions[np.arange(length), gold] -= 1.0
    d_trans = pairwise.sum(axis=0)
    if length > 1:
        np.subtract.at(d_trans, (gold[:-1], gold[1:]), 1.0)
    d_start = unary[0].copy()
    d_start[gold[0]] -= 1.0
    d_end = unary[-1].copy()
    d_end[gold[-1]] -= 1.0
    return float(loss), d_emissions, d_trans, d_start, d_end


def crf_viterbi(emissions, trans, start, end) -> tuple[list[int], float]:
    """Best-scoring label sequence and its score.

    Ties are broken toward the lower label index at every decision, so
    among all maximizing sequences the lexicographically smallest one is
    returned. The dynamic program therefore runs back-to-front (best
    completion score per label) and the trace walks front-to-back,
    greedily picking the smallest label that still achieves the maximum.
    """
    emissions, trans, start, end = _check_shapes(emissions, trans, start, end)
    length, n_labels = emissions.shape

    # best[t, j]: best score of a suffix starting at t with label j.
    best = np.empty((length, n_labels))
    nxt = np.zeros((length, n_labels), dtype=np.intp)
    best[length - 1] = emissions[length - 1] + end
    for t in range(length - 2, -1, -1):
        cont = trans + best[t + 1][None, :]  # cont[j, k]
        nxt[t] = np.argmax(cont, axis=1)  # argmax keeps the lowest k on ties
        best[t] = emissions[t] + cont[np.arange(n_labels), nxt[t]]

    first = int(np.argmax(start + best[0]))
    score = float(start[first] + best[0][first])
    labels = [first]
    for t in range(length - 1):
        labels.append(int(nxt[t][labels[-1]]))
    return labels, score
