import math

import numpy as np
import pytest

from conftest import random_crf_instance
from oracles import (
    brute_force_log_partition,
    brute_force_viterbi,
    max_rel_err,
    numeric_grad,
)
from zoneseg import ValidationError
from zoneseg.crf import (
    crf_log_partition,
    crf_marginals,
    crf_nll_and_grad,
    crf_score,
    crf_viterbi,
)


def test_log_partition_all_zero_scores_counts_sequences():
    emissions = np.zeros((2, 3))
    trans = np.zeros((3, 3))
    zeros = np.zeros(3)
    assert crf_log_partition(emissions, trans, zeros, zeros) == pytest.approx(
        2 * math.log(3), abs=1e-12
    )


def test_log_partition_single_position_is_logsumexp():
    a, b = 0.7, -1.3
    emissions = np.array([[a, b]])
    trans = np.zeros((2, 2))
    zeros = np.zeros(2)
    expected = math.log(math.exp(a) + math.exp(b))
    assert crf_log_partition(emissions, trans, zeros, zeros) == pytest.approx(
        expected, abs=1e-12
    )


def test_log_partition_matches_enumeration_on_random_instances():
    rng = np.random.default_rng(11)
    for _ in range(60):
        emissions, trans, start, end = random_crf_instance(rng)
        got = crf_log_partition(emissions, trans, start, end)
        want = brute_force_log_partition(emissions, trans, start, end)
        assert got == pytest.approx(want, abs=1e-10)


def test_viterbi_worked_example():
    emissions = np.array([[2.0, 0.0], [0.0, 1.0], [1.0, 0.0]])
    trans = np.array([[1.0, 0.0], [0.0, 1.0]])
    zeros = np.zeros(2)
    labels, score = crf_viterbi(emissions, trans, zeros, zeros)
    # Exhaustive check over all 8 paths gives (0, 0, 0) with score 5.
    assert labels == [0, 0, 0]
    assert score == pytest.approx(5.0, abs=1e-12)
    oracle_labels, oracle_score = brute_force_viterbi(emissions, trans, zeros, zeros)
    assert labels == oracle_labels
    assert score == pytest.approx(oracle_score, abs=1e-12)


def test_viterbi_single_label_sums_everything():
    rng = np.random.default_rng(3)
    emissions = rng.uniform(-1, 1, (4, 1))
    trans = rng.uniform(-1, 1, (1, 1))
    start = rng.uniform(-1, 1, 1)
    end = rng.uniform(-1, 1, 1)
    labels, score = crf_viterbi(emissions, trans, start, end)
    assert labels == [0, 0, 0, 0]
    expected = emissions.sum() + 3 * trans[0, 0] + start[0] + end[0]
    assert score == pytest.approx(float(expected), abs=1e-12)


def test_viterbi_matches_enumeration_including_ties():
    rng = np.random.default_rng(12)
    for case in range(120):
        emissions, trans, start, end = random_crf_instance(rng, integer=(case % 2 == 0))
        labels, score = crf_viterbi(emissions, trans, start, end)
        oracle_labels, oracle_score = brute_force_viterbi(emissions, trans, start, end)
        assert labels == oracle_labels
        assert score == pytest.approx(oracle_score, abs=1e-9)


def test_viterbi_all_zero_scores_breaks_ties_to_all_zeros():
    emissions = np.zeros((3, 4))
    labels, score = crf_viterbi(emissions, np.zeros((4, 4)), np.zeros(4), np.zeros(4))
    assert labels == [0, 0, 0]
    assert score == 0.0


def test_viterbi_score_never_exceeds_log_partition():
    rng = np.random.default_rng(13)
    for _ in range(30):
        emissions, trans, start, end = random_crf_instance(rng)
        _, score = crf_viterbi(emissions, trans, start, end)
        assert score <= crf_log_partition(emissions, trans, start, end) + 1e-12


def test_marginals_sum_to_one_and_agree_with_pairwise():
    rng = np.random.default_rng(14)
    for _ in range(40):
        emissions, trans, start, end = random_crf_instance(rng)
        unary, pairwise, _ = crf_marginals(emissions, trans, start, end)
        assert np.all(unary >= 0)
        np.testing.assert_allclose(unary.sum(axis=1), 1.0, atol=1e-8)
        length = emissions.shape[0]
        if length > 1:
            np.testing.assert_allclose(
                pairwise.reshape(length - 1, -1).sum(axis=1), 1.0, atol=1e-8
            )
            # Pairwise marginals must be consistent with the unary ones.
            np.testing.assert_allclose(pairwise.sum(axis=2), unary[:-1], atol=1e-8)
            np.testing.assert_allclose(pairwise.sum(axis=1), unary[1:], atol=1e-8)


def test_nll_uniform_two_labels_single_position_is_ln2():
    emissions = np.zeros((1, 2))
    trans = np.zeros((2, 2))
    zeros = np.zeros(2)
    loss, *_ = crf_nll_and_grad(emissions, trans, zeros, zeros, np.array([0]))
    assert loss == pytest.approx(math.log(2), abs=1e-12)


def test_nll_near_zero_when_gold_has_a_wide_margin():
    # Emission gap of 20 on the gold labels dwarfs every other path.
    rng = np.random.default_rng(15)
    gold = np.array([2, 0, 1, 1])
    emissions = np.zeros((4, 3))
    emissions[np.arange(4), gold] = 20.0
    trans = rng.uniform(-0.5, 0.5, (3, 3))
    start = rng.uniform(-0.5, 0.5, 3)
    end = rng.uniform(-0.5, 0.5, 3)
    viterbi_labels, _ = crf_viterbi(emissions, trans, start, end)
    assert viterbi_labels == list(gold)
    loss, *_ = crf_nll_and_grad(emissions, trans, start, end, gold)
    assert 0.0 <= loss < 1e-3


def test_nll_gradients_match_finite_differences():
    rng = np.random.default_rng(16)
    for _ in range(20):
        emissions, trans, start, end = random_crf_instance(rng)
        length, n_labels = emissions.shape
        gold = rng.integers(0, n_labels, size=length)
        _, d_em, d_trans, d_start, d_end = crf_nll_and_grad(
            emissions, trans, start, end, gold
        )

        def loss_of(em=emissions, tr=trans, st=start, en=end):
            return crf_nll_and_grad(em, tr, st, en, gold)[0]

        assert max_rel_err(d_em, numeric_grad(lambda a: loss_of(em=a), emissions.copy())) < 1e-4
        assert max_rel_err(d_trans, numeric_grad(lambda a: loss_of(tr=a), trans.copy())) < 1e-4
        assert max_rel_err(d_start, numeric_grad(lambda a: loss_of(st=a), start.copy())) < 1e-4
        assert max_rel_err(d_end, numeric_grad(lambda a: loss_of(en=a), end.copy())) < 1e-4


def test_nll_loss_is_log_partition_minus_gold_score():
    rng = np.random.default_rng(17)
    emissions, trans, start, end = random_crf_instance(rng)
    length, n_labels = emissions.shape
    gold = rng.integers(0, n_labels, size=length)
    loss, *_ = crf_nll_and_grad(emissions, trans, start, end, gold)
    expected = crf_log_partition(emissions, trans, start, end) - crf_score(
        emissions, trans, start, end, gold
    )
    assert loss == pytest.approx(expected, abs=1e-12)
    assert loss >= -1e-12


def test_gold_index_out_of_range_is_rejected():
    emissions = np.zeros((2, 2))
    trans = np.zeros((2, 2))
    zeros = np.zeros(2)
    with pytest.raises(ValidationError):
        crf_nll_and_grad(emissions, trans, zeros, zeros, np.array([0, 2]))


def test_shape_mismatch_is_rejected():
    with pytest.raises(ValidationError):
        crf_log_partition(np.zeros((2, 3)), np.zeros((2, 2)), np.zeros(3), np.zeros(3))
