import numpy as np
import pytest

from zoneseg_exporter import PoolingConfig, pool_line


def test_single_token_concatenation_is_identity():
    token = [np.array([1.0]), np.array([2.0]), np.array([3.0]), np.array([4.0])]
    np.testing.assert_array_equal(pool_line([token]), np.array([1, 2, 3, 4], dtype=np.float32))


def test_two_tokens_average_their_concatenations():
    u = [np.array([1.0, 0.0])] * 4
    v = [np.array([3.0, 2.0])] * 4
    pooled = pool_line([u, v])
    expected = (np.tile([1.0, 0.0], 4) + np.tile([3.0, 2.0], 4)) / 2.0
    np.testing.assert_allclose(pooled, expected.astype(np.float32))


def test_base_model_width_gives_3072():
    assert PoolingConfig(layer_width=768).output_dim == 3072


def test_output_dim_is_four_times_layer_width():
    for width in (1, 16, 300):
        assert PoolingConfig(layer_width=width).output_dim == 4 * width


def test_zero_tokens_rejected():
    with pytest.raises(ValueError):
        pool_line([])


def test_wrong_layer_count_rejected():
    with pytest.raises(ValueError):
        pool_line([[np.array([1.0])] * 3])


def test_averaging_is_token_order_invariant():
    rng = np.random.default_rng(0)
    tokens = [[rng.standard_normal(5) for _ in range(4)] for _ in range(6)]
    forward = pool_line(tokens)
    shuffled = pool_line(list(reversed(tokens)))
    np.testing.assert_allclose(forward, shuffled, atol=1e-6)


def test_pooling_layer_count_is_fixed():
    with pytest.raises(ValueError):
        PoolingConfig(layer_width=8, layers_used=3)
