from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from zoneseg import ModelParams, builtin_taxonomy, init_params


@pytest.fixture
def gmane15():
    return builtin_taxonomy("gmane15")


@pytest.fixture
def two5():
    return builtin_taxonomy("two5")


@pytest.fixture
def two2():
    return builtin_taxonomy("two2")


def random_crf_instance(rng, max_len=5, max_labels=4, integer=False):
    """A random (emissions, trans, start, end) tuple; integer scores force
    frequent score ties, exercising the documented tie-break rule."""
    length = int(rng.integers(1, max_len + 1))
    n_labels = int(rng.integers(1, max_labels + 1))
    if integer:
        draw = lambda *shape: rng.integers(-2, 3, size=shape).astype(np.float64)
    else:
        draw = lambda *shape: rng.uniform(-2.0, 2.0, size=shape)
    return draw(length, n_labels), draw(n_labels, n_labels), draw(n_labels), draw(n_labels)


def random_model(rng, input_dim=3, hidden=3, n_labels=3, dropout=0.0) -> ModelParams:
    params = init_params(
        input_dim=input_dim,
        n_labels=n_labels,
        rng=rng,
        hidden=hidden,
        dropout_rate=dropout,
        taxonomy_name="test",
        encoder_kind="features",
    )
    # CRF tensors initialize to zero; give them mass so gradients flow.
    params.crf_trans += rng.uniform(-0.5, 0.5, params.crf_trans.shape)
    params.crf_start += rng.uniform(-0.5, 0.5, params.crf_start.shape)
    params.crf_end += rng.uniform(-0.5, 0.5, params.crf_end.shape)
    return params
