import json

import numpy as np
import pytest

from app.models.channel import InputDistribution
from app.services.information import (
    deterministic_channel,
    mi_bundle,
    sample_degraded_channel,
    seeded_rng,
    uniform_inputs,
    xor_witness_channel,
)


@pytest.fixture
def xor_witness():
    """Y = X1 ⊕ X2、Z = X1，均勻輸入"""
    ch = xor_witness_channel()
    return ch, uniform_inputs(ch.input_sizes)


@pytest.fixture
def xor_constant_z():
    """Y = X1 ⊕ X2、Z 為常數"""
    ch = deterministic_channel((2, 2), 2, 1, lambda a, b: a ^ b, lambda a, b: 0)
    return ch, uniform_inputs(ch.input_sizes)


@pytest.fixture
def noiseless_xor_z():
    """Y = (X1, X2) 無雜訊、Z = X1 ⊕ X2"""
    ch = deterministic_channel((2, 2), 4, 2, lambda a, b: 2 * a + b, lambda a, b: a ^ b)
    return ch, uniform_inputs(ch.input_sizes)


@pytest.fixture
def noiseless_constant_z():
    """Y = (X1, X2) 無雜訊、Z 為常數"""
    ch = deterministic_channel((2, 2), 4, 1, lambda a, b: 2 * a + b, lambda a, b: 0)
    return ch, uniform_inputs(ch.input_sizes)


@pytest.fixture
def leaky_noiseless():
    """
    X_k = (a_k, b_k, d_k) 三位元，Y = (X1, X2) 無雜訊，Z = (a1 ⊕ a2, b1, b2)

    I(X_k;Y|X_k̄) = 3、I(X_k;Z) = 1、I(X_k;Z|X_k̄) = 2、I(X1,X2;Z) = 3
    """

    def z_of(x1, x2):
        return 4 * ((x1 >> 2) ^ (x2 >> 2)) + 2 * ((x1 >> 1) & 1) + ((x2 >> 1) & 1)

    ch = deterministic_channel((8, 8), 64, 8, lambda x1, x2: 8 * x1 + x2, z_of)
    return ch, uniform_inputs(ch.input_sizes)


@pytest.fixture
def point_mass_inputs():
    return [InputDistribution(np.array([1.0, 0.0])), InputDistribution(np.array([1.0, 0.0]))]


@pytest.fixture(scope="session")
def degraded_corpus():
    """50 個竊聽端退化的 2×2×2×2 通道 (均勻輸入)"""
    rng = seeded_rng(20240611)
    corpus = []
    for _ in range(50):
        ch = sample_degraded_channel(rng, (2, 2), 2, 2)
        inputs = uniform_inputs(ch.input_sizes)
        corpus.append((ch, inputs, mi_bundle(ch, inputs)))
    return corpus


def channel_document(ch, inputs=None):
    document = {
        "num_users": ch.num_users,
        "input_sizes": list(ch.input_sizes),
        "y_size": ch.y_size,
        "z_size": ch.z_size,
        "transition": ch.transition.tolist(),
    }
    if inputs is not None:
        document["inputs"] = [dist.pmf.tolist() for dist in inputs]
    return document


@pytest.fixture
def write_json(tmp_path):
    def write(name, payload):
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return path

    return write
