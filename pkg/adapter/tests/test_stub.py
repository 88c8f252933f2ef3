from __future__ import annotations

import math

import numpy as np
import pytest

from oracle_adapter import stub_probs
from oracle_adapter import testbed_prototypes as seeded_prototypes
from oracle_adapter.config import AdapterConfig, AdapterConfigError, StubSpec


def test_prototype_convention_is_seeded_standard_normal_times_sqrt2() -> None:
    protos = seeded_prototypes(8, 5, 101)
    want = np.random.default_rng(101).standard_normal((5, 8)) * math.sqrt(2.0)
    assert np.array_equal(protos, want)


def test_stub_rows_are_valid_probabilities() -> None:
    protos = seeded_prototypes(8, 5, 101)
    codes = np.random.default_rng(0).standard_normal((32, 8)) * 3.0
    probs = stub_probs(codes, protos, 2.0)
    assert probs.shape == (32, 5)
    assert np.all(probs >= 1e-12)
    assert np.all(probs <= 1.0)
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)


def test_stub_peaks_at_each_prototype() -> None:
    protos = seeded_prototypes(8, 5, 101)
    probs = stub_probs(protos, protos, 2.0)
    assert np.array_equal(probs.argmax(axis=1), np.arange(5))


def test_stub_matches_scalar_recomputation() -> None:
    protos = seeded_prototypes(4, 3, 11)
    code = np.array([0.3, -1.2, 0.7, 2.0])
    row = stub_probs(code, protos, 1.5)[0]
    logits = [-(sum((code - p) ** 2)) / 1.5 for p in protos]
    z = sum(math.exp(l - max(logits)) for l in logits)
    for j in range(3):
        assert row[j] == pytest.approx(math.exp(logits[j] - max(logits)) / z, rel=1e-12)


def test_far_codes_hit_the_floor_exactly() -> None:
    protos = seeded_prototypes(8, 5, 101)
    row = stub_probs(np.full(8, 40.0), protos, 2.0)[0]
    assert row.min() == 1e-12


def test_single_code_promotes_to_batch() -> None:
    protos = seeded_prototypes(8, 5, 101)
    code = np.linspace(-1, 1, 8)
    assert np.array_equal(stub_probs(code, protos, 2.0), stub_probs(code[None, :], protos, 2.0))


def test_stub_spec_validation() -> None:
    with pytest.raises(AdapterConfigError):
        StubSpec(np.zeros((1, 4)), 2.0)  # fewer than 2 classes
    with pytest.raises(AdapterConfigError):
        StubSpec(np.zeros((3, 4)), 0.0)
    with pytest.raises(AdapterConfigError):
        StubSpec(np.array([[np.nan, 0.0], [1.0, 1.0]]), 1.0)


def test_config_fills_default_stub_spec() -> None:
    config = AdapterConfig(latent_dim=6, num_classes=4)
    assert config.stub is not None
    assert config.stub.prototypes.shape == (4, 6)
    assert config.stub.temperature == 2.0


def test_config_rejects_mismatched_stub_shape() -> None:
    spec = StubSpec.testbed(8, 5)
    with pytest.raises(AdapterConfigError):
        AdapterConfig(latent_dim=4, num_classes=5, stub=spec)


def test_config_rejects_unknown_mode_and_bad_dims() -> None:
    with pytest.raises(AdapterConfigError):
        AdapterConfig(mode="proxy")
    with pytest.raises(AdapterConfigError):
        AdapterConfig(latent_dim=0)
    with pytest.raises(AdapterConfigError):
        AdapterConfig(num_classes=1)


def test_user_mode_requires_resolvable_entry_points() -> None:
    with pytest.raises(AdapterConfigError):
        AdapterConfig(mode="user-model")  # no classifier at all
    with pytest.raises(AdapterConfigError):
        AdapterConfig(mode="user-model", classifier="usermodel.softmax_classifier")  # no colon
    with pytest.raises(AdapterConfigError):
        AdapterConfig(mode="user-model", classifier="no_such_module:fn")
    with pytest.raises(AdapterConfigError):
        AdapterConfig(mode="user-model", classifier="usermodel:missing_attr")
    with pytest.raises(AdapterConfigError):
        AdapterConfig(mode="user-model", classifier="usermodel:not_callable")
    config = AdapterConfig(
        mode="user-model", classifier="usermodel:softmax_classifier", generator="usermodel:double"
    )
    assert config.mode == "user-model"
