"""Built-in oracles: canonical scoring arithmetic, invariants, accounting."""

from __future__ import annotations

import math

import numpy as np
import pytest

from latinv.errors import InputError, ProtocolError
from latinv.oracles import (
    LinearSoftmaxOracle,
    LinearSoftmaxSpec,
    PrototypeOracle,
    PrototypeOracleSpec,
    log_target_prob,
    make_testbed_oracle,
    validate_prob_rows,
)
from latinv.oracles import testbed_prototypes as seeded_prototypes


def softmax_by_hand(logits: list[float]) -> list[float]:
    # Deliberately scalar math.exp arithmetic, not the vectorized numpy path.
    shift = max(logits)
    e = [math.exp(v - shift) for v in logits]
    total = sum(e)
    return [v / total for v in e]


# -- prototype oracle --------------------------------------------------------


def test_prototype_scores_match_scalar_recomputation() -> None:
    protos = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, -1.0]])
    oracle = PrototypeOracle(PrototypeOracleSpec(protos, 2.0))
    code = np.array([0.5, 0.25])
    probs = oracle.query(code)[0]
    logits = []
    for p in protos:
        d = (code[0] - p[0]) ** 2 + (code[1] - p[1]) ** 2
        logits.append(-d / 2.0)
    assert probs == pytest.approx(softmax_by_hand(logits), rel=1e-12)


def test_prototype_probability_peaks_at_the_prototype_itself() -> None:
    oracle = make_testbed_oracle()
    protos = oracle.spec.prototypes
    probs = oracle.query(protos)
    assert np.array_equal(np.argmax(probs, axis=1), np.arange(protos.shape[0]))


def test_prototype_rows_sum_to_one_and_stay_floored() -> None:
    oracle = make_testbed_oracle()
    codes = np.random.default_rng(3).standard_normal((40, 8)) * 5.0
    probs = oracle.query(codes)
    # Flooring tiny entries at 1e-12 can push a row sum a few ulp above 1.
    assert probs.sum(axis=1) == pytest.approx(np.ones(40), abs=1e-9)
    assert np.all(probs >= 1e-12)


def test_far_away_code_hits_the_probability_floor() -> None:
    protos = np.array([[0.0], [100.0]])
    oracle = PrototypeOracle(PrototypeOracleSpec(protos, 1.0))
    probs = oracle.query(np.array([0.0]))[0]
    # exp(-100^2) underflows to zero; the floor keeps the log finite.
    assert probs[1] == 1e-12
    assert log_target_prob(probs, 1) == pytest.approx(math.log(1e-12))
    assert log_target_prob(probs, 1) == pytest.approx(-27.631021115928547)


def test_testbed_prototypes_are_the_seeded_scaled_normal_draw() -> None:
    protos = seeded_prototypes(8, 5, 101)
    ref = np.random.default_rng(101).standard_normal((5, 8)) * math.sqrt(2.0)
    np.testing.assert_array_equal(protos, ref)
    oracle = make_testbed_oracle()
    np.testing.assert_array_equal(oracle.spec.prototypes, ref)
    assert oracle.latent_dim == 8
    assert oracle.num_classes == 5


def test_prototype_spec_validation() -> None:
    with pytest.raises(InputError):
        PrototypeOracleSpec(np.zeros((1, 4)), 1.0)
    with pytest.raises(InputError):
        PrototypeOracleSpec(np.zeros((3, 4)), 0.0)
    with pytest.raises(InputError):
        PrototypeOracleSpec(np.array([[np.inf, 0.0], [0.0, 0.0]]), 1.0)


# -- linear softmax oracle ---------------------------------------------------


def test_linear_softmax_matches_scalar_recomputation() -> None:
    w = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 2.0]])
    b = np.array([0.1, -0.2, 0.0])
    oracle = LinearSoftmaxOracle(LinearSoftmaxSpec(w, b))
    z = np.array([0.4, -1.2])
    probs = oracle.query(z)[0]
    logits = [float(w[i] @ z + b[i]) for i in range(3)]
    assert probs == pytest.approx(softmax_by_hand(logits), rel=1e-12)


def test_linear_softmax_spec_validation() -> None:
    with pytest.raises(InputError):
        LinearSoftmaxSpec(np.zeros((1, 3)), np.zeros(1))
    with pytest.raises(InputError):
        LinearSoftmaxSpec(np.zeros((3, 2)), np.zeros(2))


# -- handle contract ---------------------------------------------------------


def test_query_promotes_single_code_and_checks_width() -> None:
    oracle = make_testbed_oracle()
    single = oracle.query(np.zeros(8))
    assert single.shape == (1, 5)
    with pytest.raises(InputError):
        oracle.query(np.zeros(7))
    with pytest.raises(InputError):
        oracle.query(np.zeros((0, 8)))


def test_ledger_counts_every_code_scored() -> None:
    oracle = make_testbed_oracle()
    assert oracle.ledger.total_codes_scored == 0
    oracle.query(np.zeros((3, 8)))
    oracle.query(np.zeros(8))
    oracle.query(np.zeros((10, 8)))
    assert oracle.ledger.total_codes_scored == 14


def test_ledger_does_not_grow_on_rejected_input() -> None:
    oracle = make_testbed_oracle()
    with pytest.raises(InputError):
        oracle.query(np.zeros((2, 3)))
    assert oracle.ledger.total_codes_scored == 0


# -- probability-row validation ---------------------------------------------


def test_validate_prob_rows_accepts_and_floors() -> None:
    rows = np.array([[0.5, 0.5, 0.0]])
    out = validate_prob_rows(rows, 3)
    assert out[0, 2] == 1e-12
    assert out[0, 0] == 0.5


def test_validate_prob_rows_rejects_bad_shapes_and_values() -> None:
    with pytest.raises(ProtocolError):
        validate_prob_rows(np.array([[0.5, 0.5]]), 3)
    with pytest.raises(ProtocolError):
        validate_prob_rows(np.array([[0.5, 0.5, np.nan]]), 3)
    with pytest.raises(ProtocolError):
        validate_prob_rows(np.array([[-0.1, 0.6, 0.5]]), 3)
    with pytest.raises(ProtocolError):
        validate_prob_rows(np.array([[0.3, 0.3, 0.3]]), 3)


def test_validate_prob_rows_tolerates_float_rounding_in_sum() -> None:
    row = np.array([[0.1] * 10])
    out = validate_prob_rows(row, 10)
    assert out.shape == (1, 10)


def test_log_target_prob_checks_label_range() -> None:
    with pytest.raises(InputError):
        log_target_prob(np.array([0.5, 0.5]), 2)
    assert log_target_prob(np.array([0.25, 0.75]), 1) == pytest.approx(math.log(0.75))
