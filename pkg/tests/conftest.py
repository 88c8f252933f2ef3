"""Shared fixtures: the synthetic testbed and one cached full-scale run.

The canonical attack (seed 1, label 0, default config) takes ~15 s, so it
runs once per session and is shared between the training-property tests
and the acceptance suite.
"""

from __future__ import annotations

import numpy as np
import pytest

from latinv import TrainerConfig, make_testbed_oracle, run_attack
from latinv.oracles import OracleHandle


class CountingOracle(OracleHandle):
    """Hands out a fixed probability row and counts queries."""

    kind = "counting"

    def __init__(self, latent_dim: int = 3, probs_row: list[float] | None = None):
        row = probs_row if probs_row is not None else [0.2, 0.5, 0.3]
        super().__init__(latent_dim, len(row))
        self.row = np.asarray(row, dtype=np.float64)

    def _score(self, batch: np.ndarray) -> np.ndarray:
        return np.tile(self.row, (batch.shape[0], 1))


@pytest.fixture()
def testbed_oracle():
    oracle = make_testbed_oracle()
    yield oracle
    oracle.close()


@pytest.fixture(scope="session")
def canonical_run():
    """Default-config attack on the testbed: seed 1, label 0, 5000 rounds."""
    oracle = make_testbed_oracle()
    report = run_attack(TrainerConfig(seed=1), oracle, 0)
    yield report, oracle
    oracle.close()
