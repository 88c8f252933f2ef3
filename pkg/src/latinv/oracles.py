"""Query-only oracle boundary: latent code in, class probabilities out.

A handle hides everything behind `query(codes) -> probs` plus a ledger that
counts every code ever scored, which is the cost currency of a black-box
search. Two analytic oracles are built in (Gaussian prototypes and a linear
softmax) and `connect_external` speaks the newline-delimited JSON protocol to
an out-of-process model.

Canonical prototype scoring, kept bit-reproducible across process boundaries
(external adapters mirror these exact numpy operations in this order):

    d      = ((codes[:, None, :] - prototypes[None, :, :]) ** 2).sum(axis=2)
    logits = -d / temperature
    shift  = logits.max(axis=1, keepdims=True)
    e      = exp(logits - shift)
    probs  = maximum(e / e.sum(axis=1, keepdims=True), 1e-12)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, ProtocolError
from .protocol import WireClient

PROB_FLOOR = 1e-12
PROB_SUM_TOL = 1e-9

DEFAULT_LATENT_DIM = 8
DEFAULT_NUM_CLASSES = 5
DEFAULT_TESTBED_SEED = 101
DEFAULT_TEMPERATURE = 2.0
# Testbed prototypes are N(0, 2 I) draws: standard normal scaled by sqrt(2).
PROTOTYPE_STD = math.sqrt(2.0)


@dataclass
class QueryLedger:
    """Monotone count of codes scored through one handle."""

    total_codes_scored: int = 0

    def add(self, count: int) -> None:
        self.total_codes_scored += count


def validate_prob_rows(probs: np.ndarray, num_classes: int, context: str = "oracle response") -> np.ndarray:
    """Check ProbVector invariants row-wise, then apply the probability floor."""
    arr = np.asarray(probs, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != num_classes:
        raise ProtocolError(f"{context}: expected rows of {num_classes} probabilities, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ProtocolError(f"{context}: non-finite probability")
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ProtocolError(f"{context}: probability outside [0, 1]")
    sums = arr.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > PROB_SUM_TOL):
        bad = float(sums[np.argmax(np.abs(sums - 1.0))])
        raise ProtocolError(f"{context}: probabilities sum to {bad!r}, not 1")
    return np.maximum(arr, PROB_FLOOR)


def log_target_prob(probs: np.ndarray, label: int) -> float:
    """Natural log of the target-label probability, floored at 1e-12."""
    row = np.asarray(probs, dtype=np.float64).reshape(-1)
    if not (0 <= label < row.shape[0]):
        raise InputError(f"label {label} out of range for {row.shape[0]} classes")
    return math.log(max(float(row[label]), PROB_FLOOR))


class OracleHandle:
    """Base class: dimension checks, ledger accounting, invariant validation."""

    kind = "abstract"

    def __init__(self, latent_dim: int, num_classes: int):
        if latent_dim < 1:
            raise InputError(f"latent_dim must be >= 1, got {latent_dim}")
        if num_classes < 2:
            raise InputError(f"num_classes must be >= 2, got {num_classes}")
        self.latent_dim = latent_dim
        self.num_classes = num_classes
        self.ledger = QueryLedger()

    def query(self, codes: np.ndarray) -> np.ndarray:
        """Score a batch of codes; returns one validated probability row each.

        The ledger grows by the batch size only after scoring succeeds, so a
        failed transport round-trip costs no budget.
        """
        batch = np.asarray(codes, dtype=np.float64)
        if batch.ndim == 1:
            batch = batch[None, :]
        if batch.ndim != 2 or batch.shape[1] != self.latent_dim:
            raise InputError(
                f"codes must be (batch, {self.latent_dim}), got shape {np.asarray(codes).shape}"
            )
        if batch.shape[0] < 1:
            raise InputError("query needs at least one code")
        probs = validate_prob_rows(self._score(batch), self.num_classes, context=f"{self.kind} oracle")
        self.ledger.add(batch.shape[0])
        return probs

    def _score(self, batch: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def close(self) -> None:
        pass


@dataclass(frozen=True)
class PrototypeOracleSpec:
    """Class centers in latent space plus a softmax temperature."""

    prototypes: np.ndarray
    temperature: float

    def __post_init__(self) -> None:
        protos = np.asarray(self.prototypes, dtype=np.float64)
        object.__setattr__(self, "prototypes", protos)
        if protos.ndim != 2 or protos.shape[0] < 2 or protos.shape[1] < 1:
            raise InputError(f"prototypes must be (k >= 2, n >= 1), got shape {protos.shape}")
        if not np.all(np.isfinite(protos)):
            raise InputError("prototypes must be finite")
        if not (self.temperature > 0.0):
            raise InputError(f"temperature must be positive, got {self.temperature}")


class PrototypeOracle(OracleHandle):
    """Softmax over negative squared distances to per-class prototypes."""

    kind = "gaussian-prototype"

    def __init__(self, spec: PrototypeOracleSpec):
        super().__init__(spec.prototypes.shape[1], spec.prototypes.shape[0])
        self.spec = spec

    def _score(self, batch: np.ndarray) -> np.ndarray:
        d = ((batch[:, None, :] - self.spec.prototypes[None, :, :]) ** 2).sum(axis=2)
        logits = -d / self.spec.temperature
        shift = logits.max(axis=1, keepdims=True)
        e = np.exp(logits - shift)
        return e / e.sum(axis=1, keepdims=True)


def make_prototype_oracle(spec: PrototypeOracleSpec) -> PrototypeOracle:
    return PrototypeOracle(spec)


def testbed_prototypes(latent_dim: int, num_classes: int, seed: int) -> np.ndarray:
    """Seeded N(0, 2 I) class centers; the documented testbed convention."""
    return np.random.default_rng(seed).standard_normal((num_classes, latent_dim)) * PROTOTYPE_STD


def make_testbed_oracle(
    latent_dim: int = DEFAULT_LATENT_DIM,
    num_classes: int = DEFAULT_NUM_CLASSES,
    seed: int = DEFAULT_TESTBED_SEED,
    temperature: float = DEFAULT_TEMPERATURE,
) -> PrototypeOracle:
    """The default synthetic testbed used by the shipped config and the tests."""
    spec = PrototypeOracleSpec(testbed_prototypes(latent_dim, num_classes, seed), temperature)
    return PrototypeOracle(spec)


@dataclass(frozen=True)
class LinearSoftmaxSpec:
    """Affine logits: probs = softmax(W z + b)."""

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        b = np.asarray(self.bias, dtype=np.float64)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)
        if w.ndim != 2 or w.shape[0] < 2:
            raise InputError(f"weights must be (k >= 2, n), got shape {w.shape}")
        if b.shape != (w.shape[0],):
            raise InputError(f"bias shape {b.shape} does not match {w.shape[0]} classes")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise InputError("weights and bias must be finite")


class LinearSoftmaxOracle(OracleHandle):
    kind = "linear-softmax"

    def __init__(self, spec: LinearSoftmaxSpec):
        super().__init__(spec.weights.shape[1], spec.weights.shape[0])
        self.spec = spec

    def _score(self, batch: np.ndarray) -> np.ndarray:
        logits = batch @ self.spec.weights.T + self.spec.bias
        shift = logits.max(axis=1, keepdims=True)
        e = np.exp(logits - shift)
        return e / e.sum(axis=1, keepdims=True)


class ExternalOracle(OracleHandle):
    """Handle whose scoring round-trips the wire protocol.

    Construction performs the meta handshake (10 s default timeout) and
    records the counterparty's dimensions; every query validates the returned
    rows against the ProbVector invariants before they enter the engine.
    """

    kind = "external"

    def __init__(self, client: WireClient):
        latent_dim, num_classes = client.meta()
        super().__init__(latent_dim, num_classes)
        self.client = client

    def _score(self, batch: np.ndarray) -> np.ndarray:
        rows, line = self.client.query(batch.tolist())
        arr = np.asarray(rows, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != batch.shape[0]:
            raise ProtocolError(f"response row count mismatch in line: {line!r}")
        try:
            return validate_prob_rows(arr, self.num_classes, context="external oracle")
        except ProtocolError as exc:
            raise ProtocolError(f"{exc} (offending line: {line!r})") from None

    def close(self) -> None:
        self.client.close()


def connect_external(endpoint: str, timeout: float = 10.0) -> ExternalOracle:
    """Open a `cmd:...` child process or `tcp:host:port` stream oracle."""
    return ExternalOracle(WireClient(endpoint, timeout=timeout))
