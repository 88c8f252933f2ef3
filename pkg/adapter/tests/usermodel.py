"""Entry-point fixtures for user-model tests: well-behaved and broken."""

from __future__ import annotations

import numpy as np


def double(codes: np.ndarray) -> np.ndarray:
    return np.asarray(codes, dtype=np.float64) * 2.0


def softmax_classifier(samples: np.ndarray) -> np.ndarray:
    """Row softmax of the first 5 squared features; any valid prob rows do."""
    arr = np.asarray(samples, dtype=np.float64)
    logits = -(arr[:, :1] - np.arange(5.0)[None, :]) ** 2
    e = np.exp(logits - logits.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def exploding_classifier(samples: np.ndarray) -> np.ndarray:
    raise RuntimeError("weights file not found: /nonexistent/model.bin")


def wrong_shape_classifier(samples: np.ndarray) -> np.ndarray:
    return np.ones((np.asarray(samples).shape[0], 3)) / 3.0


not_callable = 42.0
