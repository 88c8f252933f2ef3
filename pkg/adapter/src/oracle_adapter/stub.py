"""The built-in stub model: prototype softmax in canonical arithmetic.

The engine's testbed oracle draws one prototype per class from a seeded
standard normal scaled by sqrt(2), scores a code by the softmax of negative
squared distances at a fixed temperature, and floors probabilities at
1e-12. For cross-boundary equality to hold bit for bit, this module
performs those operations in the same order on the same float64 values;
nothing here is allowed to "simplify" the arithmetic.
"""

from __future__ import annotations

import math

import numpy as np

PROB_FLOOR = 1e-12
PROTOTYPE_STD = math.sqrt(2.0)


def testbed_prototypes(latent_dim: int, num_classes: int, seed: int) -> np.ndarray:
    """Seeded N(0, 2 I) class centers; the documented testbed convention."""
    return np.random.default_rng(seed).standard_normal((num_classes, latent_dim)) * PROTOTYPE_STD


def stub_probs(codes: np.ndarray, prototypes: np.ndarray, temperature: float) -> np.ndarray:
    """Floored softmax over negative squared distances, one row per code."""
    batch = np.asarray(codes, dtype=np.float64)
    if batch.ndim == 1:
        batch = batch[None, :]
    d = ((batch[:, None, :] - prototypes[None, :, :]) ** 2).sum(axis=2)
    logits = -d / temperature
    shift = logits.max(axis=1, keepdims=True)
    e = np.exp(logits - shift)
    probs = e / e.sum(axis=1, keepdims=True)
    return np.maximum(probs, PROB_FLOOR)
