"""Attack-quality metrics over a latent distribution and an oracle.

Sampling metrics (accuracy, top-k, confidence exceedance) draw codes from
the candidate distribution and score them with the oracle; the geometric
metrics (psnr, nearest-neighbor feature distance) compare raw vectors. On
the synthetic testbed the feature space is the latent space itself and the
class prototypes stand in for the private data, so every metric here runs
without any image model.

Argmax and top-k ranking break probability ties toward the lower class
index; oracle floats can tie exactly, so the rule is part of the contract.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import LatentDistribution, sample_codes
from .errors import InputError
from .oracles import OracleHandle

DEFAULT_ACCURACY_SAMPLES = 500
DEFAULT_RANKING_SAMPLES = 10_000
DEFAULT_THRESHOLDS = (0.5, 0.75, 0.9)


@dataclass(frozen=True)
class ConfidenceHistogram:
    """Fraction of samples whose target confidence strictly exceeds each threshold."""

    thresholds: tuple[float, ...]
    fractions: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.thresholds) != len(self.fractions):
            raise InputError("thresholds and fractions must align")
        if any(t2 <= t1 for t1, t2 in zip(self.thresholds, self.thresholds[1:])):
            raise InputError(f"thresholds must be strictly ascending, got {self.thresholds}")

    def to_dict(self) -> dict:
        return {"thresholds": list(self.thresholds), "fractions": list(self.fractions)}


@dataclass(frozen=True)
class EvalSummary:
    """One distribution's metric sheet against one oracle and label."""

    distributional_accuracy: float
    top1: float
    top5: float
    histogram: ConfidenceHistogram
    samples_used: dict

    def to_dict(self) -> dict:
        return {
            "distributional_accuracy": self.distributional_accuracy,
            "top1": self.top1,
            "top5": self.top5,
            "histogram": self.histogram.to_dict(),
            "samples_used": dict(self.samples_used),
        }


def _target_ranks(probs: np.ndarray, label: int) -> np.ndarray:
    """Zero-based rank of the target label per row, lower-index-first on ties."""
    p_label = probs[:, label][:, None]
    strictly_greater = (probs > p_label).sum(axis=1)
    ties_before = (probs[:, :label] == p_label).sum(axis=1)
    return strictly_greater + ties_before


def distributional_accuracy(
    dist: LatentDistribution,
    oracle: OracleHandle,
    label: int,
    n_samples: int = DEFAULT_ACCURACY_SAMPLES,
    rng: np.random.Generator | None = None,
) -> float:
    """Fraction of sampled codes whose top class is the target label."""
    if n_samples < 1:
        raise InputError(f"n_samples must be >= 1, got {n_samples}")
    rng = rng if rng is not None else np.random.default_rng()
    probs = oracle.query(sample_codes(dist, n_samples, rng))
    _check_label(label, oracle.num_classes)
    return float(np.mean(_target_ranks(probs, label) == 0))


def topk_accuracy(
    dist: LatentDistribution,
    oracle: OracleHandle,
    label: int,
    k_rank: int,
    n_samples: int = DEFAULT_RANKING_SAMPLES,
    rng: np.random.Generator | None = None,
) -> float:
    """Fraction of samples ranking the target label within the top k_rank."""
    _check_label(label, oracle.num_classes)
    if not (1 <= k_rank <= oracle.num_classes):
        raise InputError(
            f"k_rank must lie in [1, {oracle.num_classes}], got {k_rank}"
        )
    if n_samples < 1:
        raise InputError(f"n_samples must be >= 1, got {n_samples}")
    rng = rng if rng is not None else np.random.default_rng()
    probs = oracle.query(sample_codes(dist, n_samples, rng))
    return float(np.mean(_target_ranks(probs, label) < k_rank))


def confidence_histogram(
    dist: LatentDistribution,
    oracle: OracleHandle,
    label: int,
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS,
    n_samples: int = DEFAULT_RANKING_SAMPLES,
    rng: np.random.Generator | None = None,
) -> ConfidenceHistogram:
    """Exceedance fractions of the target-label confidence per threshold."""
    _check_label(label, oracle.num_classes)
    rng = rng if rng is not None else np.random.default_rng()
    probs = oracle.query(sample_codes(dist, n_samples, rng))
    confidences = probs[:, label]
    fractions = tuple(float(np.mean(confidences > t)) for t in thresholds)
    return ConfidenceHistogram(tuple(thresholds), fractions)


def psnr(a: np.ndarray, b: np.ndarray, max_val: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; identical inputs give +inf."""
    if max_val <= 0:
        raise InputError(f"max_val must be positive, got {max_val}")
    arr_a = np.asarray(a, dtype=np.float64)
    arr_b = np.asarray(b, dtype=np.float64)
    if arr_a.shape != arr_b.shape:
        raise InputError(f"shape mismatch: {arr_a.shape} vs {arr_b.shape}")
    mse = float(np.mean((arr_a - arr_b) ** 2))
    if mse == 0.0:
        return float("inf")
    return 10.0 * np.log10(max_val * max_val / mse)


def knn_feature_distance(
    generated_features: np.ndarray, private_features: np.ndarray
) -> float:
    """Mean L2 distance from each generated feature to its nearest private one."""
    gen = np.atleast_2d(np.asarray(generated_features, dtype=np.float64))
    priv = np.atleast_2d(np.asarray(private_features, dtype=np.float64))
    if gen.size == 0 or priv.size == 0:
        raise InputError("both feature sets must be non-empty")
    if gen.shape[1] != priv.shape[1]:
        raise InputError(
            f"feature dimension mismatch: {gen.shape[1]} vs {priv.shape[1]}"
        )
    deltas = gen[:, None, :] - priv[None, :, :]
    dists = np.sqrt((deltas * deltas).sum(axis=2))
    return float(dists.min(axis=1).mean())


def eval_rng(seed: int, label: int) -> np.random.Generator:
    """The evaluation stream for a run: independent of its training stream."""
    return np.random.default_rng([seed, label, 1])


def evaluate_distribution(
    dist: LatentDistribution,
    oracle: OracleHandle,
    label: int,
    rng: np.random.Generator,
    accuracy_samples: int = DEFAULT_ACCURACY_SAMPLES,
    ranking_samples: int = DEFAULT_RANKING_SAMPLES,
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS,
) -> EvalSummary:
    """Standard metric sheet: accuracy on its own draw, then one shared
    ranking draw reused for top-1, top-5 (capped at num_classes) and the
    confidence histogram."""
    _check_label(label, oracle.num_classes)
    acc = distributional_accuracy(dist, oracle, label, accuracy_samples, rng)
    probs = oracle.query(sample_codes(dist, ranking_samples, rng))
    ranks = _target_ranks(probs, label)
    top1 = float(np.mean(ranks < 1))
    k5 = min(5, oracle.num_classes)
    top5 = float(np.mean(ranks < k5))
    confidences = probs[:, label]
    hist = ConfidenceHistogram(
        tuple(thresholds), tuple(float(np.mean(confidences > t)) for t in thresholds)
    )
    return EvalSummary(
        distributional_accuracy=acc,
        top1=top1,
        top5=top5,
        histogram=hist,
        samples_used={
            "distributional_accuracy": accuracy_samples,
            "ranking": ranking_samples,
        },
    )


def _check_label(label: int, num_classes: int) -> None:
    if not (0 <= label < num_classes):
        raise InputError(f"label {label} outside [0, {num_classes})")
