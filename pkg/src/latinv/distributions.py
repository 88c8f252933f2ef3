"""Diagonal Gaussian over latent space and the schedules that steer it.

The object being optimized is a per-dimension (mean, standard deviation) pair.
Fresh distributions draw both vectors from a standard normal; the raw spread
draw is rectified by absolute value and clamped into `SigmaBounds` so the
result is always a valid Gaussian. Sampling uses numpy's PCG64 generator,
which is a documented fixed algorithm, so seeded runs reproduce bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError

DEFAULT_SIGMA_MIN = 1e-3
DEFAULT_SIGMA_MAX = 3.0


@dataclass(frozen=True)
class SigmaBounds:
    """Legal range for every per-dimension standard deviation."""

    sigma_min: float = DEFAULT_SIGMA_MIN
    sigma_max: float = DEFAULT_SIGMA_MAX

    def __post_init__(self) -> None:
        if not (0.0 < self.sigma_min < self.sigma_max):
            raise InputError(
                f"need 0 < sigma_min < sigma_max, got ({self.sigma_min}, {self.sigma_max})"
            )

    def clamp(self, sigma: np.ndarray) -> np.ndarray:
        return np.clip(sigma, self.sigma_min, self.sigma_max)


@dataclass(frozen=True)
class LatentDistribution:
    """Diagonal Gaussian N(mu, diag(sigma^2)) over an n-dimensional latent space."""

    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self) -> None:
        mu = np.asarray(self.mu, dtype=np.float64)
        sigma = np.asarray(self.sigma, dtype=np.float64)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        if mu.ndim != 1 or sigma.ndim != 1 or mu.shape != sigma.shape:
            raise InputError(f"mu/sigma must be equal-length vectors, got {mu.shape} vs {sigma.shape}")
        if mu.shape[0] < 1:
            raise InputError("latent dimension must be >= 1")
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(sigma))):
            raise InputError("mu and sigma must be finite")
        if np.any(sigma <= 0.0):
            raise InputError("sigma entries must be positive")

    @property
    def dim(self) -> int:
        return self.mu.shape[0]

    def to_dict(self) -> dict:
        return {"mu": self.mu.tolist(), "sigma": self.sigma.tolist()}

    @classmethod
    def from_dict(cls, payload: dict) -> "LatentDistribution":
        if not isinstance(payload, dict) or "mu" not in payload or "sigma" not in payload:
            raise InputError('distribution payload needs "mu" and "sigma" arrays')
        return cls(np.asarray(payload["mu"], dtype=np.float64), np.asarray(payload["sigma"], dtype=np.float64))


def init_distribution(n: int, bounds: SigmaBounds, rng: np.random.Generator) -> LatentDistribution:
    """Fresh random distribution: mu ~ N(0, I); sigma = clamp(|N(0, I)|).

    Consumes exactly two standard_normal(n) draws, in that order.
    """
    if n < 1:
        raise InputError(f"latent dimension must be >= 1, got {n}")
    mu = rng.standard_normal(n)
    sigma = bounds.clamp(np.abs(rng.standard_normal(n)))
    return LatentDistribution(mu, sigma)


def sample_codes(dist: LatentDistribution, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw `count` latent codes, each dimension independent N(mu_i, sigma_i^2).

    Returns a (count, n) array; consumes one standard_normal((count, n)) draw.
    """
    if count < 1:
        raise InputError(f"sample count must be >= 1, got {count}")
    eps = rng.standard_normal((count, dist.dim))
    return dist.mu + dist.sigma * eps


def blend(current: np.ndarray, action: np.ndarray, alpha: float) -> np.ndarray:
    """Convex combination alpha * current + (1 - alpha) * action, entrywise."""
    cur = np.asarray(current, dtype=np.float64)
    act = np.asarray(action, dtype=np.float64)
    if cur.shape != act.shape:
        raise InputError(f"blend length mismatch: {cur.shape} vs {act.shape}")
    if not (0.0 <= alpha <= 1.0):
        raise InputError(f"alpha must lie in [0, 1], got {alpha}")
    return alpha * cur + (1.0 - alpha) * act


def blend_sigma(current: np.ndarray, action: np.ndarray, alpha: float, bounds: SigmaBounds) -> np.ndarray:
    """Blend for the spread vector: same combination, re-clamped into bounds."""
    return bounds.clamp(blend(current, action, alpha))


@dataclass(frozen=True)
class AlphaSchedule:
    """Linear ramp of the blending weight from alpha_start to alpha_end.

    Early episodes keep alpha small so actions dominate the blend (wide
    search); late episodes keep the current distribution mostly intact.
    """

    alpha_start: float = 0.1
    alpha_end: float = 0.9
    total_episodes: int = 1
    shape: str = "linear"

    def __post_init__(self) -> None:
        if not (0.0 <= self.alpha_start <= 1.0 and 0.0 <= self.alpha_end <= 1.0):
            raise InputError("alpha endpoints must lie in [0, 1]")
        if self.alpha_start > self.alpha_end:
            raise InputError("alpha_start must not exceed alpha_end")
        if self.total_episodes < 1:
            raise InputError("total_episodes must be >= 1")
        if self.shape != "linear":
            raise InputError(f"unknown schedule shape {self.shape!r}")


def alpha_at(schedule: AlphaSchedule, episode: int) -> float:
    """Schedule value at an episode index, clamped to the endpoint range."""
    if episode < 0:
        raise InputError(f"episode must be >= 0, got {episode}")
    frac = min(1.0, episode / schedule.total_episodes)
    value = schedule.alpha_start + (schedule.alpha_end - schedule.alpha_start) * frac
    return min(max(value, schedule.alpha_start), schedule.alpha_end)
