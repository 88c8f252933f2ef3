"""Four-component rewards for one distribution-update transition.

Both agents are paid from the same transition. Four Gaussian evaluations
feed the breakdown:

    r_next   from N(mu_next, sigma_next^2)   -- the updated distribution
    r_a      from N(mu_a, |sigma_a|^2)       -- the raw actions
    r_mu     from N(mu_next, sigma_t^2)      -- mu's move, old spread
    r_sigma  from N(mu_t, sigma_next^2)      -- sigma's move, old center

Each evaluation draws ``samples_per_term`` codes and averages the log
target probability. The penalty term r_c = max(epsilon, -p_l) reuses the
r_next evaluation's mean log probability as p_l, so a transition costs
exactly 4 * samples_per_term scored codes, issued as a single batched
query.

Draw order is part of the contract: one standard-normal block per term,
in the order r_next, r_a, r_mu, r_sigma. Totals accumulate left to right
(w1, w2, w3, w4 term) so reruns are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import LatentDistribution, SigmaBounds, sample_codes
from .errors import InputError
from .oracles import OracleHandle, log_target_prob


@dataclass(frozen=True)
class RewardWeights:
    """Weights for the four reward terms plus the penalty floor."""

    w1: float = 1.0
    w2: float = 0.5
    w3: float = 1.0
    w4: float = -0.5
    epsilon: float = 0.2
    samples_per_term: int = 1

    def __post_init__(self) -> None:
        for name in ("w1", "w2", "w3", "w4", "epsilon"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise InputError(f"reward weight {name} must be finite, got {value!r}")
        if self.samples_per_term < 1:
            raise InputError(
                f"samples_per_term must be >= 1, got {self.samples_per_term}"
            )

    def to_dict(self) -> dict:
        return {
            "w1": self.w1,
            "w2": self.w2,
            "w3": self.w3,
            "w4": self.w4,
            "epsilon": self.epsilon,
            "samples_per_term": self.samples_per_term,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "RewardWeights":
        return cls(**payload)


@dataclass(frozen=True)
class RewardBreakdown:
    """One agent's reward terms and their weighted total."""

    r_next: float
    r_a: float
    r_omega: float
    r_c: float
    total: float


def penalty(log_target: float, epsilon: float) -> float:
    """Floored negative-log-probability penalty: max(epsilon, -p_l)."""
    return max(epsilon, -log_target)


def mean_log_target(probs: np.ndarray, label: int) -> float:
    """Mean log target probability over prob rows, accumulated in row order."""
    rows = np.atleast_2d(np.asarray(probs, dtype=np.float64))
    total = 0.0
    for row in rows:
        total += log_target_prob(row, label)
    return total / rows.shape[0]


def confidence_reward(
    oracle: OracleHandle,
    dist: LatentDistribution,
    label: int,
    rng: np.random.Generator,
    samples_per_term: int = 1,
) -> float:
    """Score a distribution: mean log target probability over sampled codes."""
    if samples_per_term < 1:
        raise InputError(f"samples_per_term must be >= 1, got {samples_per_term}")
    codes = sample_codes(dist, samples_per_term, rng)
    probs = oracle.query(codes)
    return mean_log_target(probs, label)


def _weighted_total(weights: RewardWeights, r_next: float, r_a: float,
                    r_omega: float, r_c: float) -> float:
    # Fixed left-to-right order; do not "simplify" into a dot product.
    total = weights.w1 * r_next
    total += weights.w2 * r_a
    total += weights.w3 * r_omega
    total += weights.w4 * r_c
    return total


def transition_rewards(
    oracle: OracleHandle,
    label: int,
    state: tuple[np.ndarray, np.ndarray],
    actions: tuple[np.ndarray, np.ndarray],
    next_state: tuple[np.ndarray, np.ndarray],
    weights: RewardWeights,
    bounds: SigmaBounds,
    rng: np.random.Generator,
) -> tuple[RewardBreakdown, RewardBreakdown]:
    """Reward breakdowns (mu agent, sigma agent) for one transition.

    ``state``, ``actions`` and ``next_state`` are (mu, sigma) pairs. The
    sigma action is an unconstrained actor output; its evaluation uses
    |sigma_a| clamped into ``bounds`` so the term stays a valid spread.

    Consumes rng with one standard-normal block per term in the order
    r_next, r_a, r_mu, r_sigma, then issues one batched oracle query of
    4 * samples_per_term codes.
    """
    mu_t, sigma_t = state
    mu_a, sigma_a = actions
    mu_next, sigma_next = next_state
    m = weights.samples_per_term

    sigma_a_std = bounds.clamp(np.abs(np.asarray(sigma_a, dtype=np.float64)))

    eval_dists = [
        LatentDistribution(mu_next, sigma_next),  # r_next
        LatentDistribution(mu_a, sigma_a_std),    # r_a
        LatentDistribution(mu_next, sigma_t),     # r_mu
        LatentDistribution(mu_t, sigma_next),     # r_sigma
    ]
    blocks = [sample_codes(d, m, rng) for d in eval_dists]
    probs = oracle.query(np.concatenate(blocks, axis=0))

    r_next = mean_log_target(probs[0 * m:1 * m], label)
    r_a = mean_log_target(probs[1 * m:2 * m], label)
    r_mu = mean_log_target(probs[2 * m:3 * m], label)
    r_sigma = mean_log_target(probs[3 * m:4 * m], label)
    r_c = penalty(r_next, weights.epsilon)

    breakdown_mu = RewardBreakdown(
        r_next=r_next, r_a=r_a, r_omega=r_mu, r_c=r_c,
        total=_weighted_total(weights, r_next, r_a, r_mu, r_c),
    )
    breakdown_sigma = RewardBreakdown(
        r_next=r_next, r_a=r_a, r_omega=r_sigma, r_c=r_c,
        total=_weighted_total(weights, r_next, r_a, r_sigma, r_c),
    )
    return breakdown_mu, breakdown_sigma
