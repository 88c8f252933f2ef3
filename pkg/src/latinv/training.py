"""Two-agent training loop over latent-distribution parameters.

One agent steers the mean vector, the other the spread vector, of a diagonal
Gaussian over latent space. Each round re-initializes the distribution,
lets both actors propose actions, blends them into the next distribution,
pays both agents from the same transition, and (once the replay buffer has
warmed up) takes one critic step, one actor step, and a soft target update
per agent. Critics are centralized by default: they see both agents'
actions ("maddpg" mode). "independent" mode rewires each critic to its own
agent's action only and is the comparison baseline.

Determinism contract: a run owns a single `numpy` generator seeded with
``[seed, label]`` and consumes it in a fixed documented order:

    1. network init: mu agent (actor, critic), sigma agent (actor, critic)
    2. per round: fresh distribution (2 draws), mu action noise, sigma
       action noise, the four reward sample blocks, then -- only when the
       buffer has passed warmup -- one batch-index draw
    3. extraction: fresh distribution (2 draws), then one sample block per
       scored candidate

Action noise is drawn even when its scale is zero so schedule changes
never shift later draws. Given (config, label, oracle spec) the report is
reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Iterator

import numpy as np

from .distributions import (
    AlphaSchedule,
    LatentDistribution,
    SigmaBounds,
    alpha_at,
    blend,
    blend_sigma,
    init_distribution,
    sample_codes,
)
from .errors import (
    ConfigError,
    InputError,
    NumericalError,
    OracleMismatchError,
    OracleUnavailableError,
    ProtocolError,
)
from .nn import AdamState, Mlp, optimizer_step
from .oracles import OracleHandle
from .rewards import RewardBreakdown, RewardWeights, mean_log_target, transition_rewards

MODE_MADDPG = "maddpg"
MODE_INDEPENDENT = "independent"
BOOTSTRAP_BOOTSTRAPPED = "bootstrapped"
BOOTSTRAP_TERMINAL = "terminal"

STATUS_COMPLETED = "completed"
STATUS_FAILED = "failed"

FINAL_FROM_ROLLOUT = "rollout"
FINAL_FROM_TRAINING = "training_best"


@dataclass(frozen=True)
class NoiseSchedule:
    """Exploration noise scale, decaying exponentially across a run."""

    scale_start: float = 0.3
    scale_end: float = 0.01

    def __post_init__(self) -> None:
        if not (0.0 < self.scale_end <= self.scale_start):
            raise InputError(
                f"need 0 < scale_end <= scale_start, got {self.scale_end}, {self.scale_start}"
            )

    def at(self, episode: int, total_episodes: int) -> float:
        if episode < 0:
            raise InputError(f"episode must be >= 0, got {episode}")
        if total_episodes <= 1:
            return self.scale_start if episode == 0 else self.scale_end
        frac = min(1.0, episode / (total_episodes - 1))
        return self.scale_start * (self.scale_end / self.scale_start) ** frac


@dataclass(frozen=True)
class TrainerConfig:
    """Everything a single attack run needs besides the oracle and label.

    Defaults are the desk-scale synthetic-testbed settings; `max_rounds`
    scales up for full runs. `warmup_min_buffer` is the buffer length that
    must be exceeded before updates start.
    """

    latent_dim: int = 8
    hidden_dims: tuple[int, ...] = (64, 64)
    learning_rate: float = 1e-3
    gamma: float = 0.99
    tau: float = 5e-3
    buffer_capacity: int = 1_000_000
    batch_size: int = 256
    warmup_min_buffer: int = 256
    max_rounds: int = 5_000
    a_max: float = 3.0
    sigma_min: float = 1e-3
    sigma_max: float = 3.0
    noise_start: float = 0.3
    noise_end: float = 0.01
    alpha_start: float = 0.1
    alpha_end: float = 0.9
    weights: RewardWeights = field(default_factory=RewardWeights)
    bootstrap_mode: str = BOOTSTRAP_BOOTSTRAPPED
    mode: str = MODE_MADDPG
    rollout_steps: int = 20
    extraction_samples: int = 64
    seed: int = 0

    def __post_init__(self) -> None:
        if self.latent_dim < 1:
            raise ConfigError(f"latent_dim must be >= 1, got {self.latent_dim}")
        if not self.hidden_dims or any(h < 1 for h in self.hidden_dims):
            raise ConfigError(f"hidden_dims must be positive, got {self.hidden_dims}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if not (0.0 <= self.gamma <= 1.0):
            raise ConfigError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not (0.0 < self.tau <= 1.0):
            raise ConfigError(f"tau must lie in (0, 1], got {self.tau}")
        if not (1 <= self.batch_size <= self.warmup_min_buffer <= self.buffer_capacity):
            raise ConfigError(
                "need batch_size <= warmup_min_buffer <= buffer_capacity, got "
                f"{self.batch_size}, {self.warmup_min_buffer}, {self.buffer_capacity}"
            )
        if self.max_rounds < 0:
            raise ConfigError(f"max_rounds must be >= 0, got {self.max_rounds}")
        if self.a_max <= 0:
            raise ConfigError(f"a_max must be positive, got {self.a_max}")
        if self.bootstrap_mode not in (BOOTSTRAP_BOOTSTRAPPED, BOOTSTRAP_TERMINAL):
            raise ConfigError(f"unknown bootstrap_mode {self.bootstrap_mode!r}")
        if self.mode not in (MODE_MADDPG, MODE_INDEPENDENT):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.rollout_steps < 0:
            raise ConfigError(f"rollout_steps must be >= 0, got {self.rollout_steps}")
        if self.extraction_samples < 1:
            raise ConfigError(
                f"extraction_samples must be >= 1, got {self.extraction_samples}"
            )
        # Delegate range checks on the remaining groups to their own types.
        try:
            self.sigma_bounds()
            self.noise_schedule()
            self.alpha_schedule()
        except InputError as exc:
            raise ConfigError(str(exc)) from None

    def sigma_bounds(self) -> SigmaBounds:
        return SigmaBounds(self.sigma_min, self.sigma_max)

    def noise_schedule(self) -> NoiseSchedule:
        return NoiseSchedule(self.noise_start, self.noise_end)

    def alpha_schedule(self) -> AlphaSchedule:
        return AlphaSchedule(self.alpha_start, self.alpha_end, max(1, self.max_rounds))

    def to_dict(self) -> dict:
        out: dict = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "weights":
                value = value.to_dict()
            elif f.name == "hidden_dims":
                value = list(value)
            out[f.name] = value
        return out

    @classmethod
    def from_dict(cls, payload: dict) -> "TrainerConfig":
        if not isinstance(payload, dict):
            raise ConfigError(f"trainer config must be an object, got {type(payload).__name__}")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(payload) - known)
        if unknown:
            raise ConfigError(f"unknown trainer config fields: {', '.join(unknown)}")
        kwargs = dict(payload)
        if "hidden_dims" in kwargs:
            kwargs["hidden_dims"] = tuple(kwargs["hidden_dims"])
        if "weights" in kwargs:
            raw = kwargs["weights"]
            if not isinstance(raw, dict):
                raise ConfigError("weights must be an object")
            try:
                kwargs["weights"] = RewardWeights.from_dict(raw)
            except TypeError as exc:
                raise ConfigError(f"bad reward weights: {exc}") from exc
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(f"bad trainer config: {exc}") from exc


# -- agents ------------------------------------------------------------------


@dataclass
class AgentNets:
    """Actor/critic pair with frozen-copy targets and their optimizers."""

    actor: Mlp
    critic: Mlp
    target_actor: Mlp
    target_critic: Mlp
    actor_opt: AdamState
    critic_opt: AdamState

    @classmethod
    def create(
        cls,
        n: int,
        hidden_dims: tuple[int, ...],
        a_max: float,
        critic_action_dim: int,
        lr: float,
        rng: np.random.Generator,
    ) -> "AgentNets":
        """Build one agent; consumes rng for actor weights then critic weights."""
        obs_dim = 2 * n
        actor = Mlp.create((obs_dim, *hidden_dims, n), rng, output_activation="tanh", a_max=a_max)
        critic = Mlp.create((obs_dim + critic_action_dim, *hidden_dims, 1), rng)
        return cls(
            actor=actor,
            critic=critic,
            target_actor=actor.copy(),
            target_critic=critic.copy(),
            actor_opt=AdamState.for_parameters(actor.parameters(), lr=lr),
            critic_opt=AdamState.for_parameters(critic.parameters(), lr=lr),
        )


@dataclass(frozen=True)
class Transition:
    """One stored experience: both agents' views of a single round."""

    mu_t: np.ndarray
    mu_a: np.ndarray
    mu_next: np.ndarray
    R_mu: float
    sigma_t: np.ndarray
    sigma_a: np.ndarray
    sigma_next: np.ndarray
    R_sigma: float

    def __post_init__(self) -> None:
        n = len(self.mu_t)
        for name in ("mu_a", "mu_next", "sigma_t", "sigma_a", "sigma_next"):
            if len(getattr(self, name)) != n:
                raise InputError(f"transition field {name} has mismatched length")
        if not (np.isfinite(self.R_mu) and np.isfinite(self.R_sigma)):
            raise InputError("transition rewards must be finite")


class ReplayBuffer:
    """Bounded FIFO of transitions, stored as rows of one float64 array.

    Rows grow geometrically up to `capacity` so desk-scale runs never touch
    the full allocation. Once full, writes wrap and evict oldest-first.
    """

    _FIELDS = ("mu_t", "sigma_t", "mu_a", "sigma_a", "mu_next", "sigma_next")

    def __init__(self, capacity: int, latent_dim: int):
        if capacity < 1:
            raise InputError(f"capacity must be >= 1, got {capacity}")
        if latent_dim < 1:
            raise InputError(f"latent_dim must be >= 1, got {latent_dim}")
        self.capacity = int(capacity)
        self.latent_dim = int(latent_dim)
        self._row_width = 6 * latent_dim + 2
        self._rows = np.empty((min(self.capacity, 1024), self._row_width))
        self._size = 0
        self._cursor = 0  # next physical write slot

    def __len__(self) -> int:
        return self._size

    def _ensure_room(self) -> None:
        if self._cursor < self._rows.shape[0] or self._rows.shape[0] == self.capacity:
            return
        grown = min(self.capacity, 2 * self._rows.shape[0])
        rows = np.empty((grown, self._row_width))
        rows[: self._size] = self._rows[: self._size]
        self._rows = rows

    def _pack(self, t: Transition) -> np.ndarray:
        n = self.latent_dim
        row = np.empty(self._row_width)
        for i, name in enumerate(self._FIELDS):
            vec = np.asarray(getattr(t, name), dtype=np.float64)
            if vec.shape != (n,):
                raise InputError(f"transition field {name} has shape {vec.shape}, expected ({n},)")
            row[i * n : (i + 1) * n] = vec
        row[6 * n] = t.R_mu
        row[6 * n + 1] = t.R_sigma
        return row

    def _unpack(self, row: np.ndarray) -> Transition:
        n = self.latent_dim
        parts = {name: row[i * n : (i + 1) * n].copy() for i, name in enumerate(self._FIELDS)}
        return Transition(
            mu_t=parts["mu_t"],
            mu_a=parts["mu_a"],
            mu_next=parts["mu_next"],
            R_mu=float(row[6 * n]),
            sigma_t=parts["sigma_t"],
            sigma_a=parts["sigma_a"],
            sigma_next=parts["sigma_next"],
            R_sigma=float(row[6 * n + 1]),
        )

    def store(self, t: Transition) -> None:
        self._ensure_room()
        self._rows[self._cursor] = self._pack(t)
        self._cursor = (self._cursor + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def contents(self) -> Iterator[Transition]:
        """Iterate oldest to newest."""
        for i in range(self._size):
            yield self._unpack(self._rows[self._logical_to_physical(i)])

    def _logical_to_physical(self, i: int) -> int:
        if self._size < self.capacity:
            return i
        return (self._cursor + i) % self.capacity

    def _draw_indices(self, batch_size: int, rng: np.random.Generator) -> np.ndarray:
        if batch_size < 1:
            raise InputError(f"batch_size must be >= 1, got {batch_size}")
        if self._size < batch_size:
            raise InputError(
                f"buffer holds {self._size} transitions, cannot draw a batch of {batch_size}"
            )
        return rng.integers(0, self._size, size=batch_size)

    def sample_rows(self, batch_size: int, rng: np.random.Generator) -> np.ndarray:
        """Uniform-with-replacement batch as a (batch, row_width) array."""
        logical = self._draw_indices(batch_size, rng)
        if self._size < self.capacity:
            physical = logical
        else:
            physical = (self._cursor + logical) % self.capacity
        return self._rows[physical]

    def row_views(self, rows: np.ndarray) -> dict[str, np.ndarray]:
        """Named column blocks of a sampled batch."""
        n = self.latent_dim
        out = {
            name: rows[:, i * n : (i + 1) * n] for i, name in enumerate(self._FIELDS)
        }
        out["R_mu"] = rows[:, 6 * n]
        out["R_sigma"] = rows[:, 6 * n + 1]
        return out


def store(buffer: ReplayBuffer, t: Transition) -> None:
    buffer.store(t)


def sample_batch(
    buffer: ReplayBuffer, batch_size: int, rng: np.random.Generator
) -> list[Transition]:
    """Uniform sample with replacement; consumes one index draw from rng."""
    rows = buffer.sample_rows(batch_size, rng)
    return [buffer._unpack(row) for row in rows]


# -- acting ------------------------------------------------------------------


def observe(dist: LatentDistribution) -> np.ndarray:
    """Observation encoding of the current state: [mu || sigma], length 2n."""
    return np.concatenate([dist.mu, dist.sigma])


def select_action(
    agent: AgentNets,
    observation: np.ndarray,
    noise_scale: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Actor output plus exploration noise, clamped to the action bound.

    The noise vector is drawn unconditionally so a zero scale consumes the
    same rng draws as a nonzero one.
    """
    out = agent.actor.forward(observation)
    noise = rng.standard_normal(out.shape[0])
    action = out + noise_scale * noise
    return np.clip(action, -agent.actor.a_max, agent.actor.a_max)


# -- updates -----------------------------------------------------------------


def _critic_input(obs: np.ndarray, a_mu: np.ndarray, a_sigma: np.ndarray,
                  mode: str, agent_index: int) -> np.ndarray:
    if mode == MODE_MADDPG:
        return np.concatenate([obs, a_mu, a_sigma], axis=1)
    own = a_mu if agent_index == 0 else a_sigma
    return np.concatenate([obs, own], axis=1)


def critic_update(
    agents: tuple[AgentNets, AgentNets],
    batch: dict[str, np.ndarray],
    gamma: float,
    bootstrap_mode: str,
    mode: str = MODE_MADDPG,
) -> tuple[float, float]:
    """One squared-error step per critic against its TD target.

    Terminal mode regresses on the stored reward alone; bootstrapped mode
    adds the discounted target-critic value at the next state under the
    target actors. Returns the pre-step losses (mu agent, sigma agent).
    """
    obs = np.concatenate([batch["mu_t"], batch["sigma_t"]], axis=1)
    next_obs = np.concatenate([batch["mu_next"], batch["sigma_next"]], axis=1)
    rewards = (batch["R_mu"], batch["R_sigma"])
    batch_size = obs.shape[0]

    next_actions = None
    if bootstrap_mode == BOOTSTRAP_BOOTSTRAPPED:
        next_actions = (
            agents[0].target_actor.forward(next_obs),
            agents[1].target_actor.forward(next_obs),
        )

    losses = []
    for idx, agent in enumerate(agents):
        reward = rewards[idx][:, None]
        if next_actions is None:
            y = reward
        else:
            next_in = _critic_input(next_obs, next_actions[0], next_actions[1], mode, idx)
            y = reward + gamma * agent.target_critic.forward(next_in)
        crit_in = _critic_input(obs, batch["mu_a"], batch["sigma_a"], mode, idx)
        q, trace = agent.critic.forward_trace(crit_in)
        diff = q - y
        loss = float(np.mean(diff * diff))
        if not np.isfinite(loss):
            raise NumericalError(f"critic loss for agent {idx} is not finite: {loss}")
        upstream = (2.0 / batch_size) * diff
        grads, _ = agent.critic.backward_from_trace(trace, upstream)
        optimizer_step(agent.critic.parameters(), grads, agent.critic_opt)
        losses.append(loss)
    return losses[0], losses[1]


def actor_update(
    agents: tuple[AgentNets, AgentNets],
    batch: dict[str, np.ndarray],
    mode: str = MODE_MADDPG,
) -> tuple[float, float]:
    """One ascent step per actor on its critic's mean value.

    Both policy outputs are snapshot before either update, so each critic
    evaluation sees the other agent's pre-step policy. Returns the negated
    pre-step mean critic values.
    """
    obs = np.concatenate([batch["mu_t"], batch["sigma_t"]], axis=1)
    batch_size = obs.shape[0]
    n = agents[0].actor.layer_sizes[-1]

    pi_traces = []
    pi_actions = []
    for agent in agents:
        a, trace = agent.actor.forward_trace(obs)
        pi_actions.append(a)
        pi_traces.append(trace)

    losses = []
    for idx, agent in enumerate(agents):
        crit_in = _critic_input(obs, pi_actions[0], pi_actions[1], mode, idx)
        q = agent.critic.forward(crit_in)
        loss = float(-np.mean(q))
        if not np.isfinite(loss):
            raise NumericalError(f"actor loss for agent {idx} is not finite: {loss}")
        upstream = np.full((batch_size, 1), -1.0 / batch_size)
        _, din = agent.critic.backward(crit_in, upstream)
        # Own action occupies [2n:3n) of the critic input, except the sigma
        # agent's slot in centralized mode, which sits after mu's at [3n:4n).
        own_start = 3 * n if (mode == MODE_MADDPG and idx == 1) else 2 * n
        own_grad = din[:, own_start : own_start + n]
        grads, _ = agent.actor.backward_from_trace(pi_traces[idx], own_grad)
        optimizer_step(agent.actor.parameters(), grads, agent.actor_opt)
        losses.append(loss)
    return losses[0], losses[1]


def soft_update(online: Mlp, target: Mlp, tau: float) -> None:
    """Polyak update: target <- tau * online + (1 - tau) * target, in place."""
    if online.layer_sizes != target.layer_sizes:
        raise InputError(
            f"shape mismatch: online {online.layer_sizes} vs target {target.layer_sizes}"
        )
    if not (0.0 <= tau <= 1.0):
        raise InputError(f"tau must lie in [0, 1], got {tau}")
    for op, tp in zip(online.parameters(), target.parameters()):
        tp[...] = tau * op + (1.0 - tau) * tp


# -- the attack loop ---------------------------------------------------------


@dataclass
class AttackReport:
    """Everything one run produced: per-episode history, best, final, totals."""

    label: int
    seed: int
    mode: str
    status: str
    error: str | None
    config: dict
    oracle_info: dict
    episodes: list[dict]
    best: dict | None
    final: dict | None
    queries: dict

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "seed": self.seed,
            "mode": self.mode,
            "status": self.status,
            "error": self.error,
            "config": self.config,
            "oracle": self.oracle_info,
            "episodes": self.episodes,
            "best": self.best,
            "final": self.final,
            "queries": self.queries,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "AttackReport":
        return cls(
            label=payload["label"],
            seed=payload["seed"],
            mode=payload["mode"],
            status=payload["status"],
            error=payload["error"],
            config=payload["config"],
            oracle_info=payload["oracle"],
            episodes=payload["episodes"],
            best=payload["best"],
            final=payload["final"],
            queries=payload["queries"],
        )


def _dist_payload(dist: LatentDistribution) -> dict:
    return dist.to_dict()


def make_agents(config: TrainerConfig, rng: np.random.Generator) -> tuple[AgentNets, AgentNets]:
    """Both agents in draw order: mu agent first, then sigma agent."""
    n = config.latent_dim
    critic_action_dim = 2 * n if config.mode == MODE_MADDPG else n
    agent_mu = AgentNets.create(
        n, config.hidden_dims, config.a_max, critic_action_dim, config.learning_rate, rng
    )
    agent_sigma = AgentNets.create(
        n, config.hidden_dims, config.a_max, critic_action_dim, config.learning_rate, rng
    )
    return agent_mu, agent_sigma


def run_attack(config: TrainerConfig, oracle: OracleHandle, label: int) -> AttackReport:
    """Full training run against one target label; see the module docstring.

    The oracle must match `config.latent_dim` and expose the label. An
    oracle failure mid-run yields a report covering the rounds that
    finished, with status "failed"; any other exception propagates.
    """
    if oracle.latent_dim != config.latent_dim:
        raise OracleMismatchError(
            f"config latent_dim {config.latent_dim} != oracle latent_dim {oracle.latent_dim}"
        )
    if not (0 <= label < oracle.num_classes):
        raise OracleMismatchError(
            f"label {label} outside oracle's {oracle.num_classes} classes"
        )

    rng = np.random.default_rng([config.seed, label])
    agents = make_agents(config, rng)
    bounds = config.sigma_bounds()
    alpha_schedule = config.alpha_schedule()
    noise_schedule = config.noise_schedule()
    buffer = ReplayBuffer(config.buffer_capacity, config.latent_dim)

    queries_before = oracle.ledger.total_codes_scored
    episodes: list[dict] = []
    best: dict | None = None
    best_total = -np.inf
    best_dist: LatentDistribution | None = None
    status = STATUS_COMPLETED
    error: str | None = None

    try:
        for episode in range(config.max_rounds):
            dist = init_distribution(config.latent_dim, bounds, rng)
            obs = observe(dist)
            noise = noise_schedule.at(episode, config.max_rounds)
            a_mu = select_action(agents[0], obs, noise, rng)
            a_sigma = select_action(agents[1], obs, noise, rng)
            alpha = alpha_at(alpha_schedule, episode)
            mu_next = blend(dist.mu, a_mu, alpha)
            sigma_next = blend_sigma(dist.sigma, a_sigma, alpha, bounds)

            breakdown_mu, breakdown_sigma = transition_rewards(
                oracle,
                label,
                (dist.mu, dist.sigma),
                (a_mu, a_sigma),
                (mu_next, sigma_next),
                config.weights,
                bounds,
                rng,
            )
            buffer.store(
                Transition(
                    mu_t=dist.mu,
                    mu_a=a_mu,
                    mu_next=mu_next,
                    R_mu=breakdown_mu.total,
                    sigma_t=dist.sigma,
                    sigma_a=a_sigma,
                    sigma_next=sigma_next,
                    R_sigma=breakdown_sigma.total,
                )
            )

            if len(buffer) > config.warmup_min_buffer:
                rows = buffer.sample_rows(config.batch_size, rng)
                batch = buffer.row_views(rows)
                critic_update(agents, batch, config.gamma, config.bootstrap_mode, config.mode)
                actor_update(agents, batch, config.mode)
                soft_update(agents[0].actor, agents[0].target_actor, config.tau)
                soft_update(agents[0].critic, agents[0].target_critic, config.tau)
                soft_update(agents[1].actor, agents[1].target_actor, config.tau)
                soft_update(agents[1].critic, agents[1].target_critic, config.tau)

            total = breakdown_mu.total + breakdown_sigma.total
            if total > best_total:
                best_total = total
                best_dist = LatentDistribution(mu_next, sigma_next)
                best = {
                    "episode": episode,
                    "R_mu": breakdown_mu.total,
                    "R_sigma": breakdown_sigma.total,
                    **_dist_payload(best_dist),
                }
            episodes.append(
                {
                    "episode": episode,
                    "R_mu": breakdown_mu.total,
                    "R_sigma": breakdown_sigma.total,
                    "r_next": breakdown_mu.r_next,
                    "r_a": breakdown_mu.r_a,
                    "r_mu": breakdown_mu.r_omega,
                    "r_sigma": breakdown_sigma.r_omega,
                    "r_c": breakdown_mu.r_c,
                    "alpha": alpha,
                    "noise": noise,
                    "queries": oracle.ledger.total_codes_scored - queries_before,
                }
            )
    except (OracleUnavailableError, ProtocolError) as exc:
        status = STATUS_FAILED
        error = str(exc)

    training_queries = oracle.ledger.total_codes_scored - queries_before

    final: dict | None = None
    extraction_queries = 0
    if status == STATUS_COMPLETED and best_dist is not None:
        final, extraction_queries = _finalize(
            agents, config, oracle, label, best_dist, bounds, rng
        )

    return AttackReport(
        label=label,
        seed=config.seed,
        mode=config.mode,
        status=status,
        error=error,
        config=config.to_dict(),
        oracle_info={"latent_dim": oracle.latent_dim, "num_classes": oracle.num_classes},
        episodes=episodes,
        best=best,
        final=final,
        queries={
            "training": training_queries,
            "extraction": extraction_queries,
            "total": training_queries + extraction_queries,
        },
    )


def extract_distribution(
    agents: tuple[AgentNets, AgentNets],
    config: TrainerConfig,
    oracle: OracleHandle,
    label: int,
    rng: np.random.Generator,
) -> tuple[LatentDistribution, float] | None:
    """Deterministic rollout of the trained actors from a fresh start.

    Runs `config.rollout_steps` noiseless steps with the blend pinned at
    alpha_end, scoring each stepped distribution with
    `config.extraction_samples` codes; returns the best (distribution,
    mean log target probability), or None when rollout_steps is zero.
    """
    if config.rollout_steps == 0:
        return None
    bounds = config.sigma_bounds()
    dist = init_distribution(config.latent_dim, bounds, rng)
    best_dist: LatentDistribution | None = None
    best_score = -np.inf
    for _ in range(config.rollout_steps):
        obs = observe(dist)
        a_mu = agents[0].actor.forward(obs)
        a_sigma = agents[1].actor.forward(obs)
        mu_next = blend(dist.mu, a_mu, config.alpha_end)
        sigma_next = blend_sigma(dist.sigma, a_sigma, config.alpha_end, bounds)
        dist = LatentDistribution(mu_next, sigma_next)
        score = _score_dist(oracle, dist, label, config.extraction_samples, rng)
        if score > best_score:
            best_score = score
            best_dist = dist
    assert best_dist is not None
    return best_dist, best_score


def _score_dist(
    oracle: OracleHandle,
    dist: LatentDistribution,
    label: int,
    samples: int,
    rng: np.random.Generator,
) -> float:
    codes = sample_codes(dist, samples, rng)
    return mean_log_target(oracle.query(codes), label)


def _finalize(
    agents: tuple[AgentNets, AgentNets],
    config: TrainerConfig,
    oracle: OracleHandle,
    label: int,
    training_best: LatentDistribution,
    bounds: SigmaBounds,
    rng: np.random.Generator,
) -> tuple[dict, int]:
    """Pick the run's final distribution: best rollout step vs training best.

    Costs (rollout_steps + 1) * extraction_samples queries, or zero when
    rollout_steps is zero (the training best wins by default).
    """
    queries_before = oracle.ledger.total_codes_scored
    rolled = extract_distribution(agents, config, oracle, label, rng)
    if rolled is None:
        final = {
            "source": FINAL_FROM_TRAINING,
            "score": None,
            **_dist_payload(training_best),
        }
        return final, 0
    rollout_dist, rollout_score = rolled
    training_score = _score_dist(oracle, training_best, label, config.extraction_samples, rng)
    if rollout_score > training_score:
        final = {
            "source": FINAL_FROM_ROLLOUT,
            "score": rollout_score,
            **_dist_payload(rollout_dist),
        }
    else:
        final = {
            "source": FINAL_FROM_TRAINING,
            "score": training_score,
            **_dist_payload(training_best),
        }
    return final, oracle.ledger.total_codes_scored - queries_before
