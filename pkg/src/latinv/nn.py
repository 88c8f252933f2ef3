"""Minimal dense neural-network substrate: MLP forward/backward plus Adam.

Everything is plain float64 numpy with hand-written backpropagation, so the
analytic gradients can be cross-checked against central finite differences
(see `gradient_check`). Weight matrices are C-order (fan_in, fan_out) arrays;
a network's parameter list interleaves weights and biases layer by layer.

Supported activations: rectifier ("relu") on hidden layers and either an
identity or a bounded-tanh output layer (`a_max * tanh(z)`), which is what the
actor networks use to keep actions inside [-a_max, a_max].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, NumericalError

HIDDEN_ACTIVATION = "relu"
OUTPUT_IDENTITY = "identity"
OUTPUT_TANH = "tanh"


def _validate_vector(x: np.ndarray, size: int, what: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        if arr.shape[0] != size:
            raise InputError(f"{what} has length {arr.shape[0]}, expected {size}")
    elif arr.ndim == 2:
        if arr.shape[1] != size:
            raise InputError(f"{what} has width {arr.shape[1]}, expected {size}")
    else:
        raise InputError(f"{what} must be 1-D or 2-D, got ndim={arr.ndim}")
    return arr


@dataclass
class Mlp:
    """Fully connected network with per-layer weight and bias arrays.

    `weights[i]` has shape (layer_sizes[i], layer_sizes[i+1]); `biases[i]` has
    shape (layer_sizes[i+1],). Hidden layers apply relu; the output layer is
    identity or `a_max * tanh`.
    """

    layer_sizes: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    output_activation: str = OUTPUT_IDENTITY
    a_max: float = 1.0

    def __post_init__(self) -> None:
        if len(self.layer_sizes) < 2:
            raise InputError("an MLP needs at least an input and an output layer")
        if any(s < 1 for s in self.layer_sizes):
            raise InputError(f"layer sizes must be positive, got {self.layer_sizes}")
        expected = len(self.layer_sizes) - 1
        if len(self.weights) != expected or len(self.biases) != expected:
            raise InputError("weights/biases count does not match layer_sizes")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            want = (self.layer_sizes[i], self.layer_sizes[i + 1])
            if w.shape != want:
                raise InputError(f"weight {i} has shape {w.shape}, expected {want}")
            if b.shape != (self.layer_sizes[i + 1],):
                raise InputError(f"bias {i} has shape {b.shape}, expected {(self.layer_sizes[i + 1],)}")
        if self.output_activation not in (OUTPUT_IDENTITY, OUTPUT_TANH):
            raise InputError(f"unknown output activation {self.output_activation!r}")
        if self.output_activation == OUTPUT_TANH and self.a_max <= 0:
            raise InputError("a_max must be positive for a bounded-tanh output")

    # -- construction -------------------------------------------------------

    @classmethod
    def create(
        cls,
        layer_sizes: tuple[int, ...] | list[int],
        rng: np.random.Generator,
        output_activation: str = OUTPUT_IDENTITY,
        a_max: float = 1.0,
    ) -> "Mlp":
        """Seeded initialization: weights uniform in +-1/sqrt(fan_in), zero biases."""
        sizes = tuple(int(s) for s in layer_sizes)
        weights = []
        biases = []
        for fan_in, fan_out in zip(sizes, sizes[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        return cls(sizes, weights, biases, output_activation, a_max)

    def copy(self) -> "Mlp":
        return Mlp(
            self.layer_sizes,
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.output_activation,
            self.a_max,
        )

    # -- parameter plumbing -------------------------------------------------

    def parameters(self) -> list[np.ndarray]:
        """Live references, interleaved [W0, b0, W1, b1, ...]."""
        out: list[np.ndarray] = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    @property
    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters())

    # -- forward / backward -------------------------------------------------

    def forward(self, x: np.ndarray) -> np.ndarray:
        out, _ = self.forward_trace(x)
        return out

    def forward_trace(self, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        """Forward pass that also returns the per-layer activations.

        The trace holds [a0, a1, ..., aL] where a0 is the (batched) input and
        aL the final output; `backward_from_trace` consumes it.
        """
        arr = _validate_vector(x, self.layer_sizes[0], "input")
        single = arr.ndim == 1
        a = arr[None, :] if single else arr
        trace = [a]
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w + b
            if i < last:
                a = np.maximum(z, 0.0)
            elif self.output_activation == OUTPUT_TANH:
                a = self.a_max * np.tanh(z)
            else:
                a = z
            trace.append(a)
        out = trace[-1][0] if single else trace[-1]
        return out, trace

    def backward(self, x: np.ndarray, upstream: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
        """Gradients of sum(upstream * output) w.r.t. parameters and input.

        Pure function of (self, x, upstream). Returns (parameter gradients in
        `parameters()` order, gradient w.r.t. the input, matching its shape).
        """
        _, trace = self.forward_trace(x)
        grads, din = self.backward_from_trace(trace, upstream)
        if np.asarray(x).ndim == 1:
            din = din[0]
        return grads, din

    def backward_from_trace(
        self, trace: list[np.ndarray], upstream: np.ndarray
    ) -> tuple[list[np.ndarray], np.ndarray]:
        up = _validate_vector(upstream, self.layer_sizes[-1], "upstream gradient")
        g = up[None, :] if up.ndim == 1 else up
        if g.shape[0] != trace[0].shape[0]:
            raise InputError(
                f"upstream batch {g.shape[0]} does not match input batch {trace[0].shape[0]}"
            )
        last = len(self.weights) - 1
        grads: list[np.ndarray] = [np.empty(0)] * (2 * len(self.weights))
        for i in range(last, -1, -1):
            a_out = trace[i + 1]
            a_in = trace[i]
            if i < last:
                dz = g * (a_out > 0.0)
            elif self.output_activation == OUTPUT_TANH:
                # a_out = a_max * tanh(z)  =>  d a_out/dz = a_max - a_out^2 / a_max
                dz = g * (self.a_max - a_out * a_out / self.a_max)
            else:
                dz = g
            grads[2 * i] = a_in.T @ dz
            grads[2 * i + 1] = dz.sum(axis=0)
            g = dz @ self.weights[i].T
        return grads, g


def mlp_forward(net: Mlp, x: np.ndarray) -> np.ndarray:
    return net.forward(x)


def mlp_backward(net: Mlp, x: np.ndarray, upstream: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
    return net.backward(x, upstream)


# -- optimizer --------------------------------------------------------------


@dataclass
class AdamState:
    """Adaptive-moment accumulators for one parameter list.

    With zero accumulators and a zero gradient the update is exactly zero
    (the epsilon guard only shifts the denominator).
    """

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_parameters(cls, params: list[np.ndarray], lr: float = 1e-3) -> "AdamState":
        return cls(
            lr=lr,
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
        )


def optimizer_step(params: list[np.ndarray], grads: list[np.ndarray], state: AdamState) -> None:
    """One Adam update, in place on `params` and `state`.

    Raises NumericalError on any non-finite gradient entry; the training loop
    treats that as a fatal diagnostic rather than silently corrupting weights.
    """
    if len(params) != len(grads) or len(params) != len(state.m):
        raise InputError("params/grads/state lengths disagree")
    for i, g in enumerate(grads):
        if not np.all(np.isfinite(g)):
            raise NumericalError(f"non-finite gradient in parameter block {i}")
        if g.shape != params[i].shape:
            raise InputError(
                f"gradient block {i} shape {g.shape} != parameter shape {params[i].shape}"
            )
    state.step += 1
    t = state.step
    bc1 = 1.0 - state.beta1**t
    bc2 = 1.0 - state.beta2**t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        p -= state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)


# -- gradient checking ------------------------------------------------------


def finite_difference_grads(net: Mlp, x: np.ndarray, upstream: np.ndarray, step: float = 1e-5) -> list[np.ndarray]:
    """Central-difference gradients of sum(upstream * forward(x)).

    The independent oracle for `Mlp.backward`: perturbs every parameter one
    coordinate at a time, so cost scales with parameter count. Use small nets.
    """
    up = np.asarray(upstream, dtype=np.float64)

    def loss() -> float:
        return float(np.sum(net.forward(x) * up))

    out: list[np.ndarray] = []
    for p in net.parameters():
        g = np.zeros_like(p)
        flat = p.reshape(-1)
        gflat = g.reshape(-1)
        for j in range(flat.size):
            keep = flat[j]
            flat[j] = keep + step
            hi = loss()
            flat[j] = keep - step
            lo = loss()
            flat[j] = keep
            gflat[j] = (hi - lo) / (2.0 * step)
        out.append(g)
    return out


def max_relative_error(analytic: list[np.ndarray], numeric: list[np.ndarray], guard: float = 1e-8) -> float:
    worst = 0.0
    for a, n in zip(analytic, numeric):
        denom = np.maximum(guard, np.maximum(np.abs(a), np.abs(n)))
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


@dataclass(frozen=True)
class GradCheckResult:
    """Worst finite-difference mismatch across all checked nets."""

    worst: float
    trial: int
    block: int  # index into parameters(): even = weight, odd = bias
    coordinate: tuple[int, ...]

    def __str__(self) -> str:
        return (
            f"max relative error {self.worst:.3e} "
            f"(trial {self.trial}, parameter block {self.block}, coordinate {self.coordinate})"
        )


def gradient_check(
    trials: int = 20,
    seed: int = 0,
    step: float = 1e-5,
    guard: float = 1e-8,
    corrupt_layer: int | None = None,
) -> GradCheckResult:
    """Run `trials` randomized nets through the finite-difference oracle.

    Returns the worst relative error seen across all trials plus where it
    occurred. Shapes cover 1-3 hidden layers and both output activations.
    `corrupt_layer` is a test hook that flips the sign of one layer's
    analytic weight gradient, which a sound check must flag.

    The audit nets get random biases (training init zeroes them): with zero
    biases a dead narrow layer pins every downstream pre-activation exactly
    onto the relu kink, where central differences straddle the
    non-differentiability and the comparison is meaningless.
    """
    rng = np.random.default_rng(seed)
    result = GradCheckResult(0.0, -1, -1, ())
    for trial in range(trials):
        n_hidden = int(rng.integers(1, 4))
        sizes = [int(rng.integers(1, 7)) for _ in range(n_hidden + 2)]
        out_act = OUTPUT_TANH if trial % 2 else OUTPUT_IDENTITY
        net = Mlp.create(sizes, rng, output_activation=out_act, a_max=2.0)
        for b in net.biases:
            b[:] = rng.uniform(-0.5, 0.5, size=b.shape)
        x = rng.standard_normal(sizes[0])
        upstream = rng.standard_normal(sizes[-1])
        analytic, _ = net.backward(x, upstream)
        if corrupt_layer is not None:
            analytic[2 * corrupt_layer] = -analytic[2 * corrupt_layer]
        numeric = finite_difference_grads(net, x, upstream, step=step)
        for block, (a, n) in enumerate(zip(analytic, numeric)):
            denom = np.maximum(guard, np.maximum(np.abs(a), np.abs(n)))
            err = np.abs(a - n) / denom
            peak = float(err.max())
            if peak > result.worst:
                coord = np.unravel_index(int(err.argmax()), err.shape)
                result = GradCheckResult(peak, trial, block, tuple(int(c) for c in coord))
    return result
