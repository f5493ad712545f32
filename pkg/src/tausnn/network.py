"""Fully connected spiking network unrolled over T steps, loss and BPTT.

Hidden layers are LIF neurons; the output layer is a non-spiking leaky
integrator with the same leak, read out at the final step. Backpropagation
through time replaces the spike nondifferentiability with the rectangular
surrogate; the "smoothed" mode swaps the hard threshold for the matching
ramp so gradients can be verified by finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .encoding import InputPlan
from .neuron import LifParams
from .numerics import Rng, gaussian_init

__all__ = [
    "Architecture",
    "TauSnn",
    "ForwardTrace",
    "forward",
    "loss",
    "backward",
    "predict",
    "set_inference_tau",
    "params_to_vector",
    "vector_to_params",
]


@dataclass(frozen=True)
class Architecture:
    layer_sizes: tuple[int, ...]
    t_steps: int

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        object.__setattr__(self, "layer_sizes", sizes)
        if len(sizes) < 2:
            raise ValueError("need at least input and output layer sizes")
        if any(s < 1 for s in sizes):
            raise ValueError(f"layer sizes must be positive, got {sizes}")
        if sizes[-1] < 2:
            raise ValueError("output layer needs at least 2 classes")
        if self.t_steps < 1:
            raise ValueError("t_steps must be positive")

    @property
    def n_hidden(self) -> int:
        return len(self.layer_sizes) - 2


@dataclass
class TauSnn:
    architecture: Architecture
    weights: list[np.ndarray]  # weights[i]: (sizes[i+1], sizes[i]) float32
    biases: list[np.ndarray]   # biases[i]: (sizes[i+1],) float32
    lif_params: LifParams
    mode: str = "spiking"

    def __post_init__(self):
        sizes = self.architecture.layer_sizes
        if len(self.weights) != len(sizes) - 1 or len(self.biases) != len(sizes) - 1:
            raise ValueError("need one weight/bias pair per layer transition")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            expect = (sizes[i + 1], sizes[i])
            if w.shape != expect:
                raise ValueError(f"weight {i} shape {w.shape}, expected {expect}")
            if b.shape != (sizes[i + 1],):
                raise ValueError(f"bias {i} shape {b.shape}, expected ({sizes[i+1]},)")
        if self.mode not in ("spiking", "smoothed"):
            raise ValueError(f"mode must be 'spiking' or 'smoothed', got {self.mode!r}")

    @classmethod
    def initialize(cls, architecture: Architecture, lif_params: LifParams,
                   rng: Rng, mode: str = "spiking") -> "TauSnn":
        """Gaussian weights with std 1/sqrt(fan_in), zero biases."""
        sizes = architecture.layer_sizes
        weights, biases = [], []
        for i in range(len(sizes) - 1):
            std = 1.0 / np.sqrt(sizes[i])
            weights.append(gaussian_init(sizes[i + 1], sizes[i], std, rng))
            biases.append(np.zeros(sizes[i + 1], dtype=np.float32))
        return cls(architecture, weights, biases, lif_params, mode)


@dataclass
class ForwardTrace:
    """Per-step pre-reset membranes and spikes (hidden layers), output potentials."""
    membranes: list[np.ndarray] = field(default_factory=list)  # per layer: (T, n)
    spikes: list[np.ndarray] = field(default_factory=list)     # per layer: (T, n)
    output_potentials: np.ndarray | None = None                # (T, n_out)

    def total_spikes(self) -> float:
        return float(sum(s.sum() for s in self.spikes))


def _step_fn(model: TauSnn):
    p = model.lif_params
    if model.mode == "smoothed":
        return lambda v, cur: kernels.lif_step_smoothed(
            v, cur, 1.0 / p.tau_discrete, p.v_rest, p.v_threshold,
            p.surrogate_half_width, p.reset_code)
    return lambda v, cur: kernels.lif_step(
        v, cur, 1.0 / p.tau_discrete, p.v_rest, p.v_threshold, p.reset_code)


def forward_batch(model: TauSnn, currents: np.ndarray, record: bool = False):
    """Unroll over (B, T, n_in) currents; returns (logits (B, n_out), tape or None).

    The tape holds, per step, the pre-reset membranes, spike outputs and the
    inputs seen by every layer; backward_batch consumes it.
    """
    currents = np.ascontiguousarray(currents, dtype=np.float64)
    arch = model.architecture
    if currents.ndim != 3 or currents.shape[2] != arch.layer_sizes[0]:
        raise ValueError(
            f"currents shape {currents.shape} does not match input size "
            f"{arch.layer_sizes[0]}")
    batch, t_steps, _ = currents.shape
    p = model.lif_params
    inv_tau = 1.0 / p.tau_discrete
    w64 = [w.astype(np.float64) for w in model.weights]
    b64 = [b.astype(np.float64) for b in model.biases]
    step = _step_fn(model)

    n_hidden = arch.n_hidden
    v = [np.full((batch, arch.layer_sizes[l + 1]), p.v_rest) for l in range(n_hidden)]
    u = np.full((batch, arch.layer_sizes[-1]), p.v_rest)

    tape = None
    if record:
        tape = {
            "membranes": [np.empty((t_steps, batch, arch.layer_sizes[l + 1]))
                          for l in range(n_hidden)],
            "spikes": [np.empty((t_steps, batch, arch.layer_sizes[l + 1]))
                       for l in range(n_hidden)],
            "inputs": [np.empty((t_steps, batch, arch.layer_sizes[l]))
                       for l in range(n_hidden + 1)],
            "output_potentials": np.empty((t_steps, batch, arch.layer_sizes[-1])),
        }

    for t in range(t_steps):
        x = currents[:, t, :]
        for l in range(n_hidden):
            if record:
                tape["inputs"][l][t] = x
            cur = x @ w64[l].T + b64[l]
            v[l], m, s = step(v[l], cur)
            if record:
                tape["membranes"][l][t] = m
                tape["spikes"][l][t] = s
            x = s
        if record:
            tape["inputs"][n_hidden][t] = x
        out_cur = x @ w64[-1].T + b64[-1]
        u = kernels.integrator_step(u, out_cur, inv_tau, p.v_rest)
        if record:
            tape["output_potentials"][t] = u
    return u, tape


def forward(model: TauSnn, plan: InputPlan) -> tuple[np.ndarray, ForwardTrace]:
    """Single-sample forward pass; returns final-step logits and the trace."""
    arch = model.architecture
    if plan.width != arch.layer_sizes[0]:
        raise ValueError(f"plan width {plan.width} != input size {arch.layer_sizes[0]}")
    if plan.steps != arch.t_steps:
        raise ValueError(f"plan has {plan.steps} steps, architecture expects {arch.t_steps}")
    logits, tape = forward_batch(model, plan.currents[None, :, :], record=True)
    trace = ForwardTrace(
        membranes=[m[:, 0, :] for m in tape["membranes"]],
        spikes=[s[:, 0, :] for s in tape["spikes"]],
        output_potentials=tape["output_potentials"][:, 0, :],
    )
    return logits[0], trace


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def loss(logits: np.ndarray, label: int) -> float:
    """Softmax cross-entropy against a one-hot label."""
    logits = np.asarray(logits, dtype=np.float64)
    if not 0 <= label < logits.size:
        raise ValueError(f"label {label} out of range for {logits.size} classes")
    z = logits - logits.max()
    return float(np.log(np.exp(z).sum()) - z[label])


def loss_batch(logits: np.ndarray, labels: np.ndarray) -> float:
    z = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1))
    return float(np.mean(lse - z[np.arange(len(labels)), labels]))


def backward_batch(model: TauSnn, currents: np.ndarray, labels: np.ndarray):
    """Mean-loss BPTT over a batch; returns (loss, weight grads, bias grads)."""
    labels = np.asarray(labels)
    logits, tape = forward_batch(model, currents, record=True)
    batch = logits.shape[0]
    arch = model.architecture
    p = model.lif_params
    inv_tau = 1.0 / p.tau_discrete
    carry = 1.0 - inv_tau
    n_hidden = arch.n_hidden
    w64 = [w.astype(np.float64) for w in model.weights]

    probs = softmax(logits)
    probs[np.arange(batch), labels] -= 1.0
    g_u = probs / batch
    mean_loss = loss_batch(logits, labels)

    grad_w = [np.zeros_like(w, dtype=np.float64) for w in model.weights]
    grad_b = [np.zeros_like(b, dtype=np.float64) for b in model.biases]
    g_v = [np.zeros((batch, arch.layer_sizes[l + 1])) for l in range(n_hidden)]

    for t in range(arch.t_steps - 1, -1, -1):
        # output integrator: current enters additively each step
        grad_w[-1] += g_u.T @ tape["inputs"][n_hidden][t]
        grad_b[-1] += g_u.sum(axis=0)
        g_s = g_u @ w64[-1]
        g_u = g_u * carry
        for l in range(n_hidden - 1, -1, -1):
            g_m = kernels.spike_backward(
                g_v[l], g_s, tape["membranes"][l][t], tape["spikes"][l][t],
                p.v_threshold, p.v_rest, p.surrogate_half_width, p.reset_code)
            grad_w[l] += g_m.T @ tape["inputs"][l][t]
            grad_b[l] += g_m.sum(axis=0)
            if l > 0:
                g_s = g_m @ w64[l]
            g_v[l] = g_m * carry
    return mean_loss, grad_w, grad_b


def backward(model: TauSnn, plan: InputPlan, label: int):
    """Single-sample gradients (same shapes as weights/biases)."""
    if not 0 <= label < model.architecture.layer_sizes[-1]:
        raise ValueError(f"label {label} out of range")
    _, grad_w, grad_b = backward_batch(
        model, plan.currents[None, :, :], np.array([label]))
    return grad_w, grad_b


def predict(model: TauSnn, plan: InputPlan) -> int:
    """Argmax class of the forward logits; ties break to the lowest index."""
    logits, _ = forward_batch(model, plan.currents[None, :, :])
    return int(np.argmax(logits[0]))


def set_inference_tau(model: TauSnn, tau: float) -> TauSnn:
    """Same weights, different membrane time constant."""
    return replace(model, lif_params=model.lif_params.with_tau(float(tau)),
                   weights=list(model.weights), biases=list(model.biases))


def params_to_vector(model: TauSnn) -> np.ndarray:
    parts = []
    for w, b in zip(model.weights, model.biases):
        parts.append(np.asarray(w, dtype=np.float64).ravel())
        parts.append(np.asarray(b, dtype=np.float64).ravel())
    return np.concatenate(parts)


def vector_to_params(model: TauSnn, vec: np.ndarray) -> TauSnn:
    vec = np.asarray(vec, dtype=np.float64)
    weights, biases = [], []
    pos = 0
    for w, b in zip(model.weights, model.biases):
        weights.append(vec[pos:pos + w.size].reshape(w.shape).astype(w.dtype))
        pos += w.size
        biases.append(vec[pos:pos + b.size].reshape(b.shape).astype(b.dtype))
        pos += b.size
    if pos != vec.size:
        raise ValueError(f"parameter vector length {vec.size}, expected {pos}")
    return replace(model, weights=weights, biases=biases)
