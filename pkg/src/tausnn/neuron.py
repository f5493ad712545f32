"""Discrete LIF neuron: leak-then-integrate update, threshold, reset.

The membrane update is

    v' = v + (v_rest - v) / tau + i

with the spike check on the post-update (pre-reset) potential. A spiking
neuron is reset softly (subtract threshold) or hard (back to rest). The
rectangular surrogate gradient and its exactly-matching ramp ("smoothed")
spike function are used for training and gradient verification.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels

__all__ = [
    "LifParams",
    "LifLayerState",
    "lif_step",
    "decay_closed_form",
    "surrogate_grad",
    "smoothed_spike",
]

_RESET_CODES = {"soft": 0, "hard": 1}


@dataclass(frozen=True)
class LifParams:
    tau_discrete: float = 32.0
    v_rest: float = 0.0
    v_threshold: float = 1.0
    reset_mode: str = "soft"
    surrogate_half_width: float = 0.5

    def __post_init__(self):
        if not self.tau_discrete >= 1.0:
            raise ValueError(f"tau_discrete must be >= 1, got {self.tau_discrete}")
        if not self.v_threshold > self.v_rest:
            raise ValueError(
                f"v_threshold ({self.v_threshold}) must exceed v_rest ({self.v_rest})")
        if self.reset_mode not in _RESET_CODES:
            raise ValueError(f"reset_mode must be 'soft' or 'hard', got {self.reset_mode!r}")
        if not self.surrogate_half_width > 0:
            raise ValueError("surrogate_half_width must be positive")

    @property
    def reset_code(self) -> int:
        return _RESET_CODES[self.reset_mode]

    def with_tau(self, tau: float) -> "LifParams":
        return LifParams(tau, self.v_rest, self.v_threshold,
                         self.reset_mode, self.surrogate_half_width)


@dataclass
class LifLayerState:
    v: np.ndarray

    def __post_init__(self):
        self.v = np.asarray(self.v, dtype=np.float64)
        if not np.all(np.isfinite(self.v)):
            raise ValueError("membrane potentials must be finite")

    @classmethod
    def at_rest(cls, n: int, params: LifParams) -> "LifLayerState":
        return cls(np.full(n, params.v_rest, dtype=np.float64))


def lif_step(state: LifLayerState, input_current: np.ndarray,
             params: LifParams) -> tuple[LifLayerState, np.ndarray]:
    """One discrete update for a layer; returns (post-reset state, spikes)."""
    cur = np.asarray(input_current, dtype=np.float64)
    if cur.shape != state.v.shape:
        raise ValueError(
            f"input current shape {cur.shape} does not match state {state.v.shape}")
    if not np.all(np.isfinite(cur)):
        raise ValueError("input current must be finite")
    v_new, _, spikes = kernels.lif_step(
        state.v, cur, 1.0 / params.tau_discrete, params.v_rest,
        params.v_threshold, params.reset_code)
    return LifLayerState(v_new), spikes


def decay_closed_form(v0: float, t: int, params: LifParams) -> float:
    """Exact zero-input membrane after t steps: v_rest + (v0 - v_rest)(1 - 1/tau)^t."""
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    return params.v_rest + (v0 - params.v_rest) * (1.0 - 1.0 / params.tau_discrete) ** t


def surrogate_grad(v_pre_reset, params: LifParams):
    """Rectangular surrogate: 1/(2w) inside |v - theta| <= w, else 0."""
    w = params.surrogate_half_width
    v = np.asarray(v_pre_reset, dtype=np.float64)
    out = np.where(np.abs(v - params.v_threshold) <= w, 1.0 / (2.0 * w), 0.0)
    return float(out) if out.ndim == 0 else out


def smoothed_spike(v_pre_reset, params: LifParams):
    """Ramp spike in [0,1] whose derivative equals the rectangular surrogate."""
    w = params.surrogate_half_width
    v = np.asarray(v_pre_reset, dtype=np.float64)
    out = np.clip((v - params.v_threshold + w) / (2.0 * w), 0.0, 1.0)
    return float(out) if out.ndim == 0 else out
