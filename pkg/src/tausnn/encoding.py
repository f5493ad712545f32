"""Input encoders: raw samples -> per-time-step input-current plans.

All three tasks use direct input encoding: analog values are injected as
input current and spikes emerge inside the first LIF layer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["InputPlan", "encode_static", "encode_dynamic", "encode_series",
           "encode_batch", "IMAGE_SIZE"]

IMAGE_SIZE = 784


@dataclass
class InputPlan:
    currents: np.ndarray  # (T, n_in) float64

    def __post_init__(self):
        self.currents = np.asarray(self.currents, dtype=np.float64)
        if self.currents.ndim != 2 or self.currents.shape[0] < 1 or self.currents.shape[1] < 1:
            raise ValueError(f"currents must be (T, n_in), got {self.currents.shape}")
        if not np.all(np.isfinite(self.currents)):
            raise ValueError("input currents must be finite")

    @property
    def steps(self) -> int:
        return self.currents.shape[0]

    @property
    def width(self) -> int:
        return self.currents.shape[1]


def _check_image(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image, dtype=np.float64).ravel()
    if image.size != IMAGE_SIZE:
        raise ValueError(f"image must have {IMAGE_SIZE} pixels, got {image.size}")
    if image.min() < 0.0 or image.max() > 1.0:
        raise ValueError("pixel values must lie in [0, 1]")
    return image


def encode_static(image: np.ndarray, t_steps: int) -> InputPlan:
    """Repeat the image as constant input current at every step."""
    if t_steps < 1:
        raise ValueError("t_steps must be positive")
    image = _check_image(image)
    return InputPlan(np.tile(image, (t_steps, 1)))


def segment_schedule(t_steps: int, n_segments: int) -> np.ndarray:
    """Active segment index per step: floor(n_segments * t / t_steps)."""
    return (n_segments * np.arange(t_steps)) // t_steps


def encode_dynamic(image: np.ndarray, t_steps: int, n_segments: int = 4) -> InputPlan:
    """Feed contiguous row-major pixel bands one segment at a time."""
    if t_steps < 1:
        raise ValueError("t_steps must be positive")
    if n_segments < 1 or IMAGE_SIZE % n_segments != 0:
        raise ValueError(f"{IMAGE_SIZE} must be divisible by n_segments, got {n_segments}")
    if t_steps < n_segments:
        raise ValueError(f"t_steps ({t_steps}) must be >= n_segments ({n_segments})")
    image = _check_image(image)
    seg_len = IMAGE_SIZE // n_segments
    currents = np.zeros((t_steps, IMAGE_SIZE))
    for t, seg in enumerate(segment_schedule(t_steps, n_segments)):
        lo = seg * seg_len
        currents[t, lo:lo + seg_len] = image[lo:lo + seg_len]
    return InputPlan(currents)


def encode_series(samples: np.ndarray) -> InputPlan:
    """One sample per step on a single input channel, min-max normalized."""
    samples = np.asarray(samples, dtype=np.float64).ravel()
    if samples.size < 1:
        raise ValueError("series window must be non-empty")
    if not np.all(np.isfinite(samples)):
        raise ValueError("series samples must be finite")
    lo, hi = samples.min(), samples.max()
    if hi > lo:
        norm = (samples - lo) / (hi - lo)
    else:
        norm = np.full_like(samples, 0.5)
    return InputPlan(norm[:, None])


def encode_batch(task: str, raw: np.ndarray, t_steps: int,
                 n_segments: int = 4) -> np.ndarray:
    """Vectorized batch encoding: (B, d) raw values -> (B, T, n_in) currents.

    Matches the single-sample encoders exactly; used by the training loop.
    """
    raw = np.asarray(raw, dtype=np.float64)
    if raw.ndim != 2:
        raise ValueError(f"raw batch must be 2-D, got {raw.shape}")
    if task == "static":
        return np.repeat(raw[:, None, :], t_steps, axis=1)
    if task == "dynamic":
        seg_len = IMAGE_SIZE // n_segments
        out = np.zeros((raw.shape[0], t_steps, IMAGE_SIZE))
        for t, seg in enumerate(segment_schedule(t_steps, n_segments)):
            lo = seg * seg_len
            out[:, t, lo:lo + seg_len] = raw[:, lo:lo + seg_len]
        return out
    if task == "series":
        lo = raw.min(axis=1, keepdims=True)
        hi = raw.max(axis=1, keepdims=True)
        span = hi - lo
        flat = span[:, 0] == 0
        span[flat] = 1.0
        norm = (raw - lo) / span
        norm[flat] = 0.5
        return norm[:, :, None]
    raise ValueError(f"unknown task {task!r}")
