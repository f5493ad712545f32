"""Dense matrix helpers, seeded counter-based RNG, finite-difference gradients.

Matrices are plain 2-D numpy arrays (row-major). Stored model weights are
float32; all accumulations (products, gradients, losses) run in float64.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

__all__ = ["Rng", "RNG_ALGORITHM_ID", "matmul", "gaussian_init", "finite_diff_grad"]

# Philox 4x64 as shipped by numpy: a counter-based generator with a fixed,
# publicly documented algorithm, so seeds can be matched from other languages.
RNG_ALGORITHM_ID = "numpy-philox4x64"


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return z ^ (z >> 31)


class Rng:
    """Seeded deterministic generator (Philox counter-based).

    Instances must not be shared across concurrent workers; derive one per
    worker with :meth:`child`.
    """

    algorithm = RNG_ALGORITHM_ID

    def __init__(self, seed: int):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self._gen = np.random.Generator(np.random.Philox(key=self.seed))

    def child(self, index: int) -> "Rng":
        """Independent stream derived by hashing (seed, index)."""
        return Rng(_splitmix64(self.seed ^ _splitmix64(index & 0xFFFFFFFFFFFFFFFF)))

    def normal(self, shape, std: float = 1.0) -> np.ndarray:
        return self._gen.normal(0.0, std, size=shape)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def integers(self, low: int, high: int, size=None):
        return self._gen.integers(low, high, size=size)

    def uniform(self, low: float, high: float, size=None):
        return self._gen.uniform(low, high, size=size)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product in float64 with shape validation."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError(f"matmul expects 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul shape mismatch: {a.shape} x {b.shape}")
    return a.astype(np.float64, copy=False) @ b.astype(np.float64, copy=False)


def gaussian_init(rows: int, cols: int, std: float, rng: Rng) -> np.ndarray:
    """Zero-mean gaussian weight matrix, stored as float32."""
    if rows < 1 or cols < 1:
        raise ValueError(f"shape must be positive, got {rows}x{cols}")
    if not std > 0:
        raise ValueError(f"std must be positive, got {std}")
    return rng.normal((rows, cols), std).astype(np.float32)


def finite_diff_grad(f: Callable[[np.ndarray], float],
                     params: np.ndarray,
                     eps: float = 1e-4) -> np.ndarray:
    """Central-difference gradient of a scalar function of a parameter vector."""
    params = np.asarray(params, dtype=np.float64)
    grad = np.empty_like(params)
    for i in range(params.size):
        p_hi = params.copy()
        p_lo = params.copy()
        p_hi[i] += eps
        p_lo[i] -= eps
        f_hi = float(f(p_hi))
        f_lo = float(f(p_lo))
        if not (np.isfinite(f_hi) and np.isfinite(f_lo)):
            raise FloatingPointError(
                f"non-finite function value at coordinate {i}: "
                f"f(+eps)={f_hi}, f(-eps)={f_lo}")
        grad[i] = (f_hi - f_lo) / (2.0 * eps)
    return grad
