"""Experimental instruments: tau sweeps, weight statistics, firing rates,
and tolerance windows over inference time constants."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .encoding import encode_batch
from .network import Architecture, TauSnn, forward_batch, set_inference_tau
from .training import TrainConfig, evaluate, train, _dataset_arrays

__all__ = [
    "DEFAULT_TAU_LADDER",
    "AccuracyGrid",
    "WeightStats",
    "LayerWeightStats",
    "FiringReport",
    "tau_sweep",
    "weight_stats",
    "firing_report",
    "tolerance_window",
]

# the discrete ladder used throughout the sweeps
DEFAULT_TAU_LADDER = (2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0)


@dataclass
class AccuracyGrid:
    train_taus: tuple[float, ...]
    infer_taus: tuple[float, ...]
    accuracy: np.ndarray  # (|train|, |infer|)
    task: str
    seed: int

    def __post_init__(self):
        self.train_taus = tuple(sorted(float(t) for t in self.train_taus))
        self.infer_taus = tuple(sorted(float(t) for t in self.infer_taus))
        self.accuracy = np.asarray(self.accuracy, dtype=np.float64)
        expect = (len(self.train_taus), len(self.infer_taus))
        if self.accuracy.shape != expect:
            raise ValueError(f"accuracy shape {self.accuracy.shape}, expected {expect}")
        if self.accuracy.min() < 0.0 or self.accuracy.max() > 1.0:
            raise ValueError("accuracies must lie in [0, 1]")

    def row(self, tau_train: float) -> np.ndarray:
        return self.accuracy[self.train_taus.index(float(tau_train))]


@dataclass
class LayerWeightStats:
    bin_edges: np.ndarray     # len bins+1 over [-b, b]
    counts: np.ndarray        # len bins+2; [0] and [-1] are overflow bins
    std: float
    excess_kurtosis: float
    near_zero_fraction: float


@dataclass
class WeightStats:
    layers: list[LayerWeightStats]


@dataclass
class FiringReport:
    taus: tuple[float, ...]
    rates: np.ndarray  # (|taus|, n_hidden_layers) in [0, 1]


def tau_sweep(task: str, train_taus, infer_taus, config: TrainConfig,
              dataset, eval_dataset=None, architecture: Architecture | None = None,
              models_out: dict | None = None) -> AccuracyGrid:
    """Train one model per train-tau, evaluate each across all infer-taus.

    ``models_out``, when given, receives the trained model per train-tau so
    callers can reuse them for weight/firing analysis.
    """
    train_taus = tuple(sorted(float(t) for t in train_taus))
    infer_taus = tuple(sorted(float(t) for t in infer_taus))
    if any(t < 1 for t in train_taus + infer_taus):
        raise ValueError("all time constants must be >= 1")
    if architecture is None:
        architecture = default_architecture(task)
    if eval_dataset is None:
        n_hold = max(1, len(dataset) // 10)
        dataset, eval_dataset = dataset[:-n_hold], dataset[-n_hold:]
    grid = np.zeros((len(train_taus), len(infer_taus)))
    for i, tau_train in enumerate(train_taus):
        row_config = replace(config, tau_train=tau_train, task=task)
        try:
            model, _ = train(architecture, dataset, row_config,
                             holdout=eval_dataset)
        except Exception as exc:
            raise RuntimeError(f"training failed for tau_train={tau_train}") from exc
        if models_out is not None:
            models_out[tau_train] = model
        for j, tau_infer in enumerate(infer_taus):
            grid[i, j] = evaluate(model, eval_dataset, tau_infer, task=task,
                                  n_segments=config.n_segments)
    return AccuracyGrid(train_taus, infer_taus, grid, task, config.seed)


def default_architecture(task: str, t_steps: int = 10,
                         window: int = 128) -> Architecture:
    """The two preset architectures behind the image and series pipelines."""
    if task in ("static", "dynamic"):
        return Architecture((784, 128, 10), t_steps)
    if task == "series":
        return Architecture((1, 784, 256, 64, 4), window)
    raise ValueError(f"unknown task {task!r}")


def weight_stats(model: TauSnn, bins: int = 101, bound: float = 1.0) -> WeightStats:
    """Per-layer histogram and moments over weight entries (biases excluded)."""
    if bins < 3:
        raise ValueError("bins must be >= 3")
    if not bound > 0:
        raise ValueError("bound must be positive")
    edges = np.linspace(-bound, bound, bins + 1)
    layers = []
    for w in model.weights:
        flat = np.asarray(w, dtype=np.float64).ravel()
        inner, _ = np.histogram(flat, bins=edges)
        counts = np.concatenate(([int((flat < -bound).sum())], inner,
                                 [int((flat > bound).sum())]))
        std = float(flat.std())
        if std > 0:
            centered = flat - flat.mean()
            kurt = float(np.mean(centered ** 4) / np.mean(centered ** 2) ** 2 - 3.0)
        else:
            kurt = 0.0
        layers.append(LayerWeightStats(
            bin_edges=edges,
            counts=counts.astype(np.int64),
            std=std,
            excess_kurtosis=kurt,
            near_zero_fraction=float((np.abs(flat) < 0.01).mean()),
        ))
    return WeightStats(layers)


def firing_report(model: TauSnn, dataset, taus, task: str | None = None,
                  n_segments: int = 4, batch_size: int = 256) -> FiringReport:
    """Per-layer spike rates under each tau override; output integrator excluded."""
    taus = tuple(float(t) for t in taus)
    if not taus:
        raise ValueError("taus must be non-empty")
    if task is None:
        task = "series" if model.architecture.layer_sizes[0] == 1 else "static"
    arch = model.architecture
    raw, _ = _dataset_arrays(dataset)
    rates = np.zeros((len(taus), arch.n_hidden))
    for i, tau in enumerate(taus):
        probe = set_inference_tau(model, tau)
        spike_sums = np.zeros(arch.n_hidden)
        for start in range(0, len(raw), batch_size):
            currents = encode_batch(task, raw[start:start + batch_size],
                                    arch.t_steps, n_segments)
            _, tape = forward_batch(probe, currents, record=True)
            for l in range(arch.n_hidden):
                spike_sums[l] += tape["spikes"][l].sum()
        for l in range(arch.n_hidden):
            denom = arch.layer_sizes[l + 1] * arch.t_steps * len(raw)
            rates[i, l] = spike_sums[l] / denom
    return FiringReport(taus, rates)


def tolerance_window(infer_taus, accuracies, floor: float):
    """Widest contiguous tau run with accuracy >= floor, or None."""
    if not 0.0 < floor < 1.0:
        raise ValueError(f"floor must be in (0, 1), got {floor}")
    infer_taus = tuple(float(t) for t in infer_taus)
    accuracies = np.asarray(accuracies, dtype=np.float64)
    if len(infer_taus) != accuracies.size:
        raise ValueError("infer_taus and accuracies lengths differ")
    best = None  # (log span, start, end)
    start = None
    for i, acc in enumerate(accuracies):
        if acc >= floor:
            if start is None:
                start = i
            span = np.log(infer_taus[i]) - np.log(infer_taus[start])
            if best is None or span > best[0]:
                best = (span, start, i)
        else:
            start = None
    if best is None:
        return None
    return infer_taus[best[1]], infer_taus[best[2]]
