"""Mini-batch training loop, optimizers, tau-override evaluation, checkpoints.

Checkpoint layout: a human-readable header (magic line + JSON block + blank
line) followed by a raw little-endian float32 blob of weights and biases in
layer order. The header records a 64-bit FNV-1a digest of the blob.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

import numpy as np

from . import kernels
from .encoding import encode_batch
from .network import (Architecture, TauSnn, backward_batch, forward_batch,
                      loss_batch, set_inference_tau)
from .neuron import LifParams
from .numerics import RNG_ALGORITHM_ID, Rng

__all__ = [
    "TrainConfig",
    "TrainHistory",
    "train",
    "evaluate",
    "save_checkpoint",
    "load_checkpoint",
    "CheckpointError",
    "CheckpointVersionError",
    "CheckpointDigestError",
]

CHECKPOINT_MAGIC = "TAUSNN-CKPT"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    tau_train: float = 32.0
    epochs: int = 10
    batch_size: int = 64
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    task: str = "static"
    reset_mode: str = "soft"
    n_segments: int = 4

    def __post_init__(self):
        if not self.tau_train >= 1.0:
            raise ValueError(f"tau_train must be >= 1, got {self.tau_train}")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"optimizer must be 'adam' or 'sgd', got {self.optimizer!r}")
        if self.task not in ("static", "dynamic", "series"):
            raise ValueError(f"unknown task {self.task!r}")


@dataclass
class TrainHistory:
    train_loss: list[float] = field(default_factory=list)
    holdout_accuracy: list[float] = field(default_factory=list)


class _Optimizer:
    def __init__(self, config: TrainConfig, model: TauSnn):
        self.config = config
        self.t = 0
        if config.optimizer == "adam":
            self.m = [np.zeros(w.shape) for w in model.weights + model.biases]
            self.v = [np.zeros(w.shape) for w in model.weights + model.biases]

    def step(self, model: TauSnn, grad_w, grad_b):
        cfg = self.config
        params = model.weights + model.biases
        grads = grad_w + grad_b
        if cfg.optimizer == "sgd":
            for p, g in zip(params, grads):
                p -= (cfg.learning_rate * g).astype(p.dtype)
            return
        self.t += 1
        b1, b2 = cfg.beta1, cfg.beta2
        bias1 = 1.0 - b1 ** self.t
        bias2 = 1.0 - b2 ** self.t
        for i, (p, g) in enumerate(zip(params, grads)):
            self.m[i] = b1 * self.m[i] + (1.0 - b1) * g
            self.v[i] = b2 * self.v[i] + (1.0 - b2) * g * g
            update = (cfg.learning_rate * (self.m[i] / bias1)
                      / (np.sqrt(self.v[i] / bias2) + cfg.adam_eps))
            p -= update.astype(p.dtype)


def _dataset_arrays(dataset) -> tuple[np.ndarray, np.ndarray]:
    raw = np.stack([np.asarray(item.values, dtype=np.float64) for item in dataset])
    labels = np.array([item.label for item in dataset], dtype=np.int64)
    return raw, labels


def train(architecture: Architecture, dataset, config: TrainConfig,
          holdout=None) -> tuple[TauSnn, TrainHistory]:
    """Train a tau-SNN; deterministic given (architecture, dataset, config).

    ``holdout`` defaults to the last 10% of ``dataset`` (removed from the
    training portion) when not supplied.
    """
    if len(dataset) == 0:
        raise ValueError("dataset is empty")
    if holdout is None:
        n_hold = max(1, len(dataset) // 10)
        holdout = dataset[-n_hold:]
        dataset = dataset[:-n_hold]
        if len(dataset) == 0:
            raise ValueError("dataset too small to split a holdout")

    lif = LifParams(tau_discrete=config.tau_train, reset_mode=config.reset_mode)
    root = Rng(config.seed)
    model = TauSnn.initialize(architecture, lif, root.child(0))
    history = TrainHistory()
    if config.epochs == 0:
        return model, history

    raw, labels = _dataset_arrays(dataset)
    optimizer = _Optimizer(config, model)
    shuffle_rng = root.child(1)

    for epoch in range(config.epochs):
        order = shuffle_rng.permutation(len(raw))
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, len(raw), config.batch_size):
            idx = order[start:start + config.batch_size]
            currents = encode_batch(config.task, raw[idx], architecture.t_steps,
                                    config.n_segments)
            batch_loss, grad_w, grad_b = backward_batch(model, currents, labels[idx])
            if not np.isfinite(batch_loss):
                raise FloatingPointError(
                    f"non-finite loss at epoch {epoch}, batch {n_batches}: "
                    f"{batch_loss} (training diverged)")
            optimizer.step(model, grad_w, grad_b)
            epoch_loss += batch_loss
            n_batches += 1
        history.train_loss.append(epoch_loss / n_batches)
        history.holdout_accuracy.append(
            evaluate(model, holdout, config.tau_train, task=config.task,
                     n_segments=config.n_segments))
    return model, history


def evaluate(model: TauSnn, dataset, tau_infer: float, task: str | None = None,
             n_segments: int = 4, batch_size: int = 256) -> float:
    """Fraction of correct predictions under a tau override (model untouched)."""
    if len(dataset) == 0:
        raise ValueError("dataset is empty")
    if task is None:
        task = "series" if model.architecture.layer_sizes[0] == 1 else "static"
    eval_model = set_inference_tau(model, tau_infer)
    raw, labels = _dataset_arrays(dataset)
    correct = 0
    for start in range(0, len(raw), batch_size):
        chunk = raw[start:start + batch_size]
        currents = encode_batch(task, chunk, model.architecture.t_steps, n_segments)
        logits, _ = forward_batch(eval_model, currents)
        correct += int((np.argmax(logits, axis=1)
                        == labels[start:start + batch_size]).sum())
    return correct / len(raw)


def mean_loss(model: TauSnn, dataset, task: str, n_segments: int = 4) -> float:
    raw, labels = _dataset_arrays(dataset)
    currents = encode_batch(task, raw, model.architecture.t_steps, n_segments)
    logits, _ = forward_batch(model, currents)
    return loss_batch(logits, labels)


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------

class CheckpointError(Exception):
    pass


class CheckpointVersionError(CheckpointError):
    pass


class CheckpointDigestError(CheckpointError):
    pass


def _payload_blob(model: TauSnn) -> bytes:
    parts = []
    for w, b in zip(model.weights, model.biases):
        parts.append(np.ascontiguousarray(w, dtype="<f4").tobytes())
        parts.append(np.ascontiguousarray(b, dtype="<f4").tobytes())
    return b"".join(parts)


def save_checkpoint(model: TauSnn, path, config: TrainConfig | None = None) -> None:
    blob = _payload_blob(model)
    p = model.lif_params
    header = {
        "version": CHECKPOINT_VERSION,
        "layer_sizes": list(model.architecture.layer_sizes),
        "t_steps": model.architecture.t_steps,
        "tau_discrete": p.tau_discrete,
        "v_rest": p.v_rest,
        "v_threshold": p.v_threshold,
        "reset_mode": p.reset_mode,
        "surrogate_half_width": p.surrogate_half_width,
        "mode": model.mode,
        "rng_algorithm": RNG_ALGORITHM_ID,
        "train_config": asdict(config) if config is not None else None,
        "blob_bytes": len(blob),
        "digest_fnv1a64": f"{kernels.fnv1a64(blob):016x}",
    }
    with open(path, "wb") as fh:
        fh.write(f"{CHECKPOINT_MAGIC} v{CHECKPOINT_VERSION}\n".encode())
        fh.write(json.dumps(header, indent=2, sort_keys=True).encode())
        fh.write(b"\n\n")
        fh.write(blob)


def load_checkpoint(path) -> TauSnn:
    with open(path, "rb") as fh:
        data = fh.read()
    newline = data.find(b"\n")
    if newline < 0 or not data[:newline].decode("utf-8", "replace").startswith(CHECKPOINT_MAGIC):
        raise CheckpointError(f"{path}: not a {CHECKPOINT_MAGIC} file")
    sep = data.find(b"\n\n", newline)
    if sep < 0:
        raise CheckpointError(f"{path}: missing header terminator")
    try:
        header = json.loads(data[newline + 1:sep].decode("utf-8"))
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{path}: malformed header: {exc}") from exc
    version = header.get("version")
    if version != CHECKPOINT_VERSION:
        raise CheckpointVersionError(
            f"{path}: unsupported checkpoint version {version} "
            f"(supported: {CHECKPOINT_VERSION})")
    blob = data[sep + 2:]
    if len(blob) != header["blob_bytes"]:
        raise CheckpointDigestError(
            f"{path}: payload truncated: expected {header['blob_bytes']} bytes, "
            f"got {len(blob)}")
    digest = f"{kernels.fnv1a64(blob):016x}"
    if digest != header["digest_fnv1a64"]:
        raise CheckpointDigestError(
            f"{path}: digest mismatch: expected {header['digest_fnv1a64']}, "
            f"actual {digest}")

    arch = Architecture(tuple(header["layer_sizes"]), header["t_steps"])
    lif = LifParams(header["tau_discrete"], header["v_rest"], header["v_threshold"],
                    header["reset_mode"], header["surrogate_half_width"])
    sizes = arch.layer_sizes
    weights, biases = [], []
    pos = 0
    flat = np.frombuffer(blob, dtype="<f4")
    for i in range(len(sizes) - 1):
        n = sizes[i + 1] * sizes[i]
        weights.append(flat[pos:pos + n].reshape(sizes[i + 1], sizes[i]).copy())
        pos += n
        biases.append(flat[pos:pos + sizes[i + 1]].copy())
        pos += sizes[i + 1]
    if pos != flat.size:
        raise CheckpointDigestError(
            f"{path}: payload size {flat.size} floats, expected {pos}")
    return TauSnn(arch, weights, biases, lif, header.get("mode", "spiking"))
