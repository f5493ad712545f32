"""Dataset ingestion (MNIST IDX, time-series CSV) and synthetic generators.

The synthetic generators are the desk-scale stand-ins used by the test
suite: image classes are separable bright-region templates; series classes
share value histograms where noted and differ only in temporal order, so a
memoryless network cannot separate them.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass

import numpy as np

from .numerics import Rng

__all__ = [
    "LabeledImage",
    "LabeledWindow",
    "DataFormatError",
    "IdxMagicError",
    "IdxTruncatedError",
    "IdxCountMismatchError",
    "SeriesCsvError",
    "load_mnist_idx",
    "load_series_csv",
    "synth_images",
    "synth_series",
]

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801


class DataFormatError(Exception):
    pass


class IdxMagicError(DataFormatError):
    pass


class IdxTruncatedError(DataFormatError):
    pass


class IdxCountMismatchError(DataFormatError):
    pass


class SeriesCsvError(DataFormatError):
    pass


@dataclass
class LabeledImage:
    pixels: np.ndarray  # (784,) float32 in [0,1]
    label: int

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.float32).ravel()
        if self.pixels.size != 784:
            raise ValueError(f"expected 784 pixels, got {self.pixels.size}")
        if not 0 <= self.label <= 9:
            raise ValueError(f"label {self.label} out of range 0..9")

    @property
    def values(self) -> np.ndarray:
        return self.pixels


@dataclass
class LabeledWindow:
    samples: np.ndarray  # (W,) float32
    label: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float32).ravel()
        if self.samples.size < 1:
            raise ValueError("window must be non-empty")
        if not 0 <= self.label <= 3:
            raise ValueError(f"label {self.label} out of range 0..3")

    @property
    def values(self) -> np.ndarray:
        return self.samples


def _read_idx(path, expected_magic: int, n_dims: int):
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] == b"\x1f\x8b":  # gzipped IDX is accepted transparently
        import gzip
        data = gzip.decompress(data)
    if len(data) < 4:
        raise IdxTruncatedError(f"{path}: file shorter than IDX magic")
    magic = struct.unpack(">I", data[:4])[0]
    if magic != expected_magic:
        raise IdxMagicError(
            f"{path}: wrong magic 0x{magic:08x}, expected 0x{expected_magic:08x}")
    header_len = 4 + 4 * n_dims
    if len(data) < header_len:
        raise IdxTruncatedError(f"{path}: file shorter than IDX header")
    dims = struct.unpack(f">{n_dims}I", data[4:header_len])
    payload = np.frombuffer(data, dtype=np.uint8, offset=header_len)
    expected = int(np.prod(dims))
    if payload.size < expected:
        raise IdxTruncatedError(
            f"{path}: payload has {payload.size} bytes, expected {expected}")
    return dims, payload[:expected]


def load_mnist_idx(images_path, labels_path) -> list[LabeledImage]:
    """Parse the big-endian IDX pair; pixels are scaled to [0,1]."""
    img_dims, img_data = _read_idx(images_path, IMAGE_MAGIC, 3)
    (n_labels,), label_data = _read_idx(labels_path, LABEL_MAGIC, 1)
    n_images, height, width = img_dims
    if (height, width) != (28, 28):
        raise DataFormatError(
            f"{images_path}: expected 28x28 images, got {height}x{width}")
    if n_images != n_labels:
        raise IdxCountMismatchError(
            f"count mismatch: {n_images} images vs {n_labels} labels")
    pixels = img_data.reshape(n_images, 784).astype(np.float32) / 255.0
    return [LabeledImage(pixels[i], int(label_data[i])) for i in range(n_images)]


def load_series_csv(path, window: int, stride: int) -> list[LabeledWindow]:
    """Cut labeled windows from a `sample,label_or_blank` CSV.

    A window's label is the annotation on its final sample; unlabeled
    windows are dropped. An optional header row is detected by a
    non-numeric first field.
    """
    if window < 1 or stride < 1:
        raise ValueError("window and stride must be positive")
    samples: list[float] = []
    labels: list[int | None] = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if lineno == 1:
                try:
                    float(row[0])
                except ValueError:
                    continue  # header row
            try:
                samples.append(float(row[0]))
            except ValueError as exc:
                raise SeriesCsvError(
                    f"{path}:{lineno}: non-numeric sample {row[0]!r}") from exc
            label_field = row[1].strip() if len(row) > 1 else ""
            if label_field:
                try:
                    label = int(label_field)
                except ValueError as exc:
                    raise SeriesCsvError(
                        f"{path}:{lineno}: bad label {label_field!r}") from exc
                if not 0 <= label <= 3:
                    raise SeriesCsvError(
                        f"{path}:{lineno}: label {label} out of range 0..3")
                labels.append(label)
            else:
                labels.append(None)
    if not samples:
        return []
    if window > len(samples):
        raise SeriesCsvError(
            f"{path}: window {window} exceeds series length {len(samples)}")
    values = np.asarray(samples, dtype=np.float32)
    windows = []
    for start in range(0, len(samples) - window + 1, stride):
        end = start + window
        label = labels[end - 1]
        if label is None:
            continue
        windows.append(LabeledWindow(values[start:end].copy(), label))
    return windows


def save_series_csv(path, windows: list[LabeledWindow]) -> None:
    """Emit back-to-back windows in the loader's CSV schema (stride = window)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample", "label"])
        for win in windows:
            for i, value in enumerate(win.samples):
                last = i == len(win.samples) - 1
                writer.writerow([repr(float(value)), win.label if last else ""])


# ---------------------------------------------------------------------------
# synthetic generators
# ---------------------------------------------------------------------------

def _image_templates(n_classes: int) -> np.ndarray:
    """Bright-region masks on a 28x28 grid, one per class."""
    masks = []
    grid = np.zeros((28, 28))

    def region(rows, cols):
        m = grid.copy()
        m[rows, cols] = 1.0
        return m

    half_l = region(slice(None), slice(0, 14))
    half_r = region(slice(None), slice(14, 28))
    half_t = region(slice(0, 14), slice(None))
    half_b = region(slice(14, 28), slice(None))
    quads = [region(slice(0, 14), slice(0, 14)), region(slice(0, 14), slice(14, 28)),
             region(slice(14, 28), slice(0, 14)), region(slice(14, 28), slice(14, 28))]
    center = region(slice(9, 19), slice(9, 19))
    bands = [region(slice(7 * k, 7 * k + 7), slice(None)) for k in range(4)]

    if n_classes == 2:
        masks = [half_l, half_r]
    elif n_classes == 4:
        masks = quads
    elif n_classes == 10:
        masks = [half_l, half_r, half_t, half_b] + quads + [center, bands[1]]
        masks = masks[:10]
    else:
        raise ValueError(f"n_classes must be 2, 4 or 10, got {n_classes}")
    return np.stack([m.ravel() for m in masks])


def synth_images(n: int, rng: Rng, n_classes: int = 10) -> list[LabeledImage]:
    """Separable bright-region image classes plus seeded pixel noise."""
    if n < 1:
        raise ValueError("n must be >= 1")
    templates = _image_templates(n_classes)
    labels = rng.integers(0, n_classes, size=n)
    base = 0.1 + 0.8 * templates[labels]
    noise = rng.uniform(-0.05, 0.05, size=base.shape)
    pixels = np.clip(base + noise, 0.0, 1.0).astype(np.float32)
    return [LabeledImage(pixels[i], int(labels[i])) for i in range(n)]


def _pulse(width: int = 9) -> np.ndarray:
    # symmetric triangular pulse peaking at 1
    half = width // 2
    return 1.0 - np.abs(np.arange(width) - half) / (half + 1.0)


def synth_series(n: int, window: int, rng: Rng) -> list[LabeledWindow]:
    """Four waveform classes distinguishable only by temporal order.

    0: pulse early, 1: pulse late (same value multiset as class 0),
    2: double pulse at half amplitude, 3: slow ramp.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if window < 48:
        raise ValueError("window must be >= 48 to fit the pulse templates")
    pulse = _pulse()
    width = len(pulse)
    labels = rng.integers(0, 4, size=n)
    out = []
    for i in range(n):
        label = int(labels[i])
        values = np.zeros(window)
        if label == 0:
            pos = int(rng.integers(window // 8, window // 4))
            values[pos:pos + width] = pulse
        elif label == 1:
            pos = int(rng.integers(5 * window // 8, 3 * window // 4))
            values[pos:pos + width] = pulse
        elif label == 2:
            pos = int(rng.integers(window // 8, window // 4))
            values[pos:pos + width] = 0.5 * pulse
            values[pos + window // 2:pos + window // 2 + width] = 0.5 * pulse
        else:
            values = np.linspace(0.0, 1.0, window)
        out.append(LabeledWindow(values.astype(np.float32), label))
    return out
