"""Software<->hardware time-constant conversion and the device catalog.

The discrete (step-count) and continuous (seconds) time constants are
related by tau_discrete = tau_continuous * sample_rate. The builtin catalog
lists published electronic neuron devices with their achievable hardware
tau ranges in seconds; task requirements gate which devices qualify.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

__all__ = [
    "DeviceRecord",
    "TaskRequirement",
    "TASK_REQUIREMENTS",
    "ECG_SAMPLE_RATE_HZ",
    "to_hardware_tau",
    "to_software_tau",
    "recommend_devices",
    "builtin_catalog",
    "load_catalog",
    "save_catalog",
    "CatalogError",
]

ECG_SAMPLE_RATE_HZ = 360.0

TECHNOLOGY_CLASSES = ("transistor", "memristor", "cmos-circuit", "optoelectronic")


class CatalogError(Exception):
    pass


@dataclass(frozen=True)
class DeviceRecord:
    name: str
    technology_class: str
    tau_min_s: float
    tau_max_s: float
    reference: str = ""

    def __post_init__(self):
        if self.technology_class not in TECHNOLOGY_CLASSES:
            raise ValueError(
                f"technology_class must be one of {TECHNOLOGY_CLASSES}, "
                f"got {self.technology_class!r}")
        if not 0 < self.tau_min_s <= self.tau_max_s:
            raise ValueError(
                f"{self.name}: need 0 < tau_min_s <= tau_max_s, "
                f"got {self.tau_min_s}..{self.tau_max_s}")


@dataclass(frozen=True)
class TaskRequirement:
    task: str
    min_tau_s: float | None


TASK_REQUIREMENTS = {
    "static": TaskRequirement("static", None),
    "dynamic": TaskRequirement("dynamic", 0.01),
    "series": TaskRequirement("series", 0.2),
}


def to_hardware_tau(tau_discrete: float, sample_rate_hz: float) -> float:
    """Discrete step-count tau -> hardware seconds."""
    if not tau_discrete >= 1.0:
        raise ValueError(f"tau_discrete must be >= 1, got {tau_discrete}")
    if not sample_rate_hz > 0:
        raise ValueError(f"sample rate must be positive, got {sample_rate_hz}")
    return tau_discrete / sample_rate_hz


def to_software_tau(tau_seconds: float, sample_rate_hz: float) -> float:
    """Hardware seconds -> discrete step-count tau."""
    if not tau_seconds > 0:
        raise ValueError(f"tau_seconds must be positive, got {tau_seconds}")
    if not sample_rate_hz > 0:
        raise ValueError(f"sample rate must be positive, got {sample_rate_hz}")
    return tau_seconds * sample_rate_hz


def recommend_devices(task: str, catalog: list[DeviceRecord]) -> dict[str, str]:
    """Verdict per device: pass / fail / partial against the task's minimum tau."""
    if task not in TASK_REQUIREMENTS:
        raise ValueError(f"unknown task {task!r}")
    if not catalog:
        raise ValueError("catalog is empty")
    threshold = TASK_REQUIREMENTS[task].min_tau_s
    verdicts = {}
    for device in catalog:
        if threshold is None or device.tau_min_s >= threshold:
            verdicts[device.name] = "pass"
        elif device.tau_max_s < threshold:
            verdicts[device.name] = "fail"
        else:
            verdicts[device.name] = "partial"
    return verdicts


def builtin_catalog() -> list[DeviceRecord]:
    """Published device tau ranges; single reported values store min == max."""
    rows = [
        ("High-k HfO2 Transistor", "transistor", 2.93e-3, 2.93e-3, "[13]"),
        ("Ferroelectric FET", "transistor", 1.66, 6.97, "[16]"),
        ("Triboelectric Charge-trap Transistor", "transistor", 1.57, 83.94, "[22]"),
        ("MoS2 Neuronal Device", "transistor", 29.25, 29.25, "[19]"),
        ("Li-based Synaptic Transistor", "transistor", 166.06, 166.06, "[12]"),
        ("alpha-MoO3 Nanosheet Transistor", "transistor", 19.95, 19.95, "[12]"),
        ("MoS2/Na+-diffused SiO2 Transistor", "transistor", 21.99, 69.26, "[12]"),
        ("Na-based WOx Synaptic Transistor", "transistor", 221.77, 221.77, "[12]"),
        ("Standard CMOS LIF Neuron", "cmos-circuit", 1e-3, 1.0, "[11]"),
        ("TiO2:ZnO QD Optoelectronic Memristor", "optoelectronic", 0.15, 0.36, "[20]"),
        ("Ferroelectric Memristor", "memristor", 8.69e-2, 8.69e-2, "[17]"),
        ("Organic Ferroelectric FTJ Memristor", "memristor", 39.0, 118.0, "[18]"),
    ]
    return [DeviceRecord(*row) for row in rows]


CATALOG_FIELDS = ("name", "technology_class", "tau_min_s", "tau_max_s", "reference")


def load_catalog(path) -> list[DeviceRecord]:
    devices = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != CATALOG_FIELDS:
            raise CatalogError(
                f"{path}: expected header {','.join(CATALOG_FIELDS)}, "
                f"got {reader.fieldnames}")
        for lineno, row in enumerate(reader, start=2):
            try:
                devices.append(DeviceRecord(
                    row["name"], row["technology_class"],
                    float(row["tau_min_s"]), float(row["tau_max_s"]),
                    row.get("reference") or ""))
            except (TypeError, ValueError) as exc:
                raise CatalogError(f"{path}: line {lineno}: {exc}") from exc
    if not devices:
        raise CatalogError(f"{path}: catalog has no rows")
    return devices


def save_catalog(path, catalog: list[DeviceRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CATALOG_FIELDS)
        for d in catalog:
            writer.writerow([d.name, d.technology_class,
                             repr(d.tau_min_s), repr(d.tau_max_s), d.reference])
