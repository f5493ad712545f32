"""Batch command-line front end: train, evaluate, sweep, analyze, convert, devices.

Every file-writing command ends by writing ``manifest.json`` listing the
artifacts it produced. CSV outputs use a fixed column order, header rows,
``.`` decimals and line-feed terminators. Numeric console output is fixed
to 4 decimal places.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from . import __version__
from .data import (load_mnist_idx, load_series_csv, synth_images, synth_series)
from .experiments import (DEFAULT_TAU_LADDER, default_architecture, firing_report,
                          tau_sweep, tolerance_window, weight_stats)
from .hwmap import (ECG_SAMPLE_RATE_HZ, builtin_catalog, load_catalog,
                    recommend_devices, to_hardware_tau, to_software_tau)
from .numerics import Rng
from .svgchart import bar_chart
from .training import TrainConfig, evaluate, load_checkpoint, save_checkpoint, train

DATA_ENV = "TAU_SNN_DATA"
DEFAULT_LADDER_FLAG = ",".join(f"{t:g}" for t in DEFAULT_TAU_LADDER)


def _fmt(x: float) -> str:
    return f"{float(x):.4f}"


def _fmt_tau(tau: float) -> str:
    return f"{float(tau):g}"


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(c) for c in row) + "\n")


class _Manifest:
    def __init__(self, out_dir: Path, args: argparse.Namespace):
        self.out_dir = out_dir
        self.command = " ".join(sys.argv[1:]) or args.command
        self.config = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
        self.artifacts: list[str] = []
        self.started = time.time()

    def add(self, path: Path) -> Path:
        self.artifacts.append(str(path))
        return path

    def write(self) -> None:
        payload = {
            "command": self.command,
            "config": self.config,
            "seed": self.config.get("seed"),
            "artifacts": self.artifacts,
            "tool_version": __version__,
            "duration_s": round(time.time() - self.started, 3),
        }
        with open(self.out_dir / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _resolve_data_dir(args) -> Path | None:
    data = getattr(args, "data", None) or os.environ.get(DATA_ENV)
    return Path(data) if data else None


def _find_idx(data_dir: Path, stem: str) -> Path:
    for name in (stem, stem + ".gz", stem.replace("-idx", ".idx")):
        candidate = data_dir / name
        if candidate.exists():
            return candidate
    raise FileNotFoundError(f"no {stem} under {data_dir}")


def _load_datasets(args, task: str):
    """Returns (train_set, eval_set). Falls back to the synthetic generators
    when no data directory is available."""
    data_dir = _resolve_data_dir(args)
    synth_n = getattr(args, "synth_n", None) or 2000
    seed = getattr(args, "seed", 0)
    if task in ("static", "dynamic"):
        if data_dir is not None:
            train_set = load_mnist_idx(_find_idx(data_dir, "train-images-idx3-ubyte"),
                                       _find_idx(data_dir, "train-labels-idx1-ubyte"))
            eval_set = load_mnist_idx(_find_idx(data_dir, "t10k-images-idx3-ubyte"),
                                      _find_idx(data_dir, "t10k-labels-idx1-ubyte"))
            limit = getattr(args, "limit", 0)
            if limit:
                train_set = train_set[:limit]
            return train_set, eval_set
        rng = Rng(seed).child(1000)
        return (synth_images(synth_n, rng),
                synth_images(max(1, synth_n // 5), rng))
    window = getattr(args, "window", 128)
    if data_dir is not None:
        series_csv = data_dir / "series.csv"
        if series_csv.exists():
            windows = load_series_csv(series_csv, window, getattr(args, "stride", window))
            n_hold = max(1, len(windows) // 10)
            return windows[:-n_hold], windows[-n_hold:]
    rng = Rng(seed).child(1000)
    return (synth_series(synth_n, window, rng),
            synth_series(max(1, synth_n // 5), window, rng))


def _train_config(args, task: str) -> TrainConfig:
    epochs = args.epochs
    if epochs is None:
        epochs = 30 if task == "series" else 10
    return TrainConfig(tau_train=args.tau, epochs=epochs, batch_size=args.batch,
                       learning_rate=args.lr, seed=args.seed, task=task)


def cmd_train(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = _Manifest(out_dir, args)
    train_set, eval_set = _load_datasets(args, args.task)
    config = _train_config(args, args.task)
    arch = default_architecture(args.task, window=getattr(args, "window", 128))
    model, history = train(arch, train_set, config, holdout=eval_set)

    ckpt = manifest.add(out_dir / "model.ckpt")
    save_checkpoint(model, ckpt, config)
    hist_csv = manifest.add(out_dir / "history.csv")
    _write_csv(hist_csv, ["epoch", "loss", "accuracy"],
               [(e, _fmt(l), _fmt(a)) for e, (l, a) in
                enumerate(zip(history.train_loss, history.holdout_accuracy))])
    manifest.write()
    if history.holdout_accuracy:
        print(f"final holdout accuracy: {_fmt(history.holdout_accuracy[-1])}")
    return 0


def cmd_evaluate(args) -> int:
    model = load_checkpoint(args.checkpoint)
    if args.task == "series":
        args.window = model.architecture.t_steps
    _, eval_set = _load_datasets(args, args.task)
    tau = args.tau if args.tau is not None else model.lif_params.tau_discrete
    accuracy = evaluate(model, eval_set, tau, task=args.task)
    print(_fmt(accuracy))
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        manifest = _Manifest(out_dir, args)
        _write_csv(manifest.add(out_dir / "evaluation.csv"),
                   ["tau_infer", "accuracy"], [(_fmt_tau(tau), _fmt(accuracy))])
        manifest.write()
    return 0


def _parse_taus(text: str) -> tuple[float, ...]:
    try:
        taus = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad tau list {text!r}") from exc
    if not taus:
        raise argparse.ArgumentTypeError("tau list is empty")
    return taus


def _parse_seeds(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from exc


def _sweep_one_seed(payload):
    args, task, seed, train_set, eval_set = payload
    epochs = args.epochs
    if epochs is None:
        epochs = 30 if task == "series" else 10
    config = TrainConfig(epochs=epochs, batch_size=args.batch,
                         learning_rate=args.lr, seed=seed, task=task)
    arch = default_architecture(task, window=getattr(args, "window", 128))
    grid = tau_sweep(task, args.train_taus, args.infer_taus, config,
                     train_set, eval_set, architecture=arch)
    return seed, grid


def cmd_sweep(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = _Manifest(out_dir, args)
    train_set, eval_set = _load_datasets(args, args.task)
    payloads = [(args, args.task, seed, train_set, eval_set) for seed in args.seeds]
    if args.jobs > 1:
        with get_context("fork").Pool(args.jobs) as pool:
            results = pool.map(_sweep_one_seed, payloads)
    else:
        results = [_sweep_one_seed(p) for p in payloads]

    grid_rows = []
    window_rows = []
    for seed, grid in results:
        for i, tau_train in enumerate(grid.train_taus):
            row = grid.accuracy[i]
            for j, tau_infer in enumerate(grid.infer_taus):
                grid_rows.append((seed, _fmt_tau(tau_train), _fmt_tau(tau_infer),
                                  _fmt(row[j])))
            floor = max(min(float(row.max()) - 0.05, 0.999), 1e-6)
            win = tolerance_window(grid.infer_taus, row, floor)
            lo, hi = (win if win is not None else ("", ""))
            window_rows.append((seed, _fmt_tau(tau_train), _fmt(floor),
                                _fmt_tau(lo) if lo != "" else "",
                                _fmt_tau(hi) if hi != "" else ""))
    _write_csv(manifest.add(out_dir / "grid.csv"),
               ["seed", "tau_train", "tau_infer", "accuracy"], grid_rows)
    _write_csv(manifest.add(out_dir / "windows.csv"),
               ["seed", "tau_train", "floor", "tau_low", "tau_high"], window_rows)
    manifest.write()
    return 0


def cmd_analyze(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = _Manifest(out_dir, args)
    model = load_checkpoint(args.checkpoint)

    if args.what == "weights":
        stats = weight_stats(model, bins=args.bins, bound=args.bound)
        stat_rows = []
        for k, layer in enumerate(stats.layers):
            edges = layer.bin_edges
            rows = [("-inf", _fmt(edges[0]), int(layer.counts[0]))]
            rows += [(_fmt(edges[i]), _fmt(edges[i + 1]), int(layer.counts[i + 1]))
                     for i in range(len(edges) - 1)]
            rows.append((_fmt(edges[-1]), "inf", int(layer.counts[-1])))
            csv_path = manifest.add(out_dir / f"weights_layer{k}.csv")
            _write_csv(csv_path, ["bin_left", "bin_right", "count"], rows)
            stat_rows.append((k, _fmt(layer.std), _fmt(layer.excess_kurtosis),
                              _fmt(layer.near_zero_fraction)))
            if args.svg:
                centers = [(edges[i] + edges[i + 1]) / 2 for i in range(len(edges) - 1)]
                svg_path = manifest.add(out_dir / f"weights_layer{k}.svg")
                bar_chart([f"{c:.2f}" for c in centers],
                          layer.counts[1:-1].tolist(), svg_path,
                          title=f"layer {k} weight histogram")
        _write_csv(manifest.add(out_dir / "weight_stats.csv"),
                   ["layer", "std", "kurtosis", "near_zero_frac"], stat_rows)
    else:  # firing
        if not (args.data or os.environ.get(DATA_ENV) or args.synth_n):
            print("error: analyze firing needs --data or --synth-n", file=sys.stderr)
            raise SystemExit(2)
        task = args.task or ("series" if model.architecture.layer_sizes[0] == 1
                             else "static")
        args.window = model.architecture.t_steps if task == "series" else args.window
        _, eval_set = _load_datasets(args, task)
        report = firing_report(model, eval_set, args.taus, task=task)
        rows = [(_fmt_tau(tau), layer, _fmt(report.rates[i, layer]))
                for i, tau in enumerate(report.taus)
                for layer in range(report.rates.shape[1])]
        _write_csv(manifest.add(out_dir / "firing.csv"),
                   ["tau", "layer", "rate"], rows)
        if args.svg:
            for layer in range(report.rates.shape[1]):
                svg_path = manifest.add(out_dir / f"firing_layer{layer}.svg")
                bar_chart([_fmt_tau(t) for t in report.taus],
                          report.rates[:, layer].tolist(), svg_path,
                          title=f"layer {layer} firing rate vs tau")
    manifest.write()
    return 0


def cmd_convert(args) -> int:
    if args.to == "hardware":
        value = to_hardware_tau(args.tau, args.rate)
    else:
        value = to_software_tau(args.tau, args.rate)
    print(_fmt(value))
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        manifest = _Manifest(out_dir, args)
        _write_csv(manifest.add(out_dir / "conversion.csv"),
                   ["tau_in", "rate_hz", "direction", "tau_out"],
                   [(_fmt_tau(args.tau), _fmt_tau(args.rate), args.to, _fmt(value))])
        manifest.write()
    return 0


def cmd_devices(args) -> int:
    catalog = load_catalog(args.catalog) if args.catalog else builtin_catalog()
    verdicts = recommend_devices(args.task, catalog)
    name_width = max(len(d.name) for d in catalog)
    print(f"{'device':<{name_width}}  {'tau range (s)':<22}  verdict")
    rows = []
    for device in catalog:
        span = f"{device.tau_min_s:g} - {device.tau_max_s:g}"
        verdict = verdicts[device.name]
        print(f"{device.name:<{name_width}}  {span:<22}  {verdict}")
        rows.append((device.name, repr(device.tau_min_s), repr(device.tau_max_s),
                     verdict))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = _Manifest(out_dir, args)
    _write_csv(manifest.add(out_dir / "devices.csv"),
               ["name", "tau_min_s", "tau_max_s", "verdict"], rows)
    manifest.write()
    return 0


def _add_data_opts(parser, synth_default=2000):
    parser.add_argument("--data", help=f"data directory (default: ${DATA_ENV})")
    parser.add_argument("--synth-n", dest="synth_n", type=int, default=synth_default,
                        help="synthetic dataset size when no data directory is given")
    parser.add_argument("--limit", type=int, default=0,
                        help="cap the training set size (0 = no cap)")
    parser.add_argument("--window", type=int, default=128,
                        help="series window length")
    parser.add_argument("--stride", type=int, default=128,
                        help="series window stride")


def _add_train_opts(parser):
    parser.add_argument("--epochs", type=int, default=None,
                        help="default: 10 (static/dynamic), 30 (series)")
    parser.add_argument("--batch", type=int, default=64)
    parser.add_argument("--lr", type=float, default=1e-3)
    parser.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tausnn",
        description="Time-constant-aware spiking network toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model and write a checkpoint")
    p.add_argument("--task", required=True, choices=["static", "dynamic", "series"])
    p.add_argument("--tau", required=True, type=float)
    p.add_argument("--out", required=True)
    _add_train_opts(p)
    _add_data_opts(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="accuracy of a checkpoint under a tau override")
    p.add_argument("--task", required=True, choices=["static", "dynamic", "series"])
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=0)
    _add_data_opts(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="train-tau x infer-tau accuracy grid")
    p.add_argument("--task", required=True, choices=["static", "dynamic", "series"])
    p.add_argument("--train-taus", dest="train_taus", type=_parse_taus,
                   default=DEFAULT_TAU_LADDER, metavar=DEFAULT_LADDER_FLAG)
    p.add_argument("--infer-taus", dest="infer_taus", type=_parse_taus,
                   default=DEFAULT_TAU_LADDER, metavar=DEFAULT_LADDER_FLAG)
    p.add_argument("--seeds", type=_parse_seeds, default=(0,))
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    _add_train_opts(p)
    _add_data_opts(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("analyze", help="weight histograms or firing rates")
    p.add_argument("what", choices=["weights", "firing"])
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--task", default=None,
                   choices=["static", "dynamic", "series"])
    p.add_argument("--taus", type=_parse_taus, default=DEFAULT_TAU_LADDER)
    p.add_argument("--bins", type=int, default=101)
    p.add_argument("--bound", type=float, default=1.0)
    p.add_argument("--svg", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    _add_data_opts(p, synth_default=None)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("convert", help="convert tau between software and hardware")
    p.add_argument("--tau", required=True, type=float)
    p.add_argument("--rate", required=True, type=float)
    p.add_argument("--to", choices=["hardware", "software"], default="hardware")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("devices", help="task-aware device recommendation")
    p.add_argument("--task", required=True, choices=["static", "dynamic", "series"])
    p.add_argument("--catalog", default=None)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_devices)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "rate", None) is not None and args.rate <= 0:
        parser.error("--rate must be positive")
    try:
        return args.func(args)
    except SystemExit:
        raise
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
