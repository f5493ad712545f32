#!/usr/bin/env python3
"""Compare the numba and pure-numpy kernel backends.

The backend is fixed at import time by TAUSNN_BACKEND, so each backend is
timed in a fresh subprocess. Reported numbers are best-of-repeat wall times
for the elementwise neuron kernels and for a full forward/backward pass of
the image-scale network.

Usage: python3 benchmarks/bench_backends.py [--repeats N] [--batch B]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json
import sys
import time

import numpy as np

from tausnn import kernels
from tausnn.network import Architecture, TauSnn, backward_batch
from tausnn.neuron import LifParams
from tausnn.numerics import Rng

repeats, batch = int(sys.argv[1]), int(sys.argv[2])
rng = Rng(0)
v = rng.uniform(-1.0, 2.0, (batch, 784))
cur = rng.uniform(0.0, 1.0, (batch, 784))
g = rng.uniform(-1.0, 1.0, (batch, 784))


def best(fn, n=None):
    times = []
    for _ in range(n or repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


# trigger jit compilation (or a no-op warm-up for numpy) before timing
kernels.lif_step(v, cur, 1 / 32.0, 0.0, 1.0, 0)
kernels.lif_step_smoothed(v, cur, 1 / 32.0, 0.0, 1.0, 0.5, 0)
kernels.spike_backward(g, g, v, cur, 1.0, 0.0, 0.5, 0)
kernels.integrator_step(v, cur, 1 / 32.0, 0.0)

results = {"backend": kernels.BACKEND}
results["lif_step"] = best(
    lambda: kernels.lif_step(v, cur, 1 / 32.0, 0.0, 1.0, 0))
results["lif_step_smoothed"] = best(
    lambda: kernels.lif_step_smoothed(v, cur, 1 / 32.0, 0.0, 1.0, 0.5, 0))
results["spike_backward"] = best(
    lambda: kernels.spike_backward(g, g, v, cur, 1.0, 0.0, 0.5, 0))
results["integrator_step"] = best(
    lambda: kernels.integrator_step(v, cur, 1 / 32.0, 0.0))

arch = Architecture((784, 128, 10), 10)
model = TauSnn.initialize(arch, LifParams(), Rng(1))
currents = Rng(2).uniform(0.0, 1.0, (batch, 10, 784))
labels = Rng(3).integers(0, 10, size=batch)
backward_batch(model, currents, labels)  # warm-up
results["forward_backward_batch"] = best(
    lambda: backward_batch(model, currents, labels), n=max(3, repeats // 3))

print(json.dumps(results))
"""


def run_backend(backend: str, repeats: int, batch: int) -> dict:
    env = dict(os.environ, TAUSNN_BACKEND=backend)
    out = subprocess.run([sys.executable, "-c", WORKER, str(repeats), str(batch)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=20)
    parser.add_argument("--batch", type=int, default=64)
    args = parser.parse_args()

    numpy_res = run_backend("numpy", args.repeats, args.batch)
    numba_res = run_backend("numba", args.repeats, args.batch)

    keys = [k for k in numpy_res if k != "backend"]
    width = max(len(k) for k in keys)
    print(f"{'kernel':<{width}}  {'numpy (ms)':>12}  {'numba (ms)':>12}  speedup")
    for key in keys:
        a, b = numpy_res[key], numba_res[key]
        print(f"{key:<{width}}  {a * 1e3:>12.4f}  {b * 1e3:>12.4f}  "
              f"{a / b:>6.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
