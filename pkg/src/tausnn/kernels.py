"""Hot per-step neuron kernels: numba-jitted fast path, pure-numpy fallback.

Backend selection is decided once at import time from the environment
variable ``TAUSNN_BACKEND``:

* ``numba``  - require the jitted kernels (ImportError if numba is missing)
* ``numpy``  - force the pure-numpy fallback
* unset     - use numba when importable, numpy otherwise

Both backends compute identical float64 expressions; run-to-run results are
bit-identical within a backend. ``benchmarks/bench_backends.py`` compares the
two paths.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "BACKEND",
    "lif_step",
    "lif_step_smoothed",
    "integrator_step",
    "spike_backward",
    "fnv1a64",
]

_SOFT = 0
_HARD = 1


# ---------------------------------------------------------------------------
# pure-numpy implementations
# ---------------------------------------------------------------------------

def _np_lif_step(v, cur, inv_tau, v_rest, theta, reset):
    m = v + (v_rest - v) * inv_tau + cur
    s = (m >= theta).astype(np.float64)
    if reset == _SOFT:
        v_new = m - theta * s
    else:
        v_new = m * (1.0 - s) + v_rest * s
    return v_new, m, s


def _np_lif_step_smoothed(v, cur, inv_tau, v_rest, theta, half_width, reset):
    m = v + (v_rest - v) * inv_tau + cur
    s = np.clip((m - theta + half_width) / (2.0 * half_width), 0.0, 1.0)
    if reset == _SOFT:
        v_new = m - theta * s
    else:
        v_new = m * (1.0 - s) + v_rest * s
    return v_new, m, s


def _np_integrator_step(u, cur, inv_tau, v_rest):
    return u + (v_rest - u) * inv_tau + cur


def _np_spike_backward(g_v, g_s, m, s, theta, v_rest, half_width, reset):
    # rectangular surrogate: d(spike)/d(membrane)
    sg = np.where(np.abs(m - theta) <= half_width, 1.0 / (2.0 * half_width), 0.0)
    if reset == _SOFT:
        dv_dm = 1.0 - theta * sg
    else:
        dv_dm = (1.0 - s) + (v_rest - m) * sg
    return g_v * dv_dm + g_s * sg


def _np_fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

def _build_numba():
    import numba as nb

    @nb.njit(cache=True)
    def lif_step(v, cur, inv_tau, v_rest, theta, reset):
        m = np.empty_like(v)
        s = np.empty_like(v)
        v_new = np.empty_like(v)
        flat_v = v.ravel()
        flat_c = cur.ravel()
        fm = m.ravel()
        fs = s.ravel()
        fn = v_new.ravel()
        for i in range(flat_v.size):
            mi = flat_v[i] + (v_rest - flat_v[i]) * inv_tau + flat_c[i]
            si = 1.0 if mi >= theta else 0.0
            fm[i] = mi
            fs[i] = si
            if reset == _SOFT:
                fn[i] = mi - theta * si
            else:
                fn[i] = mi * (1.0 - si) + v_rest * si
        return v_new, m, s

    @nb.njit(cache=True)
    def lif_step_smoothed(v, cur, inv_tau, v_rest, theta, half_width, reset):
        m = np.empty_like(v)
        s = np.empty_like(v)
        v_new = np.empty_like(v)
        flat_v = v.ravel()
        flat_c = cur.ravel()
        fm = m.ravel()
        fs = s.ravel()
        fn = v_new.ravel()
        for i in range(flat_v.size):
            mi = flat_v[i] + (v_rest - flat_v[i]) * inv_tau + flat_c[i]
            si = (mi - theta + half_width) / (2.0 * half_width)
            if si < 0.0:
                si = 0.0
            elif si > 1.0:
                si = 1.0
            fm[i] = mi
            fs[i] = si
            if reset == _SOFT:
                fn[i] = mi - theta * si
            else:
                fn[i] = mi * (1.0 - si) + v_rest * si
        return v_new, m, s

    @nb.njit(cache=True)
    def integrator_step(u, cur, inv_tau, v_rest):
        out = np.empty_like(u)
        fu = u.ravel()
        fc = cur.ravel()
        fo = out.ravel()
        for i in range(fu.size):
            fo[i] = fu[i] + (v_rest - fu[i]) * inv_tau + fc[i]
        return out

    @nb.njit(cache=True)
    def spike_backward(g_v, g_s, m, s, theta, v_rest, half_width, reset):
        out = np.empty_like(m)
        fgv = g_v.ravel()
        fgs = g_s.ravel()
        fm = m.ravel()
        fs = s.ravel()
        fo = out.ravel()
        for i in range(fm.size):
            sg = 1.0 / (2.0 * half_width) if abs(fm[i] - theta) <= half_width else 0.0
            if reset == _SOFT:
                dv_dm = 1.0 - theta * sg
            else:
                dv_dm = (1.0 - fs[i]) + (v_rest - fm[i]) * sg
            fo[i] = fgv[i] * dv_dm + fgs[i] * sg
        return out

    @nb.njit(cache=True)
    def _fnv(data):
        h = nb.uint64(0xCBF29CE484222325)
        prime = nb.uint64(0x100000001B3)
        for i in range(data.size):
            h = nb.uint64(h ^ nb.uint64(data[i]))
            h = nb.uint64(h * prime)
        return h

    def fnv1a64(data: bytes) -> int:
        return int(_fnv(np.frombuffer(data, dtype=np.uint8)))

    return lif_step, lif_step_smoothed, integrator_step, spike_backward, fnv1a64


_requested = os.environ.get("TAUSNN_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise ValueError(f"TAUSNN_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

if _requested == "numpy":
    BACKEND = "numpy"
else:
    try:
        (lif_step, lif_step_smoothed, integrator_step,
         spike_backward, fnv1a64) = _build_numba()
        BACKEND = "numba"
    except ImportError:
        if _requested == "numba":
            raise
        BACKEND = "numpy"

if BACKEND == "numpy":
    lif_step = _np_lif_step
    lif_step_smoothed = _np_lif_step_smoothed
    integrator_step = _np_integrator_step
    spike_backward = _np_spike_backward
    fnv1a64 = _np_fnv1a64
