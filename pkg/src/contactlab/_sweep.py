"""Event-sweep kernels shared by evolve() and the simulation drivers.

The same Python source is compiled with numba when available; set
CONTACTLAB_NO_JIT=1 to force the interpreted fallback (same semantics,
same floating-point results, just slower).
"""

from __future__ import annotations

import os

import numpy as np

KIND_RECOVERY = 0
KIND_TRANSMISSION = 1


def _sweep_final_py(times, kind, a, b, state, t_end):
    """Apply events with time <= t_end in order; state is mutated in place.

    A recovery clears its vertex; a transmission infects the target when
    the source is infected. Returns the extinction time, or -1.0 if the
    configuration is still nonempty after the last applied event.
    """
    n_inf = 0
    for i in range(state.size):
        if state[i]:
            n_inf += 1
    if n_inf == 0:
        return -2.0  # already empty: extinct before this window
    for i in range(times.size):
        t = times[i]
        if t > t_end:
            break
        if kind[i] == 0:
            if state[a[i]]:
                state[a[i]] = 0
                n_inf -= 1
                if n_inf == 0:
                    return t
        else:
            if state[a[i]] and not state[b[i]]:
                state[b[i]] = 1
                n_inf += 1
    return -1.0


def _sweep_hit_py(times, kind, a, b, state, t_end, target):
    """Like _sweep_final_py but also reports when `target` first becomes
    (or already is) infected. Returns (tau, hit_time); -1.0 marks
    "not extinct" / "not hit"."""
    n_inf = 0
    for i in range(state.size):
        if state[i]:
            n_inf += 1
    hit = -1.0
    if state[target]:
        hit = 0.0
    if n_inf == 0:
        return -2.0, hit
    for i in range(times.size):
        t = times[i]
        if t > t_end:
            break
        if kind[i] == 0:
            if state[a[i]]:
                state[a[i]] = 0
                n_inf -= 1
                if n_inf == 0:
                    return t, hit
        else:
            if state[a[i]] and not state[b[i]]:
                state[b[i]] = 1
                n_inf += 1
                if hit < 0.0 and b[i] == target:
                    hit = t
    return -1.0, hit


def _jit(fn):
    if os.environ.get("CONTACTLAB_NO_JIT"):
        return fn
    try:
        import numba
    except ImportError:
        return fn
    return numba.njit(cache=True)(fn)


sweep_final = _jit(_sweep_final_py)
sweep_hit = _jit(_sweep_hit_py)


def empty_events() -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    return (
        np.empty(0, np.float64),
        np.empty(0, np.uint8),
        np.empty(0, np.int32),
        np.empty(0, np.int32),
    )
