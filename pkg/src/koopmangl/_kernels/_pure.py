"""Pure-numpy implementations of the sequential hot loops.

Same contracts as the compiled module ``_core``; used as the fallback when
the extension is unavailable (or forced via ``KOOPMANGL_BACKEND=pure``).
All kernels return ``(array, bad_step)`` where ``bad_step`` is -1 on success
and otherwise the 0-based index of the first step that produced a non-finite
value (remaining rows are filled with NaN).
"""

from __future__ import annotations

import math

import numpy as np


def simulate_hereditary_2d(
    x0: np.ndarray,
    inputs: np.ndarray,
    kernel: np.ndarray,
    process_noise: np.ndarray,
) -> tuple[np.ndarray, int]:
    """Roll the 2-D nonlinear hereditary benchmark map for len(inputs) steps.

    ``kernel`` holds h_1..h_J; the convolution acts on tanh of the first
    coordinate only and sums over however much history exists while k + 1 < J.
    Scalar trig uses libc (the ``math`` module) to match the compiled kernel.
    """
    T = inputs.shape[0]
    J = kernel.shape[0]
    states = np.empty((T + 1, 2))
    gh = np.empty(T + 1)  # tanh(x1) history, index = time
    states[0] = x0
    gh[0] = math.tanh(x0[0])
    krev = kernel[::-1]
    bad = -1
    with np.errstate(all="ignore"):
        for k in range(T):
            x1 = float(states[k, 0])
            x2 = float(states[k, 1])
            u = float(inputs[k])
            L = min(k + 1, J)
            # sum_{j=1..L} h_j * tanh(x1 at time k+1-j)
            mem = float(krev[J - L :] @ gh[k + 1 - L : k + 1]) if L else 0.0
            n1 = 0.90 * x1 + 0.10 * math.sin(x2) + 0.10 * u + mem + process_noise[k, 0]
            n2 = (
                0.85 * x2
                + 0.08 * math.cos(x1)
                + 0.05 * x1 * x1
                + 0.05 * u
                + process_noise[k, 1]
            )
            if not (np.isfinite(n1) and np.isfinite(n2)):
                bad = k
                states[k + 1 :] = np.nan
                break
            states[k + 1, 0] = n1
            states[k + 1, 1] = n2
            gh[k + 1] = math.tanh(n1)
    return states, bad


def rollout_memory(
    A: np.ndarray,
    B: np.ndarray,
    w: np.ndarray,
    history: np.ndarray,
    inputs: np.ndarray,
) -> tuple[np.ndarray, int]:
    """Direct finite-memory recursion z+ = A z + B u - sum_j w_j z_(k+1-j).

    ``history`` holds max(N, 1) lifted states newest-first; ``w`` has length
    N + 1 with w_0 = 1 (ignored by the recursion).
    """
    N = w.shape[0] - 1
    p = A.shape[0]
    H = inputs.shape[0]
    hist_len = history.shape[0]
    buf = np.empty((hist_len + H, p))
    buf[:hist_len] = history[::-1]  # oldest-first
    wrev = np.ascontiguousarray(w[:0:-1])  # w_N .. w_1
    bad = -1
    with np.errstate(all="ignore"):
        for t in range(H):
            cur = hist_len + t - 1
            znew = A @ buf[cur] + B @ inputs[t]
            if N:
                znew -= wrev @ buf[cur + 1 - N : cur + 1]
            if not np.all(np.isfinite(znew)):
                bad = t
                buf[cur + 1 :] = np.nan
                break
            buf[cur + 1] = znew
    return buf[hist_len:].copy(), bad


def rollout_companion(
    A: np.ndarray,
    B: np.ndarray,
    w: np.ndarray,
    history: np.ndarray,
    inputs: np.ndarray,
) -> tuple[np.ndarray, int]:
    """Block-companion iteration: top row (A - w_1 I | -w_2 I | ... | -w_N I) plus shift.

    Same contract as :func:`rollout_memory`; kept as an independent code path
    so the two can be cross-checked.
    """
    N = w.shape[0] - 1
    p = A.shape[0]
    H = inputs.shape[0]
    A1 = A - w[1] * np.eye(p) if N >= 1 else A
    hist = np.array(history[: max(N, 1)], dtype=np.float64)  # newest-first
    out = np.empty((H, p))
    bad = -1
    with np.errstate(all="ignore"):
        for t in range(H):
            top = A1 @ hist[0] + B @ inputs[t]
            if N >= 2:
                top -= w[2:] @ hist[1:N]
            if not np.all(np.isfinite(top)):
                bad = t
                out[t:] = np.nan
                break
            out[t] = top
            if N >= 2:
                hist[1:] = hist[:-1]
            hist[0] = top
    return out, bad
