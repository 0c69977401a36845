"""One-step and multi-step open-loop prediction plus the NRMSE metric.

Rollouts propagate purely in lifted coordinates (predicted states are never
re-lifted through the dictionary) and read out the state block at every step.
The default speed path iterates the companion form of the recursion; the
direct finite-memory recursion is kept as an independent path so the two can
be cross-checked.  A re-lift variant exists behind an explicit flag for
experimentation only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import InsufficientHistoryError
from .hereditary import Trajectory
from .identification import KoopmanGLModel
from .lifting import readout

__all__ = [
    "RolloutResult",
    "nrmse",
    "rollout",
    "one_step",
    "evaluate_rollout",
    "mean_relative_error_curve",
]

_REL_EPS = 1e-8


@dataclass
class RolloutResult:
    """Predicted states with the aggregate NRMSE and per-step error curve."""

    predicted_states: np.ndarray  # (horizon, n); NaN rows after a divergence
    horizon: int
    nrmse: float
    per_step_relative_error: np.ndarray
    diverged: bool = False
    nrmse_defined: bool = True  # False only for horizon = 0


def nrmse(truth: np.ndarray, pred: np.ndarray) -> float:
    """Root-mean-square error norm over root-mean-square truth norm.

    Non-finite predictions (diverged rollouts) score infinity.
    """
    truth = np.atleast_2d(np.asarray(truth, dtype=np.float64))
    pred = np.atleast_2d(np.asarray(pred, dtype=np.float64))
    if truth.shape != pred.shape:
        raise ValueError(f"shape mismatch: truth {truth.shape} vs pred {pred.shape}")
    if truth.shape[0] < 1:
        raise ValueError("need at least one sample")
    denom = np.sqrt(np.mean(np.sum(truth**2, axis=1)))
    if denom == 0.0:
        raise ZeroDivisionError("truth sequence is identically zero")
    if not np.all(np.isfinite(pred)):
        return float("inf")
    num = np.sqrt(np.mean(np.sum((truth - pred) ** 2, axis=1)))
    return float(num / denom)


def _relative_errors(truth: np.ndarray, pred: np.ndarray) -> np.ndarray:
    num = np.linalg.norm(truth - pred, axis=1)
    den = np.linalg.norm(truth, axis=1) + _REL_EPS
    return num / den


def _prefix_history(model: KoopmanGLModel, prefix_states: np.ndarray) -> np.ndarray:
    """Lift the true prefix and order it newest-first for the kernels."""
    X = np.asarray(prefix_states, dtype=np.float64)
    need = max(model.n_mem, 1)
    if X.ndim != 2 or X.shape != (need, model.n):
        raise ValueError(
            f"prefix must hold exactly {need} states of dimension {model.n}, "
            f"got shape {X.shape}"
        )
    Z = model.dict.lift_trajectory(X)
    return np.ascontiguousarray(Z[::-1])


def _rollout_lifted(
    model: KoopmanGLModel,
    history: np.ndarray,
    U: np.ndarray,
    method: str,
) -> tuple[np.ndarray, int]:
    if method == "companion":
        return _kernels.rollout_companion(
            model.A_bar, model.B_bar, model.kernel.weights, history, U
        )
    if method == "direct":
        return _kernels.rollout_memory(
            model.A_bar, model.B_bar, model.kernel.weights, history, U
        )
    if method == "relift":
        return _rollout_relift(model, history, U)
    raise ValueError(f"unknown rollout method {method!r}")


def _rollout_relift(
    model: KoopmanGLModel, history: np.ndarray, U: np.ndarray
) -> tuple[np.ndarray, int]:
    # Experimentation-only path: projects every predicted lifted state back
    # through the dictionary.  Not equivalent to the linear recursion.
    w = model.kernel.weights
    N = model.n_mem
    hist = list(np.asarray(history, dtype=np.float64))  # newest-first
    out = np.empty((len(U), model.p))
    with np.errstate(all="ignore"):
        for t in range(len(U)):
            z = model.A_bar @ hist[0] + model.B_bar @ U[t]
            for j in range(1, N + 1):
                z -= w[j] * hist[j - 1]
            if not np.all(np.isfinite(z)):
                out[t:] = np.nan
                return out, t
            try:
                z = model.dict.lift(np.asarray(readout(z, model.n)))
            except FloatingPointError:
                out[t:] = np.nan
                return out, t
            out[t] = z
            hist.insert(0, z)
            if len(hist) > max(N, 1):
                hist.pop()
    return out, -1


def rollout(
    model: KoopmanGLModel,
    true_prefix: np.ndarray,
    inputs: np.ndarray,
    horizon: int,
    truth: np.ndarray | None = None,
    method: str = "companion",
) -> RolloutResult:
    """Free-running prediction seeded from the lifted true prefix.

    ``true_prefix`` holds the first max(N, 1) measured states (oldest first);
    ``inputs[0]`` drives the first predicted step.  When ``truth`` is given
    (the measured states aligned with the predictions) the NRMSE and per-step
    relative errors are filled in; divergence scores infinity instead of
    raising so batch evaluations can rank unstable configurations.
    """
    horizon = int(horizon)
    U = np.ascontiguousarray(np.atleast_2d(np.asarray(inputs, dtype=np.float64).T).T)
    if horizon < 0 or horizon > len(U):
        raise ValueError(f"horizon {horizon} exceeds the {len(U)} available inputs")
    if horizon == 0:
        return RolloutResult(
            predicted_states=np.empty((0, model.n)),
            horizon=0,
            nrmse=0.0,
            per_step_relative_error=np.empty(0),
            nrmse_defined=False,
        )
    history = _prefix_history(model, true_prefix)
    Z, bad = _rollout_lifted(model, history, U[:horizon], method)
    pred = np.asarray(readout(Z, model.n))
    diverged = bad >= 0
    if truth is None:
        return RolloutResult(
            predicted_states=pred,
            horizon=horizon,
            nrmse=float("inf") if diverged else 0.0,
            per_step_relative_error=np.full(horizon, np.nan),
            diverged=diverged,
            nrmse_defined=False,
        )
    truth = np.asarray(truth, dtype=np.float64)
    if truth.shape != pred.shape:
        raise ValueError(f"truth shape {truth.shape} does not match horizon {horizon}")
    with np.errstate(invalid="ignore"):
        per_step = _relative_errors(truth, pred)
    return RolloutResult(
        predicted_states=pred,
        horizon=horizon,
        nrmse=nrmse(truth, pred),
        per_step_relative_error=per_step,
        diverged=diverged,
    )


def evaluate_rollout(
    model: KoopmanGLModel, traj: Trajectory, horizon: int, method: str = "companion"
) -> RolloutResult:
    """Roll out from the start of ``traj`` and score against its measurements.

    The prefix is the first max(N, 1) measured states; predictions cover the
    following ``horizon`` samples.
    """
    P = max(model.n_mem, 1)
    horizon = int(horizon)
    if traj.length < P - 1 + horizon:
        raise InsufficientHistoryError(
            f"trajectory with {traj.length} transitions cannot support a "
            f"{horizon}-step rollout after a {P}-state prefix"
        )
    return rollout(
        model,
        traj.states[:P],
        traj.inputs[P - 1 : P - 1 + horizon],
        horizon,
        truth=traj.states[P : P + horizon],
        method=method,
    )


def one_step(model: KoopmanGLModel, traj: Trajectory) -> RolloutResult:
    """Teacher-forced prediction of every reachable next state.

    Each x_(k+1) is predicted from the true measured lifted history; the
    result aggregates the NRMSE over all predicted steps.
    """
    N = model.n_mem
    T = traj.length
    if T < max(N, 1):
        raise InsufficientHistoryError(
            f"trajectory with {T} transitions is too short for memory length {N}"
        )
    Z = model.dict.lift_trajectory(traj.states)
    w = model.kernel.weights
    s_start = max(N, 1)  # first predicted index
    ks = np.arange(s_start - 1, T)
    pred_lifted = Z[ks] @ model.A_bar.T + traj.inputs[ks] @ model.B_bar.T
    if N >= 1:
        # memory term sum_{j=1..N} w_j z_(k+1-j): windows of length N ending at k
        windows = np.lib.stride_tricks.sliding_window_view(Z[:T], N, axis=0)
        pred_lifted -= windows @ w[1:][::-1]
    pred = np.asarray(readout(pred_lifted, model.n))
    truth = traj.states[ks + 1]
    return RolloutResult(
        predicted_states=pred,
        horizon=len(ks),
        nrmse=nrmse(truth, pred),
        per_step_relative_error=_relative_errors(truth, pred),
    )


def mean_relative_error_curve(
    model: KoopmanGLModel,
    trajectories: list[Trajectory],
    horizon: int,
    method: str = "companion",
) -> np.ndarray:
    """Per-step relative rollout error averaged over trajectories.

    Divergent steps enter as NaN and are excluded from the mean at each step.
    """
    curves = np.full((len(trajectories), horizon), np.nan)
    for i, traj in enumerate(trajectories):
        res = evaluate_rollout(model, traj, horizon, method=method)
        curves[i] = res.per_step_relative_error
    with np.errstate(invalid="ignore"):
        return np.nanmean(curves, axis=0)
