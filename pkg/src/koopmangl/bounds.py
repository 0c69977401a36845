"""Finite-memory approximation diagnostics.

Replacing a reference memory kernel c*_j by the truncated GL kernel splits
the induced disturbance into a retained-lag mismatch term and a neglected
tail; their sum epsilon controls a per-step disturbance bound
m_z * epsilon + xi_bar.  When the reference kernel is exactly GL the mismatch
vanishes and the bound reduces to the pure truncation rate
m_z * (C_alpha / alpha) * N^(-alpha).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .gl_kernel import _check_alpha, _weights_vector
from .hereditary import Trajectory
from .lifting import Dictionary

__all__ = [
    "KernelMismatchReport",
    "kernel_mismatch",
    "disturbance_bound",
    "gl_truncation_bound",
    "empirical_mz",
    "complete_report",
]


@dataclass(frozen=True)
class KernelMismatchReport:
    """Kernel-mismatch decomposition, optionally completed with a bound."""

    alpha: float
    n_mem: int
    retained_mismatch: float  # sum_{j<=N} |c*_j - w_j|
    tail: float  # sum_{j>N} |c*_j|
    epsilon: float  # retained_mismatch + tail
    m_z: float | None = None
    xi_bar: float | None = None
    d_bound: float | None = None


def kernel_mismatch(alpha: float, n_mem: int, c_star: np.ndarray) -> KernelMismatchReport:
    """Compare a reference kernel against the truncated GL kernel.

    ``c_star`` holds c*_1, c*_2, ... and is treated as zero beyond its length.
    """
    alpha = _check_alpha(alpha)
    n_mem = int(n_mem)
    if n_mem < 1:
        raise ValueError("n_mem must be a positive integer")
    c = np.asarray(c_star, dtype=np.float64).reshape(-1)
    w = _weights_vector(alpha, n_mem)[1:]  # w_1..w_N
    c_head = np.zeros(n_mem)
    c_head[: min(len(c), n_mem)] = c[:n_mem]
    retained = float(np.sum(np.abs(c_head - w)))
    tail = float(np.sum(np.abs(c[n_mem:]))) if len(c) > n_mem else 0.0
    return KernelMismatchReport(
        alpha=alpha,
        n_mem=n_mem,
        retained_mismatch=retained,
        tail=tail,
        epsilon=retained + tail,
    )


def disturbance_bound(epsilon: float, m_z: float, xi_bar: float) -> float:
    """Per-step disturbance bound m_z * epsilon + xi_bar."""
    if min(epsilon, m_z, xi_bar) < 0:
        raise ValueError("epsilon, m_z and xi_bar must be nonnegative")
    return float(m_z) * float(epsilon) + float(xi_bar)


def gl_truncation_bound(alpha: float, n_mem: int, m_z: float, c_alpha: float) -> float:
    """Pure GL truncation rate m_z * (c_alpha / alpha) * N^(-alpha).

    The residual term xi_bar, when relevant, is added by the caller.
    """
    alpha = _check_alpha(alpha)
    if n_mem < 1:
        raise ValueError("n_mem must be a positive integer")
    if m_z < 0 or c_alpha <= 0:
        raise ValueError("m_z must be nonnegative and c_alpha positive")
    return float(m_z) * (float(c_alpha) / alpha) * float(n_mem) ** (-alpha)


def empirical_mz(trajectories: list[Trajectory], dict_: Dictionary) -> float:
    """Largest lifted-state 2-norm over all measured snapshots of a split."""
    if not trajectories:
        raise ValueError("need at least one trajectory")
    best = 0.0
    for traj in trajectories:
        Z = dict_.lift_trajectory(traj.states)
        best = max(best, float(np.max(np.linalg.norm(Z, axis=1))))
    return best


def complete_report(
    report: KernelMismatchReport, m_z: float, xi_bar: float = 0.0
) -> KernelMismatchReport:
    """Attach the empirical lifted-state bound and the resulting disturbance bound."""
    return dataclasses.replace(
        report,
        m_z=float(m_z),
        xi_bar=float(xi_bar),
        d_bound=disturbance_bound(report.epsilon, m_z, xi_bar),
    )
