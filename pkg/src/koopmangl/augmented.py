"""Block-companion augmented realization of the finite-memory lifted model.

Stacking the last N lifted states turns the finite-memory recursion into a
one-step linear system.  The realization is stored block-sparse (dense top
block row defined by A_bar and the GL weights, plus an implicit shift); the
dense pN x pN matrices are materialized only on request, e.g. for eigenvalue
diagnostics.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import DivergenceError
from .identification import KoopmanGLModel

__all__ = [
    "AugmentedRealization",
    "SpectralRadiusResult",
    "build_augmented",
    "rollout_augmented",
    "spectral_radius",
]


@dataclass
class AugmentedRealization:
    """Companion-form (A_aug, B_aug) held in factored form.

    Top block row: [A_bar - w_1 I | -w_2 I | ... | -w_N I]; sub-diagonal
    blocks are identities; B_aug stacks B_bar over zeros.
    """

    A_bar: np.ndarray
    B_bar: np.ndarray
    weights: np.ndarray  # w_0..w_N
    source_model_hash: str = ""

    def __post_init__(self):
        self.A_bar = np.ascontiguousarray(self.A_bar, dtype=np.float64)
        self.B_bar = np.ascontiguousarray(self.B_bar, dtype=np.float64)
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        if self.n_mem < 1:
            raise ValueError("augmentation requires memory length N >= 1")

    @property
    def p(self) -> int:
        return self.A_bar.shape[0]

    @property
    def m(self) -> int:
        return self.B_bar.shape[1]

    @property
    def n_mem(self) -> int:
        return len(self.weights) - 1

    @property
    def dim(self) -> int:
        """Augmented state dimension p * N."""
        return self.p * self.n_mem

    def dense(self) -> tuple[np.ndarray, np.ndarray]:
        """Materialize (A_aug, B_aug) as dense arrays."""
        p, N, w = self.p, self.n_mem, self.weights
        A_aug = np.zeros((p * N, p * N))
        A_aug[:p, :p] = self.A_bar - w[1] * np.eye(p)
        for j in range(2, N + 1):
            A_aug[:p, (j - 1) * p : j * p] = -w[j] * np.eye(p)
        for i in range(2, N + 1):
            A_aug[(i - 1) * p : i * p, (i - 2) * p : (i - 1) * p] = np.eye(p)
        B_aug = np.zeros((p * N, self.m))
        B_aug[:p] = self.B_bar
        return A_aug, B_aug

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """A_aug @ v without materializing A_aug (works for complex v)."""
        p, N, w = self.p, self.n_mem, self.weights
        v = np.asarray(v)
        if v.shape != (p * N,):
            raise ValueError(f"expected a vector of length {p * N}, got {v.shape}")
        out = np.empty_like(v)
        out[:p] = self.A_bar @ v[:p] - w[1] * v[:p]
        for j in range(2, N + 1):
            out[:p] -= w[j] * v[(j - 1) * p : j * p]
        out[p:] = v[: p * (N - 1)]
        return out


def _model_hash(model: KoopmanGLModel) -> str:
    h = hashlib.sha256()
    h.update(model.A_bar.tobytes())
    h.update(model.B_bar.tobytes())
    h.update(model.kernel.weights.tobytes())
    return "sha256:" + h.hexdigest()


def build_augmented(model: KoopmanGLModel) -> AugmentedRealization:
    """Companion realization of an identified model; requires N >= 1."""
    if model.kernel.n_mem < 1:
        raise ValueError(
            "model is memoryless (N = 0); a Markov model needs no augmentation"
        )
    return AugmentedRealization(
        A_bar=model.A_bar,
        B_bar=model.B_bar,
        weights=model.kernel.weights,
        source_model_hash=_model_hash(model),
    )


def rollout_augmented(
    real: AugmentedRealization,
    initial_history: np.ndarray,
    inputs: np.ndarray,
    horizon: int,
) -> np.ndarray:
    """Iterate the augmented system and return the first block of each step.

    ``initial_history`` holds exactly N lifted states newest-first, i.e. the
    augmented state [z_(N-1); ...; z_0] read top to bottom.  Raises
    :class:`DivergenceError` on overflow.
    """
    hist = np.ascontiguousarray(initial_history, dtype=np.float64)
    if hist.shape != (real.n_mem, real.p):
        raise ValueError(
            f"initial history must have shape ({real.n_mem}, {real.p}), got {hist.shape}"
        )
    horizon = int(horizon)
    U = np.ascontiguousarray(np.atleast_2d(np.asarray(inputs, dtype=np.float64).T).T)
    if horizon < 0 or horizon > len(U):
        raise ValueError(f"horizon {horizon} exceeds the {len(U)} available inputs")
    if horizon == 0:
        return np.empty((0, real.p))
    Z, bad = _kernels.rollout_companion(
        real.A_bar, real.B_bar, real.weights, hist, U[:horizon]
    )
    if bad >= 0:
        raise DivergenceError(bad)
    return Z


class SpectralRadiusResult(NamedTuple):
    value: float
    estimated: bool  # True when obtained by power iteration rather than eig


def spectral_radius(
    real: AugmentedRealization,
    dense_limit: int = 2000,
    iterations: int = 500,
    seed: int = 0,
) -> SpectralRadiusResult:
    """Largest eigenvalue magnitude of A_aug.

    Uses a dense eigendecomposition up to ``dense_limit`` augmented dimensions
    and a power-iteration estimate (complex start vector, flagged) beyond.
    """
    if real.dim <= dense_limit:
        A_aug, _ = real.dense()
        return SpectralRadiusResult(float(np.max(np.abs(np.linalg.eigvals(A_aug)))), False)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed])))
    v = rng.standard_normal(real.dim) + 1j * rng.standard_normal(real.dim)
    v /= np.linalg.norm(v)
    burn_in = iterations // 2
    log_ratios = []
    for it in range(iterations):
        Av = real.matvec(v)
        norm = np.linalg.norm(Av)
        if norm == 0.0:
            return SpectralRadiusResult(0.0, True)
        if it >= burn_in:
            log_ratios.append(np.log(norm))
        v = Av / norm
    # geometric mean of the post-burn-in growth ratios; damps the oscillation
    # a dominant complex-conjugate pair induces in single-step ratios
    return SpectralRadiusResult(float(np.exp(np.mean(log_ratios))), True)
