"""Truncated Grünwald-Letnikov weight sequences and their decay diagnostics.

The GL weights ``w_j(alpha) = (-1)^j * binom(alpha, j)`` are generated by the
multiplicative recursion ``w_j = -w_{j-1} * (alpha - (j - 1)) / j`` with
``w_0 = 1``.  For ``alpha`` in (0, 1) every factor beyond j = 1 has magnitude
below one, so the recursion is numerically stable and no Gamma-function
evaluation is needed.  No time-step scaling is applied here; callers absorb
any constant factor into the coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["GLKernel", "gl_weights", "tail_mass", "fit_decay_constant"]


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in the open interval (0, 1), got {alpha}")
    return alpha


def _weights_vector(alpha: float, j_max: int) -> np.ndarray:
    """Weights w_0..w_{j_max} via the recursion, evaluated as a cumulative product."""
    j = np.arange(1, j_max + 1, dtype=np.float64)
    # w_j / w_{j-1} = -(alpha - (j-1)) / j = (j - 1 - alpha) / j
    factors = (j - 1.0 - alpha) / j
    out = np.empty(j_max + 1, dtype=np.float64)
    out[0] = 1.0
    np.cumprod(factors, out=out[1:])
    return out


@dataclass(frozen=True)
class GLKernel:
    """A fractional order, a memory length and the truncated weight sequence.

    ``n_mem = 0`` encodes the degenerate memoryless kernel (weights = [1.0])
    used by Markov baselines; ``alpha`` is stored as 0.0 in that case.
    """

    alpha: float
    n_mem: int
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        object.__setattr__(self, "weights", w)
        if self.n_mem < 0:
            raise ValueError("n_mem must be nonnegative")
        if w.shape != (self.n_mem + 1,):
            raise ValueError(
                f"weights must have length n_mem + 1 = {self.n_mem + 1}, got {w.shape}"
            )
        if w[0] != 1.0:
            raise ValueError("weights[0] must equal 1 exactly")
        if self.n_mem >= 1:
            _check_alpha(self.alpha)

    @classmethod
    def markov(cls) -> "GLKernel":
        """The memoryless kernel: N = 0, single weight w_0 = 1."""
        return cls(alpha=0.0, n_mem=0, weights=np.ones(1))

    @property
    def is_markov(self) -> bool:
        return self.n_mem == 0


def gl_weights(alpha: float, n_mem: int) -> GLKernel:
    """Compute the truncated GL kernel for ``alpha`` in (0, 1) and memory ``n_mem >= 1``."""
    alpha = _check_alpha(alpha)
    n_mem = int(n_mem)
    if n_mem < 1:
        raise ValueError(f"n_mem must be a positive integer, got {n_mem}")
    return GLKernel(alpha=alpha, n_mem=n_mem, weights=_weights_vector(alpha, n_mem))


def tail_mass(alpha: float, n_mem: int, j_max: int = 10**6) -> float:
    """Finite-horizon tail mass ``sum_{j=N+1}^{j_max} |w_j(alpha)|``.

    Computed by explicit summation; the polynomial decay of the weights makes
    the neglected remainder beyond ``j_max`` irrelevant at report precision
    for the default horizon.
    """
    alpha = _check_alpha(alpha)
    n_mem = int(n_mem)
    j_max = int(j_max)
    if n_mem < 1:
        raise ValueError(f"n_mem must be a positive integer, got {n_mem}")
    if j_max <= n_mem:
        raise ValueError(f"j_max ({j_max}) must exceed n_mem ({n_mem})")
    w = _weights_vector(alpha, j_max)
    return float(np.sum(np.abs(w[n_mem + 1 :])))


def fit_decay_constant(alpha: float, j_max: int = 10**5) -> float:
    """Empirical decay constant ``max_{1<=j<=j_max} |w_j(alpha)| * j^(1+alpha)``.

    Serves as a computable stand-in for the constant in the power-law decay
    bound ``|w_j| <= C * j^-(1+alpha)``; by construction it dominates every
    scanned term.
    """
    alpha = _check_alpha(alpha)
    j_max = int(j_max)
    if j_max < 10:
        raise ValueError(f"j_max must be at least 10, got {j_max}")
    w = _weights_vector(alpha, j_max)
    j = np.arange(1, j_max + 1, dtype=np.float64)
    return float(np.max(np.abs(w[1:]) * j ** (1.0 + alpha)))
