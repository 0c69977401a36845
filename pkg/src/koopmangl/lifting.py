"""Observable dictionaries: the lifting map psi(x) = [1; x; phi(x)] and its readout.

Dictionaries are declarative data (lists of feature descriptors), not opaque
callables, so identified models can round-trip through the on-disk format and
be re-evaluated after reload.  The lifted vector always starts with the
constant 1 followed by the bare state coordinates, which makes the state an
exact linear readout of the first ``1 + n`` entries.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Feature",
    "Dictionary",
    "lift",
    "readout",
    "readout_matrix",
    "default_dictionary",
    "affine_dictionary",
]

_MAX_MONOMIAL_DEGREE = 4


@dataclass(frozen=True)
class Feature:
    """One nonlinear observable: kind plus integer parameters.

    Kinds and parameters (coordinate indices are 0-based):

    - ``monomial``: one exponent per state coordinate, total degree 2..4
    - ``sin`` / ``cos`` / ``tanh``: a single coordinate index
    - ``prod``: a pair of coordinate indices (i, j)
    """

    kind: str
    params: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(int(v) for v in self.params))
        if self.kind not in ("monomial", "sin", "cos", "tanh", "prod"):
            raise ValueError(f"unknown feature kind {self.kind!r}")
        if self.kind in ("sin", "cos", "tanh") and len(self.params) != 1:
            raise ValueError(f"{self.kind} takes exactly one coordinate index")
        if self.kind == "prod" and len(self.params) != 2:
            raise ValueError("prod takes exactly two coordinate indices")

    def descriptor(self) -> str:
        return f"{self.kind}:{','.join(str(v) for v in self.params)}"

    @classmethod
    def parse(cls, text: str) -> "Feature":
        kind, _, rest = text.partition(":")
        if not rest:
            raise ValueError(f"malformed feature descriptor {text!r}")
        return cls(kind.strip(), tuple(int(v) for v in rest.split(",")))

    def _validate_for(self, state_dim: int) -> None:
        if self.kind == "monomial":
            if len(self.params) != state_dim:
                raise ValueError(
                    f"monomial exponent vector {self.params} does not match "
                    f"state dimension {state_dim}"
                )
            if any(e < 0 for e in self.params):
                raise ValueError(f"monomial exponents must be nonnegative: {self.params}")
            degree = sum(self.params)
            if degree < 2:
                raise ValueError(
                    f"monomial {self.params} duplicates the constant or a bare "
                    "linear coordinate"
                )
            if degree > _MAX_MONOMIAL_DEGREE:
                raise ValueError(
                    f"monomial total degree {degree} exceeds the cap "
                    f"{_MAX_MONOMIAL_DEGREE}"
                )
        else:
            if any(not 0 <= i < state_dim for i in self.params):
                raise ValueError(
                    f"feature {self.descriptor()} indexes outside state "
                    f"dimension {state_dim}"
                )

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        """Evaluate on states stacked row-wise, shape (T, n) -> (T,)."""
        if self.kind == "monomial":
            out = np.ones(X.shape[0])
            for i, e in enumerate(self.params):
                if e:
                    out = out * X[:, i] ** e
            return out
        if self.kind == "sin":
            return np.sin(X[:, self.params[0]])
        if self.kind == "cos":
            return np.cos(X[:, self.params[0]])
        if self.kind == "tanh":
            return np.tanh(X[:, self.params[0]])
        # prod
        i, j = self.params
        return X[:, i] * X[:, j]


@dataclass(frozen=True)
class Dictionary:
    """Ordered observable dictionary defining psi(x) = [1; x; phi(x)]."""

    state_dim: int
    features: tuple[Feature, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        if self.state_dim < 1:
            raise ValueError("state_dim must be positive")
        for f in self.features:
            f._validate_for(self.state_dim)

    @property
    def p_phi(self) -> int:
        return len(self.features)

    @property
    def p(self) -> int:
        return 1 + self.state_dim + len(self.features)

    def descriptors(self) -> list[str]:
        return [f.descriptor() for f in self.features]

    @classmethod
    def from_descriptors(cls, state_dim: int, descriptors: Iterable[str]) -> "Dictionary":
        return cls(state_dim, tuple(Feature.parse(d) for d in descriptors))

    def lift_trajectory(self, X: np.ndarray) -> np.ndarray:
        """Lift states stacked row-wise: (T, n) -> (T, p) with columns [1, x, phi(x)]."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.state_dim:
            raise ValueError(
                f"expected states of shape (T, {self.state_dim}), got {X.shape}"
            )
        Z = np.empty((X.shape[0], self.p))
        Z[:, 0] = 1.0
        Z[:, 1 : 1 + self.state_dim] = X
        with np.errstate(over="ignore", invalid="ignore"):
            for c, f in enumerate(self.features):
                Z[:, 1 + self.state_dim + c] = f.evaluate(X)
        if not np.all(np.isfinite(Z)):
            bad = np.flatnonzero(~np.isfinite(Z).all(axis=0))
            names = []
            for col in bad:
                idx = int(col) - 1 - self.state_dim
                names.append(self.features[idx].descriptor() if idx >= 0 else f"x_{col - 1}")
            raise FloatingPointError(
                f"non-finite lifted values from feature(s): {', '.join(names)}"
            )
        return Z

    def lift(self, x: np.ndarray) -> np.ndarray:
        """Lift a single state vector of length n to the vector psi(x) of length p."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.state_dim,):
            raise ValueError(f"expected a state of shape ({self.state_dim},), got {x.shape}")
        return self.lift_trajectory(x[None, :])[0]


def lift(x: np.ndarray, dict_: Dictionary) -> np.ndarray:
    """Functional form of :meth:`Dictionary.lift`."""
    return dict_.lift(x)


def readout(z: np.ndarray, state_dim: int) -> np.ndarray:
    """Exact linear readout: the state block of a lifted vector (or of rows of a matrix)."""
    z = np.asarray(z)
    return z[..., 1 : 1 + state_dim]


def readout_matrix(dict_: Dictionary) -> np.ndarray:
    """The readout as an explicit n-by-p block matrix [0 | I_n | 0]."""
    C = np.zeros((dict_.state_dim, dict_.p))
    C[:, 1 : 1 + dict_.state_dim] = np.eye(dict_.state_dim)
    return C


def default_dictionary() -> Dictionary:
    """Benchmark dictionary for the 2-D hereditary system (p = 9)."""
    return Dictionary(
        state_dim=2,
        features=(
            Feature("sin", (1,)),
            Feature("cos", (0,)),
            Feature("monomial", (2, 0)),
            Feature("tanh", (0,)),
            Feature("prod", (0, 1)),
            Feature("monomial", (0, 2)),
        ),
    )


def affine_dictionary(state_dim: int) -> Dictionary:
    """Feature-free dictionary [1; x], used by the non-lifted baselines."""
    return Dictionary(state_dim=state_dim, features=())
