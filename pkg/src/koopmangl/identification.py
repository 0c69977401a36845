"""Memory-compensated least-squares identification of lifted linear predictors.

For each trajectory the targets move the known GL convolution to the left-hand
side, y_k = z_(k+1) + sum_{j=1..N} w_j z_(k+1-j), so the unknown lifted
transition and input matrices enter linearly:

    Y = Theta * Omega,   Omega = [Z; U],   Theta = [A_bar  B_bar].

The solver uses an SVD-based least-squares factorization (optionally ridge
regularized), never the normal equations.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from .errors import InsufficientHistoryError, RankDeficiencyError
from .gl_kernel import GLKernel, gl_weights
from .hereditary import Dataset, Trajectory
from .lifting import Dictionary

__all__ = [
    "RegressionData",
    "FitReport",
    "KoopmanGLModel",
    "build_targets",
    "assemble",
    "assemble_lifted",
    "solve_ls",
    "identify",
    "error_bound",
    "save_model",
    "load_model",
]

_RANK_RTOL = 1e-10


def build_targets(lifted: np.ndarray, kernel: GLKernel) -> tuple[np.ndarray, np.ndarray]:
    """Memory-compensated targets for one lifted trajectory.

    Returns ``(ks, Y)`` where ``Y[i]`` is the target for time index ``ks[i]``;
    indices run from max(N - 1, 0) through T - 1 and never reach across the
    trajectory boundary (the first N samples serve only as history).
    """
    Z = np.asarray(lifted, dtype=np.float64)
    if Z.ndim != 2:
        raise ValueError(f"lifted trajectory must be 2-D, got shape {Z.shape}")
    N = kernel.n_mem
    if len(Z) < max(N + 1, 2):
        raise InsufficientHistoryError(
            f"lifted trajectory of length {len(Z)} is too short for memory length {N}"
        )
    w = kernel.weights
    # y_(s-1) = sum_{j=0..N} w_j z_(s-j) for s = max(N, 1)..T
    s_start = max(N, 1)
    windows = np.lib.stride_tricks.sliding_window_view(Z, N + 1, axis=0)
    wrev = w[::-1]  # w_N..w_0 aligns with the oldest-first window
    targets = windows[s_start - N :] @ wrev
    ks = np.arange(s_start - 1, len(Z) - 1)
    return ks, targets


@dataclass
class RegressionData:
    """Stacked regression matrices plus excitation diagnostics."""

    Y: np.ndarray  # (p, K) memory-compensated targets
    Omega: np.ndarray  # (p + m, K) stacked [Z; U]
    n_samples: int  # K
    mu: float  # smallest eigenvalue of Omega Omega^T
    sigma_max: float
    index_map: list[tuple[int, int]]  # column -> (trajectory index, time index k)
    underdetermined: bool = False


def assemble_lifted(
    lifted: list[np.ndarray],
    inputs: list[np.ndarray],
    kernel: GLKernel,
) -> RegressionData:
    """Assemble regression data from already-lifted trajectories.

    ``lifted[i]`` has shape (T_i + 1, p) and ``inputs[i]`` shape (T_i, m);
    columns are concatenated in trajectory order, then by time index.
    """
    if len(lifted) != len(inputs):
        raise ValueError("need one input sequence per lifted trajectory")
    Y_rows, Z_rows, U_rows, index_map = [], [], [], []
    skipped = 0
    for ti, (Z, U) in enumerate(zip(lifted, inputs)):
        U = np.atleast_2d(np.asarray(U, dtype=np.float64).T).T
        try:
            ks, targets = build_targets(Z, kernel)
        except InsufficientHistoryError:
            skipped += 1
            continue
        Y_rows.append(targets)
        Z_rows.append(Z[ks])
        U_rows.append(U[ks])
        index_map.extend((ti, int(k)) for k in ks)
    if not Y_rows:
        raise InsufficientHistoryError(
            f"no trajectory is long enough for memory length {kernel.n_mem} "
            f"({skipped} skipped)"
        )
    Y = np.concatenate(Y_rows).T
    Omega = np.concatenate([np.concatenate(Z_rows).T, np.concatenate(U_rows).T])
    K = Y.shape[1]
    sigmas = scipy.linalg.svdvals(Omega)
    underdetermined = K < Omega.shape[0]
    if underdetermined:
        warnings.warn(
            f"only {K} regression columns for {Omega.shape[0]} unknowns per row; "
            "the problem is rank deficient (consider ridge > 0)",
            stacklevel=2,
        )
    return RegressionData(
        Y=Y,
        Omega=Omega,
        n_samples=K,
        mu=float(sigmas[-1] ** 2),
        sigma_max=float(sigmas[0]),
        index_map=index_map,
        underdetermined=underdetermined,
    )


def assemble(
    trajectories: list[Trajectory],
    dict_: Dictionary,
    kernel: GLKernel,
) -> RegressionData:
    """Lift measured states and assemble the stacked regression matrices."""
    lifted = [dict_.lift_trajectory(t.states) for t in trajectories]
    inputs = [t.inputs for t in trajectories]
    return assemble_lifted(lifted, inputs, kernel)


def solve_ls(data: RegressionData, ridge: float = 0.0) -> tuple[np.ndarray, float]:
    """Least-squares estimate of Theta = [A_bar B_bar] and its residual norm.

    Minimizes ||Y - Theta Omega||_F^2 (+ ridge ||Theta||_F^2) through an
    SVD-based factorization of Omega^T.  With ridge = 0 a numerically rank
    deficient Omega raises :class:`RankDeficiencyError`.
    """
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")
    if ridge == 0.0:
        if data.sigma_max == 0.0 or data.mu <= (_RANK_RTOL * data.sigma_max) ** 2:
            raise RankDeficiencyError(
                "regressor matrix is numerically rank deficient "
                f"(sigma_min/sigma_max = {np.sqrt(data.mu) / max(data.sigma_max, 1e-300):.3e}); "
                "re-run with ridge > 0"
            )
        theta_t, *_ = scipy.linalg.lstsq(data.Omega.T, data.Y.T, lapack_driver="gelsd")
    else:
        q = data.Omega.shape[0]
        lhs = np.vstack([data.Omega.T, np.sqrt(ridge) * np.eye(q)])
        rhs = np.vstack([data.Y.T, np.zeros((q, data.Y.shape[0]))])
        theta_t, *_ = scipy.linalg.lstsq(lhs, rhs, lapack_driver="gelsd")
    theta = theta_t.T
    residual = float(np.linalg.norm(data.Y - theta @ data.Omega))
    return theta, residual


def error_bound(d_norm: float, mu: float) -> float:
    """Identification error bound ||D||_F / sqrt(mu)."""
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    return float(d_norm) / float(np.sqrt(mu))


@dataclass
class FitReport:
    """Diagnostics recorded by :func:`identify`."""

    residual_fro: float
    mu: float
    ridge: float
    n_samples: int
    data_hash: str

    def theta_error_bound(self) -> float:
        """||D||_F / sqrt(mu) with the empirical residual standing in for ||D||_F."""
        return error_bound(self.residual_fro, self.mu)


@dataclass
class KoopmanGLModel:
    """Identified finite-memory lifted predictor (A_bar, B_bar, kernel, dictionary)."""

    A_bar: np.ndarray
    B_bar: np.ndarray
    kernel: GLKernel
    dict: Dictionary
    fit_report: FitReport | None = None

    def __post_init__(self):
        self.A_bar = np.ascontiguousarray(self.A_bar, dtype=np.float64)
        self.B_bar = np.ascontiguousarray(self.B_bar, dtype=np.float64)
        p = self.dict.p
        if self.A_bar.shape != (p, p):
            raise ValueError(f"A_bar must be {p}x{p}, got {self.A_bar.shape}")
        if self.B_bar.ndim != 2 or self.B_bar.shape[0] != p:
            raise ValueError(f"B_bar must have {p} rows, got {self.B_bar.shape}")

    @property
    def n(self) -> int:
        return self.dict.state_dim

    @property
    def m(self) -> int:
        return self.B_bar.shape[1]

    @property
    def p(self) -> int:
        return self.dict.p

    @property
    def n_mem(self) -> int:
        return self.kernel.n_mem


def identify(
    dataset: Dataset,
    dict_: Dictionary,
    alpha: float,
    n_mem: int,
    ridge: float = 0.0,
) -> KoopmanGLModel:
    """Identify a model from the training split.

    ``n_mem = 0`` yields the memoryless (Markov) baseline regression; the
    affine dictionary plus ``n_mem = 0`` is the plain linear state-space
    baseline.
    """
    kernel = GLKernel.markov() if n_mem == 0 else gl_weights(alpha, n_mem)
    data = assemble(dataset.train, dict_, kernel)
    theta, residual = solve_ls(data, ridge)
    p = dict_.p
    report = FitReport(
        residual_fro=residual,
        mu=data.mu,
        ridge=float(ridge),
        n_samples=data.n_samples,
        data_hash=dataset.manifest_hash(),
    )
    return KoopmanGLModel(
        A_bar=theta[:, :p],
        B_bar=theta[:, p:],
        kernel=kernel,
        dict=dict_,
        fit_report=report,
    )


# ---------------------------------------------------------------------------
# Model persistence: JSON with matrix blocks written row-major at 17
# significant digits.  Reload reproduces predictions bitwise on the same
# platform.
# ---------------------------------------------------------------------------

_MODEL_FORMAT = "koopmangl-model/1"


def _encode_matrix(M: np.ndarray) -> dict:
    return {
        "rows": int(M.shape[0]),
        "cols": int(M.shape[1]),
        "data": " ".join(f"{v:.17g}" for v in M.ravel(order="C")),
    }


def _decode_matrix(block: dict) -> np.ndarray:
    data = np.array([float(v) for v in block["data"].split()])
    return data.reshape(block["rows"], block["cols"])


def save_model(model: KoopmanGLModel, path: str | Path) -> Path:
    path = Path(path)
    doc = {
        "format": _MODEL_FORMAT,
        "n": model.n,
        "m": model.m,
        "p": model.p,
        "dictionary": {
            "state_dim": model.dict.state_dim,
            "features": model.dict.descriptors(),
        },
        "alpha": model.kernel.alpha,
        "n_mem": model.kernel.n_mem,
        "weights": " ".join(f"{v:.17g}" for v in model.kernel.weights),
        "A_bar": _encode_matrix(model.A_bar),
        "B_bar": _encode_matrix(model.B_bar),
        "fit_report": None
        if model.fit_report is None
        else {
            "residual_fro": model.fit_report.residual_fro,
            "mu": model.fit_report.mu,
            "ridge": model.fit_report.ridge,
            "n_samples": model.fit_report.n_samples,
            "data_hash": model.fit_report.data_hash,
        },
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def load_model(path: str | Path) -> KoopmanGLModel:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != _MODEL_FORMAT:
        raise ValueError(f"unrecognized model format in {path}")
    dict_ = Dictionary.from_descriptors(
        doc["dictionary"]["state_dim"], doc["dictionary"]["features"]
    )
    weights = np.array([float(v) for v in doc["weights"].split()])
    kernel = GLKernel(alpha=doc["alpha"], n_mem=doc["n_mem"], weights=weights)
    rep = doc.get("fit_report")
    report = None if rep is None else FitReport(**rep)
    return KoopmanGLModel(
        A_bar=_decode_matrix(doc["A_bar"]),
        B_bar=_decode_matrix(doc["B_bar"]),
        kernel=kernel,
        dict=dict_,
        fit_report=report,
    )
