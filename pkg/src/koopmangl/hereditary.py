"""Ground-truth data generation for the 2-D nonlinear hereditary benchmark.

The truth model is a two-state nonlinear map driven by a scalar input, with a
Prony-series memory kernel acting on tanh of the first coordinate:

    x1+ = 0.90 x1 + 0.10 sin(x2) + 0.10 u + sum_j h_j tanh(x1 at lag j)
    x2+ = 0.85 x2 + 0.08 cos(x1) + 0.05 x1^2 + 0.05 u

Measurements are the clean states plus i.i.d. Gaussian noise.  All randomness
flows through numpy's counter-based Philox generator with explicit per-
trajectory, per-purpose substreams, so any trajectory is reproducible in
isolation.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import SimulationBlowupError

__all__ = [
    "BenchmarkConfig",
    "Trajectory",
    "Dataset",
    "prony_kernel",
    "truth_step",
    "generate_prbs",
    "simulate",
    "generate_dataset",
    "save_dataset",
    "load_dataset",
]

GENERATOR_NAME = "philox4x64"

# substream purpose tags (third SeedSequence entropy word)
_PURPOSE_INIT = 0
_PURPOSE_PRBS = 1
_PURPOSE_NOISE = 2

_STATE_DIM = 2
_INPUT_DIM = 1


def substream(seed: int, traj_index: int, purpose: int) -> np.random.Generator:
    """Philox generator keyed by (root seed, trajectory index, purpose tag)."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence([int(seed), int(traj_index), int(purpose)]))
    )


@dataclass(frozen=True)
class BenchmarkConfig:
    """Parameters of the benchmark truth model and its excitation."""

    j_ref: int = 400
    prony_a: tuple[float, float] = (25e-5, 7.5e-5)
    prony_rho: tuple[float, float] = (0.995, 0.97)
    noise_std: float = 1e-3
    prbs_amplitude: float = 1.0
    prbs_hold: int = 10
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "prony_a", tuple(float(a) for a in self.prony_a))
        object.__setattr__(self, "prony_rho", tuple(float(r) for r in self.prony_rho))
        if self.j_ref < 1:
            raise ValueError("j_ref must be at least 1")
        if not all(0.0 < r < 1.0 for r in self.prony_rho):
            raise ValueError(f"prony decay rates must lie in (0, 1), got {self.prony_rho}")
        if self.noise_std < 0:
            raise ValueError("noise_std must be nonnegative")
        if self.prbs_amplitude < 0:
            raise ValueError("prbs_amplitude must be nonnegative")
        if self.prbs_hold < 1:
            raise ValueError("prbs_hold must be a positive integer")


@dataclass
class Trajectory:
    """Measured states, the noise-free states kept for diagnostics, and inputs."""

    states: np.ndarray  # (T+1, n) noisy measurements
    clean_states: np.ndarray  # (T+1, n)
    inputs: np.ndarray  # (T, m)

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=np.float64)
        self.clean_states = np.asarray(self.clean_states, dtype=np.float64)
        self.inputs = np.asarray(self.inputs, dtype=np.float64)
        if self.inputs.ndim == 1:
            self.inputs = self.inputs[:, None]
        if self.states.shape != self.clean_states.shape:
            raise ValueError("states and clean_states must have equal shape")
        if len(self.states) != len(self.inputs) + 1:
            raise ValueError(
                f"need T+1 states for T inputs, got {len(self.states)} states "
                f"and {len(self.inputs)} inputs"
            )
        if not (np.all(np.isfinite(self.states)) and np.all(np.isfinite(self.inputs))):
            raise ValueError("trajectory entries must be finite")

    @property
    def length(self) -> int:
        """Number of transitions T."""
        return len(self.inputs)

    @property
    def state_dim(self) -> int:
        return self.states.shape[1]

    @property
    def input_dim(self) -> int:
        return self.inputs.shape[1]


@dataclass
class Dataset:
    """Disjoint train/validation/test trajectory partitions plus provenance."""

    train: list[Trajectory]
    validation: list[Trajectory]
    test: list[Trajectory]
    config: BenchmarkConfig
    traj_len: int = 0
    split_fractions: tuple[float, float, float] = (0.6, 0.2, 0.2)

    def __post_init__(self):
        if not (self.train and self.validation and self.test):
            raise ValueError("each split must contain at least one trajectory")

    @property
    def n_traj(self) -> int:
        return len(self.train) + len(self.validation) + len(self.test)

    def split(self, name: str) -> list[Trajectory]:
        try:
            return {"train": self.train, "validation": self.validation, "test": self.test}[name]
        except KeyError:
            raise ValueError(f"unknown split {name!r}") from None

    def manifest(self) -> dict:
        """Canonical provenance record; identical in memory and on disk."""
        splits = [
            ("train", len(self.train)),
            ("validation", len(self.validation)),
            ("test", len(self.test)),
        ]
        trajectories = []
        index = 0
        for split_name, count in splits:
            for _ in range(count):
                trajectories.append(
                    {
                        "index": index,
                        "split": split_name,
                        "file": f"traj_{index:03d}.csv",
                        "seed_key": [self.config.seed, index],
                    }
                )
                index += 1
        return {
            "format": "koopmangl-dataset/1",
            "generator": GENERATOR_NAME,
            "config": asdict(self.config),
            "n_traj": self.n_traj,
            "traj_len": self.traj_len,
            "split_fractions": list(self.split_fractions),
            "trajectories": trajectories,
        }

    def manifest_hash(self) -> str:
        canon = json.dumps(self.manifest(), sort_keys=True, separators=(",", ":"))
        return "sha256:" + hashlib.sha256(canon.encode()).hexdigest()


def prony_kernel(config: BenchmarkConfig) -> np.ndarray:
    """Memory kernel h_j = a1 rho1^j + a2 rho2^j for j = 1..j_ref."""
    j = np.arange(1, config.j_ref + 1, dtype=np.float64)
    a1, a2 = config.prony_a
    r1, r2 = config.prony_rho
    return a1 * r1**j + a2 * r2**j


def truth_step(
    history: np.ndarray,
    u: float | np.ndarray,
    kernel: np.ndarray,
    noise: np.ndarray | None = None,
) -> np.ndarray:
    """One step of the truth map from ``history`` (recent states, newest first).

    Reference implementation used as the correctness oracle for the fast
    simulation kernels; the convolution sums over min(len(history), len(kernel))
    lags.
    """
    history = np.atleast_2d(np.asarray(history, dtype=np.float64))
    if history.shape[0] < 1 or history.shape[1] != _STATE_DIM:
        raise ValueError(f"history must be a nonempty sequence of 2-vectors, got {history.shape}")
    u = float(np.asarray(u).reshape(()) if np.ndim(u) == 0 else np.asarray(u).reshape(-1)[0])
    x1, x2 = history[0]
    L = min(history.shape[0], len(kernel))
    mem = 0.0
    for j in range(1, L + 1):
        mem += kernel[j - 1] * math.tanh(history[j - 1, 0])
    n1 = 0.90 * x1 + 0.10 * math.sin(x2) + 0.10 * u + mem
    n2 = 0.85 * x2 + 0.08 * math.cos(x1) + 0.05 * x1 * x1 + 0.05 * u
    out = np.array([n1, n2])
    if noise is not None:
        out = out + np.asarray(noise, dtype=np.float64)
    if not np.all(np.isfinite(out)):
        raise SimulationBlowupError(0)
    return out


def generate_prbs(length: int, config: BenchmarkConfig, stream: np.random.Generator) -> np.ndarray:
    """Piecewise-constant two-level input: levels +/- amplitude, switching with
    probability 1/2 at every hold boundary."""
    length = int(length)
    if length < 1:
        raise ValueError("length must be at least 1")
    n_blocks = -(-length // config.prbs_hold)
    draws = stream.integers(0, 2, size=n_blocks)
    signs = np.empty(n_blocks)
    signs[0] = 1.0 if draws[0] else -1.0
    if n_blocks > 1:
        # draw = 1 means switch at that boundary
        signs[1:] = signs[0] * np.cumprod(1.0 - 2.0 * draws[1:])
    return (config.prbs_amplitude * np.repeat(signs, config.prbs_hold))[:length]


def simulate(
    config: BenchmarkConfig,
    x0: np.ndarray,
    inputs: np.ndarray,
    stream: np.random.Generator,
) -> Trajectory:
    """Roll the truth model under ``inputs`` and attach measurement noise.

    The noise stream is consumed identically for every ``noise_std`` (standard
    normals scaled afterwards), so clean states never depend on the noise
    level.
    """
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    if x0.shape != (_STATE_DIM,) or not np.all(np.isfinite(x0)):
        raise ValueError(f"x0 must be a finite 2-vector, got {x0!r}")
    u = np.ascontiguousarray(np.asarray(inputs, dtype=np.float64).reshape(-1))
    kernel = np.ascontiguousarray(prony_kernel(config))
    zeros = np.zeros((len(u), _STATE_DIM))
    clean, bad = _kernels.simulate_hereditary_2d(x0, u, kernel, zeros)
    if bad >= 0:
        raise SimulationBlowupError(bad)
    draws = stream.standard_normal(clean.shape)
    states = clean + config.noise_std * draws
    return Trajectory(states=states, clean_states=clean, inputs=u[:, None])


def _split_counts(n_traj: int, fractions: tuple[float, float, float]) -> tuple[int, int, int]:
    if len(fractions) != 3 or any(f <= 0 for f in fractions):
        raise ValueError(f"split must be three positive fractions, got {fractions}")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError(f"split fractions must sum to 1, got {fractions}")
    n_train = int(round(fractions[0] * n_traj))
    n_val = int(round(fractions[1] * n_traj))
    n_test = n_traj - n_train - n_val
    if min(n_train, n_val, n_test) < 1:
        raise ValueError(
            f"split {fractions} of {n_traj} trajectories leaves an empty partition"
        )
    return n_train, n_val, n_test


def generate_dataset(
    config: BenchmarkConfig,
    n_traj: int = 60,
    traj_len: int = 600,
    split: tuple[float, float, float] = (0.6, 0.2, 0.2),
) -> Dataset:
    """Simulate ``n_traj`` trajectories and partition them into disjoint splits.

    Initial conditions are uniform on [-1, 1]^2; every trajectory derives its
    own init/input/noise substreams from ``config.seed``.
    """
    if n_traj < 3:
        raise ValueError("n_traj must be at least 3 (one trajectory per split)")
    if traj_len < 1:
        raise ValueError("traj_len must be positive")
    counts = _split_counts(n_traj, tuple(float(f) for f in split))
    trajectories = []
    for i in range(n_traj):
        x0 = substream(config.seed, i, _PURPOSE_INIT).uniform(-1.0, 1.0, size=_STATE_DIM)
        u = generate_prbs(traj_len, config, substream(config.seed, i, _PURPOSE_PRBS))
        trajectories.append(simulate(config, x0, u, substream(config.seed, i, _PURPOSE_NOISE)))
    n_train, n_val, _ = counts
    return Dataset(
        train=trajectories[:n_train],
        validation=trajectories[n_train : n_train + n_val],
        test=trajectories[n_train + n_val :],
        config=config,
        traj_len=traj_len,
        split_fractions=tuple(float(f) for f in split),
    )


# ---------------------------------------------------------------------------
# On-disk dataset format: manifest.json + one delimited-text file per
# trajectory with header k, u_1..u_m, x_1..x_n, xclean_1..xclean_n.  The final
# row has empty input fields (T inputs for T+1 states).
# ---------------------------------------------------------------------------


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _write_trajectory_csv(path: Path, traj: Trajectory) -> None:
    n, m = traj.state_dim, traj.input_dim
    header = (
        ["k"]
        + [f"u_{i + 1}" for i in range(m)]
        + [f"x_{i + 1}" for i in range(n)]
        + [f"xclean_{i + 1}" for i in range(n)]
    )
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for k in range(traj.length + 1):
            u_cells = [_fmt(v) for v in traj.inputs[k]] if k < traj.length else [""] * m
            writer.writerow(
                [str(k)]
                + u_cells
                + [_fmt(v) for v in traj.states[k]]
                + [_fmt(v) for v in traj.clean_states[k]]
            )


def _read_trajectory_csv(path: Path) -> Trajectory:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    m = sum(1 for c in header if c.startswith("u_"))
    n = sum(1 for c in header if c.startswith("x_"))
    body = rows[1:]
    T = len(body) - 1
    inputs = np.empty((T, m))
    states = np.empty((T + 1, n))
    clean = np.empty((T + 1, n))
    for k, row in enumerate(body):
        vals = row[1:]
        if k < T:
            inputs[k] = [float(v) for v in vals[:m]]
        states[k] = [float(v) for v in vals[m : m + n]]
        clean[k] = [float(v) for v in vals[m + n : m + 2 * n]]
    return Trajectory(states=states, clean_states=clean, inputs=inputs)


def save_dataset(dataset: Dataset, path: str | Path) -> Path:
    """Write the dataset directory (manifest + per-trajectory files)."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    manifest = dataset.manifest()
    all_traj = dataset.train + dataset.validation + dataset.test
    for entry, traj in zip(manifest["trajectories"], all_traj):
        _write_trajectory_csv(path / entry["file"], traj)
    with open(path / "manifest.json", "w", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def load_dataset(path: str | Path) -> Dataset:
    """Load a dataset directory written by :func:`save_dataset`."""
    path = Path(path)
    with open(path / "manifest.json") as fh:
        manifest = json.load(fh)
    if manifest.get("format") != "koopmangl-dataset/1":
        raise ValueError(f"unrecognized dataset format in {path / 'manifest.json'}")
    cfg = manifest["config"]
    config = BenchmarkConfig(
        j_ref=cfg["j_ref"],
        prony_a=tuple(cfg["prony_a"]),
        prony_rho=tuple(cfg["prony_rho"]),
        noise_std=cfg["noise_std"],
        prbs_amplitude=cfg["prbs_amplitude"],
        prbs_hold=cfg["prbs_hold"],
        seed=cfg["seed"],
    )
    splits: dict[str, list[Trajectory]] = {"train": [], "validation": [], "test": []}
    for entry in manifest["trajectories"]:
        splits[entry["split"]].append(_read_trajectory_csv(path / entry["file"]))
    return Dataset(
        train=splits["train"],
        validation=splits["validation"],
        test=splits["test"],
        config=config,
        traj_len=manifest["traj_len"],
        split_fractions=tuple(manifest["split_fractions"]),
    )
