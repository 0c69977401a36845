"""Grid search over (N, alpha) and the four-model comparison.

Model selection minimizes the mean open-loop rollout NRMSE over validation
trajectories; ties break toward smaller memory length, then smaller alpha.
Grid cells are independent and may be evaluated by a thread pool; results are
merged in grid order, so the outcome never depends on the worker count.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientHistoryError, RankDeficiencyError
from .hereditary import Dataset, Trajectory
from .identification import KoopmanGLModel, identify
from .lifting import Dictionary, affine_dictionary
from .prediction import evaluate_rollout, one_step

__all__ = [
    "GridCell",
    "GridResult",
    "MethodResult",
    "ComparisonResult",
    "grid_search",
    "compare_baselines",
    "METHOD_NAMES",
]

METHOD_NAMES = ("Koopman-GL", "Koopman-Markov", "State-GL", "State-Markov")


@dataclass(frozen=True)
class GridCell:
    n_mem: int
    alpha: float
    rollout_nrmse: float
    onestep_nrmse: float
    diverged: bool
    feasible: bool = True


@dataclass
class GridResult:
    grid: list[GridCell]
    best: tuple[int, float]  # (n_mem, alpha)
    settings: dict


def _dict_hash(dict_: Dictionary) -> str:
    canon = f"{dict_.state_dim}|" + ";".join(dict_.descriptors())
    return "sha256:" + hashlib.sha256(canon.encode()).hexdigest()


def _mean_scores(
    model: KoopmanGLModel, trajectories: list[Trajectory], horizon: int
) -> tuple[float, float, bool]:
    """(mean rollout NRMSE, mean one-step NRMSE, any-diverged) over a split."""
    roll, ones, diverged = [], [], False
    for traj in trajectories:
        res = evaluate_rollout(model, traj, horizon)
        roll.append(res.nrmse)
        diverged = diverged or res.diverged
        ones.append(one_step(model, traj).nrmse)
    return float(np.mean(roll)), float(np.mean(ones)), diverged


def _evaluate_cell(
    dataset: Dataset,
    dict_: Dictionary,
    n_mem: int,
    alpha: float,
    ridge: float,
    horizon: int,
) -> GridCell:
    prefix = max(n_mem, 1)
    if n_mem > min(t.length for t in dataset.train) or prefix - 1 + horizon > min(
        t.length for t in dataset.validation
    ):
        return GridCell(n_mem, alpha, float("inf"), float("inf"), False, feasible=False)
    try:
        model = identify(dataset, dict_, alpha, n_mem, ridge)
    except (InsufficientHistoryError, RankDeficiencyError):
        return GridCell(n_mem, alpha, float("inf"), float("inf"), False, feasible=False)
    roll, ones, diverged = _mean_scores(model, dataset.validation, horizon)
    return GridCell(n_mem, alpha, roll, ones, diverged)


def grid_search(
    dataset: Dataset,
    dict_: Dictionary,
    n_grid: list[int],
    alpha_grid: list[float],
    ridge: float = 0.0,
    horizon: int = 100,
    max_workers: int | None = None,
) -> GridResult:
    """Identify and score every (N, alpha) cell on the validation split."""
    if not n_grid or not alpha_grid:
        raise ValueError("n_grid and alpha_grid must be nonempty")
    cells_spec = [(int(n), float(a)) for n in n_grid for a in alpha_grid]

    def run(spec: tuple[int, float]) -> GridCell:
        return _evaluate_cell(dataset, dict_, spec[0], spec[1], ridge, horizon)

    if max_workers is None or max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            grid = list(pool.map(run, cells_spec))
    else:
        grid = [run(s) for s in cells_spec]

    scored = [c for c in grid if c.feasible and np.isfinite(c.rollout_nrmse)]
    if not scored:
        raise RuntimeError("every grid cell is infeasible or diverged")
    best = min(scored, key=lambda c: (c.rollout_nrmse, c.n_mem, c.alpha))
    return GridResult(
        grid=grid,
        best=(best.n_mem, best.alpha),
        settings={
            "ridge": float(ridge),
            "horizon": int(horizon),
            "dictionary_hash": _dict_hash(dict_),
            "n_grid": [int(n) for n in n_grid],
            "alpha_grid": [float(a) for a in alpha_grid],
        },
    )


@dataclass
class MethodResult:
    name: str
    onestep_nrmse: float  # mean over test trajectories
    rollout_nrmse: float
    per_traj_rollout: list[float]
    per_traj_onestep: list[float]
    model: KoopmanGLModel


@dataclass
class ComparisonResult:
    methods: list[MethodResult]
    horizon: int
    best: tuple[int, float]

    def summary_rows(self) -> list[tuple[str, float, float]]:
        return [(m.name, m.onestep_nrmse, m.rollout_nrmse) for m in self.methods]


def baseline_models(
    dataset: Dataset,
    dict_: Dictionary,
    best: tuple[int, float],
    ridge: float = 0.0,
) -> dict[str, KoopmanGLModel]:
    """Fit the selected model and its three baselines on the training split."""
    n_mem, alpha = int(best[0]), float(best[1])
    n = dict_.state_dim
    affine = affine_dictionary(n)
    return {
        "Koopman-GL": identify(dataset, dict_, alpha, n_mem, ridge),
        "Koopman-Markov": identify(dataset, dict_, 0.0, 0, ridge),
        "State-GL": identify(dataset, affine, alpha, n_mem, ridge),
        "State-Markov": identify(dataset, affine, 0.0, 0, ridge),
    }


def compare_baselines(
    dataset: Dataset,
    dict_: Dictionary,
    best: tuple[int, float],
    ridge: float = 0.0,
    horizon: int = 100,
    max_workers: int | None = None,
) -> ComparisonResult:
    """Evaluate all four methods on the test split (one-step and rollout NRMSE).

    The state-space baselines reuse the selected (N, alpha) with the affine
    dictionary, isolating the effect of lifting.
    """
    models = baseline_models(dataset, dict_, best, ridge)

    def run(name: str) -> MethodResult:
        model = models[name]
        per_roll, per_one = [], []
        for traj in dataset.test:
            per_roll.append(evaluate_rollout(model, traj, horizon).nrmse)
            per_one.append(one_step(model, traj).nrmse)
        return MethodResult(
            name=name,
            onestep_nrmse=float(np.mean(per_one)),
            rollout_nrmse=float(np.mean(per_roll)),
            per_traj_rollout=per_roll,
            per_traj_onestep=per_one,
            model=model,
        )

    if max_workers is None or max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            methods = list(pool.map(run, METHOD_NAMES))
    else:
        methods = [run(n) for n in METHOD_NAMES]
    return ComparisonResult(methods=methods, horizon=int(horizon), best=(int(best[0]), float(best[1])))
